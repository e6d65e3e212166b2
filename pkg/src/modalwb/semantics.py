"""Finite Kripke models, satisfaction, and exhaustive small-model search.

Two evaluators live here and are kept independent on purpose:

* :func:`extension` walks one concrete :class:`KripkeModel`;
* the enumeration routines (:func:`valid_up_to`, :func:`consequence_check`)
  evaluate a formula on *every* valuation of a frame at once, storing for
  each world an integer whose bit ``v`` is the truth value under valuation
  number ``v``.

The test-suite cross-checks the two.
"""

from __future__ import annotations

import enum
import functools
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

from .formula import Box, Convention, Dia, Formula, Impl, Neg, Var, variables


class ModelError(ValueError):
    pass


class UnknownWorld(KeyError):
    pass


class ResourceLimit(RuntimeError):
    pass


class Semantics(enum.Enum):
    STANDARD = "standard"
    NONSTANDARD = "nonstandard"


class FrameClass(enum.Enum):
    ALL = "all"
    EUCLIDEAN = "euclidean"
    TRANSITIVE_IRREFLEXIVE = "ti"

    @classmethod
    def parse(cls, text: str) -> "FrameClass":
        aliases = {"transitive-irreflexive": "ti", "kl": "ti", "k5": "euclidean"}
        return cls(aliases.get(text.lower(), text.lower()))


@dataclass(frozen=True)
class Budget:
    """Ceilings for exhaustive enumeration."""

    max_worlds: int = 4
    max_vars: int = 4
    max_models: int = 10**8

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "Budget":
        """Read ``MODAL_BUDGET``: either an integer (model ceiling) or
        comma-separated ``key=value`` pairs naming the fields."""
        env = os.environ if env is None else env
        raw = env.get("MODAL_BUDGET", "").strip()
        if not raw:
            return cls()
        if "=" not in raw:
            return cls(max_models=int(float(raw)))
        kwargs = {}
        for part in raw.split(","):
            key, _, value = part.partition("=")
            key = key.strip()
            if key not in ("max_worlds", "max_vars", "max_models"):
                raise ValueError(f"unknown MODAL_BUDGET key {key!r}")
            kwargs[key] = int(float(value))
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# models


@dataclass(frozen=True, eq=False)
class KripkeModel:
    worlds: tuple[str, ...]
    rel: frozenset[tuple[str, str]]
    val: Mapping[str, frozenset[str]]
    _succ: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        worlds = tuple(self.worlds)
        if not worlds:
            raise ModelError("a model needs at least one world")
        if len(set(worlds)) != len(worlds):
            raise ModelError("duplicate world names")
        ws = set(worlds)
        rel = frozenset((a, b) for a, b in self.rel)
        for a, b in rel:
            if a not in ws or b not in ws:
                raise ModelError(f"relation pair ({a}, {b}) mentions an unknown world")
        val = {}
        for name, ext in self.val.items():
            ext = frozenset(ext)
            if not ext <= ws:
                raise ModelError(f"valuation of {name} mentions an unknown world")
            val[name] = ext
        succ = {w: tuple(u for u in worlds if (w, u) in rel) for w in worlds}
        object.__setattr__(self, "worlds", worlds)
        object.__setattr__(self, "rel", rel)
        object.__setattr__(self, "val", val)
        object.__setattr__(self, "_succ", succ)

    def successors(self, w: str) -> tuple[str, ...]:
        try:
            return self._succ[w]
        except KeyError:
            raise UnknownWorld(w) from None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KripkeModel):
            return NotImplemented
        return (
            set(self.worlds) == set(other.worlds)
            and self.rel == other.rel
            and {k: v for k, v in self.val.items() if v} == {k: v for k, v in other.val.items() if v}
        )

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> dict:
        return {
            "worlds": list(self.worlds),
            "rel": [[a, b] for a in self.worlds for b in self._succ[a]],
            "val": {name: [w for w in self.worlds if w in ext] for name, ext in sorted(self.val.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KripkeModel":
        try:
            worlds = data["worlds"]
            pairs = data.get("rel", [])
            val = data.get("val", {})
        except (KeyError, TypeError, AttributeError) as exc:
            raise ModelError(f"malformed model: {exc}") from None
        if not all(isinstance(w, str) for w in worlds):
            raise ModelError("world names must be strings")
        seen = set()
        for pair in pairs:
            if len(pair) != 2:
                raise ModelError(f"relation entries must be pairs, got {pair!r}")
            key = tuple(pair)
            if key in seen:
                raise ModelError(f"duplicate relation pair {list(pair)!r}")
            seen.add(key)
        return cls(tuple(worlds), frozenset(seen), {k: frozenset(v) for k, v in val.items()})


def load_model(path: str | Path) -> KripkeModel:
    with open(path, encoding="utf-8") as fh:
        return KripkeModel.from_json(json.load(fh))


def dump_model(model: KripkeModel, extra: Mapping | None = None) -> str:
    data = model.to_json()
    if extra:
        data.update(extra)
    return json.dumps(data, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# satisfaction on a single model


def extension(
    model: KripkeModel,
    f: Formula,
    semantics: Semantics = Semantics.STANDARD,
    _memo: dict | None = None,
) -> frozenset[str]:
    """The set of worlds of ``model`` where ``f`` holds."""
    memo = {} if _memo is None else _memo
    key = f
    if key in memo:
        return memo[key]
    worlds = model.worlds
    if isinstance(f, Var):
        out = model.val.get(f.name, frozenset())
    elif isinstance(f, Neg):
        inner = extension(model, f.arg, semantics, memo)
        out = frozenset(w for w in worlds if w not in inner)
    elif isinstance(f, Impl):
        a = extension(model, f.left, semantics, memo)
        b = extension(model, f.right, semantics, memo)
        out = frozenset(w for w in worlds if w not in a or w in b)
    elif isinstance(f, Box):
        a = extension(model, f.arg, semantics, memo)
        out = frozenset(w for w in worlds if all(u in a for u in model.successors(w)))
    elif isinstance(f, Dia):
        if semantics is Semantics.STANDARD:
            a = extension(model, f.arg, semantics, memo)
            out = frozenset(w for w in worlds if any(u in a for u in model.successors(w)))
        elif isinstance(f.arg, Neg):
            # ◇¬ψ: some successor falsifies ψ
            a = extension(model, f.arg.arg, semantics, memo)
            out = frozenset(w for w in worlds if any(u not in a for u in model.successors(w)))
        else:
            out = frozenset()
    else:
        raise TypeError(f"cannot evaluate {f!r}")
    memo[key] = out
    return out


def satisfies(model: KripkeModel, w: str, f: Formula) -> bool:
    if w not in model._succ:
        raise UnknownWorld(w)
    return w in extension(model, f)


def _require_diamond(conv: Convention) -> None:
    if conv is Convention.BOX:
        raise ValueError("the non-standard clause is only defined when dia is primitive")


def satisfies_nonstandard(
    model: KripkeModel, w: str, f: Formula, conv: Convention = Convention.DIAMOND
) -> bool:
    """Like :func:`satisfies`, except ◇φ holds only when φ is some ¬ψ and a
    successor falsifies ψ."""
    _require_diamond(conv)
    if w not in model._succ:
        raise UnknownWorld(w)
    return w in extension(model, f, Semantics.NONSTANDARD)


def globally_true(model: KripkeModel, f: Formula, semantics: Semantics = Semantics.STANDARD) -> bool:
    return len(extension(model, f, semantics)) == len(model.worlds)


# ---------------------------------------------------------------------------
# frame properties


class PropertyCheck(NamedTuple):
    holds: bool
    witness: tuple[str, ...] | None


def frame_has_property(model: KripkeModel, fc: FrameClass) -> PropertyCheck:
    """Decide the frame condition; the witness is a violating pair or triple."""
    if fc is FrameClass.ALL:
        return PropertyCheck(True, None)
    if fc is FrameClass.EUCLIDEAN:
        for x in model.worlds:
            succ = model.successors(x)
            for y in succ:
                for z in succ:
                    if (y, z) not in model.rel:
                        return PropertyCheck(False, (x, y, z))
        return PropertyCheck(True, None)
    for x in model.worlds:
        if (x, x) in model.rel:
            return PropertyCheck(False, (x, x))
    for x in model.worlds:
        for y in model.successors(x):
            for z in model.successors(y):
                if (x, z) not in model.rel:
                    return PropertyCheck(False, (x, y, z))
    return PropertyCheck(True, None)


# ---------------------------------------------------------------------------
# exhaustive enumeration


def _euclidean(succ: Sequence[int]) -> bool:
    for x, sx in enumerate(succ):
        m = sx
        while m:
            y = (m & -m).bit_length() - 1
            m &= m - 1
            if sx & ~succ[y]:
                return False
    return True


def _transitive_irreflexive(succ: Sequence[int]) -> bool:
    for x, sx in enumerate(succ):
        if sx >> x & 1:
            return False
        m = sx
        while m:
            y = (m & -m).bit_length() - 1
            m &= m - 1
            if succ[y] & ~sx:
                return False
    return True


_FRAME_TESTS = {
    FrameClass.ALL: lambda succ: True,
    FrameClass.EUCLIDEAN: _euclidean,
    FrameClass.TRANSITIVE_IRREFLEXIVE: _transitive_irreflexive,
}


@functools.lru_cache(maxsize=None)
def frames(n: int, fc: FrameClass = FrameClass.ALL) -> tuple[tuple[int, ...], ...]:
    """All frames on worlds 0..n-1 in class ``fc``, as successor bitmasks.

    Order is by the relation's bit pattern (pair (x, y) is bit x*n + y);
    no isomorphism reduction.
    """
    test = _FRAME_TESTS[fc]
    full = (1 << n) - 1
    out = []
    for code in range(1 << (n * n)):
        succ = tuple((code >> (x * n)) & full for x in range(n))
        if test(succ):
            out.append(succ)
    return tuple(out)


def _bit_pattern(bit: int, nbits: int) -> int:
    """Integer whose bit v is bit ``bit`` of v, for v < 2**nbits."""
    total = 1 << nbits
    half = 1 << bit
    period = half << 1
    unit = ((1 << half) - 1) << half
    return unit * (((1 << total) - 1) // ((1 << period) - 1))


class _Slices:
    """Bit-parallel evaluation of formulas over one frame and all valuations."""

    def __init__(self, succ: Sequence[int], names: Sequence[str], semantics: Semantics):
        self.succ = succ
        self.n = len(succ)
        self.names = {name: i for i, name in enumerate(names)}
        k = len(names)
        self.nbits = self.n * k
        self.full = (1 << (1 << self.nbits)) - 1
        self.semantics = semantics
        self.atoms = {
            name: [_bit_pattern(w * k + i, self.nbits) for w in range(self.n)]
            for name, i in self.names.items()
        }
        self.memo: dict[Formula, list[int]] = {}
        self.succ_lists = [[u for u in range(self.n) if s >> u & 1] for s in succ]

    def eval(self, f: Formula) -> list[int]:
        got = self.memo.get(f)
        if got is not None:
            return got
        full = self.full
        if isinstance(f, Var):
            out = self.atoms.get(f.name) or [0] * self.n
        elif isinstance(f, Neg):
            out = [full ^ x for x in self.eval(f.arg)]
        elif isinstance(f, Impl):
            a = self.eval(f.left)
            b = self.eval(f.right)
            out = [(full ^ x) | y for x, y in zip(a, b)]
        elif isinstance(f, Box):
            a = self.eval(f.arg)
            out = []
            for us in self.succ_lists:
                acc = full
                for u in us:
                    acc &= a[u]
                out.append(acc)
        elif isinstance(f, Dia):
            if self.semantics is Semantics.STANDARD:
                a = self.eval(f.arg)
            elif isinstance(f.arg, Neg):
                a = [full ^ x for x in self.eval(f.arg.arg)]
            else:
                a = [0] * self.n
            out = []
            for us in self.succ_lists:
                acc = 0
                for u in us:
                    acc |= a[u]
                out.append(acc)
        else:
            raise TypeError(f"cannot evaluate {f!r}")
        self.memo[f] = out
        return out

    def model(self, valuation: int, names: Sequence[str]) -> KripkeModel:
        worlds = tuple(f"w{i}" for i in range(self.n))
        rel = frozenset((worlds[x], worlds[y]) for x in range(self.n) for y in self.succ_lists[x])
        k = len(names)
        val = {
            name: frozenset(worlds[w] for w in range(self.n) if valuation >> (w * k + i) & 1)
            for i, name in enumerate(names)
        }
        return KripkeModel(worlds, rel, val)


def _lowest_bit(x: int) -> int:
    return (x & -x).bit_length() - 1


# Labelled frame counts, so budget checks need not enumerate 2^(n*n)
# relations.  Transitive irreflexive frames are the labelled strict partial
# orders; the Euclidean counts were obtained by running frames() once.
_FRAME_COUNTS = {
    FrameClass.TRANSITIVE_IRREFLEXIVE: (1, 1, 3, 19, 219, 4231, 130023, 6129859),
    FrameClass.EUCLIDEAN: (1, 2, 7, 39, 306, 3163),
}


def frame_count(n: int, fc: FrameClass = FrameClass.ALL) -> int:
    """Number of frames on n labelled worlds in ``fc`` (an upper bound past
    the tabulated sizes)."""
    table = _FRAME_COUNTS.get(fc, ())
    return table[n] if n < len(table) else 1 << (n * n)


def model_count(n: int, nvars: int, fc: FrameClass) -> int:
    return sum(frame_count(m, fc) << (m * nvars) for m in range(1, n + 1))


def _check_budget(n: int, names: Sequence[str], fc: FrameClass, budget: Budget | None) -> None:
    budget = budget or Budget.from_env()
    if n > budget.max_worlds:
        raise ResourceLimit(f"{n} worlds exceeds the budget of {budget.max_worlds}")
    if len(names) > budget.max_vars:
        raise ResourceLimit(f"{len(names)} variables exceeds the budget of {budget.max_vars}")
    count = model_count(n, len(names), fc)
    if count > budget.max_models:
        raise ResourceLimit(f"{count} models exceeds the budget of {budget.max_models}")


class SearchResult(NamedTuple):
    holds: bool
    countermodel: KripkeModel | None
    world: str | None

    def __bool__(self) -> bool:
        return self.holds


def iter_models(
    n: int, names: Sequence[str], fc: FrameClass = FrameClass.ALL, sizes: Iterable[int] | None = None
) -> Iterator[tuple[KripkeModel, str]]:
    """Every model with at most ``n`` worlds over ``names``, with world w0 as
    a convenience anchor.  Slow path, meant for tests and scripts."""
    for m in sizes or range(1, n + 1):
        for succ in frames(m, fc):
            ev = _Slices(succ, names, Semantics.STANDARD)
            for v in range(1 << ev.nbits):
                yield ev.model(v, names), "w0"


def valid_up_to(
    f: Formula,
    n: int,
    fc: FrameClass = FrameClass.ALL,
    semantics: Semantics = Semantics.STANDARD,
    budget: Budget | None = None,
) -> SearchResult:
    """Bounded validity: no model over a frame in ``fc`` with at most ``n``
    worlds falsifies ``f``.  The first counter-model found is returned; sizes
    are tried in increasing order so it has the fewest worlds possible."""
    names = variables(f)
    _check_budget(n, names, fc, budget)
    for m in range(1, n + 1):
        for succ in frames(m, fc):
            ev = _Slices(succ, names, semantics)
            ext = ev.eval(f)
            bad = 0
            for x in ext:
                bad |= ev.full ^ x
            if bad:
                v = _lowest_bit(bad)
                w = next(i for i, x in enumerate(ext) if not x >> v & 1)
                return SearchResult(False, ev.model(v, names), f"w{w}")
    return SearchResult(True, None, None)


def consequence_check(
    gamma: Iterable[Formula],
    f: Formula,
    mode: str = "local",
    n: int = 3,
    fc: FrameClass = FrameClass.ALL,
    semantics: Semantics = Semantics.STANDARD,
    budget: Budget | None = None,
) -> SearchResult:
    """Bounded local or global consequence from a finite premise set."""
    if mode not in ("local", "global"):
        raise ValueError(f"mode must be 'local' or 'global', not {mode!r}")
    gamma = list(gamma)
    names = variables(gamma + [f])
    _check_budget(n, names, fc, budget)
    for m in range(1, n + 1):
        for succ in frames(m, fc):
            ev = _Slices(succ, names, semantics)
            concl = ev.eval(f)
            prems = [ev.eval(g) for g in gamma]
            if mode == "local":
                per_world = []
                for w in range(m):
                    acc = ev.full ^ concl[w]
                    for p in prems:
                        acc &= p[w]
                    per_world.append(acc)
                bad = 0
                for x in per_world:
                    bad |= x
                if bad:
                    v = _lowest_bit(bad)
                    w = next(i for i, x in enumerate(per_world) if x >> v & 1)
                    return SearchResult(False, ev.model(v, names), f"w{w}")
            else:
                good = ev.full
                for p in prems:
                    for x in p:
                        good &= x
                fails = 0
                for x in concl:
                    fails |= ev.full ^ x
                bad = good & fails
                if bad:
                    v = _lowest_bit(bad)
                    w = next(i for i, x in enumerate(concl) if not x >> v & 1)
                    return SearchResult(False, ev.model(v, names), f"w{w}")
    return SearchResult(True, None, None)


def describe_model(model: KripkeModel) -> str:
    pairs = ", ".join(f"({a},{b})" for a in model.worlds for b in model.successors(a))
    vals = "; ".join(
        f"V({name})={{{','.join(w for w in model.worlds if w in ext)}}}"
        for name, ext in sorted(model.val.items())
    )
    return f"W={{{','.join(model.worlds)}}} R={{{pairs}}} {vals}".rstrip()


__all__ = [
    "Budget",
    "FrameClass",
    "KripkeModel",
    "ModelError",
    "PropertyCheck",
    "ResourceLimit",
    "SearchResult",
    "Semantics",
    "UnknownWorld",
    "consequence_check",
    "describe_model",
    "dump_model",
    "extension",
    "frame_has_property",
    "frames",
    "globally_true",
    "iter_models",
    "load_model",
    "frame_count",
    "model_count",
    "satisfies",
    "satisfies_nonstandard",
    "valid_up_to",
]
