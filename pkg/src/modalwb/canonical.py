"""Minimal canonical models for KL relative to a formula.

KL-consistency is decided semantically.  :class:`KLTypes` computes which
truth assignments to a subformula-closed set are realised in some finite
transitive irreflexive model, level by level: a type enters at level ``k+1``
once the types of level ``<= k`` that respect its negative modal
constraints can meet its positive ones.  The levels double as a witness
model.  :func:`kl_satisfiable_bruteforce` is the slow independent check
(plain enumeration of small transitive irreflexive models).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .formula import (
    Box,
    Convention,
    Dia,
    Formula,
    FormulaSet,
    Impl,
    Neg,
    Var,
    box_reading,
    expand,
    pretty,
    sort_key,
    sub_minus_plus,
    subformulas,
    variables,
)
from .semantics import (
    FrameClass,
    KripkeModel,
    ResourceLimit,
    _Slices,
    Semantics,
    extension,
    frame_count,
    frames,
)

# Hard ceiling on enumerated objects (types or brute-force models).
MODEL_CEILING = 10**6


class ConsistencyResult(NamedTuple):
    status: str  # "consistent", "inconsistent" or "consistent-unknown"
    model: KripkeModel | None
    world: str | None

    @property
    def consistent(self) -> bool | None:
        return {"consistent": True, "inconsistent": False}.get(self.status)

    def __bool__(self) -> bool:
        return self.status == "consistent"


class KLTypes:
    """Realised KL types over a subformula-closed formula list."""

    def __init__(self, closure: Sequence[Formula]):
        self.closure = tuple(closure)
        self.index = {f: i for i, f in enumerate(self.closure)}
        self.primes = [f for f in self.closure if isinstance(f, (Var, Dia, Box))]
        if 2 ** len(self.primes) > MODEL_CEILING:
            raise ResourceLimit(f"{2 ** len(self.primes)} candidate types exceed {MODEL_CEILING}")
        self.dias = [(self.index[f], self.index[f.arg]) for f in self.closure if isinstance(f, Dia)]
        self.boxes = [(self.index[f], self.index[f.arg]) for f in self.closure if isinstance(f, Box)]
        self.levels: dict[tuple[bool, ...], int] = {}
        self._compute()

    def _complete(self, assignment: dict[Formula, bool]) -> tuple[bool, ...]:
        vals: dict[Formula, bool] = dict(assignment)

        def value(f: Formula) -> bool:
            got = vals.get(f)
            if got is None:
                if isinstance(f, Neg):
                    got = not value(f.arg)
                elif isinstance(f, Impl):
                    got = (not value(f.left)) or value(f.right)
                else:
                    raise TypeError(f"unexpected node {f!r}")
                vals[f] = got
            return got

        return tuple(value(f) for f in self.closure)

    def _compatible(self, t: tuple[bool, ...], s: tuple[bool, ...]) -> bool:
        """s may be a successor of t (universal constraints only)."""
        for whole, arg in self.dias:
            if not t[whole] and (s[arg] or s[whole]):
                return False
        for whole, arg in self.boxes:
            if t[whole] and not (s[arg] and s[whole]):
                return False
        return True

    def _served(self, t: tuple[bool, ...], pool: Iterable[tuple[bool, ...]]) -> bool:
        need_dia = [(w, a) for w, a in self.dias if t[w]]
        need_box = [(w, a) for w, a in self.boxes if not t[w]]
        for whole, arg in need_dia:
            if not any(s[arg] or s[whole] for s in pool):
                return False
        for whole, arg in need_box:
            if not any(not (s[arg] and s[whole]) for s in pool):
                return False
        return True

    def _compute(self) -> None:
        candidates = []
        for bits in itertools.product((False, True), repeat=len(self.primes)):
            candidates.append(self._complete(dict(zip(self.primes, bits))))
        level = 0
        while True:
            realised = list(self.levels)
            new = []
            for t in candidates:
                if t in self.levels:
                    continue
                pool = [s for s in realised if self._compatible(t, s)]
                if self._served(t, pool):
                    new.append(t)
            if not new:
                break
            for t in new:
                self.levels[t] = level
            level += 1

    def realised(self) -> list[tuple[bool, ...]]:
        return list(self.levels)

    def model(self) -> KripkeModel:
        """Every realised type as a world; t R s iff s sits on a lower level
        and respects t's universal constraints."""
        types = self.realised()
        names = tuple(f"t{i}" for i in range(len(types)))
        rel = frozenset(
            (names[i], names[j])
            for i, t in enumerate(types)
            for j, s in enumerate(types)
            if self.levels[s] < self.levels[t] and self._compatible(t, s)
        )
        val = {}
        for f in self.primes:
            if isinstance(f, Var):
                i = self.index[f]
                val[f.name] = frozenset(names[k] for k, t in enumerate(types) if t[i])
        return KripkeModel(names, rel, val)

    def name_of(self, t: tuple[bool, ...]) -> str:
        return f"t{self.realised().index(t)}"


@functools.lru_cache(maxsize=256)
def _types_for(closure: tuple[Formula, ...]) -> KLTypes:
    return KLTypes(closure)


def _generated(model: KripkeModel, root: str) -> KripkeModel:
    keep = [root]
    i = 0
    while i < len(keep):
        for u in model.successors(keep[i]):
            if u not in keep:
                keep.append(u)
        i += 1
    order = [w for w in model.worlds if w in keep]
    ks = set(keep)
    return KripkeModel(
        tuple(order),
        frozenset((a, b) for a, b in model.rel if a in ks),
        {k: v & ks for k, v in model.val.items()},
    )


def kl_consistent(
    gamma: Iterable[Formula],
    size_cap: int | None = None,
    *,
    within: Sequence[Formula] | None = None,
) -> ConsistencyResult:
    """Is ⋀Γ satisfiable in a finite transitive irreflexive model?

    ``within`` may name a subformula-closed superset of Sub(Γ) so that calls
    for many Γ over the same closure share one type computation.  With a
    ``size_cap`` the answer is relative to models of at most that many worlds
    (the witness is shrunk to its generated submodel first; if that is still
    too large the brute-force search decides, and may come back "consistent-unknown").
    """
    gamma = list(gamma)
    closure = tuple(within) if within is not None else tuple(subformulas(gamma or [Var("p")]))
    try:
        types = _types_for(closure)
    except ResourceLimit:
        return ConsistencyResult("consistent-unknown", None, None)
    idx = [types.index[g] for g in gamma]
    hit = next((t for t in types.realised() if all(t[i] for i in idx)), None)
    if hit is None:
        return ConsistencyResult("inconsistent", None, None)
    root = types.name_of(hit)
    model = _generated(types.model(), root)
    if size_cap is not None and len(model.worlds) > size_cap:
        return kl_satisfiable_bruteforce(gamma, size_cap)
    return ConsistencyResult("consistent", model, root)


def kl_satisfiable_bruteforce(gamma: Iterable[Formula], max_worlds: int) -> ConsistencyResult:
    """Enumerate transitive irreflexive models with at most ``max_worlds``
    worlds.  "consistent-unknown" if the enumeration would pass :data:`MODEL_CEILING`."""
    gamma = list(gamma)
    names = variables(gamma)
    total = 0
    for m in range(1, max_worlds + 1):
        count = frame_count(m, FrameClass.TRANSITIVE_IRREFLEXIVE) << (m * len(names))
        total += count
        if total > MODEL_CEILING:
            return ConsistencyResult("consistent-unknown", None, None)
        for succ in frames(m, FrameClass.TRANSITIVE_IRREFLEXIVE):
            ev = _Slices(succ, names, Semantics.STANDARD)
            exts = [ev.eval(g) for g in gamma]
            for w in range(m):
                acc = ev.full
                for e in exts:
                    acc &= e[w]
                if acc:
                    v = (acc & -acc).bit_length() - 1
                    return ConsistencyResult("consistent", ev.model(v, names), f"w{w}")
    return ConsistencyResult("inconsistent", None, None)


# ---------------------------------------------------------------------------
# relative maximal consistent sets


@dataclass(frozen=True)
class RelativeMCS:
    members: frozenset

    def __contains__(self, f: object) -> bool:
        return f in self.members

    def sorted_members(self) -> list[Formula]:
        return sorted(self.members, key=sort_key)

    def label(self) -> str:
        return "{" + ", ".join(pretty(f) for f in self.sorted_members()) + "}"


def enumerate_relative_mcs(phi: Formula, size_cap: int | None = None) -> list[RelativeMCS]:
    """All KL-consistent Γ ⊆ Sub⁺(φ) deciding each ψ ∈ Sub(φ).

    Candidates are the propositionally coherent choices on Sub(φ); each is
    put to :func:`kl_consistent`.  A "consistent-unknown" verdict raises
    :class:`ResourceLimit` rather than silently dropping the candidate.
    The language is ◇-primitive: literal boxes are expanded first.
    """
    phi = expand(phi, Convention.DIAMOND)
    sub = subformulas(phi)
    _, plus = sub_minus_plus(phi)
    closure = tuple(plus)
    primes = [f for f in sub if isinstance(f, (Var, Dia, Box))]
    if 2 ** len(primes) > MODEL_CEILING:
        raise ResourceLimit("too many candidate sets")
    out = []
    for bits in itertools.product((True, False), repeat=len(primes)):
        truth = dict(zip(primes, bits))

        def value(f: Formula) -> bool:
            if f not in truth:
                if isinstance(f, Neg):
                    truth[f] = not value(f.arg)
                else:
                    truth[f] = (not value(f.left)) or value(f.right)
            return truth[f]

        gamma = frozenset(f if value(f) else Neg(f) for f in sub)
        verdict = kl_consistent(gamma, size_cap, within=closure)
        if verdict.status == "consistent-unknown":
            raise ResourceLimit(f"consistency of {sorted(map(pretty, gamma))} undecided")
        if verdict.status == "consistent":
            out.append(RelativeMCS(gamma))
    out.sort(key=lambda g: [sort_key(f) for f in g.sorted_members()])
    return out


def _plus_members(phi: Formula) -> FormulaSet:
    return sub_minus_plus(phi)[1]


def canonical_relation(w: RelativeMCS, u: RelativeMCS, variant: str, phi: Formula) -> bool:
    """The two candidate canonical relations, quantifying over Sub⁺(φ).

    ``diamond``: every ◇ψ ∈ Sub⁺(φ) with ◇ψ ∈ u or ψ ∈ u has ◇ψ ∈ w, and
    some ◇χ ∈ w is not in u.  ``box``: every □ψ ∈ w has ψ, □ψ ∈ u, and
    some □χ ∈ u is not in w, where □ψ is read as ¬◇¬ψ.
    """
    plus = _plus_members(expand(phi, Convention.DIAMOND))
    if variant == "diamond":
        dias = [f for f in plus if isinstance(f, Dia)]
        for d in dias:
            if (d in u or d.arg in u) and d not in w:
                return False
        return any(d in w and d not in u for d in dias)
    if variant == "box":
        boxes = [(f, b) for f in plus if (b := box_reading(f, Convention.DIAMOND)) is not None]
        for whole, arg in boxes:
            if whole in w and not (arg in u and whole in u):
                return False
        return any(whole in u and whole not in w for whole, _ in boxes)
    raise ValueError(f"variant must be 'diamond' or 'box', not {variant!r}")


@dataclass(frozen=True, eq=False)
class MinimalCanonicalModel:
    model: KripkeModel
    seed: Formula
    variant: str
    worlds: tuple[RelativeMCS, ...]

    def world_of(self, name: str) -> RelativeMCS:
        return self.worlds[self.model.worlds.index(name)]

    def name_of(self, gamma: RelativeMCS) -> str:
        return self.model.worlds[self.worlds.index(gamma)]


def build_minimal_canonical(phi: Formula, variant: str = "diamond", size_cap: int | None = None) -> MinimalCanonicalModel:
    phi = expand(phi, Convention.DIAMOND)
    mcs = enumerate_relative_mcs(phi, size_cap)
    names = tuple(g.label() for g in mcs)
    rel = frozenset(
        (names[i], names[j])
        for i, w in enumerate(mcs)
        for j, u in enumerate(mcs)
        if canonical_relation(w, u, variant, phi)
    )
    plus = _plus_members(phi)
    val = {
        f.name: frozenset(names[i] for i, g in enumerate(mcs) if f in g)
        for f in plus
        if isinstance(f, Var)
    }
    return MinimalCanonicalModel(KripkeModel(names, rel, val), phi, variant, tuple(mcs))


class TruthLemmaViolation(NamedTuple):
    world: str
    formula: Formula
    member: bool
    true: bool


def check_truth_lemma(mcm: MinimalCanonicalModel) -> list[TruthLemmaViolation]:
    """Every (Γ, ψ ∈ Sub⁺(φ)) where membership and truth disagree."""
    out = []
    memo: dict = {}
    for f in _plus_members(mcm.seed):
        ext = extension(mcm.model, f, _memo=memo)
        for name, gamma in zip(mcm.model.worlds, mcm.worlds):
            member, true = f in gamma, name in ext
            if member != true:
                out.append(TruthLemmaViolation(name, f, member, true))
    return out


def relation_difference(phi: Formula, size_cap: int | None = None) -> tuple[set, set]:
    """Pairs related only by the diamond variant, and only by the box one."""
    phi = expand(phi, Convention.DIAMOND)
    mcs = enumerate_relative_mcs(phi, size_cap)
    d = {(w.label(), u.label()) for w in mcs for u in mcs if canonical_relation(w, u, "diamond", phi)}
    b = {(w.label(), u.label()) for w in mcs for u in mcs if canonical_relation(w, u, "box", phi)}
    return d - b, b - d


__all__ = [
    "ConsistencyResult",
    "KLTypes",
    "MinimalCanonicalModel",
    "RelativeMCS",
    "TruthLemmaViolation",
    "build_minimal_canonical",
    "canonical_relation",
    "check_truth_lemma",
    "enumerate_relative_mcs",
    "kl_consistent",
    "kl_satisfiable_bruteforce",
    "relation_difference",
]
