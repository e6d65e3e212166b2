"""Formula syntax for the basic modal language.

Two layers are kept apart.  The *surface* layer is what the parser returns:
``Var``, ``Neg``, ``Impl``, ``Box`` and ``Dia`` nodes, with the sugar
connectives already eliminated.  The *core* layer is obtained with
:func:`expand` and contains only the modal operator(s) that the active
:class:`Convention` treats as primitive.  Everything that talks about
subformulas works on the core layer.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple


class Convention(enum.Enum):
    """Which modal operator is an AST constructor."""

    BOX = "box"
    DIAMOND = "diamond"
    BOTH = "both"

    @classmethod
    def parse(cls, text: str) -> "Convention":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown convention {text!r}; expected box, diamond or both") from None


DEFAULT_CONVENTION = Convention.DIAMOND


class Formula:
    """Base class of all formula nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)

    def __repr__(self) -> str:
        return f"<{pretty(self)}>"


@dataclass(frozen=True, repr=False)
class Var(Formula):
    name: str


@dataclass(frozen=True, repr=False)
class Meta(Formula):
    """Schema metavariable; never produced by the object-language parser."""

    name: str


@dataclass(frozen=True, repr=False)
class Neg(Formula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class Impl(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Box(Formula):
    arg: Formula


@dataclass(frozen=True, repr=False)
class Dia(Formula):
    arg: Formula


# ⊤ is p0 -> p0; any variable would do, this one is fixed so outputs are stable.
TOP_VAR = "p0"
TOP = Impl(Var(TOP_VAR), Var(TOP_VAR))


def conj(a: Formula, b: Formula) -> Formula:
    return Neg(Impl(a, Neg(b)))


def disj(a: Formula, b: Formula) -> Formula:
    return Impl(Neg(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return conj(Impl(a, b), Impl(b, a))


def big_conj(fs: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``TOP``."""
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = conj(f, out)
    return out


def box(f: Formula, conv: Convention = DEFAULT_CONVENTION) -> Formula:
    """□f as a core formula under ``conv``."""
    if conv is Convention.DIAMOND:
        return Neg(Dia(Neg(f)))
    return Box(f)


def dia(f: Formula, conv: Convention = DEFAULT_CONVENTION) -> Formula:
    """◇f as a core formula under ``conv``."""
    if conv is Convention.BOX:
        return Neg(Box(Neg(f)))
    return Dia(f)


def box_reading(f: Formula, conv: Convention) -> Formula | None:
    """Return ψ if ``f`` reads as □ψ under ``conv``, else None."""
    if isinstance(f, Box):
        return f.arg
    if (
        conv is Convention.DIAMOND
        and isinstance(f, Neg)
        and isinstance(f.arg, Dia)
        and isinstance(f.arg.arg, Neg)
    ):
        return f.arg.arg.arg
    return None


def dia_reading(f: Formula, conv: Convention) -> Formula | None:
    """Return ψ if ``f`` reads as ◇ψ under ``conv``, else None."""
    if isinstance(f, Dia):
        return f.arg
    if (
        conv is Convention.BOX
        and isinstance(f, Neg)
        and isinstance(f.arg, Box)
        and isinstance(f.arg.arg, Neg)
    ):
        return f.arg.arg.arg
    return None


# ---------------------------------------------------------------------------
# pretty printing

_UNARY_PREFIX = {Neg: "~", Box: "box ", Dia: "dia "}


def pretty(f: Formula) -> str:
    """ASCII rendering that :func:`parse` reads back to the same tree."""
    if isinstance(f, (Var, Meta)):
        return f.name
    if isinstance(f, (Neg, Box, Dia)):
        inner = pretty(f.arg)
        if isinstance(f.arg, Impl):
            inner = f"({inner})"
        return _UNARY_PREFIX[type(f)] + inner
    if isinstance(f, Impl):
        left = pretty(f.left)
        if isinstance(f.left, Impl):
            left = f"({left})"
        return f"{left} -> {pretty(f.right)}"
    raise TypeError(f"not a formula: {f!r}")


def _conj_parts(f: Formula) -> tuple[Formula, Formula] | None:
    if isinstance(f, Neg) and isinstance(f.arg, Impl) and isinstance(f.arg.right, Neg):
        return f.arg.left, f.arg.right.arg
    return None


def _iff_parts(f: Formula) -> tuple[Formula, Formula] | None:
    parts = _conj_parts(f)
    if parts and all(isinstance(x, Impl) for x in parts):
        a, b = parts
        if a.left == b.right and a.right == b.left:
            return a.left, a.right
    return None


def pretty_sugared(f: Formula, conv: Convention = DEFAULT_CONVENTION) -> str:
    """Like :func:`pretty` but folds ``true``, ``&``, ``<->`` and the
    non-primitive modality back in.  ``parse_core(..., conv)`` inverts it."""
    return _sugared(f, conv)[0]


# Precedence levels as the parser sees them: <-> 0, -> 1, & 3, unary 4.
def _sugared(f: Formula, conv: Convention) -> tuple[str, int]:
    def wrap(g: Formula, least: int) -> str:
        text, prec = _sugared(g, conv)
        return f"({text})" if prec < least else text

    if f == TOP:
        return "true", 4
    if isinstance(f, (Var, Meta)):
        return f.name, 4
    parts = _iff_parts(f)
    if parts:
        return f"{wrap(parts[0], 1)} <-> {wrap(parts[1], 1)}", 0
    parts = _conj_parts(f)
    if parts:
        return f"{wrap(parts[0], 3)} & {wrap(parts[1], 4)}", 3
    inner = box_reading(f, conv) if conv is Convention.DIAMOND else None
    if inner is not None:
        return "box " + wrap(inner, 4), 4
    inner = dia_reading(f, conv) if conv is Convention.BOX else None
    if inner is not None:
        return "dia " + wrap(inner, 4), 4
    if isinstance(f, (Neg, Box, Dia)):
        return _UNARY_PREFIX[type(f)] + wrap(f.arg, 4), 4
    if isinstance(f, Impl):
        return f"{wrap(f.left, 2)} -> {wrap(f.right, 1)}", 1
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# parsing


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbol(FormulaSyntaxError):
    pass


_TOKEN = re.compile(
    r"\s*(?:(?P<op><->|->|<>|\[\]|[~&|()])|(?P<ident>[a-z][a-z0-9_]*)|(?P<meta>[A-Z][A-Za-z0-9_]*))"
)


def _tokenize(text: str, allow_meta: bool) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise UnknownSymbol(f"unexpected symbol {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "meta" and not allow_meta:
            raise UnknownSymbol(f"unexpected symbol {value!r}", start)
        if kind == "ident" and value in ("box", "dia", "true"):
            kind = "op"
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_meta: bool):
        self.tokens = _tokenize(text, allow_meta)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if value is not None and tok[1] != value:
            found = tok[1] or "end of input"
            raise FormulaSyntaxError(f"expected {value!r}, found {found!r}", tok[2])
        self.i += 1
        return tok

    def at(self, *values: str) -> bool:
        kind, value, _ = self.peek()
        return kind == "op" and value in values

    def formula(self) -> Formula:
        f = self.implication()
        while self.at("<->"):
            self.take()
            f = iff(f, self.implication())
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.take()
            return Impl(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.at("|"):
            self.take()
            f = disj(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.at("&"):
            self.take()
            f = conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.at("~"):
            self.take()
            return Neg(self.unary())
        if self.at("box", "[]"):
            self.take()
            return Box(self.unary())
        if self.at("dia", "<>"):
            self.take()
            return Dia(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "ident":
            self.take()
            return Var(value)
        if kind == "meta":
            self.take()
            return Meta(value)
        if kind == "op" and value == "true":
            self.take()
            return TOP
        if kind == "op" and value == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if kind == "eof":
            raise FormulaSyntaxError("unexpected end of input", pos)
        raise FormulaSyntaxError(f"unexpected {value!r}", pos)


def parse(text: str, conv: Convention = DEFAULT_CONVENTION, *, allow_meta: bool = False) -> Formula:
    """Parse ASCII syntax into a surface formula (sugar already eliminated).

    ``conv`` does not affect the tree; it is accepted so callers can thread
    the active convention through uniformly.  Uppercase identifiers are
    schema metavariables and are only accepted with ``allow_meta``.
    """
    p = _Parser(text, allow_meta)
    f = p.formula()
    kind, value, pos = p.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"unexpected {value!r}", pos)
    return f


def parse_core(text: str, conv: Convention = DEFAULT_CONVENTION, *, allow_meta: bool = False) -> Formula:
    return expand(parse(text, conv, allow_meta=allow_meta), conv)


# ---------------------------------------------------------------------------
# expansion and structural helpers


def expand(f: Formula, conv: Convention = DEFAULT_CONVENTION) -> Formula:
    """Rewrite the non-primitive modal operator into its abbreviation."""
    if isinstance(f, (Var, Meta)):
        return f
    if isinstance(f, Neg):
        return Neg(expand(f.arg, conv))
    if isinstance(f, Impl):
        return Impl(expand(f.left, conv), expand(f.right, conv))
    if isinstance(f, Box):
        return box(expand(f.arg, conv), conv)
    if isinstance(f, Dia):
        return dia(expand(f.arg, conv), conv)
    raise TypeError(f"not a formula: {f!r}")


def is_core(f: Formula, conv: Convention) -> bool:
    for g in walk(f):
        if conv is Convention.DIAMOND and isinstance(g, Box):
            return False
        if conv is Convention.BOX and isinstance(g, Dia):
            return False
    return True


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Neg, Box, Dia)):
        return (f.arg,)
    if isinstance(f, Impl):
        return (f.left, f.right)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal (with repetitions)."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(children(g)))


def variables(f: Formula | Iterable[Formula]) -> tuple[str, ...]:
    fs = [f] if isinstance(f, Formula) else list(f)
    names = {g.name for h in fs for g in walk(h) if isinstance(g, Var)}
    return tuple(sorted(names))


def size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


def modal_depth(f: Formula) -> int:
    if isinstance(f, (Box, Dia)):
        return 1 + modal_depth(f.arg)
    return max((modal_depth(c) for c in children(f)), default=0)


def sort_key(f: Formula) -> tuple[int, str]:
    return (size(f), pretty(f))


# ---------------------------------------------------------------------------
# formula sets


@dataclass(frozen=True, eq=False)
class FormulaSet:
    """Finite set of formulas with a stable iteration order.

    Membership is structural equality; order is insertion order, which makes
    every derived report deterministic.
    """

    members: tuple[Formula, ...]
    provenance: str | None = None
    _index: frozenset = field(init=False, repr=False)

    def __post_init__(self) -> None:
        seen: dict[Formula, None] = dict.fromkeys(self.members)
        object.__setattr__(self, "members", tuple(seen))
        object.__setattr__(self, "_index", frozenset(seen))

    @classmethod
    def of(cls, fs: Iterable[Formula], provenance: str | None = None) -> "FormulaSet":
        return cls(tuple(fs), provenance)

    def __contains__(self, f: object) -> bool:
        return f in self._index

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FormulaSet):
            return self._index == other._index
        if isinstance(other, (set, frozenset)):
            return self._index == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._index)

    def __le__(self, other: "FormulaSet") -> bool:
        return self._index <= set(other)

    def union(self, other: Iterable[Formula], provenance: str | None = None) -> "FormulaSet":
        return FormulaSet(self.members + tuple(other), provenance)

    def as_frozenset(self) -> frozenset:
        return self._index

    def __repr__(self) -> str:
        inner = ", ".join(pretty(f) for f in self.members)
        tag = f" {self.provenance}" if self.provenance else ""
        return f"<FormulaSet{tag}: {{{inner}}}>"


def subformulas(f: Formula | Iterable[Formula]) -> FormulaSet:
    """Sub(f), computed on the tree as given (pass core formulas)."""
    fs = [f] if isinstance(f, Formula) else list(f)
    out: dict[Formula, None] = {}
    for h in fs:
        for g in walk(h):
            out.setdefault(g)
    label = f"Sub({pretty(fs[0])})" if len(fs) == 1 else "Sub(...)"
    return FormulaSet(tuple(out), label)


def sub_minus_plus(f: Formula) -> tuple[FormulaSet, FormulaSet]:
    sub = subformulas(f)
    minus = FormulaSet(tuple(Neg(g) for g in sub), f"Sub-({pretty(f)})")
    plus = FormulaSet(sub.members + minus.members, f"Sub+({pretty(f)})")
    return minus, plus


class ClosureCheck(NamedTuple):
    closed: bool
    witness: tuple[Formula, Formula] | None


def missing_subformulas(s: Iterable[Formula], conv: Convention = DEFAULT_CONVENTION) -> FormulaSet:
    members = FormulaSet.of(expand(g, conv) for g in s)
    out: dict[Formula, None] = {}
    for g in members:
        for h in walk(g):
            if h not in members:
                out.setdefault(h)
    return FormulaSet(tuple(out), "missing")


def is_subformula_closed(s: Iterable[Formula], conv: Convention = DEFAULT_CONVENTION) -> ClosureCheck:
    """Closure test; on failure the witness is (member, missing subformula).

    Members are scanned in order and each member's subformulas in pre-order,
    so the witness is the outermost missing subformula of the first
    offending member.
    """
    members = FormulaSet.of(expand(g, conv) for g in s)
    for g in members:
        for h in walk(g):
            if h not in members:
                return ClosureCheck(False, (g, h))
    return ClosureCheck(True, None)


def chagrov_sigma(phi: Formula) -> FormulaSet:
    """Sub(φ) ∪ {◇□ψ | □ψ ∈ Sub(φ)} with ◇ abbreviated (box primitive)."""
    sub = subformulas(phi)
    extra = [dia(g, Convention.BOX) for g in sub if isinstance(g, Box)]
    return FormulaSet(sub.members + tuple(extra), f"chagrov-sigma({pretty(phi)})")


# ---------------------------------------------------------------------------
# substitution

Substitution = Mapping[str, Formula]


def apply_substitution(f: Formula, sigma: Substitution) -> Formula:
    """Homomorphic replacement of variables; metavariables are left alone."""
    if not sigma:
        return f
    if isinstance(f, Var):
        return sigma.get(f.name, f)
    if isinstance(f, Meta):
        return f
    if isinstance(f, Neg):
        return Neg(apply_substitution(f.arg, sigma))
    if isinstance(f, Impl):
        return Impl(apply_substitution(f.left, sigma), apply_substitution(f.right, sigma))
    if isinstance(f, Box):
        return Box(apply_substitution(f.arg, sigma))
    if isinstance(f, Dia):
        return Dia(apply_substitution(f.arg, sigma))
    raise TypeError(f"not a formula: {f!r}")


def compose(sigma: Substitution, tau: Substitution) -> dict[str, Formula]:
    """σ;τ, i.e. the substitution with f^(σ;τ) = (f^σ)^τ."""
    out = {name: apply_substitution(g, tau) for name, g in sigma.items()}
    for name, g in tau.items():
        out.setdefault(name, g)
    return out


def instantiate(pattern: Formula, binding: Mapping[str, Formula]) -> Formula:
    """Replace metavariables according to ``binding``."""
    if isinstance(pattern, Meta):
        return binding[pattern.name]
    if isinstance(pattern, Var):
        return pattern
    if isinstance(pattern, Neg):
        return Neg(instantiate(pattern.arg, binding))
    if isinstance(pattern, Impl):
        return Impl(instantiate(pattern.left, binding), instantiate(pattern.right, binding))
    if isinstance(pattern, Box):
        return Box(instantiate(pattern.arg, binding))
    if isinstance(pattern, Dia):
        return Dia(instantiate(pattern.arg, binding))
    raise TypeError(f"not a formula: {pattern!r}")


def format_substitution(sigma: Substitution) -> str:
    inner = ", ".join(f"{k}:={pretty(v)}" for k, v in sorted(sigma.items()))
    return "{" + inner + "}"
