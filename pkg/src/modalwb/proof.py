"""Hilbert-style proof checking for K under five regimes.

``Kr``
    five concrete axioms over p, q, r with explicit uniform substitution;
    derivations with premises reduce to a theorem ⋀Φ → φ.
``Kb``
    axiom schemata; necessitation only of lines backed by a premise-free
    witness sub-proof.
``Kd``
    no necessitation rule; the axiom set is closed under □-prefixing and
    substitution and decided by :func:`xi_membership`.
``Ktilde``
    PC, K, RN and the box-side definition only.  Not complete.
``NaiveClassical``
    Kb's schemata with premises and unrestricted RN, so p ⊢ □p goes through.

Everything here checks or transforms supplied proofs; nothing searches for
one.  Formulas in a derivation are core formulas under its convention.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .formula import (
    DEFAULT_CONVENTION,
    Box,
    Convention,
    Dia,
    Formula,
    FormulaSyntaxError,
    Impl,
    Meta,
    Neg,
    Var,
    big_conj,
    box,
    box_reading,
    dia,
    expand,
    iff,
    apply_substitution,
    instantiate,
    parse_core,
    pretty_sugared,
)
from .semantics import Budget, FrameClass, KripkeModel, Semantics, consequence_check, valid_up_to


class System(enum.Enum):
    KTILDE = "ktilde"
    KR = "kr"
    KB = "kb"
    KD = "kd"
    NAIVE = "naive"

    @classmethod
    def parse(cls, text: str | "System") -> "System":
        if isinstance(text, cls):
            return text
        key = text.strip().lower().replace("_", "").replace("-", "")
        aliases = {"naiveclassical": "naive", "k~": "ktilde"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown system {text!r}")


# ---------------------------------------------------------------------------
# axioms and schemata

_P, _Q, _R = Var("p"), Var("q"), Var("r")
BASE_AXIOMS = ("PC1", "PC2", "PC3", "K", "dual")


def base_axiom(name: str, conv: Convention = DEFAULT_CONVENTION, *, sdual_as_written: bool = False) -> Formula:
    """The concrete axiom ``name`` over p, q, r as a core formula."""
    if name == "PC1":
        return Impl(_P, Impl(_Q, _P))
    if name == "PC2":
        return Impl(Impl(_P, Impl(_Q, _R)), Impl(Impl(_P, _Q), Impl(_P, _R)))
    if name == "PC3":
        return Impl(Impl(Neg(_P), Neg(_Q)), Impl(_Q, _P))
    if name == "K":
        return Impl(box(Impl(_P, _Q), conv), Impl(box(_P, conv), box(_Q, conv)))
    if name == "dual":
        lhs, rhs = dia(_P, conv), Neg(box(Neg(_P), conv))
        return Impl(lhs, rhs) if sdual_as_written else iff(lhs, rhs)
    if name == "Dual":
        return iff(box(_P, conv), Neg(dia(Neg(_P), conv)))
    raise KeyError(f"no axiom named {name!r}")


def _schematize(f: Formula) -> Formula:
    if isinstance(f, Var):
        return Meta(f.name)
    if isinstance(f, Neg):
        return Neg(_schematize(f.arg))
    if isinstance(f, Impl):
        return Impl(_schematize(f.left), _schematize(f.right))
    if isinstance(f, Box):
        return Box(_schematize(f.arg))
    if isinstance(f, Dia):
        return Dia(_schematize(f.arg))
    return f


# schema name -> underlying axiom
KB_SCHEMATA = {"sPC1": "PC1", "sPC2": "PC2", "sPC3": "PC3", "sK": "K", "sdual": "dual"}
KTILDE_SCHEMATA = {"sPC1": "PC1", "sPC2": "PC2", "sPC3": "PC3", "sK": "K", "Dual": "Dual"}


def schema(name: str, conv: Convention = DEFAULT_CONVENTION, *, sdual_as_written: bool = False) -> Formula:
    """Schema ``name`` (Kb/Ktilde naming or a bare axiom name) with
    metavariables named p, q, r."""
    axiom = KB_SCHEMATA.get(name) or KTILDE_SCHEMATA.get(name) or name
    return _schematize(base_axiom(axiom, conv, sdual_as_written=sdual_as_written))


def match_schema(pattern: Formula, f: Formula) -> dict[str, Formula] | None:
    """One-sided matching: the unique σ on metavariables with pattern[σ] = f."""
    binding: dict[str, Formula] = {}
    stack = [(pattern, f)]
    while stack:
        pat, g = stack.pop()
        if isinstance(pat, Meta):
            seen = binding.setdefault(pat.name, g)
            if seen != g:
                return None
        elif type(pat) is not type(g):
            return None
        elif isinstance(pat, Var):
            if pat != g:
                return None
        elif isinstance(pat, Impl):
            stack.append((pat.right, g.right))
            stack.append((pat.left, g.left))
        else:
            stack.append((pat.arg, g.arg))
    return binding


class XiCertificate(NamedTuple):
    depth: int
    axiom: str
    sigma: dict[str, Formula]


def _trim(sigma: Mapping[str, Formula]) -> dict[str, Formula]:
    return {k: v for k, v in sorted(sigma.items()) if v != Var(k)}


def xi_membership(
    f: Formula,
    conv: Convention = DEFAULT_CONVENTION,
    axioms: Iterable[str] = BASE_AXIOMS,
) -> XiCertificate | None:
    """Decide f ∈ Ξ: f = □ⁿ(aσ) for a base axiom a.  Leading boxes are read
    off the surface (¬◇¬ under the diamond convention); the shallowest
    decomposition wins."""
    axioms = tuple(axioms)
    depth, body = 0, f
    while True:
        for name in axioms:
            sigma = match_schema(schema(name, conv), body)
            if sigma is not None:
                return XiCertificate(depth, name, _trim(sigma))
        inner = box_reading(body, conv)
        if inner is None:
            return None
        depth, body = depth + 1, inner


# ---------------------------------------------------------------------------
# proof objects


@dataclass(frozen=True)
class Premise:
    pass


@dataclass(frozen=True)
class Axiom:
    name: str


@dataclass(frozen=True)
class SchemaInstance:
    name: str


@dataclass(frozen=True)
class MP:
    """φ_i from φ_j and φ_k; either may be the implication."""

    j: int
    k: int


@dataclass(frozen=True)
class RN:
    j: int


@dataclass(frozen=True)
class RNWitnessed:
    j: int
    witness: tuple[int, ...]


@dataclass(frozen=True)
class US:
    j: int
    sigma: tuple[tuple[str, Formula], ...]

    @property
    def mapping(self) -> dict[str, Formula]:
        return dict(self.sigma)


Justification = Premise | Axiom | SchemaInstance | MP | RN | RNWitnessed | US


def refs(just: Justification) -> tuple[int, ...]:
    if isinstance(just, MP):
        return (just.j, just.k)
    if isinstance(just, RNWitnessed):
        return (just.j,) + just.witness
    if isinstance(just, (RN, US)):
        return (just.j,)
    return ()


def remap(just: Justification, m: Mapping[int, int]) -> Justification:
    if isinstance(just, MP):
        return MP(m[just.j], m[just.k])
    if isinstance(just, RN):
        return RN(m[just.j])
    if isinstance(just, RNWitnessed):
        return RNWitnessed(m[just.j], tuple(m[w] for w in just.witness))
    if isinstance(just, US):
        return US(m[just.j], just.sigma)
    return just


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    just: Justification


@dataclass(frozen=True)
class Derivation:
    system: System
    lines: tuple[ProofLine, ...]
    premises: tuple[Formula, ...] = ()
    convention: Convention = DEFAULT_CONVENTION
    # Kr only: the finite Φ ⊆ Γ whose conjunction is discharged.
    phi: tuple[Formula, ...] | None = None

    def __post_init__(self):
        if not self.lines:
            raise ValueError("a derivation needs at least one line")

    @property
    def last(self) -> Formula:
        return self.lines[-1].formula

    @property
    def conclusion(self) -> Formula:
        if self.system is System.KR and self.phi is not None:
            head = big_conj(self.phi)
            if isinstance(self.last, Impl) and self.last.left == head:
                return self.last.right
        return self.last

    def line(self, i: int) -> ProofLine:
        return self.lines[i - 1]

    def __len__(self) -> int:
        return len(self.lines)


class ProofError(Exception):
    def __init__(self, index: int, reason: str):
        super().__init__(f"line {index}: {reason}" if index else reason)
        self.index = index
        self.reason = reason


class BadJustification(ProofError):
    pass


class BadWitness(ProofError):
    pass


class MissingPhi(ProofError):
    pass


class TransformFailed(ProofError):
    pass


class Verdict(NamedTuple):
    ok: bool
    error: ProofError | None = None

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# checking


def _schema_names(system: System) -> Mapping[str, str]:
    return KTILDE_SCHEMATA if system is System.KTILDE else KB_SCHEMATA


def _kd_axioms(name: str) -> tuple[str, ...]:
    if name == "xi":
        return BASE_AXIOMS
    base = KB_SCHEMATA.get(name, name)
    if base not in BASE_AXIOMS:
        raise KeyError(name)
    return (base,)


def _witness_problem(d: Derivation, j: int, witness: Sequence[int]) -> str | None:
    if not witness:
        return "empty witness"
    if list(witness) != sorted(set(witness)):
        return "witness indices must be strictly increasing"
    if witness[0] < 1 or witness[-1] > j:
        return f"witness must lie within lines 1..{j}"
    if d.line(witness[-1]).formula != d.line(j).formula:
        return f"witness ends at line {witness[-1]}, which is not line {j}'s formula"
    inside = set(witness)
    for w in witness:
        just = d.line(w).just
        if isinstance(just, Premise):
            return f"witness cites premise line {w}"
        if not isinstance(just, (SchemaInstance, MP, RN, RNWitnessed)):
            return f"witness line {w} is not a Kb step"
        if isinstance(just, MP) and not {just.j, just.k} <= inside:
            return f"witness line {w} uses a line outside the witness"
        if isinstance(just, (RN, RNWitnessed)) and just.j not in inside:
            return f"witness line {w} uses a line outside the witness"
    return None


def _check_lines(d: Derivation, *, theorem: bool, sdual_as_written: bool) -> Verdict:
    conv = d.convention
    premises = set(d.premises)
    system = d.system
    for i, line in enumerate(d.lines, 1):
        f, just = line.formula, line.just

        def bad(reason: str) -> Verdict:
            return Verdict(False, BadJustification(i, reason))

        for r in refs(just):
            if not 1 <= r < i:
                return bad(f"reference {r} is not an earlier line")
        if isinstance(just, Premise):
            if theorem or system in (System.KR, System.KTILDE):
                return bad("premise lines are not allowed here")
            if f not in premises:
                return bad("not among the premises")
        elif isinstance(just, Axiom):
            if system is not System.KR:
                return bad(f"concrete axioms belong to Kr, not {system.value}")
            if just.name not in BASE_AXIOMS:
                return bad(f"no Kr axiom named {just.name}")
            if f != base_axiom(just.name, conv):
                return bad(f"not the axiom {just.name}")
        elif isinstance(just, SchemaInstance):
            if system is System.KR:
                return bad("Kr has no schemata; use an axiom and us")
            if system is System.KD:
                try:
                    names = _kd_axioms(just.name)
                except KeyError:
                    return bad(f"no axiom named {just.name}")
                if xi_membership(f, conv, names) is None:
                    return bad(f"not in Xi via {just.name}")
            else:
                table = _schema_names(system)
                if just.name not in table:
                    return bad(f"{system.value} has no schema {just.name}")
                pattern = schema(just.name, conv, sdual_as_written=sdual_as_written)
                if match_schema(pattern, f) is None:
                    return bad(f"not an instance of {just.name}")
        elif isinstance(just, MP):
            a, b = d.line(just.j).formula, d.line(just.k).formula
            if b != Impl(a, f) and a != Impl(b, f):
                return bad(f"lines {just.j} and {just.k} do not yield this by modus ponens")
        elif isinstance(just, (RN, RNWitnessed)):
            if system is System.KD:
                return bad("Kd has no necessitation rule")
            if f != box(d.line(just.j).formula, conv):
                return bad(f"not the necessitation of line {just.j}")
            if isinstance(just, RN) and system is System.KB and (d.premises and not theorem):
                return bad("Kb necessitation with premises needs a witness")
            if isinstance(just, RNWitnessed):
                if system not in (System.KB, System.NAIVE):
                    return bad("witnessed necessitation is a Kb rule")
                problem = _witness_problem(d, just.j, just.witness)
                if problem:
                    return Verdict(False, BadWitness(i, problem))
        elif isinstance(just, US):
            if system is not System.KR:
                return bad("uniform substitution is a Kr rule")
            if f != apply_substitution(d.line(just.j).formula, just.mapping):
                return bad(f"not the substitution instance of line {just.j}")
        else:
            return bad(f"unknown justification {just!r}")
    return Verdict(True)


def check_theorem_proof(d: Derivation, *, sdual_as_written: bool = False) -> Verdict:
    """Check a proof from empty premises in ``d.system``."""
    if d.premises:
        return Verdict(False, BadJustification(0, "theorem proofs take no premises"))
    return _check_lines(d, theorem=True, sdual_as_written=sdual_as_written)


def check_derivation(d: Derivation, *, sdual_as_written: bool = False) -> Verdict:
    """Check Γ ⊢ φ under the system's own notion of derivation."""
    if d.system is System.KTILDE:
        return _check_lines(d, theorem=True, sdual_as_written=sdual_as_written)
    if d.system is System.KR:
        if not d.premises and d.phi is None:
            return check_theorem_proof(d, sdual_as_written=sdual_as_written)
        if d.phi is None:
            return Verdict(False, MissingPhi(0, "Kr with premises needs the finite subset phi"))
        stray = [g for g in d.phi if g not in set(d.premises)]
        if stray:
            return Verdict(False, BadJustification(0, "phi is not a subset of the premises"))
        verdict = _check_lines(d, theorem=True, sdual_as_written=sdual_as_written)
        if not verdict:
            return verdict
        last = d.last
        if not (isinstance(last, Impl) and last.left == big_conj(d.phi)):
            return Verdict(False, BadJustification(len(d), "last line is not of the form /\\phi -> goal"))
        return verdict
    return _check_lines(d, theorem=False, sdual_as_written=sdual_as_written)


# ---------------------------------------------------------------------------
# structural helpers


def cone(lines: Sequence[ProofLine], j: int | Iterable[int]) -> list[int]:
    """Indices the given lines depend on, themselves included, ascending."""
    seen = {j} if isinstance(j, int) else set(j)
    stack = list(seen)
    while stack:
        for r in refs(lines[stack.pop() - 1].just):
            if r not in seen:
                seen.add(r)
                stack.append(r)
    return sorted(seen)


def extract(lines: Sequence[ProofLine], j: int | Iterable[int]) -> list[ProofLine]:
    keep = cone(lines, j)
    m = {old: new for new, old in enumerate(keep, 1)}
    return [ProofLine(lines[i - 1].formula, remap(lines[i - 1].just, m)) for i in keep]


class _Out:
    """Line accumulator used by the transformers."""

    def __init__(self):
        self.lines: list[ProofLine] = []

    def add(self, f: Formula, just: Justification) -> int:
        self.lines.append(ProofLine(f, just))
        return len(self.lines)

    def splice(self, block: Sequence[ProofLine]) -> int:
        offset = len(self.lines)
        m = {i: i + offset for i in range(1, len(block) + 1)}
        for line in block:
            self.lines.append(ProofLine(line.formula, remap(line.just, m)))
        return len(self.lines)

    def f(self, i: int) -> Formula:
        return self.lines[i - 1].formula


def _pc(system: System, name: str) -> SchemaInstance:
    return SchemaInstance(name if system is System.KD else "s" + name)


def _mp_parts(d: Derivation, just: MP, f: Formula) -> tuple[int, int]:
    """(minor, major) with major = minor → f."""
    if d.line(just.k).formula == Impl(d.line(just.j).formula, f):
        return just.j, just.k
    return just.k, just.j


def _require(d: Derivation, verdict: Verdict, what: str) -> Derivation:
    if not verdict:
        raise TransformFailed(verdict.error.index, f"{what} produced an invalid proof: {verdict.error}")
    return d


def _identity_lines(out: _Out, system: System, a: Formula) -> int:
    aa = Impl(a, a)
    l1 = out.add(Impl(a, Impl(aa, a)), _pc(system, "PC1"))
    l2 = out.add(Impl(Impl(a, Impl(aa, a)), Impl(Impl(a, aa), aa)), _pc(system, "PC2"))
    l3 = out.add(Impl(Impl(a, aa), aa), MP(l1, l2))
    l4 = out.add(Impl(a, aa), _pc(system, "PC1"))
    return out.add(aa, MP(l4, l3))


# ---------------------------------------------------------------------------
# transformers


def deduction_transform(d: Derivation, psi: Formula) -> Derivation:
    """Γ, ψ ⊢ φ into Γ ⊢ ψ → φ, for Kb and Kd."""
    if d.system not in (System.KB, System.KD):
        raise TransformFailed(0, f"deduction transform is defined for kb and kd, not {d.system.value}")
    if psi not in d.premises:
        raise TransformFailed(0, "the discharged formula is not a premise")
    verdict = check_derivation(d)
    if not verdict:
        raise TransformFailed(verdict.error.index, f"input does not check: {verdict.error}")
    system = d.system
    out = _Out()
    t: dict[int, int] = {}

    def weaken(i_line: int, f: Formula) -> int:
        ax = out.add(Impl(f, Impl(psi, f)), _pc(system, "PC1"))
        return out.add(Impl(psi, f), MP(i_line, ax))

    for i, line in enumerate(d.lines, 1):
        f, just = line.formula, line.just
        if isinstance(just, Premise) and f == psi:
            t[i] = _identity_lines(out, system, psi)
        elif isinstance(just, (Premise, SchemaInstance)):
            t[i] = weaken(out.add(f, just), f)
        elif isinstance(just, RNWitnessed):
            # the witness is premise-free, so it is copied verbatim
            keep = cone(d.lines, just.witness)
            start = len(out.lines)
            top = out.splice(extract(d.lines, just.witness))
            m = {old: start + new for new, old in enumerate(keep, 1)}
            new_w = tuple(m[w] for w in just.witness)
            t[i] = weaken(out.add(f, RNWitnessed(top, new_w)), f)
        elif isinstance(just, MP):
            minor, major = _mp_parts(d, just, f)
            a = d.line(minor).formula
            s2 = out.add(
                Impl(Impl(psi, Impl(a, f)), Impl(Impl(psi, a), Impl(psi, f))), _pc(system, "PC2")
            )
            s3 = out.add(Impl(Impl(psi, a), Impl(psi, f)), MP(t[major], s2))
            t[i] = out.add(Impl(psi, f), MP(t[minor], s3))
        else:
            raise TransformFailed(i, f"cannot discharge through {type(just).__name__}")
    if out.f(len(out.lines)) != Impl(psi, d.last):
        raise TransformFailed(len(d), "result does not end in psi -> phi")
    rest = tuple(g for g in d.premises if g != psi)
    result = Derivation(system, tuple(out.lines), rest, d.convention)
    return _require(result, check_derivation(result), "deduction transform")


def substitute_proof(d: Derivation, sigma: Mapping[str, Formula]) -> Derivation:
    """Apply σ to every line of a premise-free proof; justifications carry over."""
    if d.premises:
        raise TransformFailed(0, "substitution applies to theorem proofs only")
    sigma = {k: expand(v, d.convention) for k, v in sigma.items()}
    lines = []
    for line in d.lines:
        just = line.just
        if isinstance(just, US):
            # (f^τ)^σ = f^(τ;σ)
            tau = {k: apply_substitution(v, sigma) for k, v in just.sigma}
            tau.update({k: v for k, v in sigma.items() if k not in tau})
            just = US(just.j, tuple(sorted(tau.items())))
        elif isinstance(just, Axiom):
            raise TransformFailed(0, "substitute Kr proofs with the us rule instead")
        lines.append(ProofLine(apply_substitution(line.formula, sigma), just))
    result = replace(d, lines=tuple(lines))
    return _require(result, check_theorem_proof(result), "substitution")


def generalization_transform(d: Derivation) -> Derivation:
    """Γ ⊢ φ into □Γ ⊢ □φ, for Kd."""
    if d.system is not System.KD:
        raise TransformFailed(0, "generalization is a Kd transform")
    verdict = check_derivation(d)
    if not verdict:
        raise TransformFailed(verdict.error.index, f"input does not check: {verdict.error}")
    conv = d.convention
    out = _Out()
    g: dict[int, int] = {}
    for i, line in enumerate(d.lines, 1):
        f, just = line.formula, line.just
        if isinstance(just, (Premise, SchemaInstance)):
            g[i] = out.add(box(f, conv), just)
        elif isinstance(just, MP):
            minor, major = _mp_parts(d, just, f)
            a = d.line(minor).formula
            k_ax = out.add(
                Impl(box(Impl(a, f), conv), Impl(box(a, conv), box(f, conv))), SchemaInstance("K")
            )
            step = out.add(Impl(box(a, conv), box(f, conv)), MP(g[major], k_ax))
            g[i] = out.add(box(f, conv), MP(g[minor], step))
        else:
            raise TransformFailed(i, f"unexpected {type(just).__name__} in a Kd proof")
    result = Derivation(System.KD, tuple(out.lines), tuple(box(p, conv) for p in d.premises), conv)
    return _require(result, check_derivation(result), "generalization")


TRANSLATIONS = {(System.KR, System.KB), (System.KB, System.KD), (System.KD, System.KR)}


def translate(d: Derivation, source: System | str, target: System | str) -> Derivation:
    """Replay a theorem proof in another of Kr, Kb, Kd."""
    source, target = System.parse(source), System.parse(target)
    if (source, target) not in TRANSLATIONS:
        raise TransformFailed(0, f"no translation {source.value} -> {target.value}")
    if d.system is not source:
        raise TransformFailed(0, f"proof is in {d.system.value}, not {source.value}")
    verdict = check_theorem_proof(d)
    if not verdict:
        raise TransformFailed(verdict.error.index, f"input does not check: {verdict.error}")
    conv = d.convention
    out = _Out()
    t: dict[int, int] = {}
    for i, line in enumerate(d.lines, 1):
        f, just = line.formula, line.just
        if isinstance(just, MP):
            t[i] = out.add(f, MP(t[just.j], t[just.k]))
        elif source is System.KR:
            if isinstance(just, Axiom):
                t[i] = out.add(f, SchemaInstance("s" + just.name))
            elif isinstance(just, RN):
                t[i] = out.add(f, RNWitnessed(t[just.j], tuple(cone(out.lines, t[just.j]))))
            elif isinstance(just, US):
                block = Derivation(System.KB, tuple(extract(out.lines, t[just.j])), (), conv)
                t[i] = out.splice(substitute_proof(block, just.mapping).lines)
            else:
                raise TransformFailed(i, f"unexpected {type(just).__name__} in a Kr proof")
        elif source is System.KB:
            if isinstance(just, SchemaInstance):
                t[i] = out.add(f, SchemaInstance(KB_SCHEMATA[just.name]))
            elif isinstance(just, (RN, RNWitnessed)):
                block = Derivation(System.KD, tuple(extract(out.lines, t[just.j])), (), conv)
                t[i] = out.splice(generalization_transform(block).lines)
            else:
                raise TransformFailed(i, f"unexpected {type(just).__name__} in a Kb proof")
        else:
            if not isinstance(just, SchemaInstance):
                raise TransformFailed(i, f"unexpected {type(just).__name__} in a Kd proof")
            cert = xi_membership(f, conv, _kd_axioms(just.name))
            body = f
            for _ in range(cert.depth):
                body = box_reading(body, conv)
            k = out.add(base_axiom(cert.axiom, conv), Axiom(cert.axiom))
            if cert.sigma:
                k = out.add(body, US(k, tuple(cert.sigma.items())))
            for _ in range(cert.depth):
                k = out.add(box(out.f(k), conv), RN(k))
            t[i] = k
    result = Derivation(target, tuple(out.lines), (), conv)
    if result.last != d.last:
        raise TransformFailed(len(d), "translation changed the conclusion")
    return _require(result, check_theorem_proof(result), f"{source.value} -> {target.value}")


# ---------------------------------------------------------------------------
# bounded soundness


class SweepFailure(NamedTuple):
    index: int
    formula: Formula
    countermodel: KripkeModel
    world: str


@dataclass
class SweepReport:
    semantics: Semantics
    max_worlds: int
    checked: int = 0
    failures: list[SweepFailure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def soundness_sweep(
    d: Derivation,
    semantics: Semantics = Semantics.STANDARD,
    n: int = 3,
    budget: Budget | None = None,
) -> SweepReport:
    """Bounded-validity check of every line of a theorem proof, or bounded
    local consequence of the conclusion for a derivation with premises."""
    report = SweepReport(semantics, n)
    if d.premises and d.system is not System.KR:
        report.checked = 1
        res = consequence_check(d.premises, d.conclusion, "local", n, FrameClass.ALL, semantics, budget)
        if not res:
            report.failures.append(SweepFailure(len(d), d.conclusion, res.countermodel, res.world))
        return report
    done: dict[Formula, bool] = {}
    for i, line in enumerate(d.lines, 1):
        if line.formula in done:
            continue
        res = valid_up_to(line.formula, n, FrameClass.ALL, semantics, budget)
        done[line.formula] = bool(res)
        report.checked += 1
        if not res:
            report.failures.append(SweepFailure(i, line.formula, res.countermodel, res.world))
    return report


# ---------------------------------------------------------------------------
# derived rules


class ProofBuilder:
    """Emit proofs through PC-derived rules that work in every system.

    Axiom requests turn into whatever the system accepts (Kr: axiom plus
    substitution; schema systems: one schema line).  Premise-free lines are
    shared, so asking twice for the same theorem costs nothing.
    """

    def __init__(self, system: System | str, convention: Convention = DEFAULT_CONVENTION, *, share: bool = True):
        self.system = System.parse(system)
        # With share=False only axiom lines are reused, so a rule applied to
        # line i really cites line i; the worked derivations need that.
        self.share = share
        self.conv = convention
        self.out = _Out()
        self.premises: list[Formula] = []
        self._theorems: dict[Formula, int] = {}
        self._pure: set[int] = set()

    # raw emission -------------------------------------------------------

    def _emit(self, f: Formula, just: Justification) -> int:
        if f in self._theorems and not isinstance(just, Premise):
            if self.share or not isinstance(just, (MP, RN, RNWitnessed)):
                return self._theorems[f]
        i = self.out.add(f, just)
        if not isinstance(just, Premise) and all(r in self._pure for r in refs(just)):
            self._pure.add(i)
            self._theorems.setdefault(f, i)
        return i

    def f(self, i: int) -> Formula:
        return self.out.f(i)

    def premise(self, f: Formula) -> int:
        if f not in self.premises:
            self.premises.append(f)
        return self.out.add(f, Premise())

    def ax(self, name: str, **binding: Formula) -> int:
        """Instance of base axiom ``name`` with p, q, r bound."""
        pattern = schema(name, self.conv)
        f = instantiate(pattern, binding)
        if f in self._theorems:
            return self._theorems[f]
        if self.system is System.KR:
            k = self._emit(base_axiom(name, self.conv), Axiom(name))
            sigma = _trim(binding)
            if sigma:
                k = self._emit(f, US(k, tuple(sigma.items())))
            return k
        if self.system is System.KD:
            return self._emit(f, SchemaInstance(name))
        if self.system is System.KTILDE:
            label = "Dual" if name == "Dual" else "s" + name
        else:
            label = "s" + name
        return self._emit(f, SchemaInstance(label))

    def mp(self, minor: int, major: int) -> int:
        imp = self.f(major)
        if not (isinstance(imp, Impl) and imp.left == self.f(minor)):
            raise ValueError(f"line {major} is not an implication from line {minor}")
        return self._emit(imp.right, MP(minor, major))

    def rn(self, i: int) -> int:
        f = box(self.f(i), self.conv)
        if f in self._theorems and self.share:
            return self._theorems[f]
        if i not in self._pure:
            raise ValueError(f"line {i} depends on premises; necessitation would be unsound")
        if self.system is System.KD:
            block = Derivation(System.KD, tuple(extract(self.out.lines, i)), (), self.conv)
            lines = generalization_transform(block).lines
            start = len(self.out.lines)
            top = self.out.splice(lines)
            self._pure.update(range(start + 1, top + 1))
            self._theorems.setdefault(f, top)
            return top
        if self.system is System.KB and self.premises:
            return self._emit(f, RNWitnessed(i, tuple(cone(self.out.lines, i))))
        return self._emit(f, RN(i))

    # propositional rules ------------------------------------------------

    def identity(self, a: Formula) -> int:
        aa = Impl(a, a)
        if aa in self._theorems and self.share:
            return self._theorems[aa]
        l1 = self.ax("PC1", p=a, q=aa)
        l2 = self.ax("PC2", p=a, q=aa, r=a)
        l3 = self.mp(l1, l2)
        l4 = self.ax("PC1", p=a, q=a)
        return self.mp(l4, l3)

    def weaken(self, i: int, a: Formula) -> int:
        """From X infer A → X."""
        x = self.f(i)
        return self.mp(i, self.ax("PC1", p=x, q=a))

    def distribute(self, i: int, k: int) -> int:
        """From A → (B → C) and A → B infer A → C."""
        abc, ab = self.f(i), self.f(k)
        a, b, c = abc.left, abc.right.left, abc.right.right
        if ab != Impl(a, b):
            raise ValueError("distribute needs A -> (B -> C) and A -> B")
        return self.mp(k, self.mp(i, self.ax("PC2", p=a, q=b, r=c)))

    def chain(self, i: int, k: int) -> int:
        """From A → B and B → C infer A → C."""
        ab, bc = self.f(i), self.f(k)
        if ab.right != bc.left:
            raise ValueError("chain needs A -> B and B -> C")
        return self.distribute(self.weaken(k, ab.left), i)

    def dne(self, a: Formula) -> int:
        """¬¬A → A."""
        nna, na = Neg(Neg(a)), Neg(a)
        l1 = self.ax("PC1", p=nna, q=Neg(Neg(nna)))
        l2 = self.ax("PC3", p=Neg(nna), q=na)
        l3 = self.chain(l1, l2)
        l4 = self.ax("PC3", p=a, q=nna)
        l5 = self.chain(l3, l4)
        return self.distribute(l5, self.identity(nna))

    def dni(self, a: Formula) -> int:
        """A → ¬¬A."""
        return self.mp(self.dne(Neg(a)), self.ax("PC3", p=Neg(Neg(a)), q=a))

    def explode(self, a: Formula, b: Formula) -> int:
        """¬A → (A → B)."""
        return self.chain(self.ax("PC1", p=Neg(a), q=Neg(b)), self.ax("PC3", p=b, q=a))

    def contrapose(self, i: int) -> int:
        """From A → B infer ¬B → ¬A."""
        ab = self.f(i)
        a, b = ab.left, ab.right
        step = self.chain(self.chain(self.dne(a), i), self.dni(b))
        return self.mp(step, self.ax("PC3", p=Neg(a), q=Neg(b)))

    def conj_left(self, a: Formula, b: Formula) -> int:
        """A ∧ B → A."""
        k = self.contrapose(self.explode(a, Neg(b)))
        return self.chain(k, self.dne(a))

    def conj_right(self, a: Formula, b: Formula) -> int:
        """A ∧ B → B."""
        k = self.contrapose(self.ax("PC1", p=Neg(b), q=a))
        return self.chain(k, self.dne(b))

    def conj_intro(self, i: int, k: int) -> int:
        """From A and B infer A ∧ B."""
        a, b = self.f(i), self.f(k)
        x = Impl(a, Neg(b))
        x_nb = self.distribute(self.identity(x), self.weaken(i, x))
        return self.mp(self.mp(k, self.dni(b)), self.contrapose(x_nb))

    def iff_intro(self, i: int, k: int) -> int:
        """From A → B and B → A infer A ↔ B."""
        return self.conj_intro(i, k)

    def iff_split(self, i: int) -> tuple[int, int]:
        """From A ↔ B infer A → B and B → A."""
        f = self.f(i)
        ab, ba = f.arg.left, f.arg.right.arg
        return self.mp(i, self.conj_left(ab, ba)), self.mp(i, self.conj_right(ab, ba))

    def uncurry(self, i: int) -> int:
        """From A → (B → C) infer A ∧ B → C."""
        abc = self.f(i)
        a, b = abc.left, abc.right.left
        x_bc = self.chain(self.conj_left(a, b), i)
        return self.distribute(x_bc, self.conj_right(a, b))

    # modal rules --------------------------------------------------------

    def k_rule(self, i: int) -> int:
        """From A → B infer □A → □B."""
        ab = self.f(i)
        return self.mp(self.rn(i), self.ax("K", p=ab.left, q=ab.right))

    def re_rule(self, i: int) -> int:
        """From A ↔ B infer □A ↔ □B."""
        ab, ba = self.iff_split(i)
        return self.iff_intro(self.k_rule(ab), self.k_rule(ba))

    # borrowed proofs --------------------------------------------------

    def include(self, d: Derivation) -> int:
        """Splice a premise-free proof, ported to this builder's system."""
        d = port(d, self.system)
        start = len(self.out.lines)
        top = self.out.splice(d.lines)
        for i in range(start + 1, top + 1):
            self._pure.add(i)
            self._theorems.setdefault(self.f(i), i)
        return top

    def via_deduction(self, hyps: Sequence[Formula], body) -> int:
        """Prove h1 → (h2 → ... → C) by building ``body(builder, hyp_lines)``
        in Kb from the hypotheses and discharging them right to left."""
        sub = ProofBuilder(System.KB, self.conv)
        lines = [sub.premise(h) for h in hyps]
        d = sub.derivation(body(sub, lines))
        d = replace(d, premises=tuple(hyps))
        for h in reversed(hyps):
            d = deduction_transform(d, h)
        return self.include(d)

    # output -------------------------------------------------------------

    def derivation(self, conclusion: int | None = None) -> Derivation:
        """The proof so far, trimmed to what ``conclusion`` needs.

        Premise lines the conclusion does not use are dropped as well, but
        the premise set itself is kept.
        """
        lines = self.out.lines
        if conclusion is not None:
            lines = extract(lines, conclusion)
        return Derivation(self.system, tuple(lines), tuple(self.premises), self.conv)


def port(d: Derivation, system: System) -> Derivation:
    """Move a Kb theorem proof into ``system`` (translating where needed)."""
    if d.system is system:
        return d
    if d.system is not System.KB or d.premises:
        raise TransformFailed(0, "only premise-free Kb proofs can be ported")
    if system is System.KD:
        return translate(d, System.KB, System.KD)
    if system is System.KR:
        return translate(translate(d, System.KB, System.KD), System.KD, System.KR)
    lines = []
    for line in d.lines:
        just = line.just
        if isinstance(just, RNWitnessed):
            just = RN(just.j)
        if isinstance(just, SchemaInstance) and just.name not in _schema_names(system):
            raise TransformFailed(0, f"{just.name} is not available in {system.value}")
        lines.append(ProofLine(line.formula, just))
    result = replace(d, system=system, lines=tuple(lines))
    return _require(result, check_theorem_proof(result), f"port to {system.value}")


# ---------------------------------------------------------------------------
# proof files


class ProofSyntaxError(ValueError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


_LINE = re.compile(r"^\s*(\d+)\.\s*(.*?)\s*;\s*(.*?)\s*$")


def _indices(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


def _compress(ws: Sequence[int]) -> str:
    parts, i = [], 0
    while i < len(ws):
        j = i
        while j + 1 < len(ws) and ws[j + 1] == ws[j] + 1:
            j += 1
        parts.append(str(ws[i]) if i == j else f"{ws[i]}-{ws[j]}")
        i = j + 1
    return ",".join(parts)


def _parse_sigma(text: str, conv: Convention) -> tuple[tuple[str, Formula], ...]:
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise ValueError("substitution must be written {p:=..., ...}")
    out = []
    for part in body[1:-1].split(","):
        if not part.strip():
            continue
        name, _, value = part.partition(":=")
        if not _:
            raise ValueError(f"bad binding {part.strip()!r}")
        out.append((name.strip(), parse_core(value, conv)))
    return tuple(sorted(out))


def _parse_just(text: str, conv: Convention) -> Justification:
    words = text.split()
    if not words:
        raise ValueError("missing justification")
    head = words[0].lower()
    if head == "premise" and len(words) == 1:
        return Premise()
    if head in ("ax", "axiom") and len(words) == 2:
        return Axiom(words[1])
    if head == "schema" and len(words) == 2:
        return SchemaInstance(words[1])
    if head == "mp" and len(words) == 3:
        return MP(int(words[1]), int(words[2]))
    if head == "rn" and len(words) == 2:
        return RN(int(words[1]))
    if head == "rn" and len(words) >= 4 and words[2] == "witness":
        return RNWitnessed(int(words[1]), _indices("".join(words[3:])))
    if head == "us" and len(words) >= 3:
        return US(int(words[1]), _parse_sigma(text.split(None, 2)[2], conv))
    raise ValueError(f"cannot read justification {text!r}")


def parse_proof(text: str, *, system: System | str | None = None) -> Derivation:
    """Read the line-oriented proof format."""
    headers: dict[str, str] = {}
    raw: list[tuple[int, str, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if m:
            index, formula, just = m.groups()
            if int(index) != len(raw) + 1:
                raise ProofSyntaxError(f"expected line number {len(raw) + 1}, found {index}", lineno)
            raw.append((lineno, formula, just))
            continue
        key, sep, value = line.partition(":")
        if sep and key.strip().lower() in ("system", "premises", "convention", "phi"):
            headers[key.strip().lower()] = value.strip()
            continue
        raise ProofSyntaxError(f"cannot read {line!r}", lineno)
    if not raw:
        raise ProofSyntaxError("no proof lines", 0)
    try:
        conv = Convention.parse(headers.get("convention", DEFAULT_CONVENTION.value))
        sys_ = System.parse(system or headers.get("system", "kb"))
    except ValueError as exc:
        raise ProofSyntaxError(str(exc), 0) from None

    def formulas(key: str) -> tuple[Formula, ...] | None:
        if key not in headers:
            return None
        parts = [p for p in headers[key].split(",") if p.strip()]
        try:
            return tuple(parse_core(p, conv) for p in parts)
        except FormulaSyntaxError as exc:
            raise ProofSyntaxError(f"{key}: {exc}", 0) from None

    lines = []
    for lineno, formula, just in raw:
        try:
            lines.append(ProofLine(parse_core(formula, conv), _parse_just(just, conv)))
        except (FormulaSyntaxError, ValueError) as exc:
            raise ProofSyntaxError(str(exc), lineno) from None
    return Derivation(sys_, tuple(lines), formulas("premises") or (), conv, formulas("phi"))


def load_proof(path: str | Path, *, system: System | str | None = None) -> Derivation:
    return parse_proof(Path(path).read_text(encoding="utf-8"), system=system)


def format_just(just: Justification, conv: Convention = DEFAULT_CONVENTION) -> str:
    if isinstance(just, Premise):
        return "premise"
    if isinstance(just, Axiom):
        return f"ax {just.name}"
    if isinstance(just, SchemaInstance):
        return f"schema {just.name}"
    if isinstance(just, MP):
        return f"mp {just.j} {just.k}"
    if isinstance(just, RN):
        return f"rn {just.j}"
    if isinstance(just, RNWitnessed):
        return f"rn {just.j} witness {_compress(just.witness)}"
    if isinstance(just, US):
        body = ", ".join(f"{k}:={pretty_sugared(v, conv)}" for k, v in just.sigma)
        return f"us {just.j} {{{body}}}"
    raise TypeError(just)


def format_proof(d: Derivation, comments: Mapping[int, str] | None = None, title: str | None = None) -> str:
    conv = d.convention
    out = []
    if title:
        out.extend(f"# {t}" for t in title.splitlines())
    out.append(f"system: {d.system.value}")
    out.append(f"convention: {conv.value}")
    if d.premises:
        out.append("premises: " + ", ".join(pretty_sugared(p, conv) for p in d.premises))
    if d.phi is not None:
        out.append("phi: " + ", ".join(pretty_sugared(p, conv) for p in d.phi))
    width = len(str(len(d)))
    for i, line in enumerate(d.lines, 1):
        if comments and i in comments:
            out.append(f"# {comments[i]}")
        out.append(f"{i:>{width}}. {pretty_sugared(line.formula, conv)} ; {format_just(line.just, conv)}")
    return "\n".join(out) + "\n"


__all__ = [
    "Axiom",
    "BASE_AXIOMS",
    "BadJustification",
    "BadWitness",
    "Derivation",
    "KB_SCHEMATA",
    "KTILDE_SCHEMATA",
    "MP",
    "MissingPhi",
    "Premise",
    "ProofBuilder",
    "ProofError",
    "ProofLine",
    "ProofSyntaxError",
    "RN",
    "RNWitnessed",
    "SchemaInstance",
    "SweepReport",
    "System",
    "TransformFailed",
    "US",
    "Verdict",
    "XiCertificate",
    "base_axiom",
    "check_derivation",
    "check_theorem_proof",
    "cone",
    "deduction_transform",
    "extract",
    "format_proof",
    "generalization_transform",
    "load_proof",
    "match_schema",
    "parse_proof",
    "port",
    "schema",
    "soundness_sweep",
    "substitute_proof",
    "translate",
    "xi_membership",
]
