"""Filtrations through finite and symbolic formula sets.

The K5 part builds the set Σ obtained from Sub(φ) by closing under
subformulas and □-prefixing.  Σ is infinite, so it is represented by
*signed-modality normal forms*: a kernel from Sub(φ) (a variable or an
implication), a sign on the kernel, and a modality word over ``B``/``D`` of
length at most two.  Normal forms are computed inside-out, one prefix
operator at a time:

* ``~`` dualises the word and flips the sign;
* ``D``/``B`` is prepended and the word is cut back to length two with one
  of the eight Euclidean reductions.

Because the normal form of □g only depends on the normal form of g, the
closure can be computed on normal forms directly, which is finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .formula import (
    Box,
    Convention,
    Dia,
    Formula,
    FormulaSet,
    Impl,
    Neg,
    Var,
    box,
    box_reading,
    dia,
    dia_reading,
    is_subformula_closed,
    pretty,
    subformulas,
)
from .semantics import FrameClass, KripkeModel, extension, frame_has_property


class NotClosed(ValueError):
    def __init__(self, witness: tuple[Formula, Formula]):
        member, missing = witness
        super().__init__(f"set is not subformula closed: {pretty(missing)} (from {pretty(member)}) is missing")
        self.witness = witness


class NotEuclidean(ValueError):
    def __init__(self, witness):
        super().__init__(f"model is not Euclidean: violating triple {witness}")
        self.witness = witness


class NotFalsified(ValueError):
    pass


# ---------------------------------------------------------------------------
# partitions and filtered models


@dataclass(frozen=True)
class Partition:
    classes: tuple[tuple[str, ...], ...]
    class_of: Mapping[str, int]

    def name(self, index: int) -> str:
        return f"|{self.classes[index][0]}|"

    def image(self, w: str) -> str:
        return self.name(self.class_of[w])

    def names(self) -> tuple[str, ...]:
        return tuple(self.name(i) for i in range(len(self.classes)))

    def as_sets(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset(c) for c in self.classes)


def _sigma_formulas(sigma) -> tuple[Formula, ...]:
    if isinstance(sigma, SymbolicClosure):
        return sigma.members.members
    return tuple(sigma)


def equivalence_classes(model: KripkeModel, sigma) -> Partition:
    """Group worlds by their truth vector over Σ; classes ordered by their
    least world in ``model.worlds`` order."""
    exts = [extension(model, f) for f in _sigma_formulas(sigma)]
    groups: dict[tuple[bool, ...], list[str]] = {}
    for w in model.worlds:
        groups.setdefault(tuple(w in e for e in exts), []).append(w)
    classes = tuple(tuple(g) for g in groups.values())
    class_of = {w: i for i, c in enumerate(classes) for w in c}
    return Partition(classes, class_of)


@dataclass(frozen=True, eq=False)
class FilteredModel:
    """A quotient model together with the data it was built from."""

    model: KripkeModel
    partition: Partition
    sigma: object
    kind: str

    def image(self, w: str) -> str:
        return self.partition.image(w)

    def to_json(self) -> dict:
        data = self.model.to_json()
        data["classes"] = {
            self.partition.name(i): list(c) for i, c in enumerate(self.partition.classes)
        }
        return data


def _valuation(model: KripkeModel, partition: Partition, sigma_formulas: Iterable[Formula]) -> dict:
    names = partition.names()
    val = {}
    for f in sigma_formulas:
        if isinstance(f, Var) and f.name not in val:
            ext = model.val.get(f.name, frozenset())
            val[f.name] = frozenset(names[i] for i, c in enumerate(partition.classes) if c[0] in ext)
    return val


def _build(model, partition, sigma, relation_pairs, kind) -> FilteredModel:
    names = partition.names()
    rel = frozenset((names[i], names[j]) for i, j in relation_pairs)
    val = _valuation(model, partition, _sigma_formulas(sigma))
    return FilteredModel(KripkeModel(names, rel, val), partition, sigma, kind)


def _require_closed(sigma, conv: Convention) -> None:
    if isinstance(sigma, SymbolicClosure):
        return
    check = is_subformula_closed(sigma, conv)
    if not check.closed:
        raise NotClosed(check.witness)


def filtration_from_relation(
    model: KripkeModel, sigma, pairs: Iterable[tuple[int, int]], kind: str = "custom"
) -> FilteredModel:
    """Quotient with a caller-chosen relation on class indices (no checks)."""
    partition = equivalence_classes(model, sigma)
    return _build(model, partition, sigma, sorted(set(pairs)), kind)


def smallest_filtration(model: KripkeModel, sigma, conv: Convention = Convention.DIAMOND) -> FilteredModel:
    _require_closed(sigma, conv)
    partition = equivalence_classes(model, sigma)
    pairs = sorted({(partition.class_of[a], partition.class_of[b]) for a, b in model.rel})
    return _build(model, partition, sigma, pairs, "smallest")


def modal_members(sigma_formulas: Iterable[Formula], conv: Convention) -> tuple[list[Formula], list[Formula]]:
    """(ψ for ◇ψ ∈ Σ, ψ for □ψ ∈ Σ), reading abbreviations per ``conv``."""
    dias, boxes = [], []
    for f in sigma_formulas:
        d = dia_reading(f, conv)
        if d is not None:
            dias.append(d)
        b = box_reading(f, conv)
        if b is not None:
            boxes.append(b)
    return dias, boxes


def _largest_pairs(model, partition, dias, boxes, use_dia: bool, use_box: bool):
    reps = [c[0] for c in partition.classes]
    memo: dict = {}
    dia_ext = [(extension(model, d, _memo=memo), extension(model, Dia(d), _memo=memo)) for d in dias]
    box_ext = [(extension(model, Box(b), _memo=memo), extension(model, b, _memo=memo)) for b in boxes]
    pairs = []
    for i, w in enumerate(reps):
        for j, u in enumerate(reps):
            ok = True
            if use_dia:
                ok = all(u not in arg or w in whole for arg, whole in dia_ext)
            if ok and use_box:
                ok = all(w not in whole or u in arg for whole, arg in box_ext)
            if ok:
                pairs.append((i, j))
    return pairs


def largest_filtration(model: KripkeModel, sigma, conv: Convention = Convention.DIAMOND) -> FilteredModel:
    """R^l with the clause matching the primitive operator(s) of ``conv``."""
    _require_closed(sigma, conv)
    partition = equivalence_classes(model, sigma)
    dias, boxes = modal_members(_sigma_formulas(sigma), conv)
    use_dia = conv in (Convention.DIAMOND, Convention.BOTH)
    use_box = conv in (Convention.BOX, Convention.BOTH)
    pairs = _largest_pairs(model, partition, dias, boxes, use_dia, use_box)
    return _build(model, partition, sigma, pairs, "largest")


# ---------------------------------------------------------------------------
# auditing


class ClauseResult(NamedTuple):
    clause: str
    passed: bool
    witness: str | None


NORMATIVE = {Convention.DIAMOND: "(3)", Convention.BOX: "(3')", Convention.BOTH: "(3'')"}


@dataclass
class AuditReport:
    convention: Convention
    clauses: list[ClauseResult] = field(default_factory=list)

    @property
    def normative(self) -> str:
        return NORMATIVE[self.convention]

    def result(self, clause: str) -> ClauseResult:
        return next(c for c in self.clauses if c.clause == clause)

    def passed(self, clause: str) -> bool:
        return self.result(clause).passed

    @property
    def ok(self) -> bool:
        return all(self.passed(c) for c in ("(1)", "(2)", self.normative, "(4)"))

    def lines(self) -> list[str]:
        out = []
        for c in self.clauses:
            line = f"CLAUSE {c.clause} {'PASS' if c.passed else 'FAIL'}"
            if c.witness:
                line += " " + c.witness
            out.append(line)
        out.append(f"NORMATIVE {self.normative}")
        return out


def audit_filtration(
    model: KripkeModel, filtered: FilteredModel, sigma, conv: Convention = Convention.DIAMOND
) -> AuditReport:
    """Check every clause of the filtration definition.

    (3) and (3') are always evaluated; (3'') is their conjunction.  Which one
    is binding depends on ``conv`` (see :data:`NORMATIVE`).
    """
    report = AuditReport(conv)
    fs = _sigma_formulas(sigma)
    part = filtered.partition
    fmodel = filtered.model
    image = part.image

    expected = equivalence_classes(model, sigma)
    if expected.as_sets() != part.as_sets() or set(fmodel.worlds) != set(part.names()):
        report.clauses.append(ClauseResult("(1)", False, "classes differ from the Sigma-equivalence classes"))
    else:
        report.clauses.append(ClauseResult("(1)", True, None))

    bad = next(((w, u) for w, u in sorted(model.rel) if (image(w), image(u)) not in fmodel.rel), None)
    report.clauses.append(
        ClauseResult("(2)", bad is None, None if bad is None else f"w={bad[0]} u={bad[1]}")
    )

    memo: dict = {}
    dias, boxes = modal_members(fs, conv)
    related = [
        (w, u)
        for w in model.worlds
        for u in model.worlds
        if (image(w), image(u)) in fmodel.rel
    ]
    fail3 = None
    for d in dias:
        arg, whole = extension(model, d, _memo=memo), extension(model, Dia(d), _memo=memo)
        fail3 = next(((w, u) for w, u in related if u in arg and w not in whole), None)
        if fail3:
            fail3 = f"w={fail3[0]} u={fail3[1]} phi={pretty(Dia(d))}"
            break
    fail3p = None
    for b in boxes:
        whole, arg = extension(model, Box(b), _memo=memo), extension(model, b, _memo=memo)
        fail3p = next(((w, u) for w, u in related if w in whole and u not in arg), None)
        if fail3p:
            fail3p = f"w={fail3p[0]} u={fail3p[1]} phi={pretty(Box(b))}"
            break
    report.clauses.append(ClauseResult("(3)", fail3 is None, fail3))
    report.clauses.append(ClauseResult("(3')", fail3p is None, fail3p))
    report.clauses.append(ClauseResult("(3'')", fail3 is None and fail3p is None, fail3 or fail3p))

    fail4 = None
    for f in fs:
        if not isinstance(f, Var):
            continue
        ext = model.val.get(f.name, frozenset())
        fext = fmodel.val.get(f.name, frozenset())
        w = next((w for w in model.worlds if (w in ext) != (image(w) in fext)), None)
        if w is not None:
            fail4 = f"w={w} p={f.name}"
            break
    report.clauses.append(ClauseResult("(4)", fail4 is None, fail4))
    return report


class Violation(NamedTuple):
    world: str
    formula: Formula
    in_model: bool
    in_filtration: bool


def check_filtration_theorem(model: KripkeModel, filtered: FilteredModel, sigma) -> list[Violation]:
    """All (w, φ) with φ ∈ Σ where M,w ⊨ φ and M^f,|w| ⊨ φ disagree."""
    out = []
    memo: dict = {}
    fmemo: dict = {}
    for f in _sigma_formulas(sigma):
        ext = extension(model, f, _memo=memo)
        fext = extension(filtered.model, f, _memo=fmemo)
        for w in model.worlds:
            a, b = w in ext, filtered.image(w) in fext
            if a != b:
                out.append(Violation(w, f, a, b))
    return out


# ---------------------------------------------------------------------------
# K5: normal forms and the symbolic closure

K5_REWRITES = {
    "DDD": "DD",
    "BBB": "BB",
    "DDB": "DB",
    "BBD": "BD",
    "DBD": "DD",
    "BDB": "BB",
    "DBB": "DB",
    "BDD": "BD",
}

MODALITY_WORDS = ("", "B", "D", "BB", "BD", "DB", "DD")


def reduce_word(word: str) -> str:
    """Apply the Euclidean reductions outermost-first until length <= 2."""
    while len(word) > 2:
        word = K5_REWRITES[word[:3]] + word[3:]
    return word


def dual_word(word: str) -> str:
    return word.translate(str.maketrans("BD", "DB"))


class NormalForm(NamedTuple):
    """``word`` applied to the kernel, negated when ``negated``."""

    word: str
    negated: bool
    kernel: Formula

    def label(self) -> str:
        glyph = {"B": "box ", "D": "dia "}
        inner = ("~" if self.negated else "") + _wrap(self.kernel)
        return "".join(glyph[c] for c in self.word) + inner


def _wrap(f: Formula) -> str:
    return f"({pretty(f)})" if isinstance(f, Impl) else pretty(f)


def step(nf: NormalForm, op: str) -> NormalForm:
    """Normal form of ``op`` applied to a formula with normal form ``nf``."""
    if op == "~":
        return NormalForm(dual_word(nf.word), not nf.negated, nf.kernel)
    return NormalForm(reduce_word(op + nf.word), nf.negated, nf.kernel)


def _peel(f: Formula) -> tuple[list[str], Formula]:
    ops = []
    while True:
        if isinstance(f, Neg):
            ops.append("~")
        elif isinstance(f, Dia):
            ops.append("D")
        elif isinstance(f, Box):
            ops.append("B")
        else:
            return ops, f
        f = f.arg


def normal_form(f: Formula) -> NormalForm:
    ops, kernel = _peel(f)
    nf = NormalForm("", False, kernel)
    for op in reversed(ops):
        nf = step(nf, op)
    return nf


def canonical_formula(nf: NormalForm, conv: Convention = Convention.DIAMOND) -> Formula:
    f = Neg(nf.kernel) if nf.negated else nf.kernel
    for c in reversed(nf.word):
        f = Dia(f) if c == "D" else box(f, conv)
    return f


@dataclass(frozen=True, eq=False)
class SymbolicClosure:
    """Finite description of the □-prefix- and subformula-closed Σ ⊇ {φ}.

    ``representatives`` lists every normal form occurring in Σ.  For each one,
    ``generators`` keeps the concrete members of Σ met while computing the
    closure (the first is the witness).  ``members`` is the union of all
    generators: a finite subset of Σ containing, up to Euclidean equivalence,
    every member of Σ and every ◇-member of Σ.
    """

    seed: Formula
    representatives: tuple[NormalForm, ...]
    generators: Mapping[NormalForm, tuple[Formula, ...]]
    dia_members: tuple[NormalForm, ...]
    members: FormulaSet

    def witness(self, nf: NormalForm) -> Formula:
        return self.generators[nf][0]

    def base(self) -> tuple[Formula, ...]:
        return tuple(canonical_formula(nf) for nf in self.representatives)


def k5_closure(phi: Formula, conv: Convention = Convention.DIAMOND) -> SymbolicClosure:
    if conv is not Convention.DIAMOND:
        raise ValueError("the K5 closure is defined for the diamond-primitive language")
    order: list[NormalForm] = []
    gens: dict[NormalForm, list[Formula]] = {}
    dia_members: dict[NormalForm, None] = {}
    queue: list[NormalForm] = []

    def record(nf: NormalForm, raw: Formula) -> None:
        if nf not in gens:
            gens[nf] = []
            order.append(nf)
            queue.append(nf)
        if raw not in gens[nf]:
            gens[nf].append(raw)

    for f in subformulas(phi):
        ops, kernel = _peel(f)
        nf = NormalForm("", False, kernel)
        raw = kernel
        record(nf, raw)
        for op in reversed(ops):
            if op == "D":
                dia_members.setdefault(nf)
            nf = step(nf, op)
            raw = {"~": Neg, "D": Dia, "B": Box}[op](raw)
            record(nf, raw)

    head = 0
    while head < len(queue):
        nf = queue[head]
        head += 1
        g = gens[nf][0]
        # □g = ~dia~g passes through ~g and dia ~g
        s1 = step(nf, "~")
        record(s1, Neg(g))
        dia_members.setdefault(s1)
        s2 = step(s1, "D")
        record(s2, Dia(Neg(g)))
        s3 = step(s2, "~")
        record(s3, Neg(Dia(Neg(g))))

    members = FormulaSet(tuple(f for nf in order for f in gens[nf]), f"K5-closure({pretty(phi)})")
    return SymbolicClosure(
        seed=phi,
        representatives=tuple(order),
        generators={nf: tuple(v) for nf, v in gens.items()},
        dia_members=tuple(nf for nf in order if nf in dia_members),
        members=members,
    )


class BaseCheck(NamedTuple):
    ok: bool
    base: tuple[Formula, ...]
    failures: list[tuple[Formula, Formula, str]]


def finite_base_check(sigma: SymbolicClosure, model: KripkeModel) -> BaseCheck:
    """On ``model``, every generator must agree pointwise with the canonical
    formula of its normal form.  Failures list (canonical, generator, world)."""
    failures = []
    memo: dict = {}
    for nf in sigma.representatives:
        canon = canonical_formula(nf)
        cext = extension(model, canon, _memo=memo)
        for g in sigma.generators[nf]:
            gext = extension(model, g, _memo=memo)
            if cext != gext:
                w = next(w for w in model.worlds if (w in cext) != (w in gext))
                failures.append((canon, g, w))
    return BaseCheck(not failures, sigma.base(), failures)


def k5_fmp_countermodel(model: KripkeModel, phi: Formula) -> FilteredModel:
    """Largest filtration (diamond clause) through the K5 closure of φ."""
    euclid = frame_has_property(model, FrameClass.EUCLIDEAN)
    if not euclid.holds:
        raise NotEuclidean(euclid.witness)
    if len(extension(model, phi)) == len(model.worlds):
        raise NotFalsified(f"{pretty(phi)} holds at every world")
    sigma = k5_closure(phi)
    return largest_filtration(model, sigma, Convention.DIAMOND)


def size_bound(sigma: SymbolicClosure) -> int:
    return 2 ** len(sigma.representatives)


# ---------------------------------------------------------------------------
# the textbook Γ* construction


def popkorn_gamma_star(phi: Formula, depth_cap: int, conv: Convention = Convention.BOX) -> FormulaSet:
    """Γ_0 = Sub(φ), Γ_{n+1} = Γ_n ∪ □Γ_n ∪ ◇Γ_n, materialised up to ``depth_cap``.

    Prefixing happens at the surface and is expanded per ``conv``, so under
    the box convention ◇ψ enters as ¬□¬ψ.
    """
    layer = list(subformulas(phi))
    for _ in range(depth_cap):
        nxt = list(layer)
        nxt.extend(box(f, conv) for f in layer)
        nxt.extend(dia(f, conv) for f in layer)
        layer = list(dict.fromkeys(nxt))
    return FormulaSet(tuple(layer), f"Gamma*_{depth_cap}({pretty(phi)})")


__all__ = [
    "AuditReport",
    "BaseCheck",
    "ClauseResult",
    "FilteredModel",
    "K5_REWRITES",
    "MODALITY_WORDS",
    "NormalForm",
    "NotClosed",
    "NotEuclidean",
    "NotFalsified",
    "Partition",
    "SymbolicClosure",
    "Violation",
    "audit_filtration",
    "canonical_formula",
    "check_filtration_theorem",
    "equivalence_classes",
    "filtration_from_relation",
    "finite_base_check",
    "k5_closure",
    "k5_fmp_countermodel",
    "largest_filtration",
    "normal_form",
    "popkorn_gamma_star",
    "dual_word",
    "modal_members",
    "reduce_word",
    "size_bound",
    "smallest_filtration",
    "step",
]
