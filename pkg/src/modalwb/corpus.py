"""Bundled derivations.

The ``.prf`` files under ``prf/`` are generated by :func:`render_files` (see
``scripts/build_corpus.py``); the theorem lists are rebuilt on demand from
the derived rules of :class:`~modalwb.proof.ProofBuilder`.
"""

from __future__ import annotations

import functools
from pathlib import Path
from typing import Callable, NamedTuple

from .formula import Convention, Formula, Impl, Neg, Var, big_conj, box, conj, dia, iff
from .proof import (
    Derivation,
    Premise,
    ProofBuilder,
    ProofLine,
    RN,
    RNWitnessed,
    System,
    format_proof,
    load_proof,
)

CORPUS_DIR = Path(__file__).with_name("prf")

p, q, r = Var("p"), Var("q"), Var("r")


def corpus_path(name: str) -> Path:
    path = CORPUS_DIR / name
    return path if path.suffix else path.with_suffix(".prf")


def load_corpus(name: str) -> Derivation:
    return load_proof(corpus_path(name))


def corpus_files() -> list[Path]:
    return sorted(CORPUS_DIR.glob("*.prf"))


# ---------------------------------------------------------------------------
# the two worked derivations


class Annotated(NamedTuple):
    derivation: Derivation
    steps: dict[int, str]  # line index -> step label
    title: str


def _negate_iff(b: ProofBuilder, i: int) -> int:
    """From X ↔ ¬Y infer ¬X ↔ Y."""
    x_ny, ny_x = b.iff_split(i)
    y = b.f(x_ny).right.arg
    nx_y = b.chain(b.contrapose(ny_x), b.dne(y))
    y_nx = b.chain(b.dni(y), b.contrapose(x_ny))
    return b.iff_intro(nx_y, y_nx)


def re_derivation(a: Formula = p, c: Formula | None = None, conv: Convention = Convention.DIAMOND) -> Annotated:
    """From a derived a ↔ c conclude □a ↔ □c through RN, K and PC in Kb."""
    c = Neg(Neg(a)) if c is None else c
    b = ProofBuilder(System.KB, conv, share=False)
    steps = {}
    s1 = b.iff_intro(b.dni(a), b.dne(a)) if c == Neg(Neg(a)) else None
    if s1 is None:
        raise ValueError("only the a <-> ~~a instance is derivable here")
    steps[s1] = "(1) a <-> c, derived as a theorem"
    ac, ca = b.iff_split(s1)
    steps[ac] = "(2) a -> c, c -> a by PC"
    n_ac, n_ca = b.rn(ac), b.rn(ca)
    steps[n_ac] = "(3) box(a -> c), box(c -> a) by RN"
    k_ac, k_ca = b.ax("K", p=a, q=c), b.ax("K", p=c, q=a)
    steps[k_ac] = "(4) instances of K"
    m_ac, m_ca = b.mp(n_ac, k_ac), b.mp(n_ca, k_ca)
    steps[m_ac] = "(5) box a -> box c, box c -> box a by MP"
    s6 = b.iff_intro(m_ac, m_ca)
    steps[s6] = "(6) box a <-> box c by PC"
    return _trim_annotated(b, s6, steps, "RE as a derived rule, for a := p, c := ~~p")


def dual_from_dual_derivation(a: Formula = p) -> Annotated:
    """Derive box a <-> ~dia ~a from the dual schema with both operators primitive."""
    conv = Convention.BOTH
    b = ProofBuilder(System.KB, conv, share=False)
    steps = {}
    s1 = b.ax("dual", p=Neg(a))
    steps[s1] = "(1) dia ~a <-> ~box ~~a, dual"
    s2 = _negate_iff(b, s1)
    steps[s2] = "(2) ~dia ~a <-> box ~~a, (1) and PC"
    s3 = b.iff_intro(b.dni(a), b.dne(a))
    steps[s3] = "(3) a <-> ~~a, PC"
    s4 = b.re_rule(s3)
    steps[s4] = "(4) box a <-> box ~~a, (3) and RE"
    x_y, y_x = b.iff_split(s2)  # ~dia~a -> box~~a, box~~a -> ~dia~a
    a_y, y_a = b.iff_split(s4)  # box a -> box~~a, box~~a -> box a
    s5 = b.iff_intro(b.chain(a_y, y_x), b.chain(x_y, y_a))
    steps[s5] = "(5) box a <-> ~dia ~a, (2), (4) and PC"
    return _trim_annotated(b, s5, steps, "Dual from dual, for a := p")


def _trim_annotated(b: ProofBuilder, top: int, steps: dict[int, str], title: str) -> Annotated:
    from .proof import cone

    keep = cone(b.out.lines, top)
    m = {old: new for new, old in enumerate(keep, 1)}
    d = b.derivation(top)
    return Annotated(d, {m[i]: label for i, label in steps.items() if i in m}, title)


def re_key_formulas(a: Formula = p, conv: Convention = Convention.DIAMOND) -> list[Formula]:
    """The formulas each numbered step must establish, in order."""
    c = Neg(Neg(a))
    ac, ca = Impl(a, c), Impl(c, a)
    return [
        iff(a, c),
        ac,
        ca,
        box(ac, conv),
        box(ca, conv),
        Impl(box(ac, conv), Impl(box(a, conv), box(c, conv))),
        Impl(box(ca, conv), Impl(box(c, conv), box(a, conv))),
        Impl(box(a, conv), box(c, conv)),
        Impl(box(c, conv), box(a, conv)),
        iff(box(a, conv), box(c, conv)),
    ]


def dual_key_formulas(a: Formula = p) -> list[Formula]:
    conv = Convention.BOTH
    return [
        iff(dia(Neg(a), conv), Neg(box(Neg(Neg(a)), conv))),
        iff(Neg(dia(Neg(a), conv)), box(Neg(Neg(a)), conv)),
        iff(a, Neg(Neg(a))),
        iff(box(a, conv), box(Neg(Neg(a)), conv)),
        iff(box(a, conv), Neg(dia(Neg(a), conv))),
    ]


# ---------------------------------------------------------------------------
# theorem lists

Recipe = Callable[[ProofBuilder], int]


def _k_chain(b: ProofBuilder) -> int:
    hs = b.via_deduction([Impl(p, q), Impl(q, r)], lambda s, h: s.chain(h[0], h[1]))
    first = b.k_rule(hs)  # □(p→q) → □((q→r)→(p→r))
    inner = b.f(hs).right
    return b.chain(first, b.ax("K", p=inner.left, q=inner.right))


def _box_conj_split(b: ProofBuilder) -> int:
    def body(s: ProofBuilder, h):
        left = s.mp(h[0], s.k_rule(s.conj_left(p, q)))
        right = s.mp(h[0], s.k_rule(s.conj_right(p, q)))
        return s.conj_intro(left, right)

    return b.via_deduction([box(conj(p, q), b.conv)], body)


def _box_conj_merge(b: ProofBuilder) -> int:
    pair = b.via_deduction([p, q], lambda s, h: s.conj_intro(h[0], h[1]))
    first = b.k_rule(pair)  # □p → □(q → p∧q)
    step = b.chain(first, b.ax("K", p=q, q=conj(p, q)))
    return b.uncurry(step)


def _dia_neg(b: ProofBuilder) -> int:
    """◇¬p ↔ ¬□p from dual at ¬p and RE at p ↔ ¬¬p."""
    x_ny, ny_x = b.iff_split(b.ax("dual", p=Neg(p)))
    z_y, y_z = b.iff_split(b.re_rule(b.iff_intro(b.dni(p), b.dne(p))))
    return b.iff_intro(b.chain(x_ny, b.contrapose(z_y)), b.chain(b.contrapose(y_z), ny_x))


def _dual_from_dual(b: ProofBuilder) -> int:
    x_y, y_x = b.iff_split(_negate_iff(b, b.ax("dual", p=Neg(p))))
    a_y, y_a = b.iff_split(b.re_rule(b.iff_intro(b.dni(p), b.dne(p))))
    return b.iff_intro(b.chain(a_y, y_x), b.chain(x_y, y_a))


def _pc_recipes() -> dict[str, Recipe]:
    return {
        "identity": lambda b: b.identity(p),
        "dne": lambda b: b.dne(p),
        "dni": lambda b: b.dni(p),
        "explosion": lambda b: b.explode(p, q),
        "conj-left": lambda b: b.conj_left(p, q),
        "conj-right": lambda b: b.conj_right(p, q),
        "neg-impl": lambda b: b.contrapose(b.ax("PC1", p=q, q=p)),
        "double-neg-iff": lambda b: b.iff_intro(b.dni(p), b.dne(p)),
        "pairing": lambda b: b.via_deduction([p, q], lambda s, h: s.conj_intro(h[0], h[1])),
        "syllogism": lambda b: b.via_deduction([Impl(p, q), Impl(q, r)], lambda s, h: s.chain(h[0], h[1])),
        "contraposition": lambda b: b.via_deduction([Impl(p, q)], lambda s, h: s.contrapose(h[0])),
    }


def _modal_recipes() -> dict[str, Recipe]:
    return {
        "nec-identity": lambda b: b.rn(b.identity(p)),
        "nec-nec-identity": lambda b: b.rn(b.rn(b.identity(p))),
        "box-conj-left": lambda b: b.k_rule(b.conj_left(p, q)),
        "box-conj-right": lambda b: b.k_rule(b.conj_right(p, q)),
        "box-double-neg": lambda b: b.re_rule(b.iff_intro(b.dni(p), b.dne(p))),
        "K": lambda b: b.ax("K", p=p, q=q),
        "box-syllogism": _k_chain,
        "box-weaken": lambda b: b.k_rule(b.ax("PC1", p=p, q=q)),
        "dne-box": lambda b: b.dne(box(p, b.conv)),
        "nec-pc1": lambda b: b.rn(b.ax("PC1", p=p, q=q)),
        "nec-dne": lambda b: b.rn(b.dne(p)),
        "box-contraposition": lambda b: b.k_rule(
            b.via_deduction([Impl(p, q)], lambda s, h: s.contrapose(h[0]))
        ),
        "box-box-double-neg": lambda b: b.re_rule(b.re_rule(b.iff_intro(b.dni(p), b.dne(p)))),
    }


def _dual_recipes() -> dict[str, Recipe]:
    return {
        "dual": lambda b: b.ax("dual", p=p),
        "Dual-derived": _dual_from_dual,
        "dia-neg": _dia_neg,
        "not-dia": lambda b: _negate_iff(b, b.ax("dual", p=p)),
        "box-conj-split": _box_conj_split,
        "box-conj-merge": _box_conj_merge,
    }


def build(system: System | str, recipe: Recipe, conv: Convention = Convention.DIAMOND) -> Derivation:
    b = ProofBuilder(system, conv)
    return b.derivation(recipe(b))


@functools.lru_cache(maxsize=None)
def kr_theorems() -> tuple[tuple[str, Derivation], ...]:
    """Thirty Kr theorem proofs (diamond convention)."""
    recipes = {**_pc_recipes(), **_modal_recipes(), **_dual_recipes()}
    out = tuple((name, build(System.KR, rec)) for name, rec in recipes.items())
    assert len(out) == 30, len(out)
    return out


@functools.lru_cache(maxsize=None)
def ktilde_theorems() -> tuple[tuple[str, Derivation], ...]:
    """Twenty Ktilde theorem proofs; none uses dual, one uses Dual."""
    names = list(_pc_recipes()) + [
        "nec-identity",
        "nec-nec-identity",
        "box-conj-left",
        "box-conj-right",
        "box-double-neg",
        "K",
        "box-syllogism",
        "box-weaken",
    ]
    recipes = {**_pc_recipes(), **_modal_recipes()}
    out = [(name, build(System.KTILDE, recipes[name])) for name in names]
    out.append(("Dual", build(System.KTILDE, lambda b: b.ax("Dual", p=p))))
    assert len(out) == 20, len(out)
    return tuple(out)


# ---------------------------------------------------------------------------
# derivations with premises


class WithPremises(NamedTuple):
    name: str
    derivation: Derivation


def _premise_recipes(conv: Convention) -> dict[str, tuple[list[Formula], Callable]]:
    bp, bpq = box(p, conv), box(Impl(p, q), conv)
    return {
        "reflexive": ([p], lambda b, h: h[0]),
        "modus-ponens": ([p, Impl(p, q)], lambda b, h: b.mp(h[0], h[1])),
        "chain": ([Impl(p, q), Impl(q, r)], lambda b, h: b.chain(h[0], h[1])),
        "pair": ([p, q], lambda b, h: b.conj_intro(h[0], h[1])),
        "contrapose": ([Impl(p, q)], lambda b, h: b.contrapose(h[0])),
        "boxed-mp": ([bp, bpq], lambda b, h: b.mp(h[0], b.mp(h[1], b.ax("K", p=p, q=q)))),
        "swap": (
            [conj(p, q)],
            lambda b, h: b.conj_intro(b.mp(h[0], b.conj_right(p, q)), b.mp(h[0], b.conj_left(p, q))),
        ),
        "with-theorem": ([q], lambda b, h: b.conj_intro(h[0], b.rn(b.identity(p)))),
    }


@functools.lru_cache(maxsize=None)
def premise_derivations(system: System = System.KB) -> tuple[WithPremises, ...]:
    """Derivations Γ ⊢ φ in Kb or Kd where every premise is cited."""
    out = []
    for name, (hyps, body) in _premise_recipes(Convention.DIAMOND).items():
        b = ProofBuilder(system)
        lines = [b.premise(h) for h in hyps]
        d = b.derivation(body(b, lines))
        out.append(WithPremises(name, Derivation(system, d.lines, tuple(hyps), d.convention)))
    return tuple(out)


def kr_with_phi() -> Derivation:
    """Γ = {p, p → q, r} ⊢ q in Kr, through Φ = {p, p → q}."""
    phi = (p, Impl(p, q))
    head = big_conj(phi)

    def body(s: ProofBuilder, h):
        return s.mp(s.mp(h[0], s.conj_left(p, Impl(p, q))), s.mp(h[0], s.conj_right(p, Impl(p, q))))

    b = ProofBuilder(System.KR)
    top = b.via_deduction([head], body)
    d = b.derivation(top)
    return Derivation(System.KR, d.lines, (p, Impl(p, q), r), d.convention, phi)


def naive_necessitation() -> Derivation:
    return Derivation(System.NAIVE, (ProofLine(p, Premise()), ProofLine(box(p), RN(1))), (p,))


def kb_premise_witness() -> Derivation:
    """p ⊢ □p attempted in Kb with the premise as witness (rejected)."""
    return Derivation(System.KB, (ProofLine(p, Premise()), ProofLine(box(p), RNWitnessed(1, (1,)))), (p,))


# ---------------------------------------------------------------------------
# admissible-rule realisations in Kd


def admissible_rules() -> dict[str, tuple[Derivation, str]]:
    out = {}
    b = ProofBuilder(System.KD)
    out["rule_nec"] = (b.derivation(b.rn(b.identity(p))), "phi / box phi, at phi := p -> p")
    b = ProofBuilder(System.KD)
    out["rule_mono"] = (b.derivation(b.k_rule(b.conj_left(p, q))), "phi -> psi / box phi -> box psi, at p & q -> p")
    b = ProofBuilder(System.KD)
    out["rule_re"] = (
        b.derivation(b.re_rule(b.iff_intro(b.dni(p), b.dne(p)))),
        "phi <-> psi / box phi <-> box psi, at p <-> ~~p",
    )
    b = ProofBuilder(System.KD)
    curried = b.via_deduction([p, Impl(p, q)], lambda s, h: s.mp(h[0], h[1]))
    boxed = b.chain(b.k_rule(curried), b.ax("K", p=Impl(p, q), q=q))
    out["rule_kc"] = (
        b.derivation(b.uncurry(boxed)),
        "phi1 & phi2 -> phi / box phi1 & box phi2 -> box phi, at p & (p -> q) -> q",
    )
    return out


def identity_proof() -> Derivation:
    b = ProofBuilder(System.KB)
    return b.derivation(b.identity(p))


# ---------------------------------------------------------------------------
# file rendering


def render_files() -> dict[str, str]:
    """File name -> contents for every bundled proof file."""
    files = {}
    re_ = re_derivation()
    files["re.prf"] = format_proof(re_.derivation, re_.steps, re_.title)
    du = dual_from_dual_derivation()
    files["dual_from_dual.prf"] = format_proof(du.derivation, du.steps, du.title)
    files["identity.prf"] = format_proof(identity_proof(), None, "|- a -> a in Kb, for a := p")
    for name, (d, title) in admissible_rules().items():
        files[f"{name}.prf"] = format_proof(d, None, f"Kd realisation of {title}")
    files["kr_with_phi.prf"] = format_proof(kr_with_phi(), None, "Kr consequence through a finite subset phi")
    files["naive_necessitation.prf"] = format_proof(
        naive_necessitation(), None, "p |- box p under the naive classical definition"
    )
    files["kb_premise_witness.prf"] = format_proof(
        kb_premise_witness(), None, "p |- box p in Kb; the witness cites a premise, so this must be rejected"
    )
    for item in premise_derivations(System.KB):
        files[f"kb_{item.name}.prf"] = format_proof(item.derivation, None, f"Kb derivation with premises: {item.name}")
    return files


def write_files(directory: Path = CORPUS_DIR) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in render_files().items():
        path = directory / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written


__all__ = [
    "CORPUS_DIR",
    "Annotated",
    "build",
    "admissible_rules",
    "corpus_files",
    "corpus_path",
    "dual_from_dual_derivation",
    "dual_key_formulas",
    "kb_premise_witness",
    "kr_theorems",
    "kr_with_phi",
    "ktilde_theorems",
    "identity_proof",
    "load_corpus",
    "naive_necessitation",
    "premise_derivations",
    "re_derivation",
    "re_key_formulas",
    "render_files",
    "write_files",
]
