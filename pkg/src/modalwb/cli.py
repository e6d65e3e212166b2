"""Command-line front end.

Exit codes: 0 verified, 1 checked and refuted, 2 usage or parse error,
3 resource limit.  ``MODAL_BUDGET`` overrides the enumeration ceilings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence, TextIO

from . import canonical, corpus, filtration, proof
from .formula import (
    Convention,
    Formula,
    FormulaSyntaxError,
    Neg,
    Var,
    box,
    chagrov_sigma,
    dia,
    expand,
    is_subformula_closed,
    iff,
    modal_depth,
    parse,
    parse_core,
    pretty,
    pretty_sugared,
    size,
    sub_minus_plus,
    subformulas,
)
from .semantics import (
    Budget,
    FrameClass,
    KripkeModel,
    ModelError,
    ResourceLimit,
    Semantics,
    UnknownWorld,
    consequence_check,
    describe_model,
    dump_model,
    extension,
    load_model,
    satisfies,
    satisfies_nonstandard,
    valid_up_to,
)

OK, REFUTED, USAGE, LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _conv(args) -> Convention:
    return Convention.parse(args.convention)


def _formula(text: str, conv: Convention) -> Formula:
    return parse_core(text, conv)


def _formulas(text: str, conv: Convention) -> list[Formula]:
    return [_formula(part, conv) for part in text.split(",") if part.strip()]


def _show(f: Formula, conv: Convention) -> str:
    return pretty_sugared(f, conv)


# ---------------------------------------------------------------------------
# formula commands


def cmd_parse(args, out: TextIO) -> int:
    conv = _conv(args)
    surface = parse(args.formula, conv)
    core = expand(surface, conv)
    out.write(f"surface: {pretty(surface)}\n")
    out.write(f"core:    {pretty(core)}\n")
    out.write(f"size {size(core)}, modal depth {modal_depth(core)}, convention {conv.value}\n")
    return OK


def cmd_sub(args, out: TextIO) -> int:
    conv = _conv(args)
    f = _formula(args.formula, conv)
    members = sub_minus_plus(f)[1] if args.plus else subformulas(f)
    label = "Sub+" if args.plus else "Sub"
    out.write(f"{label}({pretty(f)}) under {conv.value}: {len(members)} formulas\n")
    for g in members:
        out.write(f"  {pretty(g)}\n")
    return OK


def cmd_eval(args, out: TextIO) -> int:
    conv = _conv(args)
    model = load_model(args.model)
    f = _formula(args.formula, conv)
    if args.nonstandard:
        value = satisfies_nonstandard(model, args.world, f, conv)
    else:
        value = satisfies(model, args.world, f)
    mode = "nonstandard" if args.nonstandard else "standard"
    out.write(f"{args.world} |= {pretty(f)} : {str(value).lower()} ({mode})\n")
    return OK if value else REFUTED


def cmd_valid(args, out: TextIO) -> int:
    conv = _conv(args)
    f = _formula(args.formula, conv)
    fc = FrameClass.parse(args.frame)
    sem = Semantics.NONSTANDARD if args.nonstandard else Semantics.STANDARD
    res = valid_up_to(f, args.max_worlds, fc, sem, Budget.from_env())
    out.write(f"formula {pretty(f)}; frames {fc.value}; max-worlds {args.max_worlds}; semantics {sem.value}\n")
    if res:
        out.write("VALID up to the bound\n")
        return OK
    out.write(f"REFUTED at {res.world}\n{dump_model(res.countermodel)}\n")
    return REFUTED


# ---------------------------------------------------------------------------
# filtration commands


def cmd_filtrate(args, out: TextIO) -> int:
    conv = _conv(args)
    model = load_model(args.model)
    sigma = _formulas(args.sigma, conv)
    if args.close:
        sigma = list(subformulas(sigma))
    build = filtration.smallest_filtration if args.kind == "smallest" else filtration.largest_filtration
    try:
        filtered = build(model, sigma, conv)
    except filtration.NotClosed as exc:
        member, missing = exc.witness
        out.write(f"NOT CLOSED: {pretty(missing)} is a subformula of {pretty(member)} but not in sigma\n")
        return REFUTED
    out.write(json.dumps(filtered.to_json(), indent=2, ensure_ascii=False) + "\n")
    report = filtration.audit_filtration(model, filtered, sigma, conv)
    for line in report.lines():
        out.write(line + "\n")
    violations = filtration.check_filtration_theorem(model, filtered, sigma)
    out.write(f"FILTRATION THEOREM {'PASS' if not violations else 'FAIL'} ({len(violations)} violations)\n")
    for v in violations:
        out.write(f"  {v}\n")
    return OK if report.ok and not violations else REFUTED


def cmd_k5_fmp(args, out: TextIO) -> int:
    model = load_model(args.model)
    phi = _formula(args.formula, Convention.DIAMOND)
    try:
        filtered = filtration.k5_fmp_countermodel(model, phi)
    except filtration.NotEuclidean as exc:
        out.write(f"input frame is not Euclidean: {exc.witness}\n")
        return REFUTED
    except filtration.NotFalsified as exc:
        out.write(f"nothing to do: {exc}\n")
        return REFUTED
    return _report_k5(model, phi, filtered, out)


def _report_k5(model: KripkeModel, phi: Formula, filtered, out: TextIO) -> int:
    sigma = filtration.k5_closure(phi)
    out.write(f"K5 closure of {pretty(phi)}: {len(sigma.representatives)} normal forms\n")
    out.write(json.dumps(filtered.to_json(), indent=2, ensure_ascii=False) + "\n")
    from .semantics import frame_has_property

    checks = []
    euclid = frame_has_property(filtered.model, FrameClass.EUCLIDEAN)
    checks.append(("output Euclidean", euclid.holds))
    report = filtration.audit_filtration(model, filtered, sigma, Convention.DIAMOND)
    checks.append(("audit", report.ok))
    bad_ext = extension(model, phi)
    falsifiers = [w for w in model.worlds if w not in bad_ext]
    img_ext = extension(filtered.model, phi)
    checks.append(("phi falsified at image", all(filtered.image(w) not in img_ext for w in falsifiers)))
    violations = filtration.check_filtration_theorem(model, filtered, sigma.base())
    checks.append(("filtration theorem over finite base", not violations))
    base = filtration.finite_base_check(sigma, model)
    checks.append(("finite base", base.ok))
    for name, ok in checks:
        out.write(f"{name}: {'PASS' if ok else 'FAIL'}\n")
    return OK if all(ok for _, ok in checks) else REFUTED


# ---------------------------------------------------------------------------
# canonical commands


def cmd_kl_canonical(args, out: TextIO) -> int:
    phi = _formula(args.formula, Convention.DIAMOND)
    mcm = canonical.build_minimal_canonical(phi, args.variant)
    out.write(f"minimal canonical model for {pretty(phi)}, variant {args.variant}\n")
    out.write(f"{len(mcm.worlds)} worlds, {len(mcm.model.rel)} pairs\n")
    for i, g in enumerate(mcm.worlds):
        succ = [mcm.model.worlds.index(u) for u in mcm.model.successors(mcm.model.worlds[i])]
        out.write(f"  W{i} = {g.label()}  ->  {', '.join(f'W{j}' for j in succ) or '-'}\n")
    if not args.truth_lemma:
        return OK
    violations = canonical.check_truth_lemma(mcm)
    out.write(f"TRUTH LEMMA {'PASS' if not violations else 'FAIL'} ({len(violations)} violations)\n")
    for v in violations:
        idx = mcm.model.worlds.index(v.world)
        out.write(f"  W{idx}: {pretty(v.formula)} member={v.member} true={v.true}\n")
    return OK if not violations else REFUTED


# ---------------------------------------------------------------------------
# proof commands


def _proof_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = corpus.corpus_path(path.name)
    if bundled.exists():
        return bundled
    raise FileNotFoundError(name)


def cmd_proof_check(args, out: TextIO) -> int:
    d = proof.load_proof(_proof_path(args.file), system=args.system)
    verdict = proof.check_derivation(d, sdual_as_written=args.sdual_as_written)
    where = f"{d.system.value}, {len(d)} lines"
    if verdict:
        out.write(f"OK ({where}): {_show(d.conclusion, d.convention)}\n")
        return OK
    out.write(f"REJECTED ({where}): {type(verdict.error).__name__}: {verdict.error}\n")
    return REFUTED


_CYCLE = [proof.System.KR, proof.System.KB, proof.System.KD]


def cmd_proof_transform(args, out: TextIO) -> int:
    d = proof.load_proof(_proof_path(args.file))
    target = proof.System.parse(args.to)
    if d.system not in _CYCLE:
        raise UsageError(f"cannot translate from {d.system.value}")
    while d.system is not target:
        nxt = _CYCLE[(_CYCLE.index(d.system) + 1) % 3]
        d = proof.translate(d, d.system, nxt)
    out.write(proof.format_proof(d))
    return OK


def cmd_proof_deduce(args, out: TextIO) -> int:
    d = proof.load_proof(_proof_path(args.file))
    psi = _formula(args.discharge, d.convention)
    out.write(proof.format_proof(proof.deduction_transform(d, psi)))
    return OK


# ---------------------------------------------------------------------------
# demos


def _claim(out: TextIO, text: str, ok: bool) -> bool:
    out.write(f"[{'ok' if ok else 'FAILED'}] {text}\n")
    return ok


def demo_dual(out: TextIO) -> bool:
    conv = Convention.DIAMOND
    p = Var("p")
    model = KripkeModel(("w",), frozenset({("w", "w")}), {"p": frozenset({"w"})})
    out.write(f"model: {describe_model(model)}\n")
    not_box_not = Neg(box(Neg(p), conv))
    ns_nbn = satisfies_nonstandard(model, "w", not_box_not, conv)
    ns_dia = satisfies_nonstandard(model, "w", dia(p, conv), conv)
    good = _claim(out, f"nonstandard: w |= {_show(not_box_not, conv)} is {str(ns_nbn).lower()}", ns_nbn)
    good &= _claim(out, f"nonstandard: w |= dia p is {str(ns_dia).lower()}", not ns_dia)
    good &= _claim(out, "standard: both hold at w", satisfies(model, "w", not_box_not) and satisfies(model, "w", dia(p)))
    dual = iff(dia(p, conv), not_box_not)
    res = valid_up_to(dual, 1, FrameClass.ALL, Semantics.NONSTANDARD)
    good &= _claim(out, f"{_show(dual, conv)} fails under the nonstandard semantics", not res)
    failures = 0
    items = corpus.ktilde_theorems()
    for _, d in items:
        failures += len(proof.soundness_sweep(d, Semantics.NONSTANDARD, 2).failures)
    good &= _claim(out, f"{len(items)} Ktilde theorem proofs: {failures} nonstandard failures up to 2 worlds", failures == 0)
    return good


def demo_filtration(out: TextIO) -> bool:
    box_p = parse_core("box p", Convention.BOX)
    sigma = chagrov_sigma(box_p)
    closed = is_subformula_closed(sigma, Convention.BOX)
    good = _claim(out, "Sigma = Sub(box p) + {dia box p} under the box convention: "
                       f"{', '.join(pretty(f) for f in sigma)}", True)
    if closed.witness:
        member, missing = closed.witness
        good &= _claim(out, f"not closed: {pretty(member)} needs {pretty(missing)}", not closed.closed)
    else:
        good &= _claim(out, "not closed", False)
    phi = Var("p")
    for conv, expect in ((Convention.BOX, False), (Convention.BOTH, True)):
        gamma = filtration.popkorn_gamma_star(phi, 1, conv)
        check = is_subformula_closed(gamma, conv)
        note = "closed" if check.closed else f"not closed, missing {pretty(check.witness[1])}"
        good &= _claim(out, f"Gamma*_1(p) under {conv.value}: {len(gamma)} formulas, {note}", check.closed == expect)
    model = KripkeModel(
        ("w0", "w1", "w2", "w3"),
        frozenset({("w0", "w1"), ("w0", "w2"), ("w1", "w1"), ("w1", "w2"), ("w2", "w1"), ("w2", "w2"),
                   ("w3", "w3")}),
        {"p": frozenset({"w1"}), "q": frozenset({"w0", "w3"})},
    )
    f = parse_core("dia p -> box dia p & (q -> dia q)")
    out.write(f"k5-fmp on a 4-world Euclidean model, phi = {pretty_sugared(f)}\n")
    filtered = filtration.k5_fmp_countermodel(model, f)
    good &= _claim(out, "K5 pipeline checks", _report_k5(model, f, filtered, out) == OK)
    return good


def demo_canonical(out: TextIO) -> bool:
    good = True
    for text in ("dia p", "dia ~dia p"):
        phi = parse_core(text)
        only_d, only_b = canonical.relation_difference(phi)
        out.write(f"phi = {text}: {len(only_d)} pairs only in the diamond relation, {len(only_b)} only in the box relation\n")
        for variant in ("diamond", "box"):
            mcm = canonical.build_minimal_canonical(phi, variant)
            v = canonical.check_truth_lemma(mcm)
            out.write(f"  {variant}: {len(mcm.worlds)} worlds, {len(mcm.model.rel)} pairs, "
                      f"truth lemma violations {len(v)}\n")
            if variant == "diamond":
                good &= _claim(out, f"diamond-variant truth lemma for {text}", not v)
        good &= _claim(out, f"the two relations differ for {text}", bool(only_d or only_b))
    return good


def demo_necessitation(out: TextIO) -> bool:
    p = Var("p")
    d = corpus.naive_necessitation()
    good = _claim(out, "naive classical definition accepts p |- box p", bool(proof.check_derivation(d)))
    kb = corpus.kb_premise_witness()
    good &= _claim(out, "Kb rejects necessitating the premise", not proof.check_derivation(kb))
    local = consequence_check([p], box(p), "local", 3, budget=Budget.from_env())
    good &= _claim(out, "box p is not a local consequence of p (max 3 worlds)", not local)
    if not local:
        out.write(f"  countermodel at {local.world}: {describe_model(local.countermodel)}\n")
    glob = consequence_check([p], box(p), "global", 3, budget=Budget.from_env())
    good &= _claim(out, "box p is a global consequence of p (max 3 worlds)", bool(glob))
    return good


DEMOS = {
    "dual": demo_dual,
    "filtration": demo_filtration,
    "canonical": demo_canonical,
    "necessitation": demo_necessitation,
}


def cmd_demo(args, out: TextIO) -> int:
    return OK if DEMOS[args.name](out) else REFUTED


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modalwb", description="Modal logic workbench")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_conv(p, default="diamond"):
        p.add_argument("--convention", default=default, choices=["box", "diamond", "both"])
        return p

    p = with_conv(sub.add_parser("parse", help="parse and expand a formula"))
    p.add_argument("formula")
    p.set_defaults(func=cmd_parse)

    p = with_conv(sub.add_parser("sub", help="list subformulas"))
    p.add_argument("formula")
    p.add_argument("--plus", action="store_true", help="list Sub+ instead")
    p.set_defaults(func=cmd_sub)

    p = with_conv(sub.add_parser("eval", help="evaluate at a world"))
    p.add_argument("formula")
    p.add_argument("--model", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--nonstandard", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = with_conv(sub.add_parser("valid", help="bounded validity"))
    p.add_argument("formula")
    p.add_argument("--max-worlds", type=int, default=3)
    p.add_argument("--frame", default="all", choices=["all", "euclidean", "ti"])
    p.add_argument("--nonstandard", action="store_true")
    p.set_defaults(func=cmd_valid)

    p = with_conv(sub.add_parser("filtrate", help="filtrate a model through sigma"))
    p.add_argument("--model", required=True)
    p.add_argument("--sigma", required=True, help="comma-separated formulas")
    p.add_argument("--close", action="store_true", help="close sigma under subformulas first")
    p.add_argument("--kind", default="smallest", choices=["smallest", "largest"])
    p.set_defaults(func=cmd_filtrate)

    p = sub.add_parser("k5-fmp", help="finite Euclidean countermodel via K5 closure")
    p.add_argument("--model", required=True)
    p.add_argument("--formula", required=True)
    p.set_defaults(func=cmd_k5_fmp)

    p = sub.add_parser("kl-canonical", help="minimal canonical model for KL")
    p.add_argument("--formula", required=True)
    p.add_argument("--variant", default="diamond", choices=["diamond", "box"])
    p.add_argument("--truth-lemma", action="store_true")
    p.set_defaults(func=cmd_kl_canonical)

    p = sub.add_parser("proof", help="proof checking and transformation")
    psub = p.add_subparsers(dest="proof_command", required=True, parser_class=_Parser)
    c = psub.add_parser("check")
    c.add_argument("file")
    c.add_argument("--system", choices=[s.value for s in proof.System])
    c.add_argument("--sdual-as-written", action="store_true")
    c.set_defaults(func=cmd_proof_check)
    c = psub.add_parser("transform")
    c.add_argument("file")
    c.add_argument("--to", required=True, choices=["kr", "kb", "kd"])
    c.set_defaults(func=cmd_proof_transform)
    c = psub.add_parser("deduce")
    c.add_argument("file")
    c.add_argument("--discharge", required=True)
    c.set_defaults(func=cmd_proof_deduce)

    p = sub.add_parser("demo", help="reproduce one of the four demonstrations")
    p.add_argument("name", choices=sorted(DEMOS))
    p.set_defaults(func=cmd_demo)
    return parser


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return USAGE
    except (FormulaSyntaxError, proof.ProofSyntaxError, ModelError, UnknownWorld, FileNotFoundError) as exc:
        err.write(f"error: {exc}\n")
        return USAGE
    except (ResourceLimit, canonical.ResourceLimit) as exc:
        err.write(f"resource limit: {exc}\n")
        return LIMIT
    except proof.TransformFailed as exc:
        err.write(f"transform failed: {exc}\n")
        return REFUTED
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
