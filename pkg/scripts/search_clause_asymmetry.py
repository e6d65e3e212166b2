"""Search for a filtration relation where (3') holds but (3) fails.

Under the diamond convention with a subformula-closed Sigma, every relation
satisfying (1), (2) and (3) also satisfies (3').  This script checks that
direction on every generated instance and prints the first instance of the
converse failing.  The printed instance is pinned in the test suite.
"""

import argparse
import itertools

from modalwb.filtration import audit_filtration, modal_members, equivalence_classes, filtration_from_relation
from modalwb.formula import Convention, parse_core, pretty, subformulas
from modalwb.semantics import FrameClass, dump_model, iter_models

SEEDS = ["dia p", "box p", "dia ~p", "box dia p", "dia box p", "~dia ~dia p"]


def relations(k, base):
    """All relations on k classes containing ``base``."""
    free = [(a, b) for a in range(k) for b in range(k) if (a, b) not in base]
    for bits in itertools.product((False, True), repeat=len(free)):
        yield sorted(set(base) | {pair for pair, on in zip(free, bits) if on})


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-worlds", type=int, default=3)
    args = ap.parse_args()
    conv = Convention.DIAMOND
    checked = asymmetric = 0
    first = None
    for text in SEEDS:
        sigma = subformulas(parse_core(text, conv))
        boxed = bool(modal_members(sigma, conv)[1])
        for model, _ in iter_models(args.max_worlds, ["p"], FrameClass.ALL):
            part = equivalence_classes(model, sigma)
            base = {(part.class_of[a], part.class_of[b]) for a, b in model.rel}
            for pairs in relations(len(part.classes), base):
                filtered = filtration_from_relation(model, sigma, pairs)
                report = audit_filtration(model, filtered, sigma, conv)
                checked += 1
                p3, p3p = report.passed("(3)"), report.passed("(3')")
                if p3 and not p3p:
                    raise SystemExit(f"(3) without (3') on {text}: {dump_model(model)}")
                if p3p and not p3:
                    asymmetric += 1
                    # prefer an instance where (3') is not vacuous
                    if first is None and boxed:
                        first = (text, model, filtered, report)
    print(f"{checked} instances checked, (3) => (3') held on all of them")
    print(f"{asymmetric} instances have (3') without (3)")
    if first:
        text, model, filtered, report = first
        print(f"first: sigma = Sub({text}) = {{{', '.join(pretty(f) for f in subformulas(parse_core(text)))}}}")
        print(dump_model(model))
        print("filtered relation:", sorted(filtered.model.rel))
        for line in report.lines():
            print(line)


if __name__ == "__main__":
    main()
