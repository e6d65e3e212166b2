"""Search for a filtration theorem violation when Sigma is not subformula closed.

Sigma = {dia p} omits p, so the quotient valuation for p is empty and the
biconditional can break.  Every relation on the classes that satisfies
clauses (2) and (3) is tried; the first violation is printed.
"""

import argparse

from modalwb.filtration import (
    audit_filtration,
    check_filtration_theorem,
    equivalence_classes,
    filtration_from_relation,
)
from modalwb.formula import Convention, parse_core, pretty
from modalwb.semantics import FrameClass, dump_model, iter_models

from search_clause_asymmetry import relations


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-worlds", type=int, default=3)
    args = ap.parse_args()
    sigma = [parse_core("dia p")]
    tried = 0
    for model, _ in iter_models(args.max_worlds, ["p"], FrameClass.ALL):
        part = equivalence_classes(model, sigma)
        base = {(part.class_of[a], part.class_of[b]) for a, b in model.rel}
        for pairs in relations(len(part.classes), base):
            filtered = filtration_from_relation(model, sigma, pairs)
            tried += 1
            if not audit_filtration(model, filtered, sigma, Convention.DIAMOND).ok:
                continue
            violations = check_filtration_theorem(model, filtered, sigma)
            if violations:
                print(f"after {tried} candidates:")
                print(dump_model(model))
                print("filtered relation:", sorted(filtered.model.rel))
                for v in violations:
                    print(f"  {v.world}: {pretty(v.formula)} model={v.in_model} filtration={v.in_filtration}")
                return
    print(f"no violation among {tried} candidates")


if __name__ == "__main__":
    main()
