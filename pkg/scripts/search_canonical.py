"""Search small formulas for which the two canonical relations differ.

Enumerates formulas over p (and optionally q) up to a size bound and modal
depth 2, builds both minimal canonical models and reports the relation
difference and truth-lemma violation counts.  If nothing differs, it says so.
"""

import argparse
import itertools

from modalwb.canonical import build_minimal_canonical, check_truth_lemma, relation_difference
from modalwb.formula import Dia, Impl, Neg, Var, modal_depth, pretty_sugared, size


def formulas(max_size, atoms):
    by_size = {1: [Var(a) for a in atoms]}
    for n in range(2, max_size + 1):
        out = []
        for f in by_size[n - 1]:
            out += [Neg(f), Dia(f)]
        for k in range(1, n - 1):
            for a, b in itertools.product(by_size[k], by_size[n - 1 - k]):
                out.append(Impl(a, b))
        by_size[n] = out
    for n in range(1, max_size + 1):
        yield from by_size[n]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-size", type=int, default=5)
    ap.add_argument("--atoms", default="p")
    ap.add_argument("--limit", type=int, default=10, help="witnesses to print")
    args = ap.parse_args()
    found = tried = 0
    for f in formulas(args.max_size, args.atoms.split(",")):
        if modal_depth(f) > 2 or modal_depth(f) == 0:
            continue
        tried += 1
        only_d, only_b = relation_difference(f)
        if not (only_d or only_b):
            continue
        found += 1
        if found <= args.limit:
            box_viol = len(check_truth_lemma(build_minimal_canonical(f, "box")))
            dia_viol = len(check_truth_lemma(build_minimal_canonical(f, "diamond")))
            both = " (both directions)" if only_d and only_b else ""
            print(f"{pretty_sugared(f):28s} size {size(f)}: diamond-only {len(only_d)}, box-only {len(only_b)}{both}; "
                  f"truth lemma violations diamond {dia_viol}, box {box_viol}")
    if found:
        print(f"{found} of {tried} formulas (depth <= 2) separate the relations")
    else:
        print(f"no witness at depth <= 2 among {tried} formulas")


if __name__ == "__main__":
    main()
