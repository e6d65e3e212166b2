"""Check the eight K5 modality reductions on small frames.

Each reduction l -> r is turned into the formula l p <-> r p.  It must hold on
every Euclidean model with at most four worlds and fail on some model with at
most three worlds (which is then necessarily non-Euclidean).
"""

import argparse
import time

from modalwb.filtration import K5_REWRITES
from modalwb.formula import Dia, Var, box, iff, pretty_sugared
from modalwb.semantics import FrameClass, describe_model, frame_has_property, valid_up_to


def word_formula(word, kernel):
    f = kernel
    for c in reversed(word):
        f = Dia(f) if c == "D" else box(f)
    return f


def equivalences():
    p = Var("p")
    return [(l, r, iff(word_formula(l, p), word_formula(r, p))) for l, r in K5_REWRITES.items()]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--euclidean-worlds", type=int, default=4)
    ap.add_argument("--counter-worlds", type=int, default=3)
    args = ap.parse_args()
    start = time.perf_counter()
    ok = True
    for l, r, f in equivalences():
        valid = valid_up_to(f, args.euclidean_worlds, FrameClass.EUCLIDEAN)
        counter = valid_up_to(f, args.counter_worlds, FrameClass.ALL)
        euclid = counter.countermodel is not None and frame_has_property(counter.countermodel, FrameClass.EUCLIDEAN).holds
        good = valid.holds and not counter.holds and not euclid
        ok &= good
        print(f"{l} -> {r}: {pretty_sugared(f)}")
        print(f"  Euclidean <= {args.euclidean_worlds}: {'valid' if valid.holds else 'REFUTED'}")
        if counter.countermodel is not None:
            print(f"  counter-model at {counter.world}: {describe_model(counter.countermodel)}")
        else:
            print(f"  no counter-model with <= {args.counter_worlds} worlds")
    print(f"{'all eight pass' if ok else 'FAILURES'} in {time.perf_counter() - start:.1f}s")
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
