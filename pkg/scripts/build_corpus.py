"""Regenerate the bundled proof files under src/modalwb/prf/.

Every file is re-checked after writing; kb_premise_witness.prf is expected
to be rejected.
"""

from modalwb.corpus import write_files
from modalwb.proof import check_derivation, load_proof

EXPECT_REJECTED = {"kb_premise_witness.prf"}


def main():
    bad = 0
    for path in write_files():
        verdict = check_derivation(load_proof(path))
        expected = path.name not in EXPECT_REJECTED
        status = "ok" if bool(verdict) == expected else "UNEXPECTED"
        bad += status != "ok"
        note = "" if verdict else f" (rejected: {verdict.error})"
        print(f"{status:10s} {path.name}: {len(load_proof(path))} lines{note}")
    raise SystemExit(1 if bad else 0)


if __name__ == "__main__":
    main()
