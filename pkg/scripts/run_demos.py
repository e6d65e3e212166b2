"""Run the four command-line demonstrations back to back."""

import sys

from modalwb.cli import DEMOS, run

if __name__ == "__main__":
    codes = {}
    for name in sorted(DEMOS):
        print(f"=== demo {name}")
        codes[name] = run(["demo", name])
    print(", ".join(f"{k}: exit {v}" for k, v in codes.items()))
    sys.exit(max(codes.values()))
