#!/usr/bin/env python3
"""Rate table over a parameter grid, plus the equality check between the two
lifted rates.  Writes CSV and prints a short summary.

    python3 scripts/rate_sweep.py --max-n 8 --out results/rates.csv
"""

from __future__ import annotations

import argparse
from collections import Counter
from pathlib import Path

from liftpir.rates import equality_sweep, rate_grid, to_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=8)
    ap.add_argument("--max-m", type=int, default=5)
    ap.add_argument("--decimal", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("results/rates.csv"))
    args = ap.parse_args()

    rows = rate_grid(range(2, args.max_n + 1), range(1, args.max_n), range(1, args.max_n),
                     range(2, args.max_m + 1))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(to_csv(rows, decimal=args.decimal))

    sweep = equality_sweep(args.max_n, range(2, args.max_m + 1))
    tally = Counter((r["equal"], r["condition"]) for r in sweep)
    print(f"{len(rows)} rows -> {args.out}")
    print(f"rational co-dimension rate <= integer co-dimension rate everywhere: {all(r['le'] for r in sweep)}")
    print(f"equal & condition: {tally[(True, True)]}, unequal & no condition: {tally[(False, False)]}, "
          f"mismatches: {tally[(True, False)] + tally[(False, True)]}")


if __name__ == "__main__":
    main()
