"""Solve one synthetic instance per dimension column (1 to 24 teachers) and print a CSV."""

import argparse
import sys

from timetable_forge.bench import rows_to_csv, run_table1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--timeout", type=int, default=300_000, help="milliseconds per instance")
    ap.add_argument("--out", help="CSV path (default stdout)")
    args = ap.parse_args()

    rows = run_table1(seed=args.seed, timeout_millis=args.timeout)
    text = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for r in rows:
        print(f"column {r.phase}: routines={r.routines} {r.status} {r.wall_ms:.1f}ms", file=sys.stderr)


if __name__ == "__main__":
    main()
