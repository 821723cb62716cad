"""Three-phase stress sweep; prints the CSV and the routines/time rank correlation."""

import argparse
import sys
from pathlib import Path

from timetable_forge.bench import SweepSpec, load_sweep_spec, rows_to_csv, run_sweep, scaling_correlation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--spec", help="sweep spec JSON (default: phases 1-3, courses 2..104 step 6)")
    ap.add_argument("--out", help="CSV path (default stdout)")
    ap.add_argument("--plot", help="optional PNG of wall time against routines (needs matplotlib)")
    args = ap.parse_args()

    spec = load_sweep_spec(Path(args.spec).read_bytes()) if args.spec else SweepSpec()
    rows = run_sweep(spec)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    statuses = {r.status for r in rows}
    print(f"rows={len(rows)} statuses={sorted(statuses)} spearman={scaling_correlation(rows):.3f}", file=sys.stderr)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for phase in spec.phases:
            pts = [(r.routines, r.wall_ms) for r in rows if r.phase == phase]
            ax.plot(*zip(*pts), marker="o", label=f"{phase} course(s)/teacher")
        ax.set_xlabel("routines (teachers + sections)")
        ax.set_ylabel("solve wall time (ms)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
