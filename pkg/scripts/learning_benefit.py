"""Compare conflicts with and without nogood learning on crowded ~40-lecture instances."""

import argparse
import statistics

from timetable_forge.engine import SolverConfig, Status, solve
from timetable_forge.instance import GeneratorParams, TimeGrid, generate_instance, instance_stats
from timetable_forge.model import compile_instance

FAMILY = GeneratorParams(teachers=6, sections=6, courses=16, courses_per_teacher=3, grid=TimeGrid(5, 2), room_count=4)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=26)
    ap.add_argument("--timeout", type=int, default=15_000, help="milliseconds per run")
    args = ap.parse_args()

    configs = {
        "on": SolverConfig(timeout_millis=args.timeout),
        "off": SolverConfig(learning=False, restart_policy="none", timeout_millis=args.timeout),
    }
    done = {"on": [], "off": []}
    print("seed lectures status_on conflicts_on ms_on status_off conflicts_off ms_off")
    for seed in range(args.seeds):
        inst = generate_instance(FAMILY, seed)
        model = compile_instance(inst)
        out = {k: solve(model, c) for k, c in configs.items()}
        cells = " ".join(
            f"{o.status.value} {o.stats.conflicts} {o.stats.wall_millis:.0f}" for o in out.values()
        )
        print(f"{seed} {instance_stats(inst).lecture_count} {cells}")
        if all(o.status is not Status.TIMEOUT for o in out.values()):
            for k, o in out.items():
                done[k].append(o.stats.conflicts)
    n = len(done["on"])
    if n:
        print(f"completed={n} median_on={statistics.median(done['on'])} median_off={statistics.median(done['off'])}")


if __name__ == "__main__":
    main()
