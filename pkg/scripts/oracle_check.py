"""Cross-check solver status against exhaustive enumeration on tiny random instances."""

import argparse
import random
import time

from timetable_forge.engine import SolverConfig, Status, solve
from timetable_forge.instance import AvailabilityMask, ClassEntry, Course, Instance, TimeGrid
from timetable_forge.model import RootInfeasible, compile_instance
from timetable_forge.oracle import enumerate_solutions


def tiny(seed, max_lectures=6, max_slots=8):
    rng = random.Random(seed)
    days = rng.randint(1, 4)
    per_day = rng.randint(1, max(1, max_slots // days))
    teachers = [f"T{i}" for i in range(rng.randint(1, 3))]
    sections = [f"S{i}" for i in range(rng.randint(1, 3))]
    courses, classes, left = [], [], max_lectures
    for i in range(rng.randint(1, 4)):
        credit = rng.randint(1, min(days, left)) if left else 0
        if not credit:
            break
        left -= credit
        courses.append(Course(f"C{i}", credit))
        secs = tuple(rng.sample(sections, rng.randint(1, len(sections))))
        classes.append(ClassEntry(f"K{i}", f"C{i}", rng.choice(teachers), secs))
    busy = tuple(
        AvailabilityMask(t, frozenset({(rng.randrange(days), rng.randrange(per_day))}))
        for t in teachers
        if rng.random() < 0.3
    )
    return Instance(TimeGrid(days, per_day), rng.randint(1, 3), tuple(teachers), tuple(sections),
                    tuple(courses), tuple(classes), busy)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=500)
    args = ap.parse_args()
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(args.count):
        inst = tiny(seed)
        expected = Status.SAT if enumerate_solutions(inst).solution_count else Status.UNSAT
        try:
            got = solve(compile_instance(inst), SolverConfig()).status
        except RootInfeasible:
            got = Status.UNSAT
        if got is not expected:
            mismatches += 1
            print(f"seed {seed}: solver {got.value} oracle {expected.value}")
    print(f"{args.count} instances, {mismatches} mismatches, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
