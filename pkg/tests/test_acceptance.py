"""Acceptance criteria, each at its stated tolerance.

Every test appends one ``criterion N PASS/FAIL`` line to the session log
(printed in the terminal summary) and prints it immediately.
"""

import json
import statistics
import subprocess
import sys
import time

from corpus import tiny_instance
from test_schedule import BASE_ASSIGNMENT, BASE_CLASSES, MUTATIONS
from conftest import make_instance
from timetable_forge.bench import SweepSpec, run_sweep, run_table1, scaling_correlation
from timetable_forge.engine import SolverConfig, Status, solve
from timetable_forge.instance import (
    GeneratorParams,
    TimeGrid,
    generate_instance,
    instance_stats,
    serialize_instance,
    validate_instance,
)
from timetable_forge.model import RootInfeasible, compile_instance
from timetable_forge.oracle import enumerate_solutions
from timetable_forge.schedule import VIOLATION_CODES, assign_rooms, check_schedule, materialize


def record(log, n, ok, detail):
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {detail}"
    log.append(line)
    print(line)
    assert ok, line


def status_of(inst, config=SolverConfig()):
    try:
        return solve(compile_instance(inst), config).status
    except RootInfeasible:
        return Status.UNSAT


def oracle_status(inst):
    return Status.SAT if enumerate_solutions(inst).solution_count else Status.UNSAT


def test_criterion_1_oracle_equivalence(acceptance_log):
    t0 = time.perf_counter()
    mismatches, n, sat = 0, 0, 0
    for seed in range(400):
        inst = tiny_instance(seed, max_lectures=6, max_slots=8)
        s = instance_stats(inst)
        assert s.lecture_count <= 6 and s.global_slot_count <= 8
        expected = oracle_status(inst)
        mismatches += status_of(inst) is not expected
        sat += expected is Status.SAT
        n += 1
    elapsed = time.perf_counter() - t0
    record(
        acceptance_log, 1, mismatches == 0 and n >= 300 and elapsed < 60,
        f"{n} instances ({sat} SAT), {mismatches} mismatches, {elapsed:.1f}s (< 60s)",
    )


def _soundness_params(i):
    teachers = 1 + i % 8
    courses = 1 + (i * 7) % 16  # at most 16 courses x 3 credits = 48 lectures
    # ~3 courses per section keeps section routines well below the 30 weekly slots
    sections = max(2, -(-courses // 3)) + i % 3
    return GeneratorParams(
        teachers=teachers,
        sections=sections,
        courses=courses,
        courses_per_teacher=-(-courses // teachers),
        grid=TimeGrid(5, 6),
        room_count=sections,
        busy_fraction=(i % 4) / 10,
    )


def test_criterion_2_soundness(acceptance_log):
    bad, biggest = [], 0
    for i in range(1000):
        inst = generate_instance(_soundness_params(i), seed=i)
        assert validate_instance(inst) == []
        biggest = max(biggest, instance_stats(inst).lecture_count)
        model = compile_instance(inst)
        out = solve(model, SolverConfig(timeout_millis=60_000))
        if not out.is_sat:
            bad.append((i, out.status.value))
            continue
        sched = materialize(out.assignment, model, inst)
        if check_schedule(inst, sched):
            bad.append((i, "violations"))
            continue
        assign_rooms(inst, sched)
    record(acceptance_log, 2, not bad and biggest <= 50, f"1000 instances up to {biggest} lectures, failures={bad[:5]}")


def test_criterion_3_table1(acceptance_log):
    t0 = time.perf_counter()
    rows = run_table1(seed=0, timeout_millis=300_000)
    total = time.perf_counter() - t0
    last = rows[-1]
    ok = all(r.status == "SAT" for r in rows) and last.dims == (24, 16, 48, 40)
    ok = ok and last.wall_ms < 120_000 and total < 300
    record(
        acceptance_log, 3, ok,
        f"statuses={[r.status for r in rows]}, column 7 {last.wall_ms:.0f}ms (< 120s), total {total:.1f}s (< 300s)",
    )


def test_criterion_4_sweep(acceptance_log):
    spec = SweepSpec(phases=(1, 2, 3), course_counts=tuple(range(2, 105, 6)))
    t0 = time.perf_counter()
    rows = run_sweep(spec)
    total = time.perf_counter() - t0
    rho = scaling_correlation(rows)
    ok = len(rows) == 54 and all(r.status == "SAT" for r in rows) and total < 1800 and rho > 0.5
    record(acceptance_log, 4, ok, f"{len(rows)} rows all SAT={all(r.status == 'SAT' for r in rows)}, {total:.1f}s, rho={rho:.3f} (> 0.5)")


def test_criterion_5_learning_restart_invariance(acceptance_log):
    configs = (
        SolverConfig(learning=True, restart_policy="luby"),
        SolverConfig(learning=True, restart_policy="none"),
        SolverConfig(learning=False, restart_policy="none"),
    )
    differing = []
    for seed in range(1000):
        inst = tiny_instance(seed, max_lectures=6, max_slots=8)
        statuses = {status_of(inst, c) for c in configs}
        if len(statuses) != 1:
            differing.append(seed)
    record(acceptance_log, 5, not differing, f"1000 instances, status differs on {len(differing)}")


LEARNING_FAMILY = GeneratorParams(
    teachers=6, sections=6, courses=16, courses_per_teacher=3, grid=TimeGrid(5, 2), room_count=4
)


def test_criterion_6_learning_benefit(acceptance_log):
    on_cfg = SolverConfig(learning=True, timeout_millis=15_000)
    off_cfg = SolverConfig(learning=False, restart_policy="none", timeout_millis=15_000)
    on, off, lectures, skipped = [], [], [], 0
    seed = 0
    while len(on) < 20 and seed < 60:
        inst = generate_instance(LEARNING_FAMILY, seed)
        seed += 1
        model = compile_instance(inst)
        a, b = solve(model, on_cfg), solve(model, off_cfg)
        if Status.TIMEOUT in (a.status, b.status):
            skipped += 1
            continue
        assert a.status is b.status
        on.append(a.stats.conflicts)
        off.append(b.stats.conflicts)
        lectures.append(instance_stats(inst).lecture_count)
    med_on, med_off = statistics.median(on), statistics.median(off)
    ok = len(on) >= 20 and med_on <= med_off
    record(
        acceptance_log, 6, ok,
        f"{len(on)} instances ({min(lectures)}-{max(lectures)} lectures, {skipped} timed out), "
        f"median conflicts on={med_on} off={med_off}",
    )


def test_criterion_7_infeasibility(acceptance_log):
    timings = {}

    t0 = time.perf_counter()
    inst = make_instance([("k", 6, "T", ["S"])], days=5, slots=6)
    credit_ok = "CreditExceedsDays" in {e.code for e in validate_instance(inst)}
    timings["credit"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    cells = {(d, s) for d in range(5) for s in range(6)}
    try:
        compile_instance(make_instance([("k", 2, "T", ["S"])], days=5, slots=6, busy=[("T", cells)]))
        busy_ok = False
    except RootInfeasible:
        busy_ok = True
    timings["busy"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    clash = make_instance([("a", 1, "T", ["S1"]), ("b", 1, "T", ["S2"])], days=1, slots=1, rooms=2)
    search_ok = solve(compile_instance(clash)).status is Status.UNSAT
    timings["clash"] = time.perf_counter() - t0

    ok = credit_ok and busy_ok and search_ok and max(timings.values()) < 1.0
    detail = ", ".join(f"{k} {v * 1000:.1f}ms" for k, v in timings.items())
    record(acceptance_log, 7, ok, f"credit={credit_ok} busy={busy_ok} clash={search_ok}; {detail} (each < 1s)")


def test_criterion_8_mutation_coverage(acceptance_log):
    inst = make_instance(BASE_CLASSES, days=3, slots=2, rooms=1)
    model = compile_instance(inst)
    base = materialize(BASE_ASSIGNMENT, model, inst)
    assert check_schedule(inst, base) == []
    covered = set()
    for code, mutate in MUTATIONS.items():
        sched = base.copy()
        mutated_inst = mutate(inst, sched)
        if code in {v.code for v in check_schedule(mutated_inst, sched)}:
            covered.add(code)
    missing = sorted(set(VIOLATION_CODES) - covered)
    record(acceptance_log, 8, not missing, f"{len(covered)}/7 codes triggered, missing={missing}")


def _cli(args):
    return subprocess.run([sys.executable, "-m", "timetable_forge", *args], capture_output=True)


def test_criterion_9_determinism(acceptance_log, tmp_path):
    sat = tmp_path / "sat.json"
    sat.write_bytes(serialize_instance(generate_instance(GeneratorParams(8, 8, 16, courses_per_teacher=2), 0)))
    hard = tmp_path / "hard.json"
    hard.write_bytes(serialize_instance(generate_instance(LEARNING_FAMILY, 0)))
    checks = []
    for path, code in ((sat, 0), (hard, 20)):
        argv = ["solve", "-i", str(path), "--seed", "3", "--format", "json"]
        a, b = _cli(argv), _cli(argv)
        same = a.stdout == b.stdout and a.returncode == b.returncode == code
        sa, sb = json.loads(a.stdout)["stats"], json.loads(b.stdout)["stats"]
        same = same and (sa["nodes"], sa["conflicts"]) == (sb["nodes"], sb["conflicts"])
        checks.append((path.name, same, sa["nodes"], sa["conflicts"]))
    record(acceptance_log, 9, all(c[1] for c in checks), f"byte-identical runs: {checks}")

