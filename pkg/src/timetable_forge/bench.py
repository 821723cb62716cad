"""Benchmark harness: seven dimension-matched instances and the three-phase stress sweep."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .engine import SolverConfig, Status, solve
from .instance import GeneratorParams, TimeGrid, generate_instance, validate_instance
from .model import RootInfeasible, compile_instance

TABLE1_DIMS = ((1, 2, 1), (2, 4, 4), (3, 4, 6), (5, 4, 10), (8, 8, 16), (12, 8, 24), (24, 16, 48))
CSV_HEADER = ["phase", "teachers", "sections", "courses", "routines", "status", "wall_ms", "nodes", "conflicts"]
THREADS_ENV = "TIMETABLE_FORGE_THREADS"


@dataclass(frozen=True)
class BenchRow:
    phase: int
    teachers: int
    sections: int
    courses: int
    status: str
    wall_ms: float
    nodes: int
    conflicts: int

    @property
    def routines(self) -> int:
        return self.teachers + self.sections

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.teachers, self.sections, self.courses, self.routines)

    def csv_row(self) -> list:
        return [
            self.phase, self.teachers, self.sections, self.courses, self.routines,
            self.status, f"{self.wall_ms:.1f}", self.nodes, self.conflicts,
        ]


@dataclass(frozen=True)
class SweepSpec:
    phases: tuple[int, ...] = (1, 2, 3)
    course_counts: tuple[int, ...] = tuple(range(2, 105, 6))
    grid: TimeGrid = field(default_factory=TimeGrid)
    room_count: int = 16
    seed: int = 0
    timeout_millis: int = 300_000
    # generator knobs; sections = max(2, ceil(courses / courses_per_section))
    courses_per_section: int = 3
    credit_hours_range: tuple[int, int] = (2, 3)
    sections_per_class_range: tuple[int, int] = (1, 2)
    busy_fraction: float = 0.0

    def __post_init__(self):
        if not self.course_counts:
            raise ValueError("course_counts must be non-empty")
        if list(self.course_counts) != sorted(set(self.course_counts)):
            raise ValueError("course_counts must be strictly ascending")
        if not self.phases or min(self.phases) < 1:
            raise ValueError("phases must be positive courses-per-teacher values")

    def params_for(self, phase: int, courses: int) -> GeneratorParams:
        teachers = -(-courses // phase)
        sections = max(2, -(-courses // self.courses_per_section), self.sections_per_class_range[1])
        return GeneratorParams(
            teachers=teachers,
            sections=sections,
            courses=courses,
            courses_per_teacher=phase,
            credit_hours_range=self.credit_hours_range,
            sections_per_class_range=self.sections_per_class_range,
            grid=self.grid,
            room_count=self.room_count,
            busy_fraction=self.busy_fraction,
        )


def load_sweep_spec(raw: bytes | str) -> SweepSpec:
    doc = json.loads(raw)
    counts = doc.get("courseCounts", {"start": 2, "stop": 104, "step": 6})
    if isinstance(counts, dict):
        counts = range(counts["start"], counts["stop"] + 1, counts.get("step", 1))
    kwargs = {"course_counts": tuple(counts)}
    if "phases" in doc:
        kwargs["phases"] = tuple(doc["phases"])
    if "grid" in doc:
        kwargs["grid"] = TimeGrid(doc["grid"]["days"], doc["grid"]["slotsPerDay"])
    for key, attr in (
        ("roomCount", "room_count"),
        ("seed", "seed"),
        ("timeoutMillis", "timeout_millis"),
        ("coursesPerSection", "courses_per_section"),
        ("busyFraction", "busy_fraction"),
    ):
        if key in doc:
            kwargs[attr] = doc[key]
    for key, attr in (("creditHoursRange", "credit_hours_range"), ("sectionsPerClassRange", "sections_per_class_range")):
        if key in doc:
            kwargs[attr] = tuple(doc[key])
    return SweepSpec(**kwargs)


def _run_one(job: tuple[int, GeneratorParams, int, int]) -> BenchRow:
    phase, params, seed, timeout = job
    inst = generate_instance(params, seed)
    errors = validate_instance(inst)
    if errors:
        raise ValueError(f"generator produced an invalid instance: {errors[0]}")
    try:
        model = compile_instance(inst)
    except RootInfeasible:
        return BenchRow(phase, params.teachers, params.sections, params.courses, Status.UNSAT.value, 0.0, 0, 0)
    # wall time covers the solve only
    t0 = time.perf_counter()
    out = solve(model, SolverConfig(timeout_millis=timeout, seed=seed))
    wall = (time.perf_counter() - t0) * 1000.0
    return BenchRow(
        phase, params.teachers, params.sections, params.courses, out.status.value, wall,
        out.stats.nodes, out.stats.conflicts,
    )


def worker_count() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return n


def _run_jobs(jobs: list) -> list[BenchRow]:
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def table1_params(teachers: int, sections: int, courses: int) -> GeneratorParams:
    return GeneratorParams(
        teachers=teachers,
        sections=sections,
        courses=courses,
        courses_per_teacher=-(-courses // teachers),
        credit_hours_range=(2, 3),
        sections_per_class_range=(1, 2),
        grid=TimeGrid(5, 6),
        room_count=sections,
    )


def run_table1(seed: int = 0, timeout_millis: int = 300_000) -> list[BenchRow]:
    """One instance per dimension column; the phase field holds the column number (1-7)."""
    jobs = [(i + 1, table1_params(*dims), seed, timeout_millis) for i, dims in enumerate(TABLE1_DIMS)]
    return _run_jobs(jobs)


def run_sweep(spec: SweepSpec) -> list[BenchRow]:
    jobs = [
        (phase, spec.params_for(phase, courses), spec.seed, spec.timeout_millis)
        for phase in spec.phases
        for courses in spec.course_counts
    ]
    return _run_jobs(jobs)


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def scaling_correlation(rows: list[BenchRow]) -> float:
    """Spearman rank correlation between routine count and solve wall time."""
    from scipy.stats import spearmanr

    rho = spearmanr([r.routines for r in rows], [r.wall_ms for r in rows]).statistic
    return float(rho)


def spec_to_dict(spec: SweepSpec) -> dict:
    return asdict(spec)
