"""Command-line entry point: ``timetable-forge <subcommand> ...``.

Exit codes: 0 success/SAT, 20 UNSAT, 30 timeout, 1 usage/IO/schema error,
2 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .engine import SolverConfig, Status, solve
from .instance import (
    GeneratorParams,
    InfeasibleParams,
    InstanceFormatError,
    TimeGrid,
    generate_instance,
    instance_stats,
    parse_instance,
    serialize_instance,
    validate_instance,
)
from .model import RootInfeasible, classify_constraints, compile_instance, dump_model
from .oracle import TooLarge, enumerate_solutions
from .schedule import UnsupportedFormat, assign_rooms, check_schedule, export_schedule, import_schedule, materialize

EXIT_OK, EXIT_USAGE, EXIT_INTERNAL, EXIT_UNSAT, EXIT_TIMEOUT = 0, 1, 2, 20, 30
STATUS_EXIT = {Status.SAT: EXIT_OK, Status.UNSAT: EXIT_UNSAT, Status.TIMEOUT: EXIT_TIMEOUT}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="timetable-forge", description="Class timetabling with a nogood-learning solver.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def instance_arg(sp):
        sp.add_argument("-i", "--instance", required=True, help="instance JSON file")
        sp.add_argument("--lenient", action="store_true", help="ignore unknown keys in the instance")

    s = sub.add_parser("solve", help="solve an instance and export the schedule")
    instance_arg(s)
    s.add_argument("--learning", choices=["on", "off"], default="on")
    s.add_argument("--restarts", choices=["luby", "none"], default="luby")
    s.add_argument("--luby-base", type=int, default=100)
    s.add_argument("--heuristic", choices=["minDomain", "inputOrder"], default="minDomain")
    s.add_argument("--timeout", type=int, default=300_000, help="milliseconds")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write output here instead of stdout")
    s.add_argument("--format", choices=["json", "csv", "text"], default="json")
    s.add_argument("--rooms-assign", action="store_true", help="attach room numbers to every lecture")
    s.add_argument("--dump-model", action="store_true", help="print the compiled model as JSON and exit")

    v = sub.add_parser("validate", help="check an instance, or a schedule against it")
    instance_arg(v)
    v.add_argument("--schedule", help="schedule JSON produced by 'solve --format json'")

    o = sub.add_parser("oracle", help="exhaustively count solutions of a tiny instance")
    instance_arg(o)
    o.add_argument("--limit", type=int, required=True, help="number of solutions to print")
    o.add_argument("--no-ordering", action="store_true", help="count occurrence permutations separately")

    g = sub.add_parser("generate", help="emit a seeded random instance")
    g.add_argument("--teachers", type=int, required=True)
    g.add_argument("--sections", type=int, required=True)
    g.add_argument("--courses", type=int, required=True)
    g.add_argument("--courses-per-teacher", type=int)
    g.add_argument("--credit-min", type=int, default=2)
    g.add_argument("--credit-max", type=int, default=3)
    g.add_argument("--sections-per-class-min", type=int, default=1)
    g.add_argument("--sections-per-class-max", type=int, default=2)
    g.add_argument("--days", type=int, default=5)
    g.add_argument("--slots", type=int, default=6, help="slots per day")
    g.add_argument("--rooms", type=int, default=4)
    g.add_argument("--busy-fraction", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")

    st = sub.add_parser("stats", help="print instance statistics")
    instance_arg(st)

    b = sub.add_parser("bench", help="run the seven dimension-matched scaling instances or a stress sweep")
    mode = b.add_mutually_exclusive_group(required=True)
    mode.add_argument("--table1", action="store_true")
    mode.add_argument("--sweep", metavar="SPECFILE")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--timeout", type=int, default=300_000, help="milliseconds per instance (table1)")
    b.add_argument("--out")
    return p


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(data: bytes, out: str | None) -> None:
    if out:
        try:
            Path(out).write_bytes(data)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror}") from exc
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_valid(args):
    inst = parse_instance(_read(args.instance), strict=not args.lenient)
    errors = validate_instance(inst)
    if errors:
        more = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        raise UsageError(f"invalid instance: {errors[0]}{more}")
    return inst


def _cmd_solve(args) -> int:
    inst = _load_valid(args)
    try:
        model = compile_instance(inst)
    except RootInfeasible as exc:
        _diag(f"status=UNSAT reason=root-infeasible {exc}")
        if args.format == "json":
            _emit((json.dumps({"status": "UNSAT", "stats": None}) + "\n").encode(), args.out)
        return EXIT_UNSAT
    if args.dump_model:
        _emit((dump_model(model) + "\n").encode(), args.out)
        return EXIT_OK

    config = SolverConfig(
        learning=args.learning == "on",
        restart_policy=args.restarts,
        luby_base=args.luby_base,
        heuristic=args.heuristic,
        timeout_millis=args.timeout,
        seed=args.seed,
    )
    out = solve(model, config)
    st = out.stats
    _diag(
        f"status={out.status.value} nodes={st.nodes} conflicts={st.conflicts} "
        f"propagations={st.propagations} learned={st.learned_nogoods} wall_ms={st.wall_millis:.1f}"
    )
    meta = {"status": out.status.value, "stats": st.as_dict(with_time=False)}
    if not out.is_sat:
        if args.format == "json":
            _emit((json.dumps(meta) + "\n").encode(), args.out)
        return STATUS_EXIT[out.status]

    sched = materialize(out.assignment, model, inst)
    violations = check_schedule(inst, sched)
    if violations:
        _diag(f"internal error: solver produced an invalid schedule: {violations[0]}")
        return EXIT_INTERNAL
    result = assign_rooms(inst, sched) if args.rooms_assign else sched
    _emit(export_schedule(result, args.format, extra=meta), args.out)
    return EXIT_OK


def _cmd_validate(args) -> int:
    inst = parse_instance(_read(args.instance), strict=not args.lenient)
    errors = validate_instance(inst)
    for e in errors:
        print(e)
    if errors:
        _diag(f"{len(errors)} instance error(s)")
        return EXIT_USAGE
    if args.schedule:
        try:
            sched = import_schedule(_read(args.schedule))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        base = getattr(sched, "schedule", sched)
        violations = check_schedule(inst, base)
        for v in violations:
            print(v)
        if violations:
            _diag(f"{len(violations)} violation(s)")
            return EXIT_USAGE
        print("schedule ok")
    else:
        print("instance ok")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    inst = _load_valid(args)
    if args.limit < 0:
        raise UsageError("--limit must be >= 0")
    res = enumerate_solutions(inst, args.limit, use_ordering=not args.no_ordering)
    print(f"count={res.solution_count} exhausted={str(res.exhausted).lower()}")
    labels = [f"{cid}#{occ}" for cid, occ in res.lectures]
    for sol in res.solutions:
        print(" ".join(f"{lab}={inst.grid.to_day_slot(g)[0]}:{inst.grid.to_day_slot(g)[1]}" for lab, g in zip(labels, sol)))
    return EXIT_OK


def _cmd_generate(args) -> int:
    params = GeneratorParams(
        teachers=args.teachers,
        sections=args.sections,
        courses=args.courses,
        courses_per_teacher=args.courses_per_teacher or -(-args.courses // max(1, args.teachers)),
        credit_hours_range=(args.credit_min, args.credit_max),
        sections_per_class_range=(args.sections_per_class_min, args.sections_per_class_max),
        grid=TimeGrid(args.days, args.slots),
        room_count=args.rooms,
        busy_fraction=args.busy_fraction,
    )
    _emit(serialize_instance(generate_instance(params, args.seed)), args.out)
    return EXIT_OK


def _cmd_stats(args) -> int:
    inst = _load_valid(args)
    s = instance_stats(inst)
    print(f"lectures={s.lecture_count}")
    print(f"global_slots={s.global_slot_count}")
    print(f"search_space={s.search_space_size}")
    print(f"routines={s.routine_count}")
    print(f"teachers={len(inst.teachers)}")
    print(f"sections={len(inst.sections)}")
    print(f"courses={len(inst.courses)}")
    try:
        counts = classify_constraints(compile_instance(inst))
        print("categories=" + ",".join(f"{k}:{v}" for k, v in counts.items()))
    except RootInfeasible as exc:
        print(f"categories=unavailable ({exc})")
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.table1:
        rows = bench.run_table1(seed=args.seed, timeout_millis=args.timeout)
    else:
        try:
            spec = bench.load_sweep_spec(_read(args.sweep))
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"bad sweep spec: {exc}") from exc
        rows = bench.run_sweep(spec)
    _emit(bench.rows_to_csv(rows).encode(), args.out)
    if len(rows) >= 2:
        _diag(f"spearman(routines, wall_ms)={bench.scaling_correlation(rows):.3f}")
    return EXIT_OK


COMMANDS = {
    "solve": _cmd_solve,
    "validate": _cmd_validate,
    "oracle": _cmd_oracle,
    "generate": _cmd_generate,
    "stats": _cmd_stats,
    "bench": _cmd_bench,
}


def run(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, InstanceFormatError, InfeasibleParams, UnsupportedFormat, TooLarge) as exc:
        _diag(f"error: {exc}")
        return EXIT_USAGE
    except ValueError as exc:
        _diag(f"error: {exc}")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
