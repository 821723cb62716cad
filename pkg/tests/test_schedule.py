import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timetable_forge.engine import solve
from timetable_forge.instance import AvailabilityMask, GeneratorParams, Instance, TimeGrid, generate_instance
from timetable_forge.model import RootInfeasible, compile_instance
from timetable_forge.schedule import (
    FREE,
    VIOLATION_CODES,
    CellCollision,
    DimensionMismatch,
    Schedule,
    UnsupportedFormat,
    assign_rooms,
    check_schedule,
    empty_schedule,
    export_schedule,
    import_schedule,
    materialize,
)

# a: 2 credits (T1, S1), b: 1 credit (T1, S2), c: 1 credit (T2, S3); 3 days x 2 slots, one room
BASE_CLASSES = [("a", 2, "T1", ["S1"]), ("b", 1, "T1", ["S2"]), ("c", 1, "T2", ["S3"])]
BASE_ASSIGNMENT = {0: 0, 1: 2, 2: 1, 3: 3}


@pytest.fixture
def base(build):
    inst = build(BASE_CLASSES, days=3, slots=2, rooms=1)
    model = compile_instance(inst)
    return inst, model, materialize(BASE_ASSIGNMENT, model, inst)


def codes(inst, sched):
    return {v.code for v in check_schedule(inst, sched)}


def planes(inst, sched, class_no):
    cls = inst.classes[class_no - 1]
    out = [sched.teacher_routine[inst.teachers.index(cls.teacher_id)]]
    out += [sched.section_routine[inst.sections.index(s)] for s in cls.section_ids]
    return out


def move(inst, sched, class_no, src, dst):
    for p in planes(inst, sched, class_no):
        p[src] = FREE
        p[dst] = class_no


# ----------------------------------------------------------------------------
# materialize
# ----------------------------------------------------------------------------


def test_materialize_index_arithmetic(build):
    inst = build([("k", 1, "T", ["S1", "S2"])], days=5, slots=2)
    model = compile_instance(inst)
    sched = materialize({0: 3}, model, inst)
    for arr in (sched.teacher_routine[0], sched.section_routine[0], sched.section_routine[1]):
        assert arr[1, 1] == 1
        assert np.count_nonzero(arr) == 1


def test_materialize_empty_instance():
    inst = Instance(TimeGrid(2, 2), 1, ("T",), ("S",), (), ())
    sched = materialize({}, compile_instance(inst), inst)
    assert not sched.teacher_routine.any() and not sched.section_routine.any()


def test_materialize_collision(build):
    inst = build(BASE_CLASSES, days=3, slots=2, rooms=1)
    with pytest.raises(CellCollision):
        materialize({0: 0, 1: 2, 2: 0, 3: 3}, compile_instance(inst), inst)


def test_base_schedule_is_clean(base):
    inst, _, sched = base
    assert check_schedule(inst, sched) == []


# ----------------------------------------------------------------------------
# check_schedule and mutations
# ----------------------------------------------------------------------------


def test_dimension_mismatch(base, build):
    _, _, sched = base
    other = build(BASE_CLASSES, days=4, slots=2, rooms=1)
    with pytest.raises(DimensionMismatch):
        check_schedule(other, sched)


def test_planes_disagreeing_is_entity_mismatch(base):
    inst, _, sched = base
    sched.section_routine[inst.sections.index("S1"), 0, 0] = FREE
    sched.section_routine[inst.sections.index("S1"), 2, 0] = 1
    assert "CourseEntityMismatch" in codes(inst, sched)


def test_missing_occurrence_is_credit_mismatch(base):
    inst, _, sched = base
    for p in planes(inst, sched, 1):
        p[1, 0] = FREE
    assert codes(inst, sched) == {"CreditMismatch"}


def test_all_occurrences_missing_adds_unscheduled(base):
    inst, _, sched = base
    for p in planes(inst, sched, 1):
        p[:] = np.where(p == 1, FREE, p)
    assert codes(inst, sched) == {"CreditMismatch", "UnscheduledClass"}


def _double_booking(inst, sched):
    # T1 is shown teaching b where a is held
    sched.teacher_routine[inst.teachers.index("T1"), 0, 0] = 2
    return inst


def _entity_mismatch(inst, sched):
    sched.section_routine[inst.sections.index("S3"), 1, 1] = 1
    return inst


def _room_overflow(inst, sched):
    move(inst, sched, 3, (1, 1), (0, 0))
    return inst


def _credit_mismatch(inst, sched):
    for p in planes(inst, sched, 1):
        p[1, 0] = FREE
    return inst


def _busy_clash(inst, sched):
    return Instance(
        inst.grid, inst.room_count, inst.teachers, inst.sections, inst.courses, inst.classes,
        (AvailabilityMask("T2", frozenset({(1, 1)})),),
    )


def _repeat_same_day(inst, sched):
    move(inst, sched, 2, (0, 1), (2, 1))  # clear the cell first
    move(inst, sched, 1, (1, 0), (0, 1))
    return inst


def _unscheduled(inst, sched):
    for p in planes(inst, sched, 3):
        p[1, 1] = FREE
    return inst


MUTATIONS = {
    "DoubleBooking": _double_booking,
    "CourseEntityMismatch": _entity_mismatch,
    "RoomOverflow": _room_overflow,
    "CreditMismatch": _credit_mismatch,
    "TeacherBusyClash": _busy_clash,
    "RepeatSameDay": _repeat_same_day,
    "UnscheduledClass": _unscheduled,
}


def test_every_code_has_a_mutation():
    assert set(MUTATIONS) == set(VIOLATION_CODES)


@pytest.mark.parametrize("code", VIOLATION_CODES)
def test_mutation_triggers_code(base, code):
    inst, _, sched = base
    mutated = sched.copy()
    inst2 = MUTATIONS[code](inst, mutated)
    assert code in codes(inst2, mutated)
    assert check_schedule(inst, sched) == []  # original untouched


def test_repeat_same_day_subject(base):
    inst, _, sched = base
    _repeat_same_day(inst, sched)
    hits = [v for v in check_schedule(inst, sched) if v.code == "RepeatSameDay"]
    assert {v.subject for v in hits} == {"a@day0"}


def test_room_overflow_location(base):
    inst, _, sched = base
    _room_overflow(inst, sched)
    hits = [v for v in check_schedule(inst, sched) if v.code == "RoomOverflow"]
    assert [v.location for v in hits] == [(0, 0)]


def _solved(params, seed):
    inst = generate_instance(params, seed)
    try:
        model = compile_instance(inst)
    except RootInfeasible:
        return None
    out = solve(model)
    if not out.is_sat:
        return None
    return inst, materialize(out.assignment, model, inst)


LOOSE = GeneratorParams(teachers=4, sections=5, courses=8, grid=TimeGrid(5, 4), room_count=3, busy_fraction=0.2)


@settings(max_examples=30)
@given(st.integers(0, 10_000), st.data())
def test_deleting_any_lecture_is_detected(seed, data):
    got = _solved(LOOSE, seed)
    if got is None:
        return
    inst, sched = got
    no = data.draw(st.integers(1, len(inst.classes)))
    cell = tuple(np.argwhere(planes(inst, sched, no)[0] == no)[data.draw(st.integers(0, 1))])
    for p in planes(inst, sched, no):
        p[cell] = FREE
    assert "CreditMismatch" in codes(inst, sched)


@given(st.integers(0, 10_000))
def test_filled_cells_equal_credit_sum(seed):
    got = _solved(LOOSE, seed)
    if got is None:
        return
    inst, sched = got
    credit = {c.course_id: c.credit_hours for c in inst.courses}
    for i, t in enumerate(inst.teachers):
        want = sum(credit[c.course_id] for c in inst.classes if c.teacher_id == t)
        assert np.count_nonzero(sched.teacher_routine[i]) == want
    for i, s in enumerate(inst.sections):
        want = sum(credit[c.course_id] for c in inst.classes if s in c.section_ids)
        assert np.count_nonzero(sched.section_routine[i]) == want


# ----------------------------------------------------------------------------
# rooms
# ----------------------------------------------------------------------------


def test_rooms_in_ascending_class_order(build):
    classes = [(f"k{i}", 1, f"T{i}", [f"S{i}"]) for i in range(1, 8)]
    inst = build(classes, days=1, slots=2, rooms=2)
    sched = empty_schedule(inst)
    for no in (7, 3):
        sched.teacher_routine[no - 1, 0, 1] = no
        sched.section_routine[no - 1, 0, 1] = no
    placed = assign_rooms(inst, sched).placements
    assert [(p.class_no, p.room) for p in placed] == [(3, 0), (7, 1)]
    assert all((p.day, p.slot) == (0, 1) for p in placed)


def test_rooms_for_empty_schedule(build):
    inst = build(BASE_CLASSES, days=3, slots=2, rooms=1)
    assert assign_rooms(inst, empty_schedule(inst)).placements == ()


@given(st.integers(0, 10_000))
def test_rooms_distinct_and_in_range(seed):
    got = _solved(LOOSE, seed)
    if got is None:
        return
    inst, sched = got
    placed = assign_rooms(inst, sched).placements
    assert len(placed) == sum({c.course_id: c.credit_hours for c in inst.courses}[k.course_id] for k in inst.classes)
    by_cell = {}
    for p in placed:
        assert 0 <= p.room < inst.room_count
        by_cell.setdefault((p.day, p.slot), []).append(p.room)
    for rooms in by_cell.values():
        assert len(rooms) == len(set(rooms))


def test_full_slot_uses_every_room(base):
    inst, _, sched = base
    rooms = assign_rooms(inst, sched)
    assert all(p.room == 0 for p in rooms.placements)


# ----------------------------------------------------------------------------
# export
# ----------------------------------------------------------------------------


def test_json_round_trip(base):
    inst, _, sched = base
    assert import_schedule(export_schedule(sched, "json")) == sched
    roomed = assign_rooms(inst, sched)
    assert import_schedule(export_schedule(roomed, "json")) == roomed


def test_json_extra_keys(base):
    _, _, sched = base
    doc = json.loads(export_schedule(sched, "json", extra={"status": "SAT"}))
    assert doc["status"] == "SAT"
    assert isinstance(import_schedule(json.dumps(doc)), Schedule)


def test_csv_one_lecture(build):
    inst = build([("k", 1, "T", ["S1", "S2"])], days=5, slots=2)
    sched = materialize({0: 3}, compile_instance(inst), inst)
    rows = list(csv.reader(io.StringIO(export_schedule(sched, "csv").decode())))
    assert rows[0] == ["entity_kind", "entity_id", "day", "slot", "class_id", "room"]
    assert rows[1:] == [
        ["teacher", "T", "1", "1", "1", ""],
        ["section", "S1", "1", "1", "1", ""],
        ["section", "S2", "1", "1", "1", ""],
    ]
    roomed = list(csv.reader(io.StringIO(export_schedule(assign_rooms(inst, sched), "csv").decode())))
    assert [r[-1] for r in roomed[1:]] == ["0", "0", "0"]


def test_text_of_empty_schedule(build):
    inst = build(BASE_CLASSES, days=3, slots=2, rooms=1)
    text = export_schedule(empty_schedule(inst), "text").decode()
    grid_lines = [ln for ln in text.splitlines() if ln.startswith("  day")]
    assert len(grid_lines) == 3 * (2 + 3)
    assert all(ln.split(": ")[1].split() == ["--", "--"] for ln in grid_lines)


def test_unknown_format(base):
    with pytest.raises(UnsupportedFormat):
        export_schedule(base[2], "ical")
