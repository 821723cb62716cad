"""Routine arrays built from a solved assignment, plus validation, rooms and export.

Cells hold 1-based class numbers (position in ``Instance.classes`` plus one);
0 marks a free cell.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .instance import Instance
from .model import CompiledModel

FREE = 0
VIOLATION_CODES = (
    "DoubleBooking",
    "CourseEntityMismatch",
    "RoomOverflow",
    "CreditMismatch",
    "TeacherBusyClash",
    "RepeatSameDay",
    "UnscheduledClass",
)


class CellCollision(RuntimeError):
    pass


class DimensionMismatch(ValueError):
    pass


class UnsupportedFormat(ValueError):
    pass


@dataclass(eq=False)
class Schedule:
    teachers: tuple[str, ...]
    sections: tuple[str, ...]
    class_ids: tuple[str, ...]
    teacher_routine: np.ndarray  # [teacher, day, slot]
    section_routine: np.ndarray  # [section, day, slot]

    @property
    def days(self) -> int:
        return self.teacher_routine.shape[1]

    @property
    def slots_per_day(self) -> int:
        return self.teacher_routine.shape[2]

    def copy(self) -> Schedule:
        return Schedule(
            self.teachers, self.sections, self.class_ids, self.teacher_routine.copy(), self.section_routine.copy()
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Schedule):
            return NotImplemented
        return (
            self.teachers == other.teachers
            and self.sections == other.sections
            and self.class_ids == other.class_ids
            and np.array_equal(self.teacher_routine, other.teacher_routine)
            and np.array_equal(self.section_routine, other.section_routine)
        )


@dataclass(frozen=True)
class Placement:
    class_no: int
    day: int
    slot: int
    room: int


@dataclass(eq=False)
class RoomedSchedule:
    schedule: Schedule
    placements: tuple[Placement, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, RoomedSchedule):
            return NotImplemented
        return self.schedule == other.schedule and self.placements == other.placements


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    location: tuple[int, int] | None = None

    def __str__(self) -> str:
        where = f" at day {self.location[0]} slot {self.location[1]}" if self.location else ""
        return f"{self.code}({self.subject}){where}"


def empty_schedule(inst: Instance) -> Schedule:
    d, t = inst.grid.days, inst.grid.slots_per_day
    return Schedule(
        teachers=tuple(inst.teachers),
        sections=tuple(inst.sections),
        class_ids=tuple(c.class_id for c in inst.classes),
        teacher_routine=np.zeros((len(inst.teachers), d, t), dtype=np.int32),
        section_routine=np.zeros((len(inst.sections), d, t), dtype=np.int32),
    )


def materialize(assignment: dict[int, int], model: CompiledModel, inst: Instance) -> Schedule:
    sched = empty_schedule(inst)
    t_index = {t: i for i, t in enumerate(inst.teachers)}
    s_index = {s: i for i, s in enumerate(inst.sections)}
    for var in model.vars:
        if var.var_id not in assignment:
            raise ValueError(f"assignment misses variable {var.var_id}")
        day, slot = inst.grid.to_day_slot(assignment[var.var_id])
        cls = inst.classes[var.class_index]
        no = var.class_index + 1
        planes = [(sched.teacher_routine, t_index[cls.teacher_id])]
        planes += [(sched.section_routine, s_index[s]) for s in cls.section_ids]
        for arr, row in planes:
            if arr[row, day, slot] != FREE:
                raise CellCollision(f"class {cls.class_id} collides at day {day} slot {slot}")
            arr[row, day, slot] = no
    return sched


def check_schedule(inst: Instance, sched: Schedule) -> list[Violation]:
    """Re-check every timetabling rule on the routine arrays alone.

    A lecture counts as held at a cell whenever any participant's plane shows
    it there. Each participant must then show that class at that cell too: a
    free cell is a CourseEntityMismatch, another class is a DoubleBooking
    (the entity is wanted in two lectures at once).
    """
    d, t = inst.grid.days, inst.grid.slots_per_day
    if (
        sched.teacher_routine.shape != (len(inst.teachers), d, t)
        or sched.section_routine.shape != (len(inst.sections), d, t)
    ):
        raise DimensionMismatch("schedule arrays do not match the instance dimensions")

    found: list[Violation] = []
    seen = set()

    def report(code, subject, loc=None):
        key = (code, subject, loc)
        if key not in seen:
            seen.add(key)
            found.append(Violation(code, subject, loc))

    t_index = {x: i for i, x in enumerate(inst.teachers)}
    s_index = {x: i for i, x in enumerate(inst.sections)}
    credits = {c.course_id: c.credit_hours for c in inst.courses}
    n_classes = len(inst.classes)
    TR, SR = sched.teacher_routine, sched.section_routine

    planes_of = []
    for ci, cls in enumerate(inst.classes):
        planes = [("teacher", cls.teacher_id, TR[t_index[cls.teacher_id]])]
        planes += [("section", s, SR[s_index[s]]) for s in cls.section_ids]
        planes_of.append(planes)

    for kind, names, arr in (("teacher", inst.teachers, TR), ("section", inst.sections, SR)):
        for e, name in enumerate(names):
            for day, slot in zip(*np.nonzero(arr[e])):
                no = int(arr[e, day, slot])
                if not 1 <= no <= n_classes:
                    report("CourseEntityMismatch", name, (int(day), int(slot)))
                    continue
                cls = inst.classes[no - 1]
                attends = cls.teacher_id == name if kind == "teacher" else name in cls.section_ids
                if not attends:
                    report("CourseEntityMismatch", name, (int(day), int(slot)))

    held_at = defaultdict(set)  # (day, slot) -> class numbers held there
    for ci, cls in enumerate(inst.classes):
        no = ci + 1
        cells = set()
        for _, _, plane in planes_of[ci]:
            cells.update(zip(*np.nonzero(plane == no)))
        for day, slot in cells:
            loc = (int(day), int(slot))
            held_at[loc].add(no)
            for _, ename, plane in planes_of[ci]:
                there = int(plane[day, slot])
                if there == FREE:
                    report("CourseEntityMismatch", cls.class_id, loc)
                elif there != no:
                    report("DoubleBooking", ename, loc)

        per_plane = [int((plane == no).sum()) for _, _, plane in planes_of[ci]]
        need = credits.get(cls.course_id, 0)
        if any(c != need for c in per_plane):
            report("CreditMismatch", cls.class_id)
        if not cells:
            report("UnscheduledClass", cls.class_id)
        for _, _, plane in planes_of[ci]:
            days_used = Counter(int(x) for x in np.nonzero(plane == no)[0])
            for day_no, count in sorted(days_used.items()):
                if count > 1:
                    report("RepeatSameDay", f"{cls.class_id}@day{day_no}")

    for loc, classes in sorted(held_at.items()):
        if len(classes) > inst.room_count:
            report("RoomOverflow", f"{len(classes)}>{inst.room_count}", loc)

    for mask in inst.availability:
        if mask.teacher_id not in t_index:
            continue
        plane = TR[t_index[mask.teacher_id]]
        for day, slot in sorted(mask.busy):
            if 0 <= day < d and 0 <= slot < t and plane[day, slot] != FREE:
                report("TeacherBusyClash", mask.teacher_id, (day, slot))
    return found


def assign_rooms(inst: Instance, sched: Schedule) -> RoomedSchedule:
    """Number the classes held in each cell 0, 1, 2, ... in ascending class order."""
    placements = []
    for day in range(sched.days):
        for slot in range(sched.slots_per_day):
            held = set(int(x) for x in sched.teacher_routine[:, day, slot]) | set(
                int(x) for x in sched.section_routine[:, day, slot]
            )
            held.discard(FREE)
            for room, no in enumerate(sorted(held)):
                if room >= inst.room_count:
                    raise ValueError("more classes than rooms in one slot; check_schedule first")
                placements.append(Placement(no, day, slot, room))
    return RoomedSchedule(sched, tuple(placements))


# ----------------------------------------------------------------------------
# export / import
# ----------------------------------------------------------------------------

CSV_HEADER = ["entity_kind", "entity_id", "day", "slot", "class_id", "room"]


def schedule_to_dict(sched: Schedule | RoomedSchedule) -> dict:
    base = sched.schedule if isinstance(sched, RoomedSchedule) else sched
    doc = {
        "grid": {"days": base.days, "slotsPerDay": base.slots_per_day},
        "teachers": list(base.teachers),
        "sections": list(base.sections),
        "classes": list(base.class_ids),
        "teacherRoutine": base.teacher_routine.tolist(),
        "sectionRoutine": base.section_routine.tolist(),
    }
    if isinstance(sched, RoomedSchedule):
        doc["rooms"] = [
            {"classId": p.class_no, "day": p.day, "slot": p.slot, "room": p.room} for p in sched.placements
        ]
    return doc


def schedule_from_dict(doc: dict) -> Schedule | RoomedSchedule:
    try:
        days, per_day = doc["grid"]["days"], doc["grid"]["slotsPerDay"]
        teachers, sections = tuple(doc["teachers"]), tuple(doc["sections"])
        tr = np.array(doc["teacherRoutine"], dtype=np.int32).reshape(len(teachers), days, per_day)
        sr = np.array(doc["sectionRoutine"], dtype=np.int32).reshape(len(sections), days, per_day)
        sched = Schedule(teachers, sections, tuple(doc["classes"]), tr, sr)
        if "rooms" in doc:
            placements = tuple(Placement(p["classId"], p["day"], p["slot"], p["room"]) for p in doc["rooms"])
            return RoomedSchedule(sched, placements)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed schedule document: {exc}") from exc
    return sched


def import_schedule(raw: bytes | str) -> Schedule | RoomedSchedule:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed schedule document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("malformed schedule document: expected an object")
    return schedule_from_dict(doc)


def _rows(sched: Schedule | RoomedSchedule):
    base = sched.schedule if isinstance(sched, RoomedSchedule) else sched
    room_of = {}
    if isinstance(sched, RoomedSchedule):
        room_of = {(p.class_no, p.day, p.slot): p.room for p in sched.placements}
    for kind, names, arr in (("teacher", base.teachers, base.teacher_routine), ("section", base.sections, base.section_routine)):
        for e, name in enumerate(names):
            for day, slot in zip(*np.nonzero(arr[e])):
                no = int(arr[e, day, slot])
                room = room_of.get((no, int(day), int(slot)), "")
                yield [kind, name, int(day), int(slot), no, room]


def _text(sched: Schedule | RoomedSchedule) -> str:
    base = sched.schedule if isinstance(sched, RoomedSchedule) else sched
    width = max(2, len(str(len(base.class_ids))))
    out = []
    for kind, names, arr in (("teacher", base.teachers, base.teacher_routine), ("section", base.sections, base.section_routine)):
        for e, name in enumerate(names):
            out.append(f"{kind} {name}")
            for day in range(base.days):
                cells = [("--" if x == FREE else str(int(x))).rjust(width) for x in arr[e, day]]
                out.append(f"  day {day}: " + " ".join(cells))
    return "\n".join(out) + "\n"


def export_schedule(sched: Schedule | RoomedSchedule, fmt: str = "json", extra: dict | None = None) -> bytes:
    """Serialize a schedule as ``json``, ``csv`` or ``text``.

    ``extra`` keys are merged into the top level of JSON output only.
    """
    if fmt == "json":
        doc = schedule_to_dict(sched)
        if extra:
            doc.update(extra)
        return (json.dumps(doc) + "\n").encode("utf-8")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(_rows(sched))
        return buf.getvalue().encode("utf-8")
    if fmt == "text":
        return _text(sched).encode("utf-8")
    raise UnsupportedFormat(f"unsupported export format {fmt!r}")
