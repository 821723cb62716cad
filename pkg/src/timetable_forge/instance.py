"""Scheduling instances: data types, file format, validation, statistics and a seeded generator."""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any

INT64_MAX = 2**63 - 1


class InstanceFormatError(ValueError):
    """Base class for problems found while reading an instance document."""


class InstanceSyntaxError(InstanceFormatError):
    """The document is not well-formed JSON."""


class SchemaError(InstanceFormatError):
    """The document is JSON but does not have the expected shape."""


class InfeasibleParams(ValueError):
    """Generator parameters that can never produce a valid instance."""


@dataclass(frozen=True)
class TimeGrid:
    days: int = 5
    slots_per_day: int = 6

    @property
    def global_slots(self) -> int:
        return self.days * self.slots_per_day

    def to_global(self, day: int, slot: int) -> int:
        return day * self.slots_per_day + slot

    def to_day_slot(self, g: int) -> tuple[int, int]:
        return divmod(g, self.slots_per_day)


@dataclass(frozen=True)
class Course:
    course_id: str
    credit_hours: int


@dataclass(frozen=True)
class ClassEntry:
    class_id: str
    course_id: str
    teacher_id: str
    section_ids: tuple[str, ...]


@dataclass(frozen=True)
class AvailabilityMask:
    teacher_id: str
    busy: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class Instance:
    grid: TimeGrid
    room_count: int
    teachers: tuple[str, ...]
    sections: tuple[str, ...]
    courses: tuple[Course, ...]
    classes: tuple[ClassEntry, ...]
    availability: tuple[AvailabilityMask, ...] = ()

    def course_map(self) -> dict[str, Course]:
        return {c.course_id: c for c in self.courses}

    def credit_of(self, entry: ClassEntry) -> int:
        return self.course_map()[entry.course_id].credit_hours

    def busy_of(self) -> dict[str, set[tuple[int, int]]]:
        """Busy cells per teacher; several masks for one teacher are merged."""
        out: dict[str, set[tuple[int, int]]] = {}
        for mask in self.availability:
            out.setdefault(mask.teacher_id, set()).update(mask.busy)
        return out


@dataclass(frozen=True)
class InstanceError:
    code: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        tail = f": {self.detail}" if self.detail else ""
        return f"{self.code}({self.subject}){tail}"


@dataclass(frozen=True)
class InstanceStats:
    lecture_count: int
    global_slot_count: int
    search_space_size: int
    routine_count: int


# ----------------------------------------------------------------------------
# parsing / serialization
# ----------------------------------------------------------------------------

_TOP_KEYS = {"grid", "roomCount", "teachers", "sections", "courses", "classes", "teacherBusy"}
_OPTIONAL_TOP = {"teacherBusy"}


def _check_keys(obj: dict, required: set[str], where: str, strict: bool, optional: set[str] = frozenset()) -> None:
    missing = sorted(required - optional - obj.keys())
    if missing:
        raise SchemaError(f"{where}: missing field '{missing[0]}'")
    extra = sorted(obj.keys() - required)
    if strict and extra:
        raise SchemaError(f"{where}: unknown field '{extra[0]}'")


def _int(value: Any, where: str) -> int:
    # bool is a subclass of int; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected integer, got {type(value).__name__}")
    return value


def _str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{where}: expected string, got {type(value).__name__}")
    return value


def _obj(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{where}: expected object, got {type(value).__name__}")
    return value


def _arr(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected array, got {type(value).__name__}")
    return value


def parse_instance(raw: bytes | str, strict: bool = True) -> Instance:
    """Parse an instance document.

    Only the shape of the document is checked here. Dangling references,
    duplicates and range problems are left to :func:`validate_instance` so
    that all of them can be reported together.
    """
    try:
        doc = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceSyntaxError(f"malformed instance document: {exc}") from exc

    doc = _obj(doc, "document")
    _check_keys(doc, _TOP_KEYS, "document", strict, _OPTIONAL_TOP)

    g = _obj(doc["grid"], "grid")
    _check_keys(g, {"days", "slotsPerDay"}, "grid", strict)
    grid = TimeGrid(_int(g["days"], "grid.days"), _int(g["slotsPerDay"], "grid.slotsPerDay"))

    teachers = tuple(_str(t, f"teachers[{i}]") for i, t in enumerate(_arr(doc["teachers"], "teachers")))
    sections = tuple(_str(s, f"sections[{i}]") for i, s in enumerate(_arr(doc["sections"], "sections")))

    courses = []
    for i, c in enumerate(_arr(doc["courses"], "courses")):
        where = f"courses[{i}]"
        c = _obj(c, where)
        _check_keys(c, {"id", "creditHours"}, where, strict)
        courses.append(Course(_str(c["id"], f"{where}.id"), _int(c["creditHours"], f"{where}.creditHours")))

    classes = []
    for i, c in enumerate(_arr(doc["classes"], "classes")):
        where = f"classes[{i}]"
        c = _obj(c, where)
        _check_keys(c, {"id", "courseId", "teacherId", "sectionIds"}, where, strict)
        secs = _arr(c["sectionIds"], f"{where}.sectionIds")
        classes.append(
            ClassEntry(
                _str(c["id"], f"{where}.id"),
                _str(c["courseId"], f"{where}.courseId"),
                _str(c["teacherId"], f"{where}.teacherId"),
                tuple(_str(s, f"{where}.sectionIds[{j}]") for j, s in enumerate(secs)),
            )
        )

    busy: dict[str, set[tuple[int, int]]] = {}
    for i, b in enumerate(_arr(doc.get("teacherBusy", []), "teacherBusy")):
        where = f"teacherBusy[{i}]"
        b = _obj(b, where)
        _check_keys(b, {"teacherId", "day", "slot"}, where, strict)
        tid = _str(b["teacherId"], f"{where}.teacherId")
        busy.setdefault(tid, set()).add((_int(b["day"], f"{where}.day"), _int(b["slot"], f"{where}.slot")))
    availability = tuple(AvailabilityMask(t, frozenset(cells)) for t, cells in busy.items())

    return Instance(
        grid=grid,
        room_count=_int(doc["roomCount"], "roomCount"),
        teachers=teachers,
        sections=sections,
        courses=tuple(courses),
        classes=tuple(classes),
        availability=availability,
    )


def instance_to_dict(inst: Instance) -> dict:
    busy = [
        {"teacherId": m.teacher_id, "day": d, "slot": s}
        for m in inst.availability
        for d, s in sorted(m.busy)
    ]
    return {
        "grid": {"days": inst.grid.days, "slotsPerDay": inst.grid.slots_per_day},
        "roomCount": inst.room_count,
        "teachers": list(inst.teachers),
        "sections": list(inst.sections),
        "courses": [{"id": c.course_id, "creditHours": c.credit_hours} for c in inst.courses],
        "classes": [
            {"id": c.class_id, "courseId": c.course_id, "teacherId": c.teacher_id, "sectionIds": list(c.section_ids)}
            for c in inst.classes
        ],
        "teacherBusy": busy,
    }


def serialize_instance(inst: Instance) -> bytes:
    return (json.dumps(instance_to_dict(inst), indent=2) + "\n").encode("utf-8")


# ----------------------------------------------------------------------------
# validation
# ----------------------------------------------------------------------------


def _duplicates(items) -> list:
    return [k for k, n in Counter(items).items() if n > 1]


def validate_instance(inst: Instance) -> list[InstanceError]:
    errors: list[InstanceError] = []
    add = lambda code, subject, detail="": errors.append(InstanceError(code, str(subject), detail))  # noqa: E731

    if inst.grid.days < 1:
        add("BadGrid", "days", f"days={inst.grid.days}")
    if inst.grid.slots_per_day < 1:
        add("BadGrid", "slotsPerDay", f"slotsPerDay={inst.grid.slots_per_day}")
    if inst.room_count < 1:
        add("BadRoomCount", "roomCount", f"roomCount={inst.room_count}")

    for kind, ids in (
        ("teacher", inst.teachers),
        ("section", inst.sections),
        ("course", [c.course_id for c in inst.courses]),
        ("class", [c.class_id for c in inst.classes]),
    ):
        for dup in _duplicates(ids):
            add("DuplicateId", dup, kind)

    teachers, sections = set(inst.teachers), set(inst.sections)
    courses = inst.course_map()
    for c in inst.courses:
        if c.credit_hours < 1:
            add("NonPositiveCredit", c.course_id, f"creditHours={c.credit_hours}")

    for cls in inst.classes:
        course = courses.get(cls.course_id)
        if course is None:
            add("UnknownCourse", cls.class_id, cls.course_id)
        elif course.credit_hours > inst.grid.days:
            add("CreditExceedsDays", cls.class_id, f"{course.credit_hours} > {inst.grid.days}")
        if cls.teacher_id not in teachers:
            add("UnknownTeacher", cls.class_id, cls.teacher_id)
        if not cls.section_ids:
            add("EmptySections", cls.class_id)
        for s in _duplicates(cls.section_ids):
            add("DuplicateSection", cls.class_id, s)
        for s in cls.section_ids:
            if s not in sections:
                add("UnknownSection", cls.class_id, s)

    for mask in inst.availability:
        if mask.teacher_id not in teachers:
            add("UnknownTeacher", mask.teacher_id, "teacherBusy")
        for d, s in sorted(mask.busy):
            if not (0 <= d < inst.grid.days and 0 <= s < inst.grid.slots_per_day):
                add("SlotOutOfRange", mask.teacher_id, f"(day={d}, slot={s})")

    if not errors and _raw_search_space(inst) > INT64_MAX:
        add("SearchSpaceOverflow", "instance", "search space exceeds 2^63-1")
    return errors


# ----------------------------------------------------------------------------
# statistics
# ----------------------------------------------------------------------------


def _raw_search_space(inst: Instance) -> int:
    courses = inst.course_map()
    lectures = sum(courses[c.course_id].credit_hours for c in inst.classes if c.course_id in courses)
    return lectures * inst.grid.global_slots * inst.room_count


def instance_stats(inst: Instance) -> InstanceStats:
    """Lecture count, week size and the size of the (lecture, slot, room) space."""
    courses = inst.course_map()
    lectures = sum(courses[c.course_id].credit_hours for c in inst.classes)
    size = lectures * inst.grid.global_slots * inst.room_count
    if size > INT64_MAX:
        raise OverflowError("search space size exceeds 2^63-1")
    return InstanceStats(
        lecture_count=lectures,
        global_slot_count=inst.grid.global_slots,
        search_space_size=size,
        routine_count=len(inst.teachers) + len(inst.sections),
    )


# ----------------------------------------------------------------------------
# generator
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorParams:
    teachers: int
    sections: int
    courses: int
    courses_per_teacher: int = 2
    credit_hours_range: tuple[int, int] = (2, 3)
    sections_per_class_range: tuple[int, int] = (1, 2)
    grid: TimeGrid = field(default_factory=TimeGrid)
    room_count: int = 4
    busy_fraction: float = 0.0


def _check_params(p: GeneratorParams) -> None:
    for name in ("teachers", "sections", "courses", "courses_per_teacher", "room_count"):
        if getattr(p, name) < 1:
            raise ValueError(f"{name} must be positive")
    if p.grid.days < 1 or p.grid.slots_per_day < 1:
        raise ValueError("grid dimensions must be positive")
    lo, hi = p.credit_hours_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad credit_hours_range {p.credit_hours_range}")
    if hi > p.grid.days:
        raise InfeasibleParams(f"credit hours up to {hi} cannot fit on {p.grid.days} distinct days")
    slo, shi = p.sections_per_class_range
    if not 1 <= slo <= shi:
        raise ValueError(f"bad sections_per_class_range {p.sections_per_class_range}")
    if shi > p.sections:
        raise InfeasibleParams(f"{shi} sections per class but only {p.sections} sections")
    if -(-p.courses // p.teachers) > p.courses_per_teacher:
        raise InfeasibleParams(
            f"{p.courses} courses over {p.teachers} teachers exceeds {p.courses_per_teacher} per teacher"
        )
    if not 0.0 <= p.busy_fraction < 1.0:
        raise ValueError("busy_fraction must lie in [0, 1)")


def generate_instance(params: GeneratorParams, seed: int) -> Instance:
    """Build a reproducible random instance with the requested dimensions.

    Each course is delivered as one class. Courses are dealt to teachers
    round-robin over a seeded shuffle, so no teacher exceeds
    ``courses_per_teacher``. Every class gets a primary section (also dealt
    round-robin) plus randomly drawn extra sections. Busy cells are drawn
    uniformly without replacement, never leaving a teacher fewer free cells
    than lectures to teach.
    """
    _check_params(params)
    rng = random.Random(seed)
    grid = params.grid
    n_slots = grid.global_slots

    teachers = tuple(f"T{i + 1}" for i in range(params.teachers))
    sections = tuple(f"S{i + 1}" for i in range(params.sections))
    courses = tuple(
        Course(f"C{i + 1}", rng.randint(*params.credit_hours_range)) for i in range(params.courses)
    )

    teacher_order = list(range(params.courses))
    rng.shuffle(teacher_order)
    teacher_of = {c: teachers[i % params.teachers] for i, c in enumerate(teacher_order)}

    section_order = list(range(params.courses))
    rng.shuffle(section_order)
    primary_of = {c: i % params.sections for i, c in enumerate(section_order)}

    classes = []
    load: Counter[str] = Counter()
    for ci, course in enumerate(courses):
        k = rng.randint(*params.sections_per_class_range)
        primary = primary_of[ci]
        others = [s for s in range(params.sections) if s != primary]
        chosen = sorted([primary, *rng.sample(others, k - 1)])
        tid = teacher_of[ci]
        load[tid] += course.credit_hours
        classes.append(ClassEntry(f"K{ci + 1}", course.course_id, tid, tuple(sections[s] for s in chosen)))

    availability = []
    if params.busy_fraction > 0:
        for t in teachers:
            k = min(round(params.busy_fraction * n_slots), n_slots - load[t])
            if k <= 0:
                continue
            cells = sorted(rng.sample(range(n_slots), k))
            availability.append(AvailabilityMask(t, frozenset(grid.to_day_slot(g) for g in cells)))

    return Instance(
        grid=grid,
        room_count=params.room_count,
        teachers=teachers,
        sections=sections,
        courses=courses,
        classes=tuple(classes),
        availability=tuple(availability),
    )
