"""Lower an instance to one finite-domain variable per lecture plus constraint descriptors."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .instance import Instance, TimeGrid


class Kind(str, Enum):
    ENTITY_NO_OVERLAP = "EntityNoOverlap"
    DISTINCT_DAYS = "DistinctDays"
    SLOT_CARDINALITY = "SlotCardinality"
    OCCURRENCE_ORDERING = "OccurrenceOrdering"


class RootInfeasible(Exception):
    def __init__(self, var_id: int, class_id: str):
        super().__init__(f"variable {var_id} (class {class_id}) has an empty root domain")
        self.var_id = var_id
        self.class_id = class_id


@dataclass(frozen=True)
class LectureVar:
    var_id: int
    class_index: int
    class_id: str
    occurrence: int
    domain: frozenset[int]

    @property
    def mask(self) -> int:
        m = 0
        for g in self.domain:
            m |= 1 << g
        return m


@dataclass(frozen=True)
class ConstraintDescriptor:
    kind: Kind
    scope: tuple[int, ...]
    payload: Any = None


@dataclass(frozen=True)
class CompiledModel:
    vars: tuple[LectureVar, ...]
    constraints: tuple[ConstraintDescriptor, ...]
    grid: TimeGrid
    room_count: int
    provenance: dict[int, tuple[str, int]]
    unary_prunings: int = 0
    agent_count: int = 0

    def to_dict(self) -> dict:
        return {
            "grid": {"days": self.grid.days, "slotsPerDay": self.grid.slots_per_day},
            "roomCount": self.room_count,
            "vars": [
                {"varId": v.var_id, "classId": v.class_id, "occurrence": v.occurrence, "domain": sorted(v.domain)}
                for v in self.vars
            ],
            "constraints": [
                {"id": i, "kind": c.kind.value, "scope": list(c.scope), "payload": c.payload}
                for i, c in enumerate(self.constraints)
            ],
        }


def dump_model(model: CompiledModel) -> str:
    return json.dumps(model.to_dict(), indent=2)


def compile_instance(inst: Instance) -> CompiledModel:
    """Compile a validated instance.

    Raises :class:`RootInfeasible` if teacher availability leaves some
    lecture with no slot at all.
    """
    grid = inst.grid
    all_slots = frozenset(range(grid.global_slots))
    courses = inst.course_map()
    busy = inst.busy_of()
    busy_global = {t: frozenset(grid.to_global(d, s) for d, s in cells) for t, cells in busy.items()}

    lecture_vars: list[LectureVar] = []
    by_class: list[list[int]] = []
    unary = 0
    for ci, cls in enumerate(inst.classes):
        blocked = busy_global.get(cls.teacher_id, frozenset())
        domain = all_slots - blocked
        ids = []
        for occ in range(courses[cls.course_id].credit_hours):
            vid = len(lecture_vars)
            if not domain:
                raise RootInfeasible(vid, cls.class_id)
            unary += len(all_slots) - len(domain)
            lecture_vars.append(LectureVar(vid, ci, cls.class_id, occ, domain))
            ids.append(vid)
        by_class.append(ids)

    constraints: list[ConstraintDescriptor] = []

    # entity cliques only matter between different classes
    for kind, names, members in (
        ("teacher", inst.teachers, lambda c: (c.teacher_id,)),
        ("section", inst.sections, lambda c: c.section_ids),
    ):
        for name in names:
            incident = [ci for ci, c in enumerate(inst.classes) if name in members(c)]
            if len(incident) >= 2:
                scope = tuple(v for ci in incident for v in by_class[ci])
                constraints.append(ConstraintDescriptor(Kind.ENTITY_NO_OVERLAP, scope, {"entity": kind, "id": name}))

    for ci, ids in enumerate(by_class):
        if len(ids) >= 2:
            cid = inst.classes[ci].class_id
            constraints.append(ConstraintDescriptor(Kind.DISTINCT_DAYS, tuple(ids), {"classId": cid}))
            constraints.append(ConstraintDescriptor(Kind.OCCURRENCE_ORDERING, tuple(ids), {"classId": cid}))

    if len(lecture_vars) >= 2:
        constraints.append(
            ConstraintDescriptor(
                Kind.SLOT_CARDINALITY, tuple(range(len(lecture_vars))), {"capacity": inst.room_count}
            )
        )

    return CompiledModel(
        vars=tuple(lecture_vars),
        constraints=tuple(constraints),
        grid=grid,
        room_count=inst.room_count,
        provenance={v.var_id: (v.class_id, v.occurrence) for v in lecture_vars},
        unary_prunings=unary,
        agent_count=sum(1 for t in inst.teachers if busy.get(t)),
    )


def classify_constraints(model: CompiledModel) -> dict[str, int]:
    """Count constraints by the five textbook timetabling categories.

    Availability pruning is unary, the per-entity and per-class exclusions are
    binary, room limitation is capacity, and teacher availability also counts
    as an agent preference. There are no event-spread constraints.
    """
    kinds = [c.kind for c in model.constraints]
    return {
        "unary": model.unary_prunings,
        "binary": kinds.count(Kind.ENTITY_NO_OVERLAP) + kinds.count(Kind.DISTINCT_DAYS),
        "capacity": kinds.count(Kind.SLOT_CARDINALITY),
        "eventSpread": 0,
        "agent": model.agent_count,
    }
