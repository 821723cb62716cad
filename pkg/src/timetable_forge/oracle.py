"""Exhaustive reference enumerator for tiny instances.

Works straight from the :class:`Instance` and restates each timetabling rule
on its own, without touching the compiler or the search engine, so that it
can serve as ground truth for both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance

MAX_LECTURES = 12
MAX_SLOTS = 12


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    solution_count: int
    solutions: list[tuple[int, ...]]
    exhausted: bool
    lectures: tuple[tuple[str, int], ...]  # (class id, occurrence) per column


def enumerate_solutions(inst: Instance, limit: int = 0, use_ordering: bool = True) -> OracleResult:
    """Count every lecture-to-slot assignment that satisfies all rules.

    Partial assignments are grown one lecture at a time as rows of an integer
    array; after adding a column every rule that relates it to earlier
    columns is checked, so each complete row has passed every pairwise and
    per-slot check exactly once. ``limit`` caps the solutions returned, never
    the count.
    """
    if limit < 0:
        raise ValueError("limit must be >= 0")
    days, per_day = inst.grid.days, inst.grid.slots_per_day
    n_slots = days * per_day
    credits = {c.course_id: c.credit_hours for c in inst.courses}

    lectures = []  # (class index, occurrence, teacher, sections)
    for ci, cls in enumerate(inst.classes):
        for occ in range(credits[cls.course_id]):
            lectures.append((ci, occ, cls.teacher_id, frozenset(cls.section_ids)))
    if len(lectures) > MAX_LECTURES or n_slots > MAX_SLOTS:
        raise TooLarge(f"{len(lectures)} lectures on {n_slots} slots exceeds the oracle guard")

    busy: dict[str, set[int]] = {}
    for mask in inst.availability:
        busy.setdefault(mask.teacher_id, set()).update(d * per_day + s for d, s in mask.busy)

    day = np.arange(n_slots) // per_day
    rows = np.zeros((1, 0), dtype=np.int16)
    for k, (ci, occ, teacher, secs) in enumerate(lectures):
        free = np.array([g for g in range(n_slots) if g not in busy.get(teacher, ())], dtype=np.int16)
        n = rows.shape[0]
        grown = np.repeat(rows, len(free), axis=0)
        new = np.tile(free, n)
        ok = np.ones(len(new), dtype=bool)
        used_same_slot = np.ones(len(new), dtype=np.int32)
        for j in range(k):
            cj, oj, tj, sj = lectures[j]
            col = grown[:, j]
            used_same_slot += col == new
            if cj == ci:
                # same class: never twice on one day
                ok &= day[col] != day[new]
                if use_ordering and oj < occ:
                    ok &= day[col] < day[new]
            elif tj == teacher or sj & secs:
                # shared teacher or section: never the same slot
                ok &= col != new
        ok &= used_same_slot <= inst.room_count
        rows = np.column_stack([grown[ok], new[ok]]) if k else new[ok].reshape(-1, 1)
        if rows.shape[0] == 0:
            break

    count = int(rows.shape[0]) if lectures else 1
    if not lectures:
        solutions = [()] if limit else []
    else:
        solutions = [tuple(int(x) for x in r) for r in rows[:limit]]
    return OracleResult(
        solution_count=count,
        solutions=solutions,
        exhausted=True,
        lectures=tuple((inst.classes[ci].class_id, occ) for ci, occ, _, _ in lectures),
    )


def violates_nogood(solution: tuple[int, ...], literals) -> bool:
    """True if the solution makes every (lecture index, slot) literal hold."""
    return all(solution[v] == s for v, s in literals)
