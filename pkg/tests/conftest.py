import os
import sys

import hypothesis
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from timetable_forge.instance import ClassEntry, Course, Instance, TimeGrid  # noqa: E402

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_instance(
    classes,
    *,
    days=5,
    slots=2,
    rooms=1,
    teachers=None,
    sections=None,
    busy=(),
):
    """Compact builder: classes are (class_id, credit, teacher, sections) tuples."""
    courses = tuple(Course(f"c_{cid}", credit) for cid, credit, _, _ in classes)
    entries = tuple(ClassEntry(cid, f"c_{cid}", t, tuple(secs)) for cid, _, t, secs in classes)
    teachers = tuple(teachers or sorted({t for _, _, t, _ in classes}))
    sections = tuple(sections or sorted({s for *_, secs in classes for s in secs}))
    from timetable_forge.instance import AvailabilityMask

    masks = tuple(AvailabilityMask(t, frozenset(cells)) for t, cells in busy)
    return Instance(TimeGrid(days, slots), rooms, teachers, sections, courses, entries, masks)


@pytest.fixture
def build():
    return make_instance
