"""Timetabling engine: instance model, finite-domain compiler and a nogood-learning solver."""

from .engine import SolveOutcome, Solver, SolverConfig, Status, solve
from .instance import (
    GeneratorParams,
    Instance,
    TimeGrid,
    generate_instance,
    instance_stats,
    parse_instance,
    serialize_instance,
    validate_instance,
)
from .model import RootInfeasible, classify_constraints, compile_instance
from .oracle import enumerate_solutions
from .schedule import assign_rooms, check_schedule, export_schedule, materialize

__all__ = [
    "GeneratorParams",
    "Instance",
    "RootInfeasible",
    "SolveOutcome",
    "Solver",
    "SolverConfig",
    "Status",
    "TimeGrid",
    "assign_rooms",
    "check_schedule",
    "classify_constraints",
    "compile_instance",
    "enumerate_solutions",
    "export_schedule",
    "generate_instance",
    "instance_stats",
    "materialize",
    "parse_instance",
    "serialize_instance",
    "solve",
    "validate_instance",
]
