"""Adaptive natural-join engine: probe, explore gaps, constrain, repeat."""

from .engine import EngineStats, EvalResult, evaluate, make_plan, prepare, run, stats_report
from .queries import Atom, Instance, Query, parse_query

__all__ = [
    "Atom",
    "EngineStats",
    "EvalResult",
    "Instance",
    "Query",
    "evaluate",
    "make_plan",
    "parse_query",
    "prepare",
    "run",
    "stats_report",
]

__version__ = "0.1.0"
