"""Scenario construction, the scenario file format, reports and the CLI."""

from .fileformat import ParseError, parse_scenario, render_scenario, structurally_equal
from .generator import GenerationError, GeneratorParams, darboux_jouanolou, random_scenario
from .report import render_report

__all__ = [
    "GenerationError",
    "GeneratorParams",
    "ParseError",
    "darboux_jouanolou",
    "parse_scenario",
    "random_scenario",
    "render_report",
    "render_scenario",
    "structurally_equal",
]
