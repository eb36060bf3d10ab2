"""Safety verification for concurrent transition programs."""

from .explorer import ExplorationReport, Mode, replay, verify, witness_for_trace
from .frontend import ParseError, load, parse, render_program
from .program import Flag, Program, ProgramError, Resource

__all__ = [
    "ExplorationReport",
    "Flag",
    "Mode",
    "ParseError",
    "Program",
    "ProgramError",
    "Resource",
    "load",
    "parse",
    "render_program",
    "replay",
    "verify",
    "witness_for_trace",
]

__version__ = "0.1.0"
