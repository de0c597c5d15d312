"""Init CLI."""

from .cli import build_parser, dispatch, exit_code, main
from .scenario import load_scenario


__all__ = [
    "build_parser",
    "dispatch",
    "exit_code",
    "load_scenario",
    "main",
]
