"""Experiment harness and CLI."""

from .experiments import ExperimentSpec, run
from .records import format_records, parse_records

__all__ = ["ExperimentSpec", "format_records", "parse_records", "run"]
