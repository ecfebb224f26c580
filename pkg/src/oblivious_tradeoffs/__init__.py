"""Oblivious time-space tradeoff algorithms on an instrumented query model."""

from .query_model import CostReport, QueryContext, RandomStream, Tape, check_oblivious

__version__ = "0.1.0"

__all__ = ["CostReport", "QueryContext", "RandomStream", "Tape", "check_oblivious"]
