"""Exception hierarchy shared across the package.

PomgError and its subclasses signal algorithm faults (the CLI maps them to
exit code 1). ConfigError signals bad user input such as malformed config or
model files (exit code 2).
"""
from __future__ import annotations


class PomgError(Exception):
    """Base class for algorithm faults."""


class PolicyDomainError(PomgError):
    """A policy table has no entry for a history it was asked to decide."""


class BudgetExceededError(PomgError):
    """An enumeration or evaluation exceeded its configured budget."""


class SolverError(PomgError):
    """An equilibrium or LP solve failed to produce a certified solution."""


class GateError(PomgError):
    """An operation was requested outside its supported regime."""


class LikelihoodDegeneracyError(PomgError):
    """Every candidate assigns zero probability to the observed data."""


class EmptyConfidenceSetError(PomgError):
    """No candidate passes the revealing filter, so the initial set is empty."""


class ConfigError(Exception):
    """Invalid user-supplied configuration or input file."""


class ModelFormatError(ConfigError):
    """A model file is malformed or fails validation."""
