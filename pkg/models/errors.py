"""Exception hierarchy shared by the engine and the CLI.

Each exception carries the process exit code the CLI maps it to:
2 for invalid input, 3 for infeasible requests, 4 for numerical failures.
"""

from __future__ import annotations

from typing import Optional


class RaspError(Exception):
    """Base class for every error raised by this package."""

    exit_code: int = 1


# ── Input validation (exit 2) ─────────────────────────────────────────────────


class ParameterDomainError(RaspError, ValueError):
    """An argument lies outside the domain of the model quantity."""

    exit_code = 2


class SchemeError(RaspError, ValueError):
    """The censoring scheme cannot support the requested computation."""

    exit_code = 2


class DataConsistencyError(RaspError, ValueError):
    """Observed counts violate the PIC-I counting recursion."""

    exit_code = 2


# ── Infeasible requests (exit 3) ──────────────────────────────────────────────


class DegenerateHypothesesError(RaspError):
    """The null and alternative reliabilities coincide."""

    exit_code = 3


class RiskSpecificationError(RaspError):
    """The producer/consumer risks leave no admissible acceptance limit."""

    exit_code = 3


class BudgetInfeasibleError(RaspError):
    """No inspection count admits a plan within the budget."""

    exit_code = 3

    def __init__(self, message: str, min_total_cost: Optional[float] = None) -> None:
        super().__init__(message)
        self.min_total_cost = min_total_cost


# ── Numerical failures (exit 4) ───────────────────────────────────────────────


class ConditioningError(RaspError):
    """Reliability at an inspection time underflows to zero."""

    exit_code = 4

    def __init__(self, message: str, interval: Optional[int] = None) -> None:
        super().__init__(message)
        self.interval = interval


class DesignSingularError(RaspError):
    """The Fisher information is not positive definite."""

    exit_code = 4


class ConvergenceError(RaspError):
    """Optimisation or Monte Carlo fitting did not converge."""

    exit_code = 4
