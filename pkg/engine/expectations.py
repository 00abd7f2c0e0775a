"""Expected counts, termination law and costs of a PIC-I life test."""

from __future__ import annotations

import math

import numpy as np

from engine.lifetime import interval_probs
from models.errors import ParameterDomainError
from models.params import ModelParams
from models.scheme import CostBreakdown, CostParams, ExpectedCounts, PicScheme, TerminationSummary


def _check_size(n: float) -> float:
    # Real-valued sizes are allowed: budget designs substitute the unrounded n.
    if not math.isfinite(n) or n <= 0:
        raise ParameterDomainError(f"sample size must be positive, got {n!r}")
    return float(n)


def _survival_to_interval(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Probability a unit is still on test at the start of each interval."""
    return np.concatenate(([1.0], np.cumprod((1.0 - q) * (1.0 - p))[:-1]))


def expected_counts(n: float, scheme: PicScheme, theta: ModelParams) -> ExpectedCounts:
    """E[N_i], E[D_ij], E[D_i+] and E[R_i] for ``n`` units on test."""
    n = _check_size(n)
    q_matrix, q = interval_probs(scheme.times, theta)
    p = scheme.withdrawals
    e_n = n * _survival_to_interval(q, p)
    return ExpectedCounts(
        e_n=e_n,
        e_d=e_n[:, None] * q_matrix,
        e_dplus=e_n * q,
        e_r=e_n * (1.0 - q) * p,
    )


def termination_distribution(n: float, scheme: PicScheme, theta: ModelParams) -> TerminationSummary:
    """
    Distribution of the inspection at which the test ends.

    The test ends at ``L_m`` once every unit has failed or been withdrawn.
    A unit is absorbed in interval ``l`` with probability
    ``a_l = q_l + (1 - q_l) p_l`` given it reached ``l``, so
    ``P(tau <= L_m) = (sum_{l<=m} P(reach l) a_l) ** n`` and ``P(tau <= L_M) = 1``.
    """
    n = _check_size(n)
    _, q = interval_probs(scheme.times, theta)
    p = scheme.withdrawals
    absorbed = np.cumsum(_survival_to_interval(q, p) * (q + (1.0 - q) * p))
    cdf = np.clip(absorbed, 0.0, 1.0) ** n
    cdf[-1] = 1.0
    term_prob = np.diff(np.concatenate(([0.0], cdf)))
    return TerminationSummary(
        term_prob=term_prob,
        e_tau=float(scheme.times @ term_prob),
        e_inspections=float(np.arange(1, scheme.M + 1) @ term_prob),
    )


def cost_breakdown(n: float, scheme: PicScheme, theta: ModelParams, costs: CostParams) -> CostBreakdown:
    """Expected total cost ``n*C_S + C_tau*E[tau] + C_D*E[D] + C_I*E[I]`` by component."""
    counts = expected_counts(n, scheme, theta)
    term = termination_distribution(n, scheme, theta)
    sample = float(n) * costs.c_sample
    duration = costs.c_time * term.e_tau
    failures = costs.c_failure * counts.e_d_total
    inspections = costs.c_inspection * term.e_inspections
    return CostBreakdown(
        sample=sample,
        duration=duration,
        failures=failures,
        inspections=inspections,
        total=sample + duration + failures + inspections,
        e_failures=counts.e_d_total,
        e_duration=term.e_tau,
        e_inspections=term.e_inspections,
    )


def total_cost(n: float, scheme: PicScheme, theta: ModelParams, costs: CostParams) -> float:
    return cost_breakdown(n, scheme, theta, costs).total
