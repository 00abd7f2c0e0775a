"""Grouped-data likelihood, maximum-likelihood fitting and model selection.

Parameters are optimised in log coordinates (log eta_j, log gamma, log nu),
first with BFGS on the analytic score (equal-shape variants), then polished
with Nelder-Mead. Several jittered starts guard against local optima.
"""

from __future__ import annotations

import math
from typing import Iterable, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import ValidationError
from scipy.optimize import minimize
from scipy.special import xlogy

from config.settings import settings
from engine.fisher import covariance_from_information, information_from_counts, reliability_gradient
from engine.lifetime import interval_probs, interval_probs_with_gradients, reliability
from models.data import ObservedData
from models.errors import (
    ConditioningError,
    ConvergenceError,
    DesignSingularError,
    ParameterDomainError,
    RaspError,
    SchemeError,
)
from models.fit import ConvergenceReport, FitResult, ModelComparison, ReliabilityEstimate
from models.params import FitVariant, ModelParams
from utils.helpers import central_jacobian

_PENALTY = 1e12
_LOG_BOUND = 40.0


# ── Likelihood ────────────────────────────────────────────────────────────────


def _survivors(data: ObservedData) -> np.ndarray:
    return data.at_risk - data.failures.sum(axis=1)


def _loglik(d: np.ndarray, survivors: np.ndarray, q_matrix: np.ndarray, q: np.ndarray) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(xlogy(d, q_matrix).sum() + xlogy(survivors, 1.0 - q).sum())


def _score_terms(d, survivors, q_matrix, q, dq_matrix, dq) -> np.ndarray:
    ratio = np.divide(d, q_matrix, out=np.zeros_like(d), where=d > 0)
    return np.einsum("ij,iju->u", ratio, dq_matrix) - np.einsum("i,iu->u", survivors / (1.0 - q), dq)


def log_likelihood(data: ObservedData, theta: ModelParams) -> float:
    """
    Grouped-data log-likelihood without its constant.

    ``sum_i [sum_j d_ij log q_ij + (n_i - d_i+) log(1 - q_i)]``. Returns
    ``-inf`` when a cause with observed failures has zero probability.
    """
    q_matrix, q = interval_probs(data.scheme.times, theta)
    value = _loglik(data.failures, _survivors(data), q_matrix, q)
    if value == -math.inf:
        logger.debug("log-likelihood is -inf: observed failures in a zero-probability cell")
    return value


def score(data: ObservedData, theta: ModelParams) -> np.ndarray:
    """Gradient of the log-likelihood over the parameter vector of ``theta``."""
    if theta.equal_shape:
        terms = interval_probs_with_gradients(data.scheme.times, theta)
        return _score_terms(data.failures, _survivors(data), *terms)

    def loglik_at(vector: np.ndarray) -> np.ndarray:
        model = ModelParams.from_vector(vector, theta.n_causes, False, theta.dependent)
        return np.array([log_likelihood(data, model)])

    return central_jacobian(loglik_at, theta.to_vector(), settings.fd_relative_step)[0]


def information_criteria(loglik: float, k: int, n: int) -> Tuple[float, float]:
    """(AIC, BIC) with the number of test units as the BIC sample size."""
    return -2.0 * loglik + 2.0 * k, -2.0 * loglik + k * math.log(n)


# ── Optimisation ──────────────────────────────────────────────────────────────


class _Objective:
    """Negative log-likelihood in log coordinates for one model variant."""

    def __init__(self, data: ObservedData, variant: FitVariant) -> None:
        self.variant = variant
        self.n_causes = data.n_causes
        self.times = data.scheme.times
        self.d = data.failures
        self.survivors = _survivors(data)
        self.evaluations = 0

    def theta(self, z: np.ndarray) -> ModelParams:
        values = np.exp(np.clip(z, -_LOG_BOUND, _LOG_BOUND))
        return ModelParams.from_vector(values, self.n_causes, self.variant.equal_shape, self.variant.dependent)

    def value(self, z: np.ndarray) -> float:
        self.evaluations += 1
        try:
            q_matrix, q = interval_probs(self.times, self.theta(z))
        except (RaspError, ValidationError, FloatingPointError):
            return _PENALTY
        ll = _loglik(self.d, self.survivors, q_matrix, q)
        return -ll if math.isfinite(ll) else _PENALTY

    def value_and_grad(self, z: np.ndarray) -> Tuple[float, np.ndarray]:
        self.evaluations += 1
        try:
            theta = self.theta(z)
            terms = interval_probs_with_gradients(self.times, theta)
        except (RaspError, ValidationError, FloatingPointError):
            return _PENALTY, np.zeros_like(z)
        ll = _loglik(self.d, self.survivors, terms[0], terms[1])
        if not math.isfinite(ll):
            return _PENALTY, np.zeros_like(z)
        grad = _score_terms(self.d, self.survivors, *terms) * theta.to_vector()
        if not np.all(np.isfinite(grad)):
            return _PENALTY, np.zeros_like(z)
        return -ll, -grad


def _simplex(z: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([z, z + step * np.eye(z.size)])


def _initial_guess(data: ObservedData, variant: FitVariant) -> np.ndarray:
    """
    Moment-style start: unit shape, exponential rates matched to the
    product-limit failure fraction at L_M split by observed cause shares,
    and nu = 0.5.
    """
    d = data.failures
    at_risk = data.at_risk
    hazard = np.divide(d.sum(axis=1), at_risk, out=np.zeros(data.M), where=at_risk > 0)
    failed = float(np.clip(1.0 - np.prod(1.0 - hazard), 1e-3, 0.999))
    total_rate = -math.log1p(-failed) / data.scheme.L[-1]
    shares = (d.sum(axis=0) + 0.5) / (d.sum() + 0.5 * data.n_causes)
    z = list(-np.log(total_rate * shares))
    z += [0.0] * (1 if variant.equal_shape else data.n_causes)
    if variant.dependent:
        z.append(math.log(0.5))
    return np.asarray(z, dtype=float)


def _start_from(theta: ModelParams, variant: FitVariant) -> np.ndarray:
    """Log-coordinates of ``theta`` in the layout of ``variant``."""
    shapes = theta.shape_array
    values = list(theta.eta) + ([float(shapes.mean())] if variant.equal_shape else list(shapes))
    if variant.dependent:
        values.append(max(theta.nu, 1e-3))
    return np.log(np.asarray(values, dtype=float))


def _run_start(objective: _Objective, z0: np.ndarray) -> Tuple[np.ndarray, float, bool, str]:
    max_iter = settings.fit_max_iterations
    z, fun, converged, message = z0, objective.value(z0), False, ""
    step = 0.1
    if objective.variant.equal_shape:
        res = minimize(
            objective.value_and_grad,
            z0,
            jac=True,
            method="BFGS",
            options={"gtol": 1e-6, "maxiter": max_iter},
        )
        z, fun, converged, message = res.x, float(res.fun), bool(res.success), str(res.message)
        step = 0.01
    polish = minimize(
        objective.value,
        z,
        method="Nelder-Mead",
        options={
            "initial_simplex": _simplex(z, step),
            "xatol": settings.fit_tolerance,
            "fatol": settings.fit_tolerance,
            "maxiter": max_iter,
            "maxfev": 4 * max_iter,
        },
    )
    if polish.fun <= fun:
        z, fun = polish.x, float(polish.fun)
    converged = converged or bool(polish.success)
    message = message or str(polish.message)
    return z, fun, converged, message


def _check_identifiable(data: ObservedData, variant: FitVariant) -> None:
    k = variant.n_params(data.n_causes)
    if data.M < k:
        raise SchemeError(f"M must be >= s: {variant.value} has s = {k} parameters but the data has {data.M} intervals")


def fit_mle(
    data: ObservedData,
    variant: FitVariant = FitVariant.DEPENDENT_EQUAL,
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
    start: Optional[ModelParams] = None,
) -> FitResult:
    """
    Maximum-likelihood fit of one model variant.

    Args:
        data: Grouped PIC-I observations.
        variant: Independent/dependent model with equal/unequal shapes.
        restarts: Jittered restarts after the moment-style start
            (default ``settings.fit_restarts``).
        seed: Seed for the restart jitter (default ``settings.seed``).
        start: Start from these parameters instead of the moment-style guess.

    Returns:
        FitResult with estimates, standard errors from the information at
        the observed at-risk counts, log-likelihood, AIC and BIC.

    Raises:
        ConvergenceError: if no start converged.
    """
    variant = FitVariant(variant)
    _check_identifiable(data, variant)
    restarts = settings.fit_restarts if restarts is None else restarts
    rng = np.random.default_rng(settings.seed if seed is None else seed)

    objective = _Objective(data, variant)
    z0 = _initial_guess(data, variant) if start is None else _start_from(start, variant)
    starts = [z0] + [z0 + rng.normal(0.0, settings.restart_spread, z0.size) for _ in range(restarts)]

    best: Optional[Tuple[np.ndarray, float, str]] = None
    successes = 0
    for z_start in starts:
        z, fun, converged, message = _run_start(objective, z_start)
        if not converged or fun >= _PENALTY:
            logger.debug(f"{variant.value}: start did not converge ({message})")
            continue
        successes += 1
        if best is None or fun < best[1]:
            best = (z, fun, message)

    if best is None:
        raise ConvergenceError(f"{variant.value} fit did not converge from {len(starts)} starts")

    theta = objective.theta(best[0])
    independence_limit = False
    if variant.dependent and theta.nu <= settings.independence_threshold:
        logger.warning(f"{variant.value}: fitted nu = {theta.nu:.2e} collapsed to the independence limit")
        theta = ModelParams(eta=theta.eta, gamma=theta.gamma, gammas=theta.gammas, nu=0.0)
        independence_limit = True

    loglik = log_likelihood(data, theta)
    k = variant.n_params(data.n_causes)
    aic, bic = information_criteria(loglik, k, data.n)

    covariance: Optional[List[List[float]]] = None
    standard_errors = {}
    try:
        cov = covariance_from_information(information_from_counts(data.at_risk, data.scheme.times, theta))
        covariance = cov.tolist()
        standard_errors = {name: float(math.sqrt(max(cov[u, u], 0.0))) for u, name in enumerate(theta.parameter_names())}
    except (DesignSingularError, ConditioningError) as exc:
        logger.warning(f"{variant.value}: standard errors unavailable ({exc})")

    logger.info(f"{variant.value}: loglik={loglik:.4f} AIC={aic:.3f} BIC={bic:.3f} ({successes}/{len(starts)} starts converged)")
    return FitResult(
        variant=variant,
        theta=theta,
        parameter_names=theta.parameter_names(),
        standard_errors=standard_errors,
        covariance=covariance,
        loglik=loglik,
        aic=aic,
        bic=bic,
        k=k,
        n=data.n,
        independence_limit=independence_limit,
        convergence=ConvergenceReport(
            converged=True,
            starts=len(starts),
            successful_starts=successes,
            evaluations=objective.evaluations,
            message=best[2],
        ),
    )


def estimate_reliability(fit: FitResult, t0: float) -> ReliabilityEstimate:
    """Plug-in reliability at ``t0`` with its delta-method standard error."""
    if not math.isfinite(t0) or t0 < 0:
        raise ParameterDomainError(f"t0 must be >= 0, got {t0!r}")
    if t0 == 0:
        return ReliabilityEstimate(t0=0.0, value=1.0, se=0.0)
    if fit.covariance is None:
        raise DesignSingularError("the fitted model has a singular information matrix; no standard error")
    c_t = reliability_gradient(t0, fit.theta)
    variance = float(c_t @ np.asarray(fit.covariance) @ c_t)
    return ReliabilityEstimate(t0=t0, value=float(reliability(t0, fit.theta)), se=math.sqrt(max(variance, 0.0)))


def select_model(
    data: ObservedData,
    variants: Iterable[FitVariant] = tuple(FitVariant),
    restarts: Optional[int] = None,
    seed: Optional[int] = None,
) -> ModelComparison:
    """Fit several variants and rank them by BIC, then AIC."""
    fits: List[FitResult] = []
    for variant in variants:
        try:
            fits.append(fit_mle(data, variant, restarts=restarts, seed=seed))
        except (ConvergenceError, SchemeError) as exc:
            logger.warning(f"{FitVariant(variant).value} skipped: {exc}")
    if not fits:
        raise ConvergenceError("no model variant could be fitted")
    fits.sort(key=lambda f: (f.bic, f.aic))
    return ModelComparison(fits=fits, best=fits[0].variant)
