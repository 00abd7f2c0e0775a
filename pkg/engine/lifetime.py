"""Gamma-frailty Weibull competing-risks model.

Closed-form reliability, sub-survivor and sub-density functions, the PIC-I
interval probabilities, and their analytic gradients with respect to the
parameter vector ``(eta_1..eta_J, gamma, nu)``. Functions that take a time
accept a scalar or a numpy array and return the matching shape.

Causes are numbered from 1 in the public API, as in the data files.
"""

from __future__ import annotations

from numbers import Integral
from typing import Sequence, Tuple, Union

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from config.settings import settings
from models.errors import ConditioningError, ParameterDomainError, SchemeError
from models.params import CauseMassVector, ModelParams

TimeLike = Union[float, Sequence[float], np.ndarray]

# Frailty variances below this use exp(-Delta + nu*Delta**2/2).
SERIES_NU = 1e-8
# The nu-derivative of log F switches to its power series below this nu*Delta.
SERIES_NU_DELTA = 0.05
_NU_SERIES_ORDERS = np.arange(2, 14)
_NU_SERIES_COEFS = (-1.0) ** _NU_SERIES_ORDERS * (_NU_SERIES_ORDERS - 1) / _NU_SERIES_ORDERS


# ── Argument checks ───────────────────────────────────────────────────────────


def _times(t: TimeLike, strictly_positive: bool = False) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ParameterDomainError("times must be finite")
    if strictly_positive and np.any(arr <= 0.0):
        raise ParameterDomainError(f"time must be > 0, got {np.min(arr):g}")
    if np.any(arr < 0.0):
        raise ParameterDomainError(f"time must be >= 0, got {np.min(arr):g}")
    return arr


def _out(value: np.ndarray, like: np.ndarray):
    return float(value) if np.ndim(like) == 0 else value


def _cause_index(cause: int, theta: ModelParams) -> int:
    if isinstance(cause, bool) or not isinstance(cause, Integral) or not 1 <= cause <= theta.n_causes:
        raise ParameterDomainError(f"cause index must be in 1..{theta.n_causes}, got {cause!r}")
    return int(cause) - 1


def _require_equal_shape(theta: ModelParams, what: str) -> None:
    if not theta.equal_shape:
        raise ParameterDomainError(f"{what} is defined for the equal-shape model only")


def inspection_times(L: TimeLike) -> np.ndarray:
    """Validate ``0 < L_1 < ... < L_M`` and return it as a float array."""
    arr = np.atleast_1d(np.asarray(L, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise SchemeError("inspection times must be a non-empty sequence")
    if not np.all(np.isfinite(arr)) or arr[0] <= 0.0:
        raise SchemeError("inspection times must be finite and positive")
    steps = np.diff(arr)
    if np.any(steps <= 0.0):
        i = int(np.flatnonzero(steps <= 0.0)[0]) + 1
        raise SchemeError(f"inspection times must be strictly increasing (L[{i}] = {arr[i]:g} <= L[{i - 1}] = {arr[i - 1]:g})")
    return arr


# ── Survival ──────────────────────────────────────────────────────────────────


def _powers(t: np.ndarray, theta: ModelParams) -> np.ndarray:
    """``(t / eta_j) ** gamma_j`` with shape ``t.shape + (J,)``."""
    return (t[..., None] / theta.eta_array) ** theta.shape_array


def _log_survival(delta: np.ndarray, nu: float) -> np.ndarray:
    if nu == 0.0:
        return -delta
    if nu < SERIES_NU:
        return -delta + 0.5 * nu * delta**2
    return -np.log1p(nu * delta) / nu


def cumulative_hazard(t: TimeLike, theta: ModelParams):
    """Delta(t) = sum_j (t / eta_j) ** gamma_j."""
    arr = _times(t)
    return _out(_powers(arr, theta).sum(axis=-1), arr)


def log_reliability(t: TimeLike, theta: ModelParams):
    """log F_T(t); the frailty form is evaluated as ``-log1p(nu*Delta)/nu``."""
    arr = _times(t)
    return _out(_log_survival(_powers(arr, theta).sum(axis=-1), theta.nu), arr)


def reliability(t: TimeLike, theta: ModelParams):
    """
    Reliability of a unit at time ``t``.

    ``(1 + nu*Delta(t)) ** (-1/nu)`` for a gamma frailty with variance ``nu``,
    ``exp(-Delta(t))`` for independent causes.
    """
    arr = _times(t)
    return _out(np.exp(_log_survival(_powers(arr, theta).sum(axis=-1), theta.nu)), arr)


def dependence_ratio(t: TimeLike, theta: ModelParams):
    """Joint survivor at ``t*1`` over the product of the marginal survivors."""
    arr = _times(t, strictly_positive=True)
    delta = _powers(arr, theta).sum(axis=-1)
    return _out(np.exp(_log_survival(delta, theta.nu) + delta), arr)


# ── Causes ────────────────────────────────────────────────────────────────────


def cause_masses(theta: ModelParams) -> CauseMassVector:
    """psi_j = log sum_j' (eta_j / eta_j') ** gamma, so that P(C = j) = exp(-psi_j)."""
    _require_equal_shape(theta, "cause_masses")
    log_eta = np.log(theta.eta_array)
    psi = logsumexp(theta.gamma * (log_eta[:, None] - log_eta[None, :]), axis=1)
    return CauseMassVector(psi=psi)


def cause_mass_gradient(theta: ModelParams) -> np.ndarray:
    """J x s matrix of d psi_j / d theta_u (zero column for nu)."""
    _require_equal_shape(theta, "cause_mass_gradient")
    J = theta.n_causes
    eta = theta.eta_array
    log_eta = np.log(eta)
    probs = cause_masses(theta).probabilities
    grad = np.zeros((J, theta.n_params))
    grad[:, :J] = (theta.gamma / eta)[None, :] * (np.eye(J) - probs[None, :])
    grad[:, J] = log_eta - probs @ log_eta
    return grad


def _density_values(j: int, t: np.ndarray, theta: ModelParams) -> np.ndarray:
    pw = _powers(t, theta)
    delta = pw.sum(axis=-1)
    eta_j = theta.eta_array[j]
    shape_j = theta.shape_array[j]
    hazard = (shape_j / eta_j) * (t / eta_j) ** (shape_j - 1.0)
    return hazard * np.exp(_log_survival(delta, theta.nu)) / (1.0 + theta.nu * delta)


def sub_density(cause: int, t: TimeLike, theta: ModelParams):
    """g(j, t): density of failing at ``t`` from cause ``j``."""
    j = _cause_index(cause, theta)
    arr = _times(t, strictly_positive=True)
    return _out(_density_values(j, arr, theta), arr)


def _density_mass(j: int, lower: float, upper: float, theta: ModelParams) -> float:
    value, _ = integrate.quad(
        lambda s: float(_density_values(j, np.asarray(s), theta)),
        lower,
        upper,
        epsabs=settings.quad_tolerance,
        epsrel=1e-10,
        limit=200,
    )
    return value


def sub_survivor(cause: int, t: TimeLike, theta: ModelParams):
    """
    G(j, t) = P(C = j, T > t).

    Equal shapes factor as ``exp(-psi_j) * F_T(t)``; unequal shapes integrate
    the sub-density numerically.
    """
    j = _cause_index(cause, theta)
    arr = _times(t)
    if theta.equal_shape:
        mass = cause_masses(theta).probabilities[j]
        return _out(mass * np.exp(_log_survival(_powers(arr, theta).sum(axis=-1), theta.nu)), arr)
    flat = np.array([_density_mass(j, float(s), np.inf, theta) for s in arr.ravel()])
    return _out(flat.reshape(arr.shape), arr)


# ── Interval probabilities ────────────────────────────────────────────────────


def _start_survival(times: np.ndarray, theta: ModelParams) -> np.ndarray:
    """log F_T at L_0 = 0, L_1, ..., L_M, checking no interval starts at zero survival."""
    log_surv = np.concatenate(([0.0], _log_survival(_powers(times, theta).sum(axis=-1), theta.nu)))
    dead = np.flatnonzero(np.exp(log_surv[:-1]) == 0.0)
    if dead.size:
        i = int(dead[0])
        raise ConditioningError(
            f"reliability underflows to 0 at L_{i} = {times[i - 1]:g}; interval {i + 1} has no units at risk",
            interval=i + 1,
        )
    return log_surv


def interval_probs(L: TimeLike, theta: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Conditional failure probabilities per inspection interval.

    Args:
        L: Strictly increasing inspection times (L_0 = 0 is implied).
        theta: Model parameters.

    Returns:
        ``(q_matrix, q)`` where ``q_matrix[i, j]`` is the probability that a
        unit at risk at ``L_{i-1}`` fails from cause ``j`` by ``L_i`` and
        ``q[i]`` is its row sum.
    """
    times = inspection_times(L)
    log_surv = _start_survival(times, theta)
    q = -np.expm1(log_surv[1:] - log_surv[:-1])
    if theta.equal_shape:
        return np.outer(q, cause_masses(theta).probabilities), q

    starts = np.exp(log_surv[:-1])
    lowers = np.concatenate(([0.0], times[:-1]))
    q_matrix = np.empty((times.size, theta.n_causes))
    for i in range(times.size):
        for j in range(theta.n_causes):
            q_matrix[i, j] = _density_mass(j, lowers[i], times[i], theta) / starts[i]
    return q_matrix, q


# ── Gradients (equal-shape model) ─────────────────────────────────────────────


def _dlog_survival_dnu(delta: np.ndarray, nu: float) -> np.ndarray:
    """d log F_T / d nu = log1p(x)/nu**2 - Delta/(nu*(1+x)) with x = nu*Delta."""
    shape = np.shape(delta)
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    x = nu * delta
    out = np.empty_like(delta)
    small = x < SERIES_NU_DELTA
    if np.any(small):
        powers = x[small][:, None] ** (_NU_SERIES_ORDERS - 2)
        out[small] = delta[small] ** 2 * (powers @ _NU_SERIES_COEFS)
    large = ~small
    if np.any(large):
        out[large] = np.log1p(x[large]) / nu**2 - delta[large] / (nu * (1.0 + x[large]))
    return out.reshape(shape)


def grad_log_reliability(t: TimeLike, theta: ModelParams) -> np.ndarray:
    """Gradient of log F_T(t) over the parameter vector; shape ``t.shape + (s,)``."""
    _require_equal_shape(theta, "grad_log_reliability")
    arr = _times(t)
    eta = theta.eta_array
    pw = _powers(arr, theta)
    delta = pw.sum(axis=-1)
    damp = 1.0 / (1.0 + theta.nu * delta)
    safe_t = np.where(arr > 0.0, arr, 1.0)
    log_ratio = np.log(safe_t[..., None] / eta)

    columns = [
        (theta.gamma / eta) * pw * damp[..., None],
        (-(pw * log_ratio).sum(axis=-1) * damp)[..., None],
    ]
    if theta.dependent:
        columns.append(_dlog_survival_dnu(delta, theta.nu)[..., None])
    return np.concatenate(columns, axis=-1)


def grad_reliability(t: TimeLike, theta: ModelParams) -> np.ndarray:
    """
    Gradient of F_T(t) over ``(eta_1..eta_J, gamma[, nu])``.

    The nu component is present only for the dependent model (nu > 0).
    """
    arr = _times(t)
    surv = np.exp(_log_survival(_powers(arr, theta).sum(axis=-1), theta.nu))
    return np.asarray(surv)[..., None] * grad_log_reliability(arr, theta)


def interval_probs_with_gradients(
    L: TimeLike, theta: ModelParams
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(q_matrix, q, dq_matrix, dq)`` with ``dq_matrix`` of shape M x J x s."""
    _require_equal_shape(theta, "grad_interval_probs")
    times = inspection_times(L)
    q_matrix, q = interval_probs(times, theta)
    glog = grad_log_reliability(np.concatenate(([0.0], times)), theta)
    # 1 - q_i = F(L_i) / F(L_{i-1})
    dq = -(1.0 - q)[:, None] * (glog[1:] - glog[:-1])
    probs = cause_masses(theta).probabilities
    dpsi = cause_mass_gradient(theta)
    dq_matrix = probs[None, :, None] * (dq[:, None, :] - q[:, None, None] * dpsi[None, :, :])
    return q_matrix, q, dq_matrix, dq


def grad_interval_probs(L: TimeLike, theta: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    """Analytic gradients ``(dq_matrix M x J x s, dq M x s)`` of :func:`interval_probs`."""
    _, _, dq_matrix, dq = interval_probs_with_gradients(L, theta)
    return dq_matrix, dq
