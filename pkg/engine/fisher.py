"""Fisher information of grouped PIC-I data and the delta-method variance S^2."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from config.settings import settings
from engine.expectations import expected_counts
from engine.lifetime import (
    grad_reliability,
    inspection_times,
    interval_probs,
    interval_probs_with_gradients,
    reliability,
)
from models.errors import DesignSingularError, ParameterDomainError, SchemeError
from models.params import ModelParams
from models.scheme import PicScheme
from utils.helpers import central_jacobian

Factor = Tuple[np.ndarray, bool]


# ── Jacobians ─────────────────────────────────────────────────────────────────


def _rebuild(theta: ModelParams):
    def build(vector: np.ndarray) -> ModelParams:
        return ModelParams.from_vector(vector, theta.n_causes, theta.equal_shape, theta.dependent)

    return build


def interval_jacobian(L, theta: ModelParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Interval probabilities and their gradients.

    Analytic for the equal-shape model; central differences over the
    parameter vector for unequal shapes.

    Returns:
        ``(q_matrix, q, dq_matrix, dq)`` with shapes M x J, M, M x J x s, M x s.
    """
    if theta.equal_shape:
        return interval_probs_with_gradients(L, theta)

    times = inspection_times(L)
    q_matrix, q = interval_probs(times, theta)
    M, J, s = times.size, theta.n_causes, theta.n_params
    build = _rebuild(theta)

    def flat(vector: np.ndarray) -> np.ndarray:
        qm, qq = interval_probs(times, build(vector))
        return np.concatenate([qm.ravel(), qq])

    jac = central_jacobian(flat, theta.to_vector(), settings.fd_relative_step)
    return q_matrix, q, jac[: M * J].reshape(M, J, s), jac[M * J :]


def reliability_gradient(t0: float, theta: ModelParams) -> np.ndarray:
    """C_T = gradient of F_T(t0); numeric for unequal shapes."""
    if theta.equal_shape:
        return np.asarray(grad_reliability(t0, theta), dtype=float)
    build = _rebuild(theta)
    return central_jacobian(
        lambda v: np.array([reliability(t0, build(v))]),
        theta.to_vector(),
        settings.fd_relative_step,
    )[0]


# ── Information ───────────────────────────────────────────────────────────────


def information_from_counts(at_risk, L, theta: ModelParams) -> np.ndarray:
    """
    Expected information with an arbitrary at-risk vector.

    ``sum_i n_i [sum_j dq_ij dq_ij^T / q_ij + dq_i dq_i^T / (1 - q_i)]``;
    the expected information uses ``n_i = E[N_i]``, the observed-data
    standard errors use the observed ``n_i``.
    """
    q_matrix, q, dq_matrix, dq = interval_jacobian(L, theta)
    at_risk = np.asarray(at_risk, dtype=float)
    if np.any(q_matrix <= 0.0) or np.any(q >= 1.0):
        raise DesignSingularError("interval probabilities must lie strictly inside (0, 1) for every interval and cause")
    info = np.einsum("ij,iju,ijv->uv", at_risk[:, None] / q_matrix, dq_matrix, dq_matrix)
    info += np.einsum("i,iu,iv->uv", at_risk / (1.0 - q), dq, dq)
    return 0.5 * (info + info.T)


def _check_inspections(scheme: PicScheme, theta: ModelParams) -> None:
    if scheme.M < theta.n_params:
        raise SchemeError(f"M must be >= s: the scheme has M = {scheme.M} inspections but the model has s = {theta.n_params} parameters")


def fisher_information(n: float, scheme: PicScheme, theta: ModelParams) -> np.ndarray:
    """Expected Fisher information for ``n`` units under ``scheme``."""
    _check_inspections(scheme, theta)
    counts = expected_counts(n, scheme, theta)
    return information_from_counts(counts.e_n, scheme.times, theta)


def factorize(info: np.ndarray) -> Factor:
    """Cholesky factor of a positive-definite information matrix."""
    scale = float(np.max(np.diag(info)))
    if not np.isfinite(scale) or scale <= 0.0:
        raise DesignSingularError("information matrix has no positive diagonal entry")
    try:
        factor = cho_factor(info, lower=True)
    except (LinAlgError, ValueError) as exc:
        raise DesignSingularError(f"information matrix is not positive definite: {exc}") from exc
    pivots = np.diag(factor[0]) ** 2
    if pivots.min() < settings.pivot_tolerance * scale:
        raise DesignSingularError(f"information matrix is numerically singular (smallest pivot {pivots.min():.3e}, scale {scale:.3e})")
    return factor


def covariance_from_information(info: np.ndarray) -> np.ndarray:
    cov = cho_solve(factorize(info), np.eye(info.shape[0]))
    return 0.5 * (cov + cov.T)


def asymptotic_covariance(n: float, scheme: PicScheme, theta: ModelParams) -> np.ndarray:
    """Inverse Fisher information: the asymptotic covariance of the MLE."""
    return covariance_from_information(fisher_information(n, scheme, theta))


def std_variance(scheme: PicScheme, theta: ModelParams, t0: float) -> float:
    """
    Standardised variance of the reliability estimate at ``t0``.

    ``S^2 = C_T^T (I/n)^-1 C_T``; it does not depend on ``n``.
    """
    if not t0 > 0:
        raise ParameterDomainError(f"t0 must be > 0, got {t0!r}")
    info = fisher_information(1.0, scheme, theta)
    c_t = reliability_gradient(t0, theta)
    s2 = float(c_t @ cho_solve(factorize(info), c_t))
    if not s2 > 0.0:
        raise DesignSingularError(f"standardised variance is not positive ({s2:g})")
    logger.debug(f"S^2 = {s2:.6g} for M={scheme.M}, L_M={scheme.L[-1]:.4g}, nu={theta.nu:g}")
    return s2
