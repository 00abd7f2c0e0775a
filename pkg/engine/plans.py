"""Reliability acceptance sampling plans: sample size, acceptance limit, OC curves.

A lot is accepted when the estimated reliability at ``t0`` exceeds the
acceptance limit ``pi_c``. The plan ``(n, pi_c)`` is chosen so the
asymptotic producer's risk at ``theta0`` is ``alpha`` and the consumer's risk
at ``theta1`` is ``beta``.
"""

from __future__ import annotations

import math
from numbers import Real
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy.stats import norm

from engine.fisher import std_variance
from engine.lifetime import reliability
from models.errors import DegenerateHypothesesError, ParameterDomainError, RiskSpecificationError
from models.params import ModelParams
from models.plan import Decision, PlanResult, RiskSpec
from models.scheme import PicScheme

PathFunction = Callable[[float], ModelParams]


def derive_hypotheses(
    eta0: Sequence[float],
    d: Union[float, Sequence[float]],
    gamma: Optional[float] = None,
    nu: float = 0.0,
    gammas: Optional[Sequence[float]] = None,
) -> Tuple[ModelParams, ModelParams]:
    """
    Null and alternative models from discrimination ratios.

    ``theta1`` divides each scale ``eta0[j]`` by ``d[j]``; a single ``d`` is
    applied to every cause.
    """
    ratios = [float(d)] * len(eta0) if isinstance(d, Real) else [float(x) for x in d]
    if len(ratios) != len(eta0):
        raise ParameterDomainError(f"need one discrimination ratio per cause ({len(eta0)}), got {len(ratios)}")
    for j, ratio in enumerate(ratios):
        if not ratio >= 1.0:
            raise ParameterDomainError(f"d[{j}] must be >= 1, got {ratio:g}")
    theta0 = ModelParams(eta=tuple(eta0), gamma=gamma, gammas=None if gammas is None else tuple(gammas), nu=nu)
    theta1 = theta0.with_eta([e / ratio for e, ratio in zip(theta0.eta, ratios)])
    return theta0, theta1


def risk_spec(
    alpha: float,
    beta: float,
    t0: float,
    eta0: Sequence[float],
    d: Union[float, Sequence[float]],
    gamma: Optional[float] = None,
    nu: float = 0.0,
    gammas: Optional[Sequence[float]] = None,
) -> RiskSpec:
    theta0, theta1 = derive_hypotheses(eta0, d, gamma=gamma, nu=nu, gammas=gammas)
    return RiskSpec(alpha=alpha, beta=beta, t0=t0, theta0=theta0, theta1=theta1)


def _acceptance(pi_c: float, n: float, pi: float, s: float) -> float:
    # P(estimate > pi_c) for an estimate ~ N(pi, s^2 / n)
    return float(norm.sf(math.sqrt(n) * (pi_c - pi) / s))


def design_plan(spec: RiskSpec, scheme: PicScheme, round_up: bool = False) -> PlanResult:
    """
    Sample size and acceptance limit for a given censoring scheme.

    Args:
        spec: Risks, mission time and the two hypotheses.
        scheme: PIC-I scheme of the life test.
        round_up: Use the ceiling of the real sample size instead of the floor.

    Raises:
        DegenerateHypothesesError: if the hypotheses give the same reliability.
        RiskSpecificationError: if the risks admit no acceptance limit.
    """
    pi0 = float(reliability(spec.t0, spec.theta0))
    pi1 = float(reliability(spec.t0, spec.theta1))
    if not pi0 > pi1:
        raise DegenerateHypothesesError(f"pi0 = {pi0:.6g} must exceed pi1 = {pi1:.6g}; the hypotheses do not discriminate")

    s0 = math.sqrt(std_variance(scheme, spec.theta0, spec.t0))
    s1 = math.sqrt(std_variance(scheme, spec.theta1, spec.t0))
    z_beta = float(norm.isf(spec.beta))
    z_one_minus_alpha = float(norm.isf(1.0 - spec.alpha))
    spread = s1 * z_beta - s0 * z_one_minus_alpha
    if not spread > 0.0:
        raise RiskSpecificationError(f"alpha = {spec.alpha}, beta = {spec.beta} leave no admissible acceptance limit")

    pi_c = (pi0 * s1 * z_beta - pi1 * s0 * z_one_minus_alpha) / spread
    n_raw = (spread / (pi0 - pi1)) ** 2
    n_star = max(1, math.ceil(n_raw) if round_up else math.floor(n_raw))
    logger.debug(f"plan: pi0={pi0:.4f} pi1={pi1:.4f} S0={s0:.4f} S1={s1:.4f} -> n={n_raw:.3f}, pi_c={pi_c:.4f}")

    return PlanResult(
        n_raw=n_raw,
        n_star=n_star,
        pi_c=pi_c,
        pi0=pi0,
        pi1=pi1,
        s0=s0,
        s1=s1,
        alpha=spec.alpha,
        beta=spec.beta,
        t0=spec.t0,
        achieved_alpha=1.0 - _acceptance(pi_c, n_star, pi0, s0),
        achieved_beta=_acceptance(pi_c, n_star, pi1, s1),
        scheme=scheme,
    )


def acceptance_probability(
    theta: ModelParams,
    plan: PlanResult,
    t0: Optional[float] = None,
    sample_size: Optional[float] = None,
) -> float:
    """
    Asymptotic probability of accepting a lot of quality ``theta``.

    ``1 - Phi(sqrt(n) (pi_c - F_T(t0)) / S)`` with ``S`` evaluated at
    ``theta`` under the plan's scheme; ``n`` defaults to ``plan.n_star``.
    """
    t0 = plan.t0 if t0 is None else t0
    n = plan.n_star if sample_size is None else sample_size
    pi = float(reliability(t0, theta))
    s = math.sqrt(std_variance(plan.scheme, theta, t0))
    return _acceptance(plan.pi_c, n, pi, s)


def scale_path(theta0: ModelParams, theta1: ModelParams) -> PathFunction:
    """Geometric interpolation of every scale from ``theta0`` (0) to ``theta1`` (1)."""
    eta0 = theta0.eta_array
    ratio = theta1.eta_array / eta0

    def path(lam: float) -> ModelParams:
        return theta0.with_eta(eta0 * ratio**lam)

    return path


def oc_curve(
    plan: PlanResult,
    theta0: ModelParams,
    theta1: ModelParams,
    t0: Optional[float] = None,
    grid_size: int = 51,
    path: Optional[PathFunction] = None,
    span: Tuple[float, float] = (0.0, 1.0),
) -> List[Tuple[float, float]]:
    """
    Operating characteristic curve.

    Walks the lot-quality path from ``theta0`` towards ``theta1`` and returns
    ``(defective_proportion, acceptance_probability)`` pairs, where the
    defective proportion is ``1 - F_T(t0)``. With a common discrimination
    ratio ``d`` the default path is ``eta(c) = c * eta0`` for ``c`` from 1 to
    ``1/d``.
    """
    if grid_size < 2:
        raise ParameterDomainError(f"grid_size must be >= 2, got {grid_size}")
    t0 = plan.t0 if t0 is None else t0
    path = path or scale_path(theta0, theta1)
    points = []
    for lam in np.linspace(span[0], span[1], grid_size):
        theta = path(float(lam))
        points.append((1.0 - float(reliability(t0, theta)), acceptance_probability(theta, plan, t0)))
    return points


def decide(reliability_estimate: float, pi_c: float) -> Decision:
    """Accept iff the estimate is strictly above the acceptance limit."""
    return Decision.ACCEPT if reliability_estimate > pi_c else Decision.REJECT
