"""Results of maximum-likelihood fitting and Monte Carlo evaluation."""

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from models.params import FitVariant, ModelParams


class ConvergenceReport(BaseModel):
    converged: bool
    starts: int = Field(..., description="Optimiser starts tried")
    successful_starts: int
    evaluations: int = Field(..., description="Log-likelihood evaluations over all starts")
    message: str = ""


class FitResult(BaseModel):
    """Maximum-likelihood fit of one model variant to grouped data."""

    variant: FitVariant
    theta: ModelParams
    parameter_names: List[str]
    standard_errors: Dict[str, float] = Field(default_factory=dict)
    covariance: Optional[List[List[float]]] = None
    loglik: float
    aic: float
    bic: float
    k: int = Field(..., description="Number of free parameters of the variant")
    n: int = Field(..., description="Number of test units")
    independence_limit: bool = Field(
        default=False,
        description="Fitted frailty variance collapsed to zero; theta is the independent model",
    )
    convergence: ConvergenceReport


class ReliabilityEstimate(BaseModel):
    t0: float
    value: float
    se: float


class ModelComparison(BaseModel):
    """Fits of several variants ranked by BIC (ties broken by AIC)."""

    fits: List[FitResult]
    best: FitVariant


class McSummary(BaseModel):
    """Monte Carlo operating characteristics of a sampling plan."""

    reps: int
    seed: int
    variant: FitVariant
    n: int
    pi_c: float
    true_reliability: float
    avg_reliability: float
    rmsd_reliability: float
    true_std_variance: float
    avg_std_variance: float
    rmsd_std_variance: float
    alpha_hat: float
    beta_hat: float
    failed_h0: int = 0
    failed_h1: int = 0
    independence_limit_fits: int = 0
