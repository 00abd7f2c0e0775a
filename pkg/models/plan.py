"""Pydantic models for risk specifications, sampling plans and scheme designs."""

from __future__ import annotations

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.params import ModelParams, PositiveReal
from models.scheme import CostBreakdown, PicScheme


class Decision(str, Enum):
    """Lot disposition."""

    ACCEPT = "accept"
    REJECT = "reject"


class RiskSpec(BaseModel):
    """Producer/consumer risks at mission time ``t0`` for a pair of simple hypotheses."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0, lt=1, description="Producer's risk")
    beta: float = Field(..., gt=0, lt=1, description="Consumer's risk")
    t0: PositiveReal = Field(..., description="Mission time")
    theta0: ModelParams = Field(..., description="Acceptable lot quality (H0)")
    theta1: ModelParams = Field(..., description="Rejectable lot quality (HA)")

    @model_validator(mode="after")
    def _same_layout(self) -> "RiskSpec":
        if self.theta0.n_causes != self.theta1.n_causes:
            raise ValueError("theta0 and theta1 must have the same number of causes")
        if self.theta0.equal_shape != self.theta1.equal_shape:
            raise ValueError("theta0 and theta1 must share the shape parameterisation")
        return self


class PlanResult(BaseModel):
    """A reliability acceptance sampling plan (n, pi_c) for a given scheme."""

    n_raw: float = Field(..., gt=0, description="Real-valued sample size")
    n_star: int = Field(..., ge=1, description="Integer sample size used for testing")
    pi_c: float = Field(..., description="Acceptance limit on the estimated reliability")
    pi0: float
    pi1: float
    s0: float = Field(..., description="Standardised deviation of the estimate under H0")
    s1: float = Field(..., description="Standardised deviation of the estimate under HA")
    alpha: float
    beta: float
    t0: float
    achieved_alpha: float = Field(..., description="Producer's risk at n_star")
    achieved_beta: float = Field(..., description="Consumer's risk at n_star")
    scheme: PicScheme


class HOptimum(BaseModel):
    """Minimiser of the c-optimality criterion over the inspection spacing."""

    M: int
    p: float
    h: float
    phi: float
    at_boundary: bool = False


class UnconstrainedDesign(BaseModel):
    plan: PlanResult
    h: float
    phi: float
    at_boundary: bool = False


class DesignGridRow(BaseModel):
    """One row of an unconstrained design table."""

    p: float
    nu: float
    M: int
    h: float
    phi: float
    n: int
    pi_c: float
    at_boundary: bool = False


class BudgetRow(BaseModel):
    """Best achievable design for one inspection count under the budget."""

    M: int
    feasible: bool
    h: Optional[float] = None
    phi: Optional[float] = None
    n_raw: Optional[float] = None
    total_cost: Optional[float] = None
    constraint_active: bool = False
    min_total_cost: Optional[float] = Field(default=None, description="Smallest total cost seen over h")


class BudgetDesign(BaseModel):
    """Budget-constrained design: the chosen plan and its expected costs."""

    plan: PlanResult
    M: int
    h: float
    phi: float
    costs: CostBreakdown
    rows: List[BudgetRow] = Field(default_factory=list)


class MonotonicityRow(BaseModel):
    h: float
    p: float
    M: int
    phi: Optional[float] = None


class MonotonicityViolation(BaseModel):
    """Adjacent grid points where the criterion moved the wrong way."""

    kind: str = Field(..., description="'M' (should decrease) or 'p' (should increase)")
    h: float
    M: int
    p: float
    next_value: float = Field(..., description="The M or p of the following grid point")
    phi: float
    next_phi: float


class MonotonicityReport(BaseModel):
    rows: List[MonotonicityRow] = Field(default_factory=list)
    violations: List[MonotonicityViolation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations
