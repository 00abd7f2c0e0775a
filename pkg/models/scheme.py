"""Censoring scheme, cost and expectation containers."""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral, Real
from typing import Any, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic_core import PydanticCustomError

from models.params import NonNegativeReal, PositiveReal


class PicScheme(BaseModel):
    """
    Progressive Type-I interval censoring scheme.

    Units are inspected at ``L[0] < ... < L[M-1]``; at inspection ``i`` a
    proportion ``p_list[i]`` of the surviving units is withdrawn, and every
    survivor is removed at the last inspection (``p_list[-1] == 1``).

    Accepts the JSON forms ``{"M": 4, "h": 0.2}`` or ``{"L": [...]}`` together
    with ``{"p": 0.2}`` (common proportion) or ``{"p_list": [...]}``. A
    ``p_list`` of length ``M - 1`` gets the terminal 1 appended.
    """

    model_config = ConfigDict(frozen=True)

    L: Tuple[PositiveReal, ...] = Field(..., min_length=1, description="Inspection times")
    p_list: Tuple[float, ...] = Field(..., description="Withdrawal proportion at each inspection")
    h: Optional[PositiveReal] = Field(default=None, description="Common spacing when equispaced")

    @model_validator(mode="before")
    @classmethod
    def _expand_shorthand(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        count = data.pop("M", None)
        if count is not None:
            if isinstance(count, bool) or not isinstance(count, Integral) or count < 1:
                raise ValueError("M must be a positive integer")
        if "L" not in data:
            h = data.get("h")
            if count is None or not isinstance(h, Real) or isinstance(h, bool):
                raise ValueError("scheme needs either L or both M and h")
            data["L"] = [(i + 1) * float(h) for i in range(int(count))]
        elif count is not None and len(data["L"]) != count:
            raise ValueError(f"M = {count} does not match {len(data['L'])} inspection times")

        n_inspections = len(data["L"]) if isinstance(data["L"], (list, tuple)) else 0
        common = data.pop("p", None)
        if "p_list" in data:
            if common is not None:
                raise ValueError("give either p or p_list, not both")
            p_list = list(data["p_list"])
            if len(p_list) == n_inspections - 1:
                p_list.append(1.0)
            data["p_list"] = p_list
        else:
            common = 0.0 if common is None else common
            data["p_list"] = [common] * max(n_inspections - 1, 0) + [1.0]
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "PicScheme":
        problems = self._violations()
        if problems:
            raise PydanticCustomError(
                "scheme_invariants",
                "{summary}",
                {"summary": "; ".join(f"{path} {message}" for path, message in problems), "problems": problems},
            )
        return self

    def _violations(self) -> List[Tuple[str, str]]:
        """Every broken ordering or withdrawal rule as ``(path, message)``."""
        times, p_list = self.L, self.p_list
        problems = [
            (f"L[{i}]", f"must exceed L[{i - 1}] = {times[i - 1]:g}, got {times[i]:g}")
            for i in range(1, len(times))
            if times[i] <= times[i - 1]
        ]
        if len(p_list) != len(times):
            problems.append(("p_list", f"must have {len(times)} entries, one per inspection"))
            return problems
        problems += [(f"p_list[{i}]", "must lie in [0, 1)") for i, p in enumerate(p_list[:-1]) if not 0.0 <= p < 1.0]
        if p_list[-1] != 1.0:
            problems.append((f"p_list[{len(times) - 1}]", "must equal 1 (all survivors removed at the last inspection)"))
        return problems

    @classmethod
    def equispaced(cls, M: int, h: float, p: float = 0.0) -> "PicScheme":
        """``L_i = i*h`` with a common withdrawal proportion ``p``."""
        return cls(M=M, h=h, p=p)

    @property
    def M(self) -> int:
        return len(self.L)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.L, dtype=float)

    @property
    def withdrawals(self) -> np.ndarray:
        return np.asarray(self.p_list, dtype=float)

    @property
    def common_p(self) -> Optional[float]:
        """The shared intermediate withdrawal proportion, if there is one."""
        inner = set(self.p_list[:-1])
        if len(inner) > 1:
            return None
        return next(iter(inner)) if inner else 0.0


class CostParams(BaseModel):
    """Unit, duration, failure and inspection costs plus the available budget."""

    model_config = ConfigDict(frozen=True)

    c_sample: NonNegativeReal = Field(..., description="Cost per test unit")
    c_time: NonNegativeReal = Field(..., description="Cost per unit of test duration")
    c_failure: NonNegativeReal = Field(..., description="Cost per failed unit")
    c_inspection: NonNegativeReal = Field(..., description="Cost per inspection")
    budget: PositiveReal = Field(..., description="Available budget C_B")


class CostBreakdown(BaseModel):
    """Expected cost of a life test split into its additive components."""

    sample: float
    duration: float
    failures: float
    inspections: float
    total: float
    e_failures: float = Field(..., description="E[D]")
    e_duration: float = Field(..., description="E[tau]")
    e_inspections: float = Field(..., description="E[I]")


@dataclass(frozen=True)
class ExpectedCounts:
    """Expected at-risk, failure and withdrawal counts per inspection interval."""

    e_n: np.ndarray
    e_d: np.ndarray
    e_dplus: np.ndarray
    e_r: np.ndarray

    @property
    def e_d_total(self) -> float:
        return float(np.sum(self.e_dplus))


@dataclass(frozen=True)
class TerminationSummary:
    """Law of the inspection at which the last unit leaves the test."""

    term_prob: np.ndarray
    e_tau: float
    e_inspections: float
