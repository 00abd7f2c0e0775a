"""Observed grouped life-test data under a PIC-I scheme."""

from __future__ import annotations

from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, model_validator

from models.scheme import PicScheme


class ObservedData(BaseModel):
    """
    Per-interval failure counts by cause and withdrawal counts.

    ``d[i][j]`` units failed from cause ``j`` in ``(L[i-1], L[i]]`` and
    ``r[i]`` survivors were withdrawn at ``L[i]``. The number of test units
    is implied by the counts; the last withdrawal removes every survivor.
    """

    model_config = ConfigDict(frozen=True)

    scheme: PicScheme
    d: Tuple[Tuple[NonNegativeInt, ...], ...] = Field(..., description="Failures per interval and cause")
    r: Tuple[NonNegativeInt, ...] = Field(..., description="Withdrawals per inspection")

    @model_validator(mode="after")
    def _check_recursion(self) -> "ObservedData":
        M = self.scheme.M
        if len(self.d) != M or len(self.r) != M:
            raise ValueError(f"d and r need one row per inspection ({M})")
        widths = {len(row) for row in self.d}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("every row of d must list the same positive number of causes")
        n_units = sum(sum(row) for row in self.d) + sum(self.r)
        if n_units < 1:
            raise ValueError("data must contain at least one test unit")
        at_risk = n_units
        for i in range(M):
            at_risk -= sum(self.d[i]) + self.r[i]
            if at_risk < 0:
                raise ValueError(f"counts in interval {i + 1} exceed the {at_risk + sum(self.d[i]) + self.r[i]} units at risk")
        return self

    @property
    def M(self) -> int:
        return self.scheme.M

    @property
    def n_causes(self) -> int:
        return len(self.d[0])

    @property
    def n(self) -> int:
        """Number of test units."""
        return int(self.failures.sum() + self.withdrawn.sum())

    @property
    def failures(self) -> np.ndarray:
        return np.asarray(self.d, dtype=float)

    @property
    def withdrawn(self) -> np.ndarray:
        return np.asarray(self.r, dtype=float)

    @property
    def at_risk(self) -> np.ndarray:
        """n_i, the units on test at the start of each interval."""
        removed = self.failures.sum(axis=1) + self.withdrawn
        return self.n - np.concatenate(([0.0], np.cumsum(removed)[:-1]))
