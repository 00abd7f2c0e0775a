"""Pydantic models for the frailty Weibull competing-risks lifetime model."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Annotated, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

PositiveReal = Annotated[float, Field(gt=0, allow_inf_nan=False)]
NonNegativeReal = Annotated[float, Field(ge=0, allow_inf_nan=False)]


class FitVariant(str, Enum):
    """Model family fitted by maximum likelihood."""

    INDEPENDENT_EQUAL = "independent-equal"
    INDEPENDENT_UNEQUAL = "independent-unequal"
    DEPENDENT_EQUAL = "dependent-equal"
    DEPENDENT_UNEQUAL = "dependent-unequal"

    @property
    def dependent(self) -> bool:
        return self in (FitVariant.DEPENDENT_EQUAL, FitVariant.DEPENDENT_UNEQUAL)

    @property
    def equal_shape(self) -> bool:
        return self in (FitVariant.INDEPENDENT_EQUAL, FitVariant.DEPENDENT_EQUAL)

    def n_params(self, n_causes: int) -> int:
        """Number of free parameters for ``n_causes`` failure modes."""
        shapes = 1 if self.equal_shape else n_causes
        return n_causes + shapes + (1 if self.dependent else 0)

    @classmethod
    def for_model(cls, theta: "ModelParams") -> "FitVariant":
        if theta.equal_shape:
            return cls.DEPENDENT_EQUAL if theta.dependent else cls.INDEPENDENT_EQUAL
        return cls.DEPENDENT_UNEQUAL if theta.dependent else cls.INDEPENDENT_UNEQUAL


class ModelParams(BaseModel):
    """
    Gamma-frailty Weibull competing-risks model.

    Cause ``j`` has Weibull scale ``eta[j]``; the shape is either shared
    (``gamma``) or per cause (``gammas``). ``nu`` is the variance of the
    gamma frailty; ``nu == 0`` is the independent competing-risks model and
    drops the frailty parameter from the parameter vector.

    The parameter vector is ordered ``(eta_1..eta_J, shape(s), nu)``.
    """

    model_config = ConfigDict(frozen=True)

    eta: Tuple[PositiveReal, ...] = Field(..., min_length=1, description="Weibull scale per cause")
    gamma: Optional[PositiveReal] = Field(default=None, description="Common Weibull shape")
    gammas: Optional[Tuple[PositiveReal, ...]] = Field(default=None, description="Per-cause Weibull shapes")
    nu: NonNegativeReal = Field(default=0.0, description="Gamma frailty variance (0 = independent causes)")

    @model_validator(mode="after")
    def _check_shape(self) -> "ModelParams":
        if (self.gamma is None) == (self.gammas is None):
            raise ValueError("exactly one of gamma or gammas must be given")
        if self.gammas is not None and len(self.gammas) != len(self.eta):
            raise ValueError(f"gammas must have {len(self.eta)} entries, one per cause")
        return self

    # ── Shape of the model ────────────────────────────────────────────────────

    @property
    def n_causes(self) -> int:
        return len(self.eta)

    @property
    def equal_shape(self) -> bool:
        return self.gamma is not None

    @property
    def dependent(self) -> bool:
        return self.nu > 0.0

    @property
    def n_params(self) -> int:
        """Parameter count s."""
        shapes = 1 if self.equal_shape else self.n_causes
        return self.n_causes + shapes + (1 if self.dependent else 0)

    @property
    def eta_array(self) -> np.ndarray:
        return np.asarray(self.eta, dtype=float)

    @property
    def shape_array(self) -> np.ndarray:
        """Per-cause shapes (the common shape repeated for equal-shape models)."""
        if self.gamma is not None:
            return np.full(self.n_causes, float(self.gamma))
        return np.asarray(self.gammas, dtype=float)

    def parameter_names(self) -> List[str]:
        names = [f"eta_{j + 1}" for j in range(self.n_causes)]
        if self.equal_shape:
            names.append("gamma")
        else:
            names.extend(f"gamma_{j + 1}" for j in range(self.n_causes))
        if self.dependent:
            names.append("nu")
        return names

    # ── Vector form ───────────────────────────────────────────────────────────

    def to_vector(self) -> np.ndarray:
        parts = [self.eta_array]
        parts.append(np.array([self.gamma]) if self.equal_shape else self.shape_array)
        if self.dependent:
            parts.append(np.array([self.nu]))
        return np.concatenate(parts)

    @classmethod
    def from_vector(
        cls,
        vector: Sequence[float],
        n_causes: int,
        equal_shape: bool = True,
        dependent: bool = True,
    ) -> "ModelParams":
        """Inverse of :meth:`to_vector` for the given model layout."""
        values = [float(v) for v in vector]
        eta = tuple(values[:n_causes])
        pos = n_causes
        if equal_shape:
            shape_kw = {"gamma": values[pos]}
            pos += 1
        else:
            shape_kw = {"gammas": tuple(values[pos : pos + n_causes])}
            pos += n_causes
        nu = values[pos] if dependent else 0.0
        return cls(eta=eta, nu=nu, **shape_kw)

    def with_eta(self, eta: Sequence[float]) -> "ModelParams":
        """Copy with replaced scale parameters."""
        return ModelParams(
            eta=tuple(float(e) for e in eta),
            gamma=self.gamma,
            gammas=self.gammas,
            nu=self.nu,
        )

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)


@dataclass(frozen=True)
class CauseMassVector:
    """``psi[j] = log sum_j' (eta_j / eta_j')**gamma``; ``exp(-psi)`` is P(C = j)."""

    psi: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(-self.psi)
