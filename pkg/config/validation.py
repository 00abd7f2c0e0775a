"""Validation of JSON run configurations.

A run configuration bundles the lifetime model, censoring scheme, costs and
risk requirements of a design study. ``validate_config`` also accepts any one
of those parts on its own and reports every violation with its path.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional, Sequence, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models.params import ModelParams, PositiveReal
from models.scheme import CostParams, PicScheme


class RiskConfig(BaseModel):
    """Producer/consumer risks and the discrimination ratio(s) defining HA."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(..., gt=0, lt=1, description="Producer's risk")
    beta: float = Field(..., gt=0, lt=1, description="Consumer's risk")
    t0: PositiveReal = Field(..., description="Mission time")
    d: Union[float, List[float]] = Field(..., description="Discrimination ratio, common or per cause")

    @field_validator("d")
    @classmethod
    def _ratios_at_least_one(cls, value: Union[float, List[float]]) -> Union[float, List[float]]:
        for ratio in value if isinstance(value, list) else [value]:
            if not ratio >= 1:
                raise ValueError(f"discrimination ratios must be >= 1, got {ratio}")
        return value


class RunConfig(BaseModel):
    """Everything a design or evaluation run needs; only the model is required."""

    model_config = ConfigDict(frozen=True)

    model: ModelParams
    scheme: Optional[PicScheme] = None
    costs: Optional[CostParams] = None
    risk: Optional[RiskConfig] = None

    @model_validator(mode="after")
    def _regular_design(self) -> "RunConfig":
        if self.scheme is not None and self.scheme.M < self.model.n_params:
            raise ValueError(f"M must be >= s: M = {self.scheme.M} but the model has s = {self.model.n_params} parameters")
        if isinstance(self.risk.d if self.risk else None, list) and len(self.risk.d) != self.model.n_causes:
            raise ValueError(f"risk.d needs {self.model.n_causes} ratios, one per cause")
        return self


class ConfigReport(BaseModel):
    ok: bool
    kind: str
    errors: List[str] = Field(default_factory=list)
    normalized: Optional[Dict[str, Any]] = None


_BOUNDS = {
    "greater_than": ("gt", ">"),
    "greater_than_equal": ("ge", ">="),
    "less_than": ("lt", "<"),
    "less_than_equal": ("le", "<="),
}


def _path(loc: Sequence[Union[str, int]]) -> str:
    out = ""
    for part in loc:
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out


def format_errors(exc: ValidationError) -> List[str]:
    """One line per violation, e.g. ``eta[1] must be > 0``."""
    lines = []
    for error in exc.errors():
        path = _path(error["loc"])
        if error["type"] == "scheme_invariants":
            for where, message in error["ctx"]["problems"]:
                lines.append(f"{path}.{where} {message}" if path else f"{where} {message}")
            continue
        bound = _BOUNDS.get(error["type"])
        if bound and path:
            key, symbol = bound
            lines.append(f"{path} must be {symbol} {error['ctx'][key]:g}")
            continue
        message = error["msg"].removeprefix("Value error, ")
        lines.append(f"{path}: {message}" if path else message)
    return lines


def _kind(payload: Dict[str, Any]) -> Type[BaseModel]:
    if "model" in payload:
        return RunConfig
    if "eta" in payload:
        return ModelParams
    if "L" in payload or "M" in payload:
        return PicScheme
    if "budget" in payload or "c_sample" in payload:
        return CostParams
    if "alpha" in payload:
        return RiskConfig
    return RunConfig


def validate_config(json_text: str) -> ConfigReport:
    """
    Parse and check a JSON configuration.

    Returns:
        ConfigReport with ``ok``, the detected configuration kind, every
        violation found and, when valid, the normalized configuration.
    """
    try:
        payload = json.loads(json_text)
    except json.JSONDecodeError as exc:
        return ConfigReport(ok=False, kind="unknown", errors=[f"invalid JSON: {exc}"])
    if not isinstance(payload, dict):
        return ConfigReport(ok=False, kind="unknown", errors=["configuration must be a JSON object"])

    kind = _kind(payload)
    try:
        parsed = kind.model_validate(payload)
    except ValidationError as exc:
        return ConfigReport(ok=False, kind=kind.__name__, errors=format_errors(exc))
    return ConfigReport(ok=True, kind=kind.__name__, normalized=parsed.model_dump(mode="json", exclude_none=True))
