"""CSV and JSON artifacts: observed data sets, design tables and saved results."""

from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path
from typing import Any, List, Optional, Sequence, Type, TypeVar, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ValidationError

from config.settings import settings
from models.data import ObservedData
from models.errors import DataConsistencyError
from models.scheme import PicScheme
from utils.helpers import round_floats

ResultT = TypeVar("ResultT", bound=BaseModel)
PathLike = Union[str, Path]


# ── Observed data CSV ─────────────────────────────────────────────────────────


def observed_frame(data: ObservedData) -> pd.DataFrame:
    """``i,L_lower,L_upper,d_1..d_J,r`` with one row per interval."""
    upper = np.asarray(data.scheme.L, dtype=float)
    frame = pd.DataFrame(
        {
            "i": np.arange(1, data.M + 1),
            "L_lower": np.concatenate(([0.0], upper[:-1])),
            "L_upper": upper,
        }
    )
    for j in range(data.n_causes):
        frame[f"d_{j + 1}"] = [row[j] for row in data.d]
    frame["r"] = list(data.r)
    return frame


def write_observed_csv(data: ObservedData, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    observed_frame(data).to_csv(path, index=False)
    logger.info(f"Data set written to {path}")
    return path


def _withdrawal_proportions(d: np.ndarray, r: np.ndarray) -> List[float]:
    """Empirical p_i = r_i / (n_i - d_i+) before the last inspection."""
    at_risk = d.sum() + r.sum()
    proportions = []
    for i in range(len(r) - 1):
        survivors = at_risk - d[i].sum()
        p = r[i] / survivors if survivors > 0 else 0.0
        # the likelihood does not depend on p; keep the scheme valid when all survivors leave early
        proportions.append(float(min(p, np.nextafter(1.0, 0.0))))
        at_risk = survivors - r[i]
    return proportions + [1.0]


def observed_from_frame(frame: pd.DataFrame) -> ObservedData:
    """Rebuild ``ObservedData`` (and its scheme) from a data-set frame."""
    d_cols = sorted((c for c in frame.columns if str(c).startswith("d_")), key=lambda c: int(str(c)[2:]))
    missing = [c for c in ("i", "L_upper", "r") if c not in frame.columns]
    if missing or not d_cols:
        raise DataConsistencyError(f"data set needs columns i, L_upper, d_1.., r; missing {missing or ['d_1']}")
    frame = frame.sort_values("i").reset_index(drop=True)
    upper = frame["L_upper"].to_numpy(dtype=float)
    if "L_lower" in frame.columns:
        lower = frame["L_lower"].to_numpy(dtype=float)
        if not np.allclose(lower, np.concatenate(([0.0], upper[:-1]))):
            raise DataConsistencyError("L_lower must start at 0 and repeat the previous L_upper")

    d = frame[d_cols].to_numpy()
    r = frame["r"].to_numpy()
    if np.any(d < 0) or np.any(r < 0) or np.any(d != np.round(d)) or np.any(r != np.round(r)):
        raise DataConsistencyError("counts must be non-negative integers")
    d, r = d.astype(int), r.astype(int)
    try:
        scheme = PicScheme(L=tuple(upper), p_list=tuple(_withdrawal_proportions(d, r)))
        return ObservedData(scheme=scheme, d=tuple(map(tuple, d.tolist())), r=tuple(r.tolist()))
    except ValidationError as exc:
        raise DataConsistencyError(f"inconsistent data set: {exc.errors()[0]['msg']}") from exc


def read_observed_csv(path: PathLike) -> ObservedData:
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataConsistencyError(f"cannot read data set {path}: {exc}") from exc
    data = observed_from_frame(frame)
    logger.debug(f"Loaded {data.n} units over {data.M} intervals from {path}")
    return data


# ── Tables and JSON ───────────────────────────────────────────────────────────


def _record(row: Any) -> dict:
    return row.model_dump(mode="json") if isinstance(row, BaseModel) else dict(row)


def table_csv(rows: Sequence[Any], columns: Optional[Sequence[str]] = None, precision: Optional[int] = None) -> str:
    """Render pydantic rows or dicts as CSV text."""
    digits = settings.output_precision if precision is None else precision
    frame = pd.DataFrame([round_floats(_record(row), digits) for row in rows], columns=columns)
    return frame.to_csv(index=False, lineterminator="\n")


def dump_json(result: Any, precision: Optional[int] = None) -> str:
    """Pretty JSON with floats rounded to ``precision`` significant digits."""
    digits = settings.output_precision if precision is None else precision
    payload = result.model_dump(mode="json") if isinstance(result, BaseModel) else result
    return json.dumps(round_floats(payload, digits), indent=2)


# ── Result store ──────────────────────────────────────────────────────────────


class ResultStore:
    """
    File-backed store for run results.

    Every saved result is one JSON file ``<kind>_<timestamp>.json`` under
    ``reports_dir``; the newest file of a kind can be loaded back into its
    pydantic model.
    """

    def __init__(self, reports_dir: Optional[PathLike] = None) -> None:
        self._reports_dir = Path(reports_dir or settings.reports_dir)
        self._reports_dir.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def _prefix(kind: str) -> str:
        return kind.lower().replace(" ", "_").replace("/", "_").replace("-", "_")

    def paths(self, kind: str) -> List[Path]:
        """Saved files of a kind, newest first."""
        return sorted(self._reports_dir.glob(f"{self._prefix(kind)}_*.json"), reverse=True)

    def save(self, kind: str, result: BaseModel, filename: Optional[str] = None) -> Path:
        if filename is None:
            ts = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
            filename = f"{self._prefix(kind)}_{ts}.json"
        path = self._reports_dir / filename
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(result.model_dump(mode="json"), fh, indent=2)
        logger.info(f"Result saved to {path}")
        return path

    def load_latest(self, kind: str, model: Type[ResultT]) -> Optional[ResultT]:
        """Load the most recently saved result of ``kind``."""
        saved = self.paths(kind)
        if not saved:
            return None
        with open(saved[0], "r", encoding="utf-8") as fh:
            return model.model_validate(json.load(fh))
