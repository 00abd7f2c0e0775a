"""Utility helper functions."""

from __future__ import annotations

import math
from typing import Any, Callable, Iterator, List, TypeVar

import numpy as np

T = TypeVar("T")


def chunk_list(lst: List[T], size: int) -> Iterator[List[T]]:
    """Yield successive chunks of a given size from a list."""
    for i in range(0, len(lst), size):
        yield lst[i : i + size]


def central_jacobian(
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    rel_step: float = 1e-6,
) -> np.ndarray:
    """
    Central-difference Jacobian of a vector function.

    The step for coordinate ``u`` is ``rel_step * |x_u|`` (``rel_step`` when
    ``x_u`` is zero), so positive parameters stay positive for small steps.

    Returns:
        Array of shape ``(len(func(x)), len(x))``.
    """
    x = np.asarray(x, dtype=float)
    columns = []
    for u in range(x.size):
        step = rel_step * (abs(x[u]) if x[u] != 0.0 else 1.0)
        up, down = x.copy(), x.copy()
        up[u] += step
        down[u] -= step
        columns.append((np.atleast_1d(func(up)) - np.atleast_1d(func(down))) / (2.0 * step))
    return np.stack(columns, axis=-1)


def significant(value: float, digits: int) -> float:
    """Round to ``digits`` significant digits."""
    if value == 0.0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def round_floats(obj: Any, digits: int) -> Any:
    """Recursively round every float inside a JSON-like structure."""
    if isinstance(obj, float):
        return significant(obj, digits)
    if isinstance(obj, dict):
        return {k: round_floats(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, digits) for v in obj]
    return obj


def parse_float_list(raw: str) -> List[float]:
    """Parse ``"1.5,1.8"`` or ``"1.5 1.8"`` into floats."""
    parts = [p for p in raw.replace(",", " ").split() if p]
    if not parts:
        raise ValueError("expected at least one number")
    return [float(p) for p in parts]
