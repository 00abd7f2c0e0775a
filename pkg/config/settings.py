"""Application configuration using pydantic-settings."""

from __future__ import annotations

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """All configuration loaded from environment / .env file (prefix ``RASP_``)."""

    # ── Numerical tolerances ──────────────────────────────────────────────────
    pivot_tolerance: float = Field(
        default=1e-12,
        description="Smallest Cholesky pivot, relative to the largest diagonal entry, accepted as positive definite",
    )
    quad_tolerance: float = Field(
        default=1e-10,
        description="Absolute tolerance for sub-density quadrature (unequal-shape model)",
    )
    fd_relative_step: float = Field(default=1e-6, description="Relative step for central differences")

    # ── MLE fitting ───────────────────────────────────────────────────────────
    fit_restarts: int = Field(default=5, ge=0, description="Random restarts around the initial guess")
    fit_tolerance: float = Field(default=1e-8, description="Convergence tolerance on the log-likelihood")
    fit_max_iterations: int = Field(default=2000)
    restart_spread: float = Field(
        default=0.3,
        description="Standard deviation of the log-coordinate jitter used for restarts",
    )
    independence_threshold: float = Field(
        default=1e-6,
        description="Fitted frailty variance at or below this value is reported as the independence limit",
    )

    # ── Scheme design ─────────────────────────────────────────────────────────
    h_lower: float = Field(default=0.01, gt=0, description="Default lower bound for the inspection spacing h")
    h_grid_points: int = Field(default=41, ge=5, description="Coarse grid size used to bracket the optimum in h")
    h_tolerance: float = Field(default=1e-4, description="Tolerance in h for the bounded 1-D search")
    h_resolution: float = Field(
        default=1e-3,
        ge=0,
        description="Lattice on which budget designs quote the spacing h (rounded down); 0 keeps the raw optimum",
    )
    m_max: int = Field(default=10, ge=1, description="Largest inspection count examined by budget designs")

    # ── Monte Carlo ───────────────────────────────────────────────────────────
    seed: int = Field(default=20240101, description="Master seed for simulation and restarts")
    threads: int = Field(default=1, ge=1, description="Worker processes for Monte Carlo replicates")
    mc_failure_limit: float = Field(
        default=0.01,
        description="Largest tolerated fraction of failed fits over all 2*reps replicates (both hypotheses pooled)",
    )

    # ── Output ────────────────────────────────────────────────────────────────
    output_precision: int = Field(default=6, ge=1, description="Significant digits for printed numbers")
    reports_dir: str = Field(default="reports")

    # ── Logging ───────────────────────────────────────────────────────────────
    log_level: str = Field(default="INFO")
    log_file: Optional[str] = Field(default=None)

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "env_prefix": "RASP_", "extra": "ignore"}


settings = Settings()
