"""Count-level simulation of PIC-I competing-risks life tests and Monte Carlo plan evaluation.

Each interval draws ``(D_i1, ..., D_iJ, survivors)`` from a multinomial on the
units still at risk, then withdraws ``floor(p_i * survivors)``. Every draw
uses its own counter-based generator keyed by ``(seed, stream, replicate,
interval)``, so a Monte Carlo run gives the same numbers for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config.settings import settings
from engine.fisher import std_variance
from engine.inference import fit_mle
from engine.lifetime import interval_probs, reliability
from engine.plans import decide
from models.data import ObservedData
from models.errors import (
    ConditioningError,
    ConvergenceError,
    DesignSingularError,
    ParameterDomainError,
    SchemeError,
)
from models.fit import McSummary
from models.params import FitVariant, ModelParams
from models.plan import Decision, PlanResult
from models.scheme import PicScheme
from utils.helpers import chunk_list

H0_STREAM = 0
H1_STREAM = 1


def _generator(seed: int, stream: int, replicate: int, interval: int) -> np.random.Generator:
    key = np.random.SeedSequence(seed, spawn_key=(stream, replicate, interval))
    return np.random.Generator(np.random.Philox(key))


def _simulation_probs(scheme: PicScheme, theta: ModelParams) -> Tuple[np.ndarray, np.ndarray]:
    try:
        return interval_probs(scheme.times, theta)
    except ConditioningError as exc:
        # no unit can reach an interval whose starting reliability underflows
        live = (exc.interval or 1) - 1
        q_matrix = np.full((scheme.M, theta.n_causes), 1.0 / theta.n_causes)
        q = np.ones(scheme.M)
        if live:
            q_matrix[:live], q[:live] = interval_probs(scheme.times[:live], theta)
        return q_matrix, q


def simulate_dataset(
    theta: ModelParams,
    scheme: PicScheme,
    n: int,
    seed: int,
    replicate: int = 0,
    stream: int = 0,
) -> ObservedData:
    """
    Draw one grouped PIC-I data set.

    Args:
        theta: Generating lifetime model.
        scheme: Inspection times and withdrawal proportions.
        n: Units placed on test.
        seed: Master seed.
        replicate: Replicate index inside a Monte Carlo run.
        stream: Independent stream index (H0 and HA draws use different streams).
    """
    if n < 1:
        raise ParameterDomainError(f"n must be >= 1, got {n}")
    q_matrix, q = _simulation_probs(scheme, theta)
    withdrawals = scheme.withdrawals
    at_risk = int(n)
    d_rows: List[Tuple[int, ...]] = []
    removed: List[int] = []
    for i in range(scheme.M):
        probs = np.append(np.clip(q_matrix[i], 0.0, None), max(1.0 - q[i], 0.0))
        draw = _generator(seed, stream, replicate, i).multinomial(at_risk, probs / probs.sum())
        survivors = int(draw[-1])
        withdrawn = survivors if i == scheme.M - 1 else int(math.floor(withdrawals[i] * survivors))
        d_rows.append(tuple(int(x) for x in draw[:-1]))
        removed.append(withdrawn)
        at_risk = survivors - withdrawn
    return ObservedData(scheme=scheme, d=tuple(d_rows), r=tuple(removed))


# ── Monte Carlo evaluation ────────────────────────────────────────────────────


@dataclass(frozen=True)
class _Task:
    theta: ModelParams
    scheme: PicScheme
    n: int
    seed: int
    stream: int
    replicate: int
    variant: FitVariant
    t0: float
    pi_c: float


@dataclass(frozen=True)
class _Outcome:
    stream: int
    replicate: int
    fitted: bool
    estimate: float = math.nan
    std_variance: float = math.nan
    accepted: bool = False
    independence_limit: bool = False


def _run_replicate(task: _Task) -> _Outcome:
    data = simulate_dataset(task.theta, task.scheme, task.n, task.seed, task.replicate, task.stream)
    try:
        fit = fit_mle(data, task.variant, restarts=0, seed=task.seed + task.replicate)
    except (ConvergenceError, SchemeError, ConditioningError) as exc:
        logger.debug(f"replicate {task.stream}/{task.replicate} excluded: {exc}")
        return _Outcome(stream=task.stream, replicate=task.replicate, fitted=False)
    estimate = float(reliability(task.t0, fit.theta))
    try:
        s2 = std_variance(task.scheme, fit.theta, task.t0)
    except (DesignSingularError, ConditioningError, SchemeError):
        s2 = math.nan
    return _Outcome(
        stream=task.stream,
        replicate=task.replicate,
        fitted=True,
        estimate=estimate,
        std_variance=s2,
        accepted=decide(estimate, task.pi_c) is Decision.ACCEPT,
        independence_limit=fit.independence_limit,
    )


def _run_chunk(tasks: Sequence[_Task]) -> List[_Outcome]:
    # per-replicate fit logs would drown the run summary
    logger.disable("engine.inference")
    try:
        return [_run_replicate(task) for task in tasks]
    finally:
        logger.enable("engine.inference")


def _rmsd(values: Sequence[float], truth: float) -> float:
    if not values:
        return math.nan
    return math.sqrt(math.fsum((v - truth) ** 2 for v in values) / len(values))


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


class MonteCarloEvaluator:
    """
    Operating characteristics of a plan by simulation.

    H0 replicates are drawn from ``theta0`` and HA replicates from
    ``theta1``, each is fitted by maximum likelihood, and the lot is accepted
    when the fitted reliability at ``t0`` exceeds ``pi_c``.
    """

    def __init__(
        self,
        plan: PlanResult,
        theta0: ModelParams,
        theta1: ModelParams,
        t0: Optional[float] = None,
        variant: Optional[FitVariant] = None,
        threads: Optional[int] = None,
    ) -> None:
        self.plan = plan
        self.theta0 = theta0
        self.theta1 = theta1
        self.t0 = plan.t0 if t0 is None else t0
        self.variant = FitVariant.for_model(theta0) if variant is None else FitVariant(variant)
        self.threads = max(1, settings.threads if threads is None else threads)

    def _tasks(self, reps: int, seed: int) -> List[_Task]:
        return [
            _Task(
                theta=theta,
                scheme=self.plan.scheme,
                n=self.plan.n_star,
                seed=seed,
                stream=stream,
                replicate=rep,
                variant=self.variant,
                t0=self.t0,
                pi_c=self.plan.pi_c,
            )
            for stream, theta in ((H0_STREAM, self.theta0), (H1_STREAM, self.theta1))
            for rep in range(reps)
        ]

    def _execute(self, tasks: List[_Task]) -> List[_Outcome]:
        if self.threads == 1:
            return _run_chunk(tasks)
        size = max(1, math.ceil(len(tasks) / (4 * self.threads)))
        outcomes: List[_Outcome] = []
        with ProcessPoolExecutor(max_workers=self.threads) as pool:
            for chunk in pool.map(_run_chunk, list(chunk_list(tasks, size))):
                outcomes.extend(chunk)
        return outcomes

    def run(self, reps: int, seed: Optional[int] = None) -> McSummary:
        """
        Simulate ``reps`` data sets under each hypothesis.

        Raises:
            ConvergenceError: if at least ``settings.mc_failure_limit`` of all
                ``2 * reps`` replicates (both hypotheses pooled) could not be
                fitted, or every replicate of one hypothesis failed.
        """
        if reps < 1:
            raise ParameterDomainError(f"reps must be >= 1, got {reps}")
        if reps < 100:
            logger.warning(f"reps = {reps}: Monte Carlo summaries below 100 replicates are noisy")
        seed = settings.seed if seed is None else seed

        logger.info(f"[1/2] simulating {2 * reps} data sets (n={self.plan.n_star}, {self.variant.value}, threads={self.threads})")
        outcomes = sorted(self._execute(self._tasks(reps, seed)), key=lambda o: (o.stream, o.replicate))

        logger.info("[2/2] aggregating replicate estimates")
        h0 = [o for o in outcomes if o.stream == H0_STREAM and o.fitted]
        h1 = [o for o in outcomes if o.stream == H1_STREAM and o.fitted]
        failed_h0, failed_h1 = reps - len(h0), reps - len(h1)
        failed = failed_h0 + failed_h1
        if failed:
            logger.warning(f"{failed} of {2 * reps} replicates excluded after fit failures")
        if failed >= settings.mc_failure_limit * 2 * reps or not h0 or not h1:
            raise ConvergenceError(f"{failed} of {2 * reps} replicate fits failed; limit is {settings.mc_failure_limit:.0%}")

        true_reliability = float(reliability(self.t0, self.theta0))
        true_s2 = std_variance(self.plan.scheme, self.theta0, self.t0)
        estimates = [o.estimate for o in h0]
        variances = [o.std_variance for o in h0 if math.isfinite(o.std_variance)]

        summary = McSummary(
            reps=reps,
            seed=seed,
            variant=self.variant,
            n=self.plan.n_star,
            pi_c=self.plan.pi_c,
            true_reliability=true_reliability,
            avg_reliability=_mean(estimates),
            rmsd_reliability=_rmsd(estimates, true_reliability),
            true_std_variance=true_s2,
            avg_std_variance=_mean(variances),
            rmsd_std_variance=_rmsd(variances, true_s2),
            alpha_hat=sum(not o.accepted for o in h0) / len(h0),
            beta_hat=sum(o.accepted for o in h1) / len(h1),
            failed_h0=failed_h0,
            failed_h1=failed_h1,
            independence_limit_fits=sum(o.independence_limit for o in h0 + h1),
        )
        logger.success(f"Monte Carlo done: avg F={summary.avg_reliability:.4f}, alpha={summary.alpha_hat:.3f}, beta={summary.beta_hat:.3f}")
        return summary


def mc_evaluate(
    plan: PlanResult,
    theta0: ModelParams,
    theta1: ModelParams,
    t0: Optional[float] = None,
    reps: int = 1000,
    seed: Optional[int] = None,
    variant: Optional[FitVariant] = None,
    threads: Optional[int] = None,
) -> McSummary:
    return MonteCarloEvaluator(plan, theta0, theta1, t0, variant, threads).run(reps, seed)
