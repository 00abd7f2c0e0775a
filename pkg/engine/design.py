"""c-optimal design of equispaced PIC-I schemes, with and without a budget.

The criterion is the standardised variance ``phi = S^2`` of the reliability
estimate at ``t0`` under ``theta0``. For a fixed inspection count ``M`` and
withdrawal proportion ``p`` the spacing ``h`` is found by a coarse grid scan
followed by a bounded golden-section/parabolic search.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from config.settings import settings
from engine.expectations import cost_breakdown, total_cost
from engine.fisher import std_variance
from engine.lifetime import reliability
from engine.plans import design_plan
from models.errors import (
    BudgetInfeasibleError,
    ConditioningError,
    DegenerateHypothesesError,
    DesignSingularError,
    ParameterDomainError,
    SchemeError,
)
from models.params import ModelParams
from models.plan import (
    BudgetDesign,
    BudgetRow,
    DesignGridRow,
    HOptimum,
    MonotonicityReport,
    MonotonicityRow,
    MonotonicityViolation,
    RiskSpec,
    UnconstrainedDesign,
)
from models.scheme import CostParams, PicScheme

Bounds = Tuple[float, float]
_BISECTION_STEPS = 60


def criterion_phi(scheme: PicScheme, theta: ModelParams, t0: float) -> float:
    """phi(zeta) = S^2, the c-optimality criterion."""
    return std_variance(scheme, theta, t0)


def default_h_bounds(t0: float) -> Bounds:
    return settings.h_lower, 2.0 * t0


def _bounds(h_bounds: Optional[Bounds], t0: float) -> Bounds:
    lo, hi = h_bounds or default_h_bounds(t0)
    if not 0.0 < lo < hi:
        raise ParameterDomainError(f"h bounds must satisfy 0 < h_min < h_max, got ({lo}, {hi})")
    return float(lo), float(hi)


def _phi_or_inf(M: int, h: float, p: float, theta: ModelParams, t0: float) -> float:
    try:
        return criterion_phi(PicScheme.equispaced(M, h, p), theta, t0)
    except (DesignSingularError, ConditioningError):
        return math.inf


def _check_regular(M: int, theta: ModelParams) -> None:
    if M < theta.n_params:
        raise SchemeError(f"M must be >= s: M = {M} but the model has s = {theta.n_params} parameters")


def _refine(func: Callable[[float], float], grid: np.ndarray, values: np.ndarray) -> Tuple[float, float]:
    """Bounded Brent search around the best grid point."""
    k = int(np.argmin(values))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(func, bounds=(lo, hi), method="bounded", options={"xatol": settings.h_tolerance})
    if res.fun <= values[k]:
        return float(res.x), float(res.fun)
    return float(grid[k]), float(values[k])


def optimize_h(
    M: int,
    p: float,
    theta: ModelParams,
    t0: float,
    h_bounds: Optional[Bounds] = None,
) -> HOptimum:
    """
    Spacing ``h`` minimising phi for ``M`` equispaced inspections.

    The result is flagged ``at_boundary`` when the minimum sits on an end of
    the bracket, which usually means the bracket should be widened.
    """
    _check_regular(M, theta)
    lo, hi = _bounds(h_bounds, t0)
    grid = np.linspace(lo, hi, settings.h_grid_points)
    values = np.array([_phi_or_inf(M, h, p, theta, t0) for h in grid])
    if not np.any(np.isfinite(values)):
        raise DesignSingularError(f"no spacing in [{lo:g}, {hi:g}] gives a regular design for M={M}, p={p:g}")

    h_best, phi_best = _refine(lambda h: _phi_or_inf(M, h, p, theta, t0), grid, values)
    at_boundary = min(h_best - lo, hi - h_best) <= 2.0 * settings.h_tolerance
    if at_boundary:
        logger.warning(f"optimum spacing h={h_best:.4g} for M={M}, p={p:g} lies on the bracket [{lo:g}, {hi:g}]")
    logger.debug(f"M={M} p={p:g}: h*={h_best:.4f} phi*={phi_best:.6g}")
    return HOptimum(M=M, p=p, h=h_best, phi=phi_best, at_boundary=at_boundary)


def _check_discriminates(spec: RiskSpec) -> None:
    pi0 = reliability(spec.t0, spec.theta0)
    pi1 = reliability(spec.t0, spec.theta1)
    if not pi0 > pi1:
        raise DegenerateHypothesesError(f"pi0 = {pi0:.6g} must exceed pi1 = {pi1:.6g}; the hypotheses do not discriminate")


def design_unconstrained(
    spec: RiskSpec,
    M: int,
    p: float = 0.0,
    h_bounds: Optional[Bounds] = None,
    round_up: bool = False,
) -> UnconstrainedDesign:
    """Optimal spacing under ``theta0``, then the sampling plan for that scheme."""
    _check_discriminates(spec)
    optimum = optimize_h(M, p, spec.theta0, spec.t0, h_bounds)
    plan = design_plan(spec, PicScheme.equispaced(M, optimum.h, p), round_up=round_up)
    return UnconstrainedDesign(plan=plan, h=optimum.h, phi=optimum.phi, at_boundary=optimum.at_boundary)


def design_grid(
    spec: RiskSpec,
    M_list: Sequence[int],
    p_list: Sequence[float],
    h_bounds: Optional[Bounds] = None,
    round_up: bool = False,
) -> List[DesignGridRow]:
    """Unconstrained designs over a grid of inspection counts and withdrawal proportions."""
    rows = []
    for p in p_list:
        for M in M_list:
            design = design_unconstrained(spec, M, p, h_bounds, round_up)
            rows.append(
                DesignGridRow(
                    p=p,
                    nu=spec.theta0.nu,
                    M=M,
                    h=design.h,
                    phi=design.phi,
                    n=design.plan.n_star,
                    pi_c=design.plan.pi_c,
                    at_boundary=design.at_boundary,
                )
            )
    return rows


# ── Budget-constrained design ─────────────────────────────────────────────────


class _BudgetProblem:
    """phi and total cost as functions of h for one inspection count."""

    def __init__(self, spec: RiskSpec, costs: CostParams, M: int, p: float, round_up: bool = False) -> None:
        self.spec = spec
        self.costs = costs
        self.M = M
        self.p = p
        self.round_up = round_up
        self._cache: Dict[float, Tuple[float, float, float]] = {}

    def evaluate(self, h: float) -> Tuple[float, float, float]:
        """``(phi, n_raw, total_cost)``; infinities when the scheme is not regular."""
        h = float(h)
        if h not in self._cache:
            scheme = PicScheme.equispaced(self.M, h, self.p)
            try:
                plan = design_plan(self.spec, scheme, round_up=self.round_up)
                # TC is increasing in n
                cost = total_cost(max(plan.n_raw, plan.n_star), scheme, self.spec.theta0, self.costs)
                self._cache[h] = (plan.s0**2, plan.n_raw, cost)
            except (DesignSingularError, ConditioningError):
                self._cache[h] = (math.inf, math.inf, math.inf)
        return self._cache[h]

    def feasible(self, h: float) -> bool:
        return self.evaluate(h)[2] <= self.costs.budget

    def boundary(self, inside: float, outside: float) -> float:
        """Bisect towards the budget boundary, keeping the feasible end."""
        for _ in range(_BISECTION_STEPS):
            mid = 0.5 * (inside + outside)
            if self.feasible(mid):
                inside = mid
            else:
                outside = mid
            if abs(outside - inside) < 1e-10:
                break
        return inside

    def quoted(self, h: float, bounds: Bounds) -> float:
        """
        ``h`` on the ``settings.h_resolution`` lattice.

        Rounds down, which shortens the schedule; falls back to the next
        lattice point up, then to ``h`` itself, when rounding leaves the
        budget or the bracket.
        """
        step = settings.h_resolution
        if step <= 0:
            return h
        below = round(math.floor(h / step + 1e-9) * step, 12)
        for candidate in (below, round(below + step, 12)):
            if bounds[0] - 1e-12 <= candidate <= bounds[1] + 1e-12 and self.feasible(candidate):
                return candidate
        return h

    def row(self, h: float, min_cost: float, constraint_active: bool) -> BudgetRow:
        phi, n_raw, cost = self.evaluate(h)
        return BudgetRow(
            M=self.M,
            feasible=True,
            h=h,
            phi=phi,
            n_raw=n_raw,
            total_cost=cost,
            constraint_active=constraint_active,
            min_total_cost=min_cost,
        )


def _budget_row(spec: RiskSpec, costs: CostParams, M: int, p: float, bounds: Bounds, round_up: bool = False) -> BudgetRow:
    problem = _BudgetProblem(spec, costs, M, p, round_up)
    optimum = optimize_h(M, p, spec.theta0, spec.t0, bounds)
    if problem.feasible(optimum.h):
        h = problem.quoted(optimum.h, bounds)
        return problem.row(h, problem.evaluate(h)[2], constraint_active=False)

    grid = np.linspace(bounds[0], bounds[1], settings.h_grid_points)
    evals = np.array([problem.evaluate(h) for h in grid])
    tcs = evals[:, 2]
    min_cost = float(np.min(tcs))

    # the cheapest spacing may fall between grid points
    k = int(np.argmin(tcs))
    cheapest = minimize_scalar(
        lambda h: problem.evaluate(h)[2],
        bounds=(grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]),
        method="bounded",
        options={"xatol": settings.h_tolerance},
    )
    min_cost = min(min_cost, float(cheapest.fun))

    candidates: List[float] = [float(h) for h, tc in zip(grid, tcs) if tc <= costs.budget]
    if cheapest.fun <= costs.budget:
        candidates.append(float(cheapest.x))
    if not candidates:
        return BudgetRow(M=M, feasible=False, min_total_cost=min_cost)

    feasible = tcs <= costs.budget
    for i in range(grid.size - 1):
        if feasible[i] != feasible[i + 1]:
            inside, outside = (grid[i], grid[i + 1]) if feasible[i] else (grid[i + 1], grid[i])
            candidates.append(problem.boundary(inside, outside))

    def constrained_phi(h: float) -> float:
        value, _, cost_h = problem.evaluate(h)
        return value if cost_h <= costs.budget else math.inf

    # interior minima of feasible runs
    start = None
    for i in range(grid.size + 1):
        inside = i < grid.size and feasible[i]
        if inside and start is None:
            start = i
        elif not inside and start is not None:
            if i - 1 > start:
                res = minimize_scalar(
                    constrained_phi,
                    bounds=(grid[start], grid[i - 1]),
                    method="bounded",
                    options={"xatol": settings.h_tolerance},
                )
                if math.isfinite(res.fun):
                    candidates.append(float(res.x))
            start = None

    h_best = problem.quoted(min(candidates, key=constrained_phi), bounds)
    return problem.row(h_best, min_cost, constraint_active=True)


def design_budget(
    spec: RiskSpec,
    costs: CostParams,
    p: float = 0.0,
    M_max: Optional[int] = None,
    h_bounds: Optional[Bounds] = None,
    round_up: bool = False,
) -> BudgetDesign:
    """
    Budget-constrained c-optimal design.

    For every ``M`` from the parameter count ``s`` to ``M_max`` (inclusive),
    minimise phi over ``h`` subject to ``TC <= budget`` and return the ``M``
    with the smallest phi (ties go to the smaller ``M``). ``TC`` is charged
    at the real-valued sample size, or at the integer one when that is
    larger (``round_up``). The chosen ``h`` is quoted on the
    ``settings.h_resolution`` lattice.

    Raises:
        BudgetInfeasibleError: if no ``M`` admits a design within the budget.
    """
    _check_discriminates(spec)
    s = spec.theta0.n_params
    M_max = settings.m_max if M_max is None else M_max
    if M_max < s:
        raise SchemeError(f"M_max must be >= s = {s}, got {M_max}")
    bounds = _bounds(h_bounds, spec.t0)

    rows: List[BudgetRow] = []
    for step, M in enumerate(range(s, M_max + 1), start=1):
        logger.info(f"[{step}/{M_max - s + 1}] budget design for M={M}")
        rows.append(_budget_row(spec, costs, M, p, bounds, round_up))

    best: Optional[BudgetRow] = None
    for row in rows:
        if row.feasible and (best is None or row.phi < best.phi * (1.0 - 1e-12)):
            best = row
    if best is None:
        min_cost = min((r.min_total_cost for r in rows if r.min_total_cost is not None), default=math.inf)
        raise BudgetInfeasibleError(
            f"no design with M in [{s}, {M_max}] fits the budget {costs.budget:g}; smallest achievable total cost is {min_cost:.6g}",
            min_total_cost=min_cost,
        )

    scheme = PicScheme.equispaced(best.M, best.h, p)
    plan = design_plan(spec, scheme, round_up=round_up)
    breakdown = cost_breakdown(plan.n_star, scheme, spec.theta0, costs)
    logger.success(f"budget design: n*={plan.n_star}, M*={best.M}, h*={best.h:.4f}, TC={breakdown.total:.3f} <= {costs.budget:g}")
    return BudgetDesign(plan=plan, M=best.M, h=best.h, phi=best.phi, costs=breakdown, rows=rows)


# ── Monotonicity ──────────────────────────────────────────────────────────────


def monotonicity_report(
    theta: ModelParams,
    t0: float,
    M_list: Sequence[int],
    p_list: Sequence[float],
    h_list: Sequence[float],
) -> MonotonicityReport:
    """
    Evaluate phi over a (h, p, M) grid and flag monotonicity violations.

    phi must not increase with ``M`` at fixed ``(h, p)`` and must not
    decrease with ``p`` at fixed ``(h, M)``, up to a 1e-12 relative slack.
    Grid points that are not regular designs are recorded without a value.
    """
    Ms = sorted(set(M_list))
    ps = sorted(set(p_list))
    table: Dict[Tuple[float, float, int], Optional[float]] = {}
    rows = []
    for h in h_list:
        for p in ps:
            for M in Ms:
                try:
                    value: Optional[float] = criterion_phi(PicScheme.equispaced(M, h, p), theta, t0)
                except (DesignSingularError, ConditioningError, SchemeError):
                    value = None
                table[(h, p, M)] = value
                rows.append(MonotonicityRow(h=h, p=p, M=M, phi=value))

    def worse(a: float, b: float) -> bool:
        return b > a + 1e-12 * max(1.0, abs(a))

    violations = []
    for h in h_list:
        for p in ps:
            for M, M_next in zip(Ms, Ms[1:]):
                a, b = table[(h, p, M)], table[(h, p, M_next)]
                if a is not None and b is not None and worse(a, b):
                    violations.append(MonotonicityViolation(kind="M", h=h, M=M, p=p, next_value=M_next, phi=a, next_phi=b))
        for M in Ms:
            for p, p_next in zip(ps, ps[1:]):
                a, b = table[(h, p, M)], table[(h, p_next, M)]
                if a is not None and b is not None and worse(b, a):
                    violations.append(MonotonicityViolation(kind="p", h=h, M=M, p=p, next_value=p_next, phi=a, next_phi=b))
    if violations:
        logger.warning(f"{len(violations)} monotonicity violations on the phi grid")
    return MonotonicityReport(rows=rows, violations=violations)
