from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import chisquare

from config.settings import settings
from engine.expectations import expected_counts, termination_distribution
from engine.fisher import fisher_information
from engine.inference import fit_mle, score
from engine.lifetime import interval_probs, reliability
from engine.plans import design_plan, risk_spec
import engine.simulate
from engine.simulate import MonteCarloEvaluator, mc_evaluate, simulate_dataset
from models.errors import ConvergenceError, ParameterDomainError
from models.params import ModelParams
from models.scheme import PicScheme
from tests.conftest import battery


def _check_fuzzed_datasets(count: int) -> None:
    rng = np.random.default_rng(17)
    for k in range(count):
        theta = ModelParams(
            eta=tuple(rng.uniform(0.2, 3.0, size=2)),
            gamma=float(rng.uniform(0.5, 3.0)),
            nu=float(rng.choice([0.0, rng.uniform(0.05, 2.0)])),
        )
        M = int(rng.integers(1, 9))
        scheme = PicScheme.equispaced(M, float(rng.uniform(0.02, 0.5)), float(rng.uniform(0.0, 0.6)))
        n = int(rng.integers(1, 200))
        data = simulate_dataset(theta, scheme, n, seed=k)
        assert data.n == n
        survivors = data.at_risk - data.failures.sum(axis=1)
        for i in range(M - 1):
            assert data.r[i] == math.floor(scheme.withdrawals[i] * survivors[i])
        assert data.r[-1] == survivors[-1]


def test_counting_recursion_and_floor_rule() -> None:
    _check_fuzzed_datasets(300)


@pytest.mark.slow
def test_counting_recursion_over_many_configurations() -> None:
    _check_fuzzed_datasets(10_000)


def test_simulation_is_deterministic(dependent_theta) -> None:
    scheme = PicScheme.equispaced(5, 0.115, 0.2)
    first = simulate_dataset(dependent_theta, scheme, 73, seed=1, replicate=4)
    assert first == simulate_dataset(dependent_theta, scheme, 73, seed=1, replicate=4)
    assert first != simulate_dataset(dependent_theta, scheme, 73, seed=1, replicate=5)
    assert first != simulate_dataset(dependent_theta, scheme, 73, seed=1, replicate=4, stream=1)


def test_worked_example_shape(transceiver_dependent) -> None:
    data = simulate_dataset(transceiver_dependent, PicScheme.equispaced(5, 0.115, 0.2), 73, seed=2024)
    assert data.M == 5 and data.n_causes == 2 and data.n == 73
    assert sum(data.r) > 0


def test_no_failures_for_huge_scales() -> None:
    theta = ModelParams(eta=(1e9, 1e9), gamma=1.0, nu=0.0)
    data = simulate_dataset(theta, PicScheme.equispaced(3, 0.1, 0.0), 40, seed=0)
    assert data.failures.sum() == 0
    assert data.r == (0, 0, 40)


def test_units_fail_before_reliability_underflows() -> None:
    theta = ModelParams(eta=(0.01, 0.02), gamma=3.0, nu=0.0)
    data = simulate_dataset(theta, PicScheme.equispaced(4, 0.5, 0.3), 25, seed=4)
    assert data.failures[0].sum() == 25
    assert data.failures[1:].sum() == 0 and sum(data.r) == 0


def test_sample_size_must_be_positive(battery_theta) -> None:
    with pytest.raises(ParameterDomainError):
        simulate_dataset(battery_theta, PicScheme.equispaced(4, 0.2, 0.0), 0, seed=0)


def test_first_interval_multinomial(dependent_theta) -> None:
    scheme = PicScheme.equispaced(3, 0.3, 0.0)
    q_matrix, q = interval_probs(scheme.times, dependent_theta)
    n, reps = 30, 3000
    draws = np.array(
        [simulate_dataset(dependent_theta, scheme, n, seed=8, replicate=rep).d[0] for rep in range(reps)]
    )
    observed = np.column_stack([draws, n - draws.sum(axis=1)]).sum(axis=0)
    expected = reps * n * np.append(q_matrix[0], 1 - q[0])
    assert chisquare(observed, expected).pvalue > 1e-4


def _agrees(sample: np.ndarray, expected: float, width: float = 3.0) -> bool:
    se = sample.std(ddof=1) / math.sqrt(sample.size)
    return abs(sample.mean() - expected) <= width * se + 1e-9


def test_mean_failures_match_expectation(dependent_theta) -> None:
    # without withdrawals there is no floor rounding, so the expectations are exact
    scheme = PicScheme.equispaced(5, 0.2, 0.0)
    n, reps = 60, 10_000
    totals = np.array([simulate_dataset(dependent_theta, scheme, n, seed=3, replicate=rep).failures.sum() for rep in range(reps)])
    assert _agrees(totals, expected_counts(n, scheme, dependent_theta).e_d_total)


def test_counts_and_termination_match_expectations(dependent_theta) -> None:
    # few units on a long schedule, so the test often ends early
    scheme = PicScheme.equispaced(5, 0.4, 0.0)
    n, reps = 5, 10_000
    datasets = [simulate_dataset(dependent_theta, scheme, n, seed=21, replicate=rep) for rep in range(reps)]
    at_risk = np.array([data.at_risk for data in datasets], dtype=float)
    failures = np.array([data.failures for data in datasets], dtype=float)
    withdrawn = np.array([data.r for data in datasets], dtype=float)
    # the test ends at the last inspection that still had units on test
    ended = np.array([np.flatnonzero(row > 0).max() + 1 for row in at_risk])

    counts = expected_counts(n, scheme, dependent_theta)
    term = termination_distribution(n, scheme, dependent_theta)
    for i in range(scheme.M):
        assert _agrees(at_risk[:, i], counts.e_n[i], 4.0), ("N", i)
        assert _agrees(withdrawn[:, i], counts.e_r[i], 4.0), ("R", i)
        for j in range(dependent_theta.n_causes):
            assert _agrees(failures[:, i, j], counts.e_d[i, j], 4.0), ("D", i, j)
    assert _agrees(scheme.times[ended - 1], term.e_tau, 4.0)
    assert _agrees(ended.astype(float), term.e_inspections, 4.0)
    assert 0.05 < np.mean(ended < scheme.M) < 0.95


def test_single_replicate_summary_is_reproducible(transceiver_dependent) -> None:
    spec = risk_spec(0.05, 0.1, 0.15, transceiver_dependent.eta, 1.5, gamma=transceiver_dependent.gamma, nu=transceiver_dependent.nu)
    plan = design_plan(spec, PicScheme.equispaced(5, 0.115, 0.2))
    first = mc_evaluate(plan, spec.theta0, spec.theta1, reps=1, seed=11)
    second = MonteCarloEvaluator(plan, spec.theta0, spec.theta1).run(1, seed=11)
    assert first.model_dump_json() == second.model_dump_json()
    assert first.reps == 1 and first.n == plan.n_star


def test_failure_limit_pools_both_hypotheses(transceiver_dependent, monkeypatch) -> None:
    spec = risk_spec(0.05, 0.1, 0.15, transceiver_dependent.eta, 1.5, gamma=transceiver_dependent.gamma, nu=transceiver_dependent.nu)
    plan = design_plan(spec, PicScheme.equispaced(5, 0.115, 0.2))
    real_fit = engine.simulate.fit_mle

    def failing_first_replicate(data, variant, **kwargs):
        # replicate 0 of each hypothesis is fitted with seed 11
        if kwargs.get("seed") == 11:
            raise ConvergenceError("forced failure")
        return real_fit(data, variant, **kwargs)

    monkeypatch.setattr(engine.simulate, "fit_mle", failing_first_replicate)
    evaluator = MonteCarloEvaluator(plan, spec.theta0, spec.theta1, threads=1)

    # 2 of 20 fits fail: 10% pooled, 20% of one hypothesis
    monkeypatch.setattr(settings, "mc_failure_limit", 0.15)
    summary = evaluator.run(10, seed=11)
    assert (summary.failed_h0, summary.failed_h1) == (1, 1)

    monkeypatch.setattr(settings, "mc_failure_limit", 0.1)
    with pytest.raises(ConvergenceError, match="2 of 20"):
        evaluator.run(10, seed=11)


@pytest.mark.slow
def test_thread_count_does_not_change_results(transceiver_dependent) -> None:
    spec = risk_spec(0.05, 0.1, 0.15, transceiver_dependent.eta, 1.5, gamma=transceiver_dependent.gamma, nu=transceiver_dependent.nu)
    plan = design_plan(spec, PicScheme.equispaced(5, 0.115, 0.2))
    serial = MonteCarloEvaluator(plan, spec.theta0, spec.theta1, threads=1).run(40, seed=5)
    parallel = MonteCarloEvaluator(plan, spec.theta0, spec.theta1, threads=4).run(40, seed=5)
    assert serial.model_dump_json() == parallel.model_dump_json()


@pytest.mark.slow
def test_score_identity_and_information_equality() -> None:
    theta = battery(0.5)
    scheme = PicScheme.equispaced(6, 0.3, 0.2)
    n, reps = 200, 5000
    scores = np.array([score(simulate_dataset(theta, scheme, n, seed=77, replicate=rep), theta) for rep in range(reps)])
    mean = scores.mean(axis=0)
    se = scores.std(axis=0, ddof=1) / math.sqrt(reps)
    assert np.all(np.abs(mean) <= 4 * se)

    outer = scores.T @ scores / reps
    info = fisher_information(n, scheme, theta)
    dominant = np.abs(info) > 0.01 * np.abs(info).max()
    assert np.all(np.abs(outer - info)[dominant] <= 0.05 * np.abs(info)[dominant])


@pytest.mark.slow
@pytest.mark.parametrize(
    "fixture, h, p, avg, alpha_hat, beta_hat",
    [("transceiver_independent", 0.054, 0.0, 0.645, 0.049, 0.128), ("transceiver_dependent", 0.115, 0.2, 0.625, 0.054, 0.120)],
)
def test_monte_carlo_operating_characteristics(request, fixture, h, p, avg, alpha_hat, beta_hat) -> None:
    theta = request.getfixturevalue(fixture)
    spec = risk_spec(0.05, 0.1, 0.15, theta.eta, 1.5, gamma=theta.gamma, nu=theta.nu)
    plan = design_plan(spec, PicScheme.equispaced(5, h, p))
    summary = mc_evaluate(plan, spec.theta0, spec.theta1, reps=5000, seed=2024, threads=4)
    assert summary.avg_reliability == pytest.approx(avg, abs=0.005)
    assert summary.alpha_hat == pytest.approx(alpha_hat, abs=0.012)
    assert summary.beta_hat == pytest.approx(beta_hat, abs=0.015)
    if theta.dependent:
        assert 10 * summary.avg_std_variance == pytest.approx(2.081, abs=0.1)
    else:
        assert 100 * summary.rmsd_reliability == pytest.approx(4.886, abs=0.3)


@pytest.mark.slow
def test_reliability_estimates_are_symmetric(transceiver_dependent) -> None:
    scheme = PicScheme.equispaced(5, 0.115, 0.2)
    values = []
    for rep in range(5000):
        fit = fit_mle(simulate_dataset(transceiver_dependent, scheme, 73, seed=31, replicate=rep), restarts=0)
        values.append(float(reliability(0.15, fit.theta)))
    values = np.array(values)
    assert abs(values.mean() - np.median(values)) < 0.2 * values.std()
