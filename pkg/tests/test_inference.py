from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import xlogy

from engine.inference import (
    estimate_reliability,
    fit_mle,
    information_criteria,
    log_likelihood,
    score,
    select_model,
)
from engine.lifetime import cause_masses, interval_probs
from engine.plans import decide
from engine.simulate import simulate_dataset
from models.data import ObservedData
from models.errors import ConvergenceError, SchemeError
from models.params import FitVariant, ModelParams
from models.plan import Decision
from models.scheme import PicScheme


@pytest.fixture
def example_fit(grouped_example):
    return fit_mle(grouped_example, FitVariant.DEPENDENT_EQUAL)


def test_worked_example_estimates(example_fit) -> None:
    theta = example_fit.theta
    assert theta.eta[0] == pytest.approx(0.292, abs=0.01)
    assert theta.eta[1] == pytest.approx(0.374, abs=0.01)
    assert theta.gamma == pytest.approx(1.779, abs=0.02)
    assert theta.nu == pytest.approx(0.668, abs=0.02)
    assert example_fit.convergence.converged
    assert set(example_fit.standard_errors) == {"eta_1", "eta_2", "gamma", "nu"}


def test_worked_example_decision(example_fit) -> None:
    estimate = estimate_reliability(example_fit, 0.15)
    assert estimate.value == pytest.approx(0.648, abs=0.005)
    assert estimate.se > 0
    assert decide(estimate.value, 0.538) is Decision.ACCEPT


def test_score_vanishes_at_the_fit(grouped_example, example_fit) -> None:
    assert np.max(np.abs(score(grouped_example, example_fit.theta))) < 1e-2


def test_printed_estimates_are_a_local_maximum(grouped_example) -> None:
    printed = ModelParams(eta=(0.292, 0.374), gamma=1.779, nu=0.668)
    best = log_likelihood(grouped_example, printed)
    for u in range(4):
        for sign in (-1, 1):
            vector = printed.to_vector()
            vector[u] *= 1 + sign * 0.05
            assert log_likelihood(grouped_example, ModelParams.from_vector(vector, 2)) < best


def test_log_likelihood_two_ways(grouped_example, transceiver_dependent) -> None:
    _, q = interval_probs(grouped_example.scheme.times, transceiver_dependent)
    probs = cause_masses(transceiver_dependent).probabilities
    d = grouped_example.failures
    survivors = grouped_example.at_risk - d.sum(axis=1)
    direct = float(xlogy(d, q[:, None] * probs[None, :]).sum() + xlogy(survivors, 1 - q).sum())
    assert log_likelihood(grouped_example, transceiver_dependent) == pytest.approx(direct, rel=1e-10)


def test_log_likelihood_all_withdrawn(battery_theta) -> None:
    data = ObservedData(scheme=PicScheme(L=(0.3,), p_list=(1.0,)), d=((0, 0),), r=(25,))
    _, q = interval_probs([0.3], battery_theta)
    assert log_likelihood(data, battery_theta) == pytest.approx(25 * math.log(1 - q[0]), rel=1e-12)


def test_log_likelihood_scales_with_counts(grouped_example, transceiver_dependent) -> None:
    tripled = ObservedData(
        scheme=grouped_example.scheme,
        d=tuple(tuple(3 * x for x in row) for row in grouped_example.d),
        r=tuple(3 * x for x in grouped_example.r),
    )
    assert log_likelihood(tripled, transceiver_dependent) == pytest.approx(3 * log_likelihood(grouped_example, transceiver_dependent), rel=1e-12)


def test_symmetric_data_gives_equal_scales() -> None:
    scheme = PicScheme.equispaced(4, 0.2, 0.1)
    data = ObservedData(scheme=scheme, d=((6, 6), (5, 5), (4, 4), (2, 2)), r=(4, 3, 2, 17))
    fit = fit_mle(data, FitVariant.INDEPENDENT_EQUAL)
    assert fit.theta.eta[0] == pytest.approx(fit.theta.eta[1], rel=1e-4)


def test_information_criteria() -> None:
    aic, bic = information_criteria(-100.0, 4, 73)
    assert aic == pytest.approx(208.0)
    assert bic == pytest.approx(200.0 + 4 * math.log(73))


def test_too_few_intervals_for_variant(grouped_example) -> None:
    data = ObservedData(scheme=PicScheme.equispaced(3, 0.1, 0.2), d=((3, 2), (2, 2), (1, 1)), r=(2, 1, 6))
    with pytest.raises(SchemeError, match="M must be >= s"):
        fit_mle(data, FitVariant.DEPENDENT_EQUAL)


def test_reliability_at_time_zero(example_fit) -> None:
    estimate = estimate_reliability(example_fit, 0.0)
    assert (estimate.value, estimate.se) == (1.0, 0.0)


def test_fit_is_reproducible(grouped_example) -> None:
    first = fit_mle(grouped_example, FitVariant.INDEPENDENT_EQUAL, seed=3)
    second = fit_mle(grouped_example, FitVariant.INDEPENDENT_EQUAL, seed=3)
    assert first.theta == second.theta
    assert first.k == 3 and first.n == 73


@pytest.mark.slow
def test_select_model_ranks_by_bic(grouped_example) -> None:
    comparison = select_model(grouped_example, restarts=1)
    bics = [fit.bic for fit in comparison.fits]
    assert bics == sorted(bics)
    assert comparison.best == comparison.fits[0].variant


@pytest.mark.slow
def test_fit_recovers_generating_model(transceiver_dependent) -> None:
    scheme = PicScheme.equispaced(5, 0.115, 0.2)
    data = simulate_dataset(transceiver_dependent, scheme, 10_000, seed=99)
    fit = fit_mle(data, FitVariant.DEPENDENT_EQUAL)
    estimates = fit.theta.to_vector()
    truth = transceiver_dependent.to_vector()
    ses = np.array([fit.standard_errors[name] for name in fit.parameter_names])
    assert np.all(np.abs(estimates - truth) <= 3 * ses)


@pytest.mark.slow
def test_standard_error_matches_sampling_spread(transceiver_dependent) -> None:
    scheme = PicScheme.equispaced(5, 0.115, 0.2)
    estimates, ses = [], []
    for rep in range(500):
        data = simulate_dataset(transceiver_dependent, scheme, 400, seed=5, replicate=rep)
        fit = fit_mle(data, FitVariant.DEPENDENT_EQUAL, restarts=0)
        estimate = estimate_reliability(fit, 0.15)
        estimates.append(estimate.value)
        ses.append(estimate.se)
    assert np.mean(ses) == pytest.approx(np.std(estimates), rel=0.1)
    assert_allclose(np.mean(estimates), 0.625, atol=0.01)


def test_refit_from_the_fit_is_idempotent(grouped_example, example_fit) -> None:
    again = fit_mle(grouped_example, FitVariant.DEPENDENT_EQUAL, restarts=0, start=example_fit.theta)
    assert again.loglik >= example_fit.loglik - 1e-6


@pytest.mark.slow
def test_estimates_concentrate_as_samples_grow(dependent_theta) -> None:
    scheme = PicScheme.equispaced(6, 0.3, 0.2)
    truth = dependent_theta.to_vector()
    medians = []
    for n in (200, 1000, 5000):
        errors = []
        for rep in range(200):
            data = simulate_dataset(dependent_theta, scheme, n, seed=n, replicate=rep)
            try:
                fit = fit_mle(data, FitVariant.DEPENDENT_EQUAL, restarts=0)
            except ConvergenceError:
                continue
            errors.append(np.linalg.norm(fit.theta.to_vector() - truth) if fit.theta.dependent else np.inf)
        medians.append(float(np.median(errors)))
    assert medians[0] > medians[1] > medians[2]
