from __future__ import annotations

import numpy as np
import pytest
from numpy.testing import assert_allclose

from engine.fisher import asymptotic_covariance, fisher_information, information_from_counts, std_variance
from engine.expectations import expected_counts
from models.errors import ParameterDomainError, SchemeError
from models.params import ModelParams
from models.scheme import PicScheme
from tests.conftest import battery


def test_information_is_linear_in_n(dependent_theta) -> None:
    scheme = PicScheme.equispaced(5, 0.2, 0.2)
    assert_allclose(fisher_information(80, scheme, dependent_theta), 2 * fisher_information(40, scheme, dependent_theta), rtol=1e-12)


def test_information_is_symmetric_positive_definite(dependent_theta) -> None:
    info = fisher_information(50, PicScheme.equispaced(6, 0.3, 0.2), dependent_theta)
    assert np.array_equal(info, info.T)
    assert np.all(np.linalg.eigvalsh(info) > 0)


def test_covariance_inverts_information(dependent_theta) -> None:
    scheme = PicScheme.equispaced(6, 0.3, 0.2)
    info = fisher_information(50, scheme, dependent_theta)
    cov = asymptotic_covariance(50, scheme, dependent_theta)
    assert_allclose(info @ cov, np.eye(4), atol=1e-10)
    assert_allclose(np.diag(asymptotic_covariance(100, scheme, dependent_theta)), np.diag(cov) / 2, rtol=1e-10)


def test_information_from_expected_counts(dependent_theta) -> None:
    scheme = PicScheme.equispaced(5, 0.2, 0.1)
    counts = expected_counts(30, scheme, dependent_theta)
    assert_allclose(
        information_from_counts(counts.e_n, scheme.times, dependent_theta),
        fisher_information(30, scheme, dependent_theta),
        rtol=1e-12,
    )


@pytest.mark.parametrize(
    "nu, h, expected",
    [(0.0, 0.197, 1.649), (1.0, 0.348, 1.767)],
)
def test_std_variance_optimal_designs(nu: float, h: float, expected: float) -> None:
    s2 = std_variance(PicScheme.equispaced(4, h, 0.0), battery(nu), 0.5)
    assert 10 * s2 == pytest.approx(expected, abs=0.01)


def test_too_few_inspections_for_dependent_model(dependent_theta) -> None:
    with pytest.raises(SchemeError, match="M must be >= s"):
        fisher_information(50, PicScheme.equispaced(3, 0.2, 0.0), dependent_theta)


def test_std_variance_needs_positive_mission_time(battery_theta) -> None:
    with pytest.raises(ParameterDomainError):
        std_variance(PicScheme.equispaced(4, 0.2, 0.0), battery_theta, 0.0)


def test_unequal_shape_information(dependent_theta) -> None:
    theta = ModelParams(eta=(0.9, 1.4), gammas=(1.2, 2.0), nu=0.5)
    info = fisher_information(60, PicScheme.equispaced(6, 0.25, 0.0), theta)
    assert info.shape == (5, 5)
    assert_allclose(info, info.T)
    assert np.all(np.linalg.eigvalsh(info) > 0)

