from __future__ import annotations

from pathlib import Path

import pytest

from models.data import ObservedData
from models.params import ModelParams
from models.scheme import CostParams
from storage.artifacts import read_observed_csv

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# Battery life test: two failure modes, times in thousands of ampere-hours.
BATTERY_ETA = (1.291, 1.339)
BATTERY_GAMMA = 1.644


def battery(nu: float = 0.0) -> ModelParams:
    return ModelParams(eta=BATTERY_ETA, gamma=BATTERY_GAMMA, nu=nu)


@pytest.fixture
def battery_theta() -> ModelParams:
    return battery()


@pytest.fixture
def dependent_theta() -> ModelParams:
    return battery(nu=0.5)


@pytest.fixture
def transceiver_dependent() -> ModelParams:
    """Transmitter-receiver fit with a gamma frailty."""
    return ModelParams(eta=(0.303, 0.497), gamma=1.436, nu=0.616)


@pytest.fixture
def transceiver_independent() -> ModelParams:
    return ModelParams(eta=(0.439, 0.822), gamma=1.135, nu=0.0)


@pytest.fixture
def battery_costs() -> CostParams:
    return CostParams(c_sample=0.1, c_time=5.0, c_failure=0.025, c_inspection=10.0, budget=55.0)


@pytest.fixture
def grouped_example() -> ObservedData:
    return read_observed_csv(DATA_DIR / "grouped_example.csv")
