"""Fixtures for tests."""

import logging
from pathlib import Path
import random

import pytest

from ..base.circuit import Circuit
from ..config.amplifier_params import AmplifierParams
from ..config.tolerances import Tolerances
from ..const import FIXTURES_PATH
from ..netlist import load_netlist

_LOGGER = logging.getLogger(__name__)

SEED = 20240613


@pytest.fixture(name="typical_params")
def mock_typical_params() -> AmplifierParams:
    """The typical parameter set, beta = 100."""
    return AmplifierParams.typical_defaults()


@pytest.fixture(name="tolerances")
def mock_tolerances() -> Tolerances:
    """The default tolerances."""
    return Tolerances()


@pytest.fixture(name="fixtures_path")
def mock_fixtures_path() -> Path:
    """The directory of the shipped netlists."""
    return FIXTURES_PATH


@pytest.fixture(name="rng")
def mock_rng() -> random.Random:
    """A seeded random source so failures reproduce."""
    return random.Random(SEED)


@pytest.fixture(name="load_fixture")
def mock_load_fixture(fixtures_path: Path):
    """Load a shipped netlist by file name."""

    def _load(name: str) -> Circuit:
        return load_netlist(fixtures_path / name)

    return _load
