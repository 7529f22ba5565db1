"""Pytest configuration and fixtures."""

from pathlib import Path
from typing import Callable, Generator

import numpy as np
import pytest

from kernelzeros.config import get_settings
from kernelzeros.numerics.design import Design, LimitDistribution, regular_design, uniform_distribution
from kernelzeros.numerics.smoother import GPMoments, SmootherSpec
from kernelzeros.numerics.truths import SineTruth


@pytest.fixture(autouse=True)
def fresh_settings() -> Generator[None, None, None]:
    """
    Drop cached settings around every test so environment patches apply.

    Yields:
        Nothing
    """
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def fast_simulation(monkeypatch: pytest.MonkeyPatch) -> None:
    """Small counting grids so unit-level Monte Carlo runs in well under a second."""
    monkeypatch.setenv("KZ_SIMULATION_COUNTING_GRID_SIZE", "257")
    monkeypatch.setenv("KZ_SIMULATION_MAX_COUNTING_GRID_SIZE", "1025")
    monkeypatch.setenv("KZ_SIMULATION_BATCH_SIZE", "64")
    get_settings.cache_clear()


@pytest.fixture
def uniform() -> LimitDistribution:
    """Uniform limiting distribution on [0, 1]."""
    return uniform_distribution()


@pytest.fixture
def design_500(uniform: LimitDistribution) -> Design:
    """Regular 500-point design under the uniform distribution."""
    return regular_design(500, uniform)


@pytest.fixture
def spec_l0() -> SmootherSpec:
    """Function estimator with h = 0.1 and σ = 0.5."""
    return SmootherSpec.canonical(ell=0, h=0.1, noise_sd=0.5)


@pytest.fixture
def sine() -> SineTruth:
    """One period of sin(2πt)."""
    return SineTruth()


@pytest.fixture
def rice_moments() -> GPMoments:
    """Stationary zero-mean unit process on [0, π]: exactly one expected zero."""
    return GPMoments.from_functions(np.linspace(0.0, np.pi, 257), m=0.0, m_prime=0.0, sigma=1.0, xi=1.0)


@pytest.fixture
def write_scenario(tmp_path: Path) -> Callable[[str, str], Path]:
    """
    Factory writing scenario YAML text into the test's temporary directory.

    Returns:
        Function (file name, text) -> path
    """

    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
