"""Shared fixtures for the cslrate test suite."""

from pathlib import Path

import numpy as np
import pytest

from cslrate.models import PhysParams

R_C = 1e-7
LAMBDA = 1e-8
SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def params():
    return PhysParams(lam=LAMBDA, r_c=R_C)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scenarios_dir():
    return SCENARIOS


@pytest.fixture
def single_thread(monkeypatch):
    monkeypatch.setenv("CSLRATE_THREADS", "1")
