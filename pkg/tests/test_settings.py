import math
import os

import pytest

from cslrate import settings
from cslrate.errors import InvalidParameterError


def test_worker_count_defaults_to_cpu_count(monkeypatch):
    monkeypatch.delenv(settings.THREADS_ENV, raising=False)
    assert settings.worker_count() == (os.cpu_count() or 1)


@pytest.mark.parametrize("raw, expected", [("1", 1), ("3", 3), (" 2 ", 2)])
def test_worker_count_reads_environment(monkeypatch, raw, expected):
    monkeypatch.setenv(settings.THREADS_ENV, raw)
    assert settings.worker_count() == expected


def test_worker_count_zero_means_auto(monkeypatch):
    monkeypatch.setenv(settings.THREADS_ENV, "0")
    assert settings.worker_count() == (os.cpu_count() or 1)


@pytest.mark.parametrize("raw", ["-1", "four", "1.5"])
def test_worker_count_rejects_bad_values(monkeypatch, raw):
    monkeypatch.setenv(settings.THREADS_ENV, raw)
    with pytest.raises(InvalidParameterError):
        settings.worker_count()


@pytest.mark.parametrize("threads", ["1", "4"])
def test_parallel_map_keeps_input_order(monkeypatch, threads):
    monkeypatch.setenv(settings.THREADS_ENV, threads)
    assert settings.parallel_map(lambda x: x * x, range(50)) == [x * x for x in range(50)]


def test_parallel_map_empty():
    assert settings.parallel_map(lambda x: x, []) == []


def test_gaussian_cutoff_matches_truncation():
    # e^{-(c/2)²} at the cutoff c equals the truncation threshold
    assert math.exp(-(settings.GAUSSIAN_CUTOFF / 2.0) ** 2) == pytest.approx(settings.GAUSSIAN_TRUNCATION, rel=1e-9)
