"""
Shared constants and runtime configuration for cslrate.

All tunable numbers live here so that the rate kernels, the oracles and the
command-line harness agree on thresholds. Worker parallelism is read from
the ``CSLRATE_THREADS`` environment variable (0 or unset means one thread
per CPU).
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from .errors import InvalidParameterError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# CSL parameters used throughout the figures
DEFAULT_LAMBDA = 1e-8      # s^-1
DEFAULT_R_C = 1e-7         # m
NUCLEON_MASS = 1.6749e-27  # kg
DEFAULT_REL_TOL = 1e-10

# Regime thresholds: "much larger" / "much smaller" as plain ratios
MUCH_LARGER = 10.0
MUCH_SMALLER = 0.1
SMALL_DELTA_LIMIT = 0.1    # Δ/r_C above which the small-Δ forms are flagged

# Gaussian terms below this weight are dropped from lattice sums
GAUSSIAN_TRUNCATION = 1e-18
# separation (in units of r_C) at which e^{-x²/4r_C²} reaches the truncation
GAUSSIAN_CUTOFF = 2.0 * math.sqrt(math.log(1.0 / GAUSSIAN_TRUNCATION))

# k-space integration range in units of 1/r_C
MOMENTUM_CUTOFF = 10.0

BRUTEFORCE_MAX_SITES = 10_000
FIGURE_MAX_SITES = 10**8

THREADS_ENV = "CSLRATE_THREADS"


def worker_count() -> int:
    """
    Number of worker threads allowed for sweeps.

    Returns:
        int: Value of CSLRATE_THREADS, or the CPU count when it is 0/unset

    Raises:
        InvalidParameterError: If the variable is not a non-negative integer
    """
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if value < 0:
        raise InvalidParameterError(f"{THREADS_ENV} must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply func to every item on a thread pool, keeping input order."""
    items = list(items)
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    logger.debug("parallel_map: %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
