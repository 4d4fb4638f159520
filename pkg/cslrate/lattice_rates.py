"""
Collapse rate of a point-like (crystalline) mass distribution.

The pair sum over all sites of a cubic lattice factorizes into three axis
sums, each a double sum over site indices that depends only on the index
difference m = i - j:

    S(δ) = Σ_{i,j=1..n} e^{-l²(i-j-δ)²/4r_C²}
         = Σ_{m=-(n-1)}^{n-1} (n - |m|) e^{-l²(m-δ)²/4r_C²}

Only the m within GAUSSIAN_CUTOFF r_C of 0 or of δ carry weight above the
truncation threshold, so every axis costs O(min(n, r_C/l)).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import signal, stats

from . import settings
from .errors import DegenerateFitError, InvalidParameterError
from .models import Displacement, Lattice, Method, PhysParams, RateResult

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AxisSum:
    """
    One factor of the factorized pair sum.

    Attributes:
        value (float): Σ_{i,j} e^{-l²(i-j-δ)²/4r_C²}, between 0 and n_sites²
        n_sites (int): Sites along the axis
        shift (float): Displacement in lattice units, δ = Δ/l
    """
    value: float
    n_sites: int
    shift: float


def diagonal_offsets(n: int, l: float, delta: float, r_c: float, around_origin: bool = False) -> np.ndarray:
    # index differences whose Gaussian weight can exceed the truncation threshold
    reach = settings.GAUSSIAN_CUTOFF * r_c / l
    shift = delta / l
    lo = math.floor(shift - reach)
    hi = math.ceil(shift + reach)
    if around_origin:
        lo = min(lo, -math.ceil(reach))
        hi = max(hi, math.ceil(reach))
    lo, hi = max(lo, -(n - 1)), min(hi, n - 1)
    if lo > hi:
        return np.empty(0, dtype=np.int64)
    return np.arange(lo, hi + 1, dtype=np.int64)


def axis_sum(n: int, l: float, delta: float, r_c: float) -> AxisSum:
    """
    Axis factor S(δ) by diagonal decomposition.

    Args:
        n (int): Sites along the axis, n >= 1
        l (float): Lattice constant in m
        delta (float): Displacement component along the axis in m
        r_c (float): Localization distance in m

    Returns:
        AxisSum: The truncated, exactly rounded sum

    Raises:
        InvalidParameterError: If n < 1 or l <= 0
    """
    if n < 1:
        raise InvalidParameterError(f"axis needs at least one site, got {n}")
    if l <= 0:
        raise InvalidParameterError(f"lattice constant must be positive, got {l}")
    m = diagonal_offsets(n, l, delta, r_c)
    weight = (n - np.abs(m)).astype(float)
    terms = weight * np.exp(-((m * l - delta) / (2.0 * r_c)) ** 2)
    logger.debug("axis_sum n=%d: %d diagonals kept", n, m.size)
    return AxisSum(value=math.fsum(terms), n_sites=n, shift=delta / l)


def axis_deficit(n: int, l: float, delta: float, r_c: float) -> float:
    """
    S(0) - S(δ) summed term by term.

    Each term e^{-x²} - e^{-y²} (x = ml/2r_C, y = (ml - Δ)/2r_C) is written as
    ±e^{-min(x², y²)} (1 - e^{-|y² - x²|}) with expm1, and y² - x² is formed
    as a product of a difference and a sum, so Δ ≪ l keeps full relative
    accuracy.

    Args:
        n (int): Sites along the axis
        l (float): Lattice constant in m
        delta (float): Displacement component in m
        r_c (float): Localization distance in m

    Returns:
        float: The deficit, zero for delta == 0
    """
    if delta == 0:
        return 0.0
    m = diagonal_offsets(n, l, delta, r_c, around_origin=True)
    weight = (n - np.abs(m)).astype(float)
    width = 2.0 * r_c
    x = m * l / width
    y = (m * l - delta) / width
    gap = (y - x) * (y + x)
    lower = np.minimum(x * x, y * y)
    terms = weight * np.sign(gap) * np.exp(-lower) * -np.expm1(-np.abs(gap))
    return math.fsum(terms)


def factorized_rate(params: PhysParams, n_a: float, full: Sequence[float],
                    shifted: Sequence[float], deficit: Sequence[float]) -> float:
    """
    λ n_A² [Π S(0) - Π S(δ)] from per-axis factors and deficits.

    The difference of products is telescoped as
    D_x S0_y S0_z + Sδ_x D_y S0_z + Sδ_x Sδ_y D_z, clamped at zero.
    """
    bracket = (deficit[0] * full[1] * full[2]
               + shifted[0] * deficit[1] * full[2]
               + shifted[0] * shifted[1] * deficit[2])
    return max(params.lam * n_a * n_a * bracket, 0.0)


def gamma_discrete(lat: Lattice, disp: Displacement, params: PhysParams) -> RateResult:
    """
    Exact collapse rate Γ_D of a cubic lattice of point-like sites.

    Γ_D = λ n_A² [S_x(0) S_y(0) S_z(0) - S_x(δ_x) S_y(δ_y) S_z(δ_z)], each
    axis displaced by its own component of Δ.

    Args:
        lat (Lattice): Crystal geometry
        disp (Displacement): Any displacement vector
        params (PhysParams): CSL parameters

    Returns:
        RateResult: Rate with method DISCRETE
    """
    r_c = params.r_c
    full, shifted, deficit = [], [], []
    for n, d in zip(lat.counts, disp.components):
        full.append(axis_sum(n, lat.l, 0.0, r_c).value)
        shifted.append(axis_sum(n, lat.l, d, r_c).value)
        deficit.append(axis_deficit(n, lat.l, d, r_c))
    gamma = factorized_rate(params, lat.n_a, full, shifted, deficit)
    return RateResult(gamma=gamma, method=Method.DISCRETE)


@dataclass(frozen=True)
class DropScan:
    """
    Γ_D along a grid of displacements and the line through its local minima.

    Attributes:
        deltas (np.ndarray): Displacement grid in m
        gammas (np.ndarray): Γ_D on the grid in s⁻¹
        minima (np.ndarray): Grid indices of strict local minima
        slope (float): Fitted slope in s⁻¹/m
        intercept (float): Fitted intercept in s⁻¹
        r_squared (float): Coefficient of determination of the fit
    """
    deltas: np.ndarray
    gammas: np.ndarray
    minima: np.ndarray
    slope: float
    intercept: float
    r_squared: float

    @property
    def minima_deltas(self) -> np.ndarray:
        return self.deltas[self.minima]

    @property
    def minima_gammas(self) -> np.ndarray:
        return self.gammas[self.minima]

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.deltas.tolist(), self.gammas.tolist()))


def discrete_drop_scan(lat: Lattice, delta_grid: Sequence[float], params: PhysParams) -> DropScan:
    """
    Scan Γ_D over displacements along z and fit the drops.

    Γ_D falls sharply wherever Δ is a multiple of the lattice constant,
    because displaced sites then coincide with original ones. The strict
    local minima of the scan are fitted with a least-squares line.

    Args:
        lat (Lattice): Crystal geometry
        delta_grid (Sequence[float]): Strictly increasing displacements in m
        params (PhysParams): CSL parameters

    Returns:
        DropScan: Grid values, minima and the fitted line

    Raises:
        InvalidParameterError: If the grid is not strictly increasing
        DegenerateFitError: If fewer than three minima are found
    """
    deltas = np.asarray(delta_grid, dtype=float)
    if deltas.ndim != 1 or deltas.size < 3 or np.any(np.diff(deltas) <= 0):
        raise InvalidParameterError("delta grid must be strictly increasing with at least 3 points")

    gammas = np.array(settings.parallel_map(
        lambda delta: gamma_discrete(lat, Displacement.along_z(delta), params).gamma,
        deltas,
    ))
    minima = signal.argrelmin(gammas)[0]
    if minima.size < 3:
        raise DegenerateFitError(f"found {minima.size} local minima, need at least 3 for a line fit")

    fit = stats.linregress(deltas[minima], gammas[minima])
    logger.info("drop scan: %d minima, slope %.4g, R^2 %.6f", minima.size, fit.slope, fit.rvalue ** 2)
    return DropScan(
        deltas=deltas,
        gammas=gammas,
        minima=minima,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
    )
