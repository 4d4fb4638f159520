"""
Slow reference evaluations used to validate the fast paths.

Nothing here calls continuum_rates, lattice_rates or diffusion: every oracle
works from the defining integral or pair sum directly.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate

from . import settings
from .errors import DomainError, InvalidGeometryError, InvalidParameterError, QuadratureError, SizeLimitError
from .models import Cube, Cuboid, Cylinder, DiffusionTensor, Displacement, Geometry, Lattice, PhysParams, Sphere

logger = logging.getLogger(__name__)

MC_MIN_SAMPLES = 100_000
_MC_CHUNK = 1 << 16
_PAIR_ROWS = 256


@dataclass(frozen=True)
class QuadResult:
    """
    Numerical estimate with its uncertainty.

    Attributes:
        value (float): Estimate
        abs_error_estimate (float): Quadrature error estimate or Monte-Carlo standard error
        evaluations (int): Integrand evaluations or samples used
    """
    value: float
    abs_error_estimate: float
    evaluations: int


def quad_g_shifted(length: float, delta: float, r_c: float, tol: float = 1e-11) -> QuadResult:
    """
    g_Δ(L) by two-dimensional adaptive quadrature of its defining integral.

    (1/L²) ∫₀^L ∫₀^L e^{-(u-v-Δ)²/4r_C²} du dv, integrated on the unit square.

    Args:
        length (float): Segment length in m
        delta (float): Displacement in m
        r_c (float): Localization distance in m
        tol (float): Relative tolerance, at least 1e-12

    Returns:
        QuadResult: Value with error estimate and evaluation count

    Raises:
        DomainError: If tol < 1e-12
        QuadratureError: If the quadrature does not converge
    """
    if tol < 1e-12:
        raise DomainError(f"quadrature tolerance must be >= 1e-12, got {tol}")
    scale = length / (2.0 * r_c)
    shift = delta / (2.0 * r_c)
    # the inner integrand peaks where s - t = Δ/L
    peak = delta / length

    def inner_points(t: float) -> dict:
        centre = t + peak
        return {"points": [centre]} if 0.0 < centre < 1.0 else {}

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, error, info = integrate.nquad(
                lambda s, t: math.exp(-(scale * (s - t) - shift) ** 2),
                [[0.0, 1.0], [0.0, 1.0]],
                opts=[lambda t: {"epsabs": 0.0, "epsrel": tol, "limit": 200, **inner_points(t)},
                      {"epsabs": 0.0, "epsrel": tol, "limit": 200}],
                full_output=True,
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"g_shifted quadrature for L={length:g}, delta={delta:g} failed: {exc}")
    logger.debug("quad_g_shifted: %d evaluations", info["neval"])
    return QuadResult(value=value, abs_error_estimate=abs(error), evaluations=int(info["neval"]))


def _sample(geom: Geometry, rng: np.random.Generator, count: int) -> np.ndarray:
    # uniform points inside the body, shape (count, 3)
    if isinstance(geom, (Cuboid, Cube)):
        return rng.random((count, 3)) * np.array(geom.sides)
    if isinstance(geom, Sphere):
        direction = rng.standard_normal((count, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = geom.r * np.cbrt(rng.random(count))
        return direction * radius[:, None]
    if isinstance(geom, Cylinder):
        radius = geom.r * np.sqrt(rng.random(count))
        angle = 2.0 * math.pi * rng.random(count)
        height = geom.l * rng.random(count)
        return np.column_stack((radius * np.cos(angle), radius * np.sin(angle), height))
    raise InvalidGeometryError(f"cannot sample points inside a {geom.kind}")


def mc_gamma_continuous(geom: Geometry, disp: Displacement, params: PhysParams,
                        samples: int = 10**6, seed: int = 0) -> QuadResult:
    """
    Monte-Carlo estimate of the continuous collapse rate.

    Γ_C = λ ρ² V² E[e^{-|x-w|²/4r_C²} - e^{-|x-w-Δ|²/4r_C²}] for x, w
    uniform in the body. Samples are drawn in fixed-size chunks, chunk i from
    a Philox generator advanced by i jumps, so the estimate depends only on
    (seed, samples) and not on the number of threads.

    Args:
        geom (Geometry): Cuboid, cube, sphere or cylinder
        disp (Displacement): Displacement vector
        params (PhysParams): CSL parameters
        samples (int): Number of point pairs, at least 1e5
        seed (int): Generator key

    Returns:
        QuadResult: Estimate with its standard error

    Raises:
        InvalidParameterError: If samples < 1e5
    """
    if samples < MC_MIN_SAMPLES:
        raise InvalidParameterError(f"Monte-Carlo needs at least {MC_MIN_SAMPLES} samples, got {samples}")
    if disp.is_zero:
        return QuadResult(value=0.0, abs_error_estimate=0.0, evaluations=samples)

    width = 2.0 * params.r_c
    shift = np.array(disp.components)
    sizes = [_MC_CHUNK] * (samples // _MC_CHUNK)
    if samples % _MC_CHUNK:
        sizes.append(samples % _MC_CHUNK)

    def chunk(index_size: Tuple[int, int]) -> Tuple[float, float]:
        index, size = index_size
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(index))
        x = _sample(geom, rng, size)
        w = _sample(geom, rng, size)
        sep = x - w
        values = (np.exp(-np.sum((sep / width) ** 2, axis=1))
                  - np.exp(-np.sum(((sep - shift) / width) ** 2, axis=1)))
        return math.fsum(values), math.fsum(values * values)

    partial = settings.parallel_map(chunk, list(enumerate(sizes)))
    total = math.fsum(s for s, _ in partial)
    total_sq = math.fsum(q for _, q in partial)
    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0)
    scale = params.lam * (geom.density_n * geom.volume) ** 2
    logger.debug("mc_gamma_continuous: %d samples in %d chunks", samples, len(sizes))
    return QuadResult(
        value=scale * mean,
        abs_error_estimate=scale * math.sqrt(variance / samples),
        evaluations=samples,
    )


def _check_size(lat: Lattice) -> None:
    if lat.n_sites > settings.BRUTEFORCE_MAX_SITES:
        raise SizeLimitError(
            f"brute-force pair sum limited to {settings.BRUTEFORCE_MAX_SITES} sites, lattice has {lat.n_sites}"
        )


def _pair_blocks(positions: np.ndarray):
    # yields every separation r_i - r_j, a block of rows at a time
    for start in range(0, len(positions), _PAIR_ROWS):
        yield positions[start:start + _PAIR_ROWS, None, :] - positions[None, :, :]


def bruteforce_gamma_discrete(lat: Lattice, disp: Displacement, params: PhysParams,
                              offset: Sequence[float] = (0.0, 0.0, 0.0)) -> float:
    """
    Γ_D = λ n_A² Σ_{i,j} [e^{-|r_i-r_j|²/4r_C²} - e^{-|r_i-r_j-Δ|²/4r_C²}] site by site.

    Args:
        lat (Lattice): At most 1e4 sites
        disp (Displacement): Displacement vector
        params (PhysParams): CSL parameters
        offset (Sequence[float]): Translation applied to every site in m

    Returns:
        float: The rate in s⁻¹

    Raises:
        SizeLimitError: If the lattice has more than 1e4 sites
    """
    _check_size(lat)
    positions = lat.positions() + np.asarray(offset, dtype=float)
    width = 2.0 * params.r_c
    shift = np.array(disp.components)
    sums = []
    for sep in _pair_blocks(positions):
        block = (np.exp(-np.sum((sep / width) ** 2, axis=-1))
                 - np.exp(-np.sum(((sep - shift) / width) ** 2, axis=-1)))
        sums.append(math.fsum(block.ravel()))
    return params.lam * lat.n_a ** 2 * math.fsum(sums)


def bruteforce_eta_discrete(lat: Lattice, params: PhysParams) -> DiffusionTensor:
    """
    η^{αβ} = (λ n_A²/8r_C⁴) Σ_{i,j} e^{-r_ij²/4r_C²} (2r_C² δ^{αβ} - x_ij^α x_ij^β) site by site.

    Raises:
        SizeLimitError: If the lattice has more than 1e4 sites
    """
    _check_size(lat)
    r_c = params.r_c
    positions = lat.positions()
    eta = np.zeros((3, 3))
    for sep in _pair_blocks(positions):
        weight = np.exp(-np.sum((sep / (2.0 * r_c)) ** 2, axis=-1))
        moment = np.einsum("ij,ija,ijb->ab", weight, sep, sep)
        eta += 2.0 * r_c * r_c * weight.sum() * np.eye(3) - moment
    eta *= params.lam * lat.n_a ** 2 / (8.0 * r_c ** 4)
    return DiffusionTensor(eta=eta, method="bruteforce")
