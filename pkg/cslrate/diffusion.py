"""
Diffusion coefficients of the small-displacement master equation.

For Δ ≪ r_C the collapse rate reduces to Γ = Σ_{αβ} η^{αβ} Δ_α Δ_β. This
module computes η for crystals (pair sums), for homogeneous cuboids (closed
form and momentum-space quadrature) and η^{zz} for bodies layered along z.

A layered body on a d × d face with boundaries z_0 < ... < z_n and density
jumps J_k = ρ_{k+1} - ρ_k (ρ_0 = ρ_{n+1} = 0) has

    η^{zz} = (λ/2) G(d)² Σ_{k,k'} J_k J_{k'} e^{-(z_k - z_{k'})²/4r_C²}

which is the exact double sum over layers regrouped by boundary. Densities
are converted to nucleons/m³ first, so the nucleon mass cancels.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from . import settings
from .continuum_rates import big_g, cuboid_small_delta_weight, small_delta_flag
from .errors import InvalidParameterError, QuadratureError, UnsupportedDisplacementError
from .lattice_rates import diagonal_offsets
from .models import (
    DiffusionTensor,
    Displacement,
    Geometry,
    Lattice,
    LayerStack,
    Method,
    PhysParams,
    RateResult,
    cuboid_sides,
)

logger = logging.getLogger(__name__)

_QUAD_LIMIT = 400


@dataclass(frozen=True)
class LayerEta:
    """
    η^{zz} of a layered body and its decomposition.

    Attributes:
        total (float): η^{zz} in m⁻²s⁻¹
        boundary_part (float): Contribution of the two outer faces alone
        interface_part (float): Everything involving an inner interface;
            zero when neighbouring layers share a density
        orders (Optional[Tuple[float, float]]): (η₀, η₁), the terms of order
            e⁰ and e^{-l²/4r_C²}, for stacks of equal thickness l
    """
    total: float
    boundary_part: float
    interface_part: float
    orders: Optional[Tuple[float, float]] = None

    def to_dict(self) -> Dict[str, Any]:
        report = {
            "eta_zz": self.total,
            "boundary_part": self.boundary_part,
            "interface_part": self.interface_part,
        }
        if self.orders is not None:
            report["eta_0"], report["eta_1"] = self.orders
        return report


def _axis_moments(n: int, l: float, r_c: float) -> Tuple[float, float]:
    # Σ_{i,j} k(x_ij) and Σ_{i,j} k(x_ij) x_ij², x_ij = l(i - j), k the CSL kernel
    m = diagonal_offsets(n, l, 0.0, r_c)
    x = m * l
    weighted = (n - np.abs(m)) * np.exp(-(x / (2.0 * r_c)) ** 2)
    return math.fsum(weighted), math.fsum(weighted * x * x)


def eta_discrete(lat: Lattice, params: PhysParams) -> DiffusionTensor:
    """
    Diffusion tensor of a cubic lattice of point-like sites.

    η^{αα} = (λ n_A²/8r_C⁴) Σ_{ij} e^{-r_ij²/4r_C²} (2r_C² - (x_ij^α)²) and
    η^{α≠β} = -(λ n_A²/8r_C⁴) Σ_{ij} e^{-r_ij²/4r_C²} x_ij^α x_ij^β, evaluated
    axis by axis. The off-diagonal moments vanish by the lattice's reflection
    symmetry, so they are set to zero.

    Args:
        lat (Lattice): Crystal geometry
        params (PhysParams): CSL parameters

    Returns:
        DiffusionTensor: Tensor with method "discrete"
    """
    r_c = params.r_c
    moments = [_axis_moments(n, lat.l, r_c) for n in lat.counts]
    zeroth = [m0 for m0, _ in moments]
    prefactor = params.lam * lat.n_a ** 2 / (8.0 * r_c ** 4)
    eta = np.zeros((3, 3))
    for axis, (m0, m2) in enumerate(moments):
        others = math.prod(zeroth[b] for b in range(3) if b != axis)
        eta[axis, axis] = prefactor * (2.0 * r_c * r_c * m0 - m2) * others
    return DiffusionTensor(eta=eta, method="discrete")


def eta_zz_cuboid_uniform(geom: Geometry, params: PhysParams) -> float:
    """η^{zz} = λ ρ² G(L_x) G(L_y) (1 - e^{-L_z²/4r_C²}) of a homogeneous cuboid."""
    return params.lam * cuboid_small_delta_weight(geom, params.r_c)


def _jumps(stack: LayerStack, m_n: float) -> np.ndarray:
    rho = np.concatenate(([0.0], stack.densities / m_n, [0.0]))
    return np.diff(rho)


def _face_factor(stack: LayerStack, params: PhysParams) -> float:
    return 0.5 * params.lam * big_g(stack.d, params.r_c) ** 2


def _equal_thickness(stack: LayerStack) -> Optional[float]:
    thickness = {layer.thickness for layer in stack.layers}
    return thickness.pop() if len(thickness) == 1 else None


def eta_zz_layered(stack: LayerStack, params: PhysParams) -> LayerEta:
    """
    Exact η^{zz} of a stack of homogeneous layers.

    The boundary double sum is evaluated band by band: boundary pairs further
    apart than the Gaussian cutoff are dropped, so the cost grows with the
    number of layers times the number of boundaries within reach.

    Args:
        stack (LayerStack): Layered body
        params (PhysParams): CSL parameters

    Returns:
        LayerEta: Total, decomposition, and orders for equal-thickness stacks
    """
    r_c = params.r_c
    z = stack.boundaries
    jumps = _jumps(stack, params.m_n)
    n = len(z) - 1
    reach = settings.GAUSSIAN_CUTOFF * r_c
    upper = np.searchsorted(z, z + reach, side="right")
    band = int(np.max(upper - np.arange(n + 1))) - 1
    logger.debug("layered sum over %d boundaries, band %d", n + 1, band)

    diagonal = jumps * jumps
    pieces = [diagonal[1:-1]]
    outer = [diagonal[0], diagonal[-1]]
    for offset in range(1, min(band, n) + 1):
        cross = 2.0 * jumps[:-offset] * jumps[offset:] * np.exp(-((z[offset:] - z[:-offset]) / (2.0 * r_c)) ** 2)
        if offset == n:
            outer.append(cross[0])
        else:
            pieces.append(cross)

    factor = _face_factor(stack, params)
    boundary = factor * math.fsum(outer)
    interface = factor * math.fsum(np.concatenate(pieces))

    orders = None
    l = _equal_thickness(stack)
    if l is not None and n > 1:
        eta_0 = factor * math.fsum(diagonal)
        eta_1 = 2.0 * factor * math.exp(-(l / (2.0 * r_c)) ** 2) * math.fsum(jumps[:-1] * jumps[1:])
        orders = (eta_0, eta_1)
    return LayerEta(total=boundary + interface, boundary_part=boundary, interface_part=interface, orders=orders)


def eta_zz_alternating(n_pairs: int, l_o: float, l_e: float, rho_o: float, rho_e: float,
                       d: float, params: PhysParams) -> LayerEta:
    """
    η^{zz} of 2N layers alternating (l_o, ϱ_o), (l_e, ϱ_e).

    Uses the periodicity of the stack: every boundary pair at a given index
    offset is one of a handful of classes with a common separation and a
    common jump product, so the sum costs O(r_C / (l_o + l_e)) regardless of N.
    For l_o = l_e = l the orders are

        η₀ = (λ/2) G(d)² [(2N - 1) Δϱ² + ϱ_o² + ϱ_e²]
        η₁ = -λ G(d)² (2N - 1) Δϱ² e^{-l²/4r_C²}

    Args:
        n_pairs (int): Number N of (odd, even) pairs, N >= 1
        l_o (float): Thickness of the odd layers in m
        l_e (float): Thickness of the even layers in m
        rho_o (float): Density of the odd layers in kg/m³
        rho_e (float): Density of the even layers in kg/m³
        d (float): Side of the square face in m
        params (PhysParams): CSL parameters

    Returns:
        LayerEta: Total, decomposition and orders

    Raises:
        InvalidParameterError: If N < 1 or a thickness is not positive
    """
    if n_pairs < 1:
        raise InvalidParameterError(f"n_pairs must be >= 1, got {n_pairs}")
    if l_o <= 0 or l_e <= 0:
        raise InvalidParameterError(f"layer thicknesses must be positive, got {l_o}, {l_e}")
    r_c = params.r_c
    width = 2.0 * r_c
    odd, even = rho_o / params.m_n, rho_e / params.m_n
    step = odd - even
    n = 2 * n_pairs
    period = l_o + l_e

    def kernel(sep: float) -> float:
        return math.exp(-(sep / width) ** 2)

    def separation(start: int, offset: int) -> float:
        # z_{k+o} - z_k with z_k = (k // 2) P + (k % 2) l_o
        return ((start + offset) // 2 - start // 2) * period + ((start + offset) % 2 - start % 2) * l_o

    inner = [(n - 1) * step * step]
    outer = [odd * odd, even * even]
    max_offset = min(n, 2 * int(settings.GAUSSIAN_CUTOFF * r_c / period) + 3)
    for offset in range(1, max_offset + 1):
        sign = 1.0 if offset % 2 == 0 else -1.0
        if offset == n:
            outer.append(-2.0 * odd * even * kernel(n_pairs * period))
            continue
        # first face with the interface at index offset, last face with the one at n - offset
        inner.append(2.0 * odd * sign * step * kernel(separation(0, offset)))
        inner.append(-2.0 * even * sign * step * kernel(separation(n - offset, offset)))
        count = n - offset - 1
        if count < 1:
            continue
        if offset % 2 == 0:
            inner.append(2.0 * count * step * step * kernel(separation(1, offset)))
        else:
            starts_odd, starts_even = (count + 1) // 2, count // 2
            inner.append(-2.0 * step * step * (starts_odd * kernel(separation(1, offset))
                                               + starts_even * kernel(separation(2, offset))))

    factor = 0.5 * params.lam * big_g(d, r_c) ** 2
    boundary = factor * math.fsum(outer)
    interface = factor * math.fsum(inner)

    orders = None
    if l_o == l_e:
        interfaces = 2 * n_pairs - 1
        eta_0 = factor * (interfaces * step * step + odd * odd + even * even)
        eta_1 = -2.0 * factor * interfaces * step * step * kernel(l_o)
        orders = (eta_0, eta_1)
    return LayerEta(total=boundary + interface, boundary_part=boundary, interface_part=interface, orders=orders)


def layering_ratio(n_pairs: float, rho_o: float, rho_e: float) -> float:
    """
    η^{zz} of a long alternating stack over that of a uniform body of equal mass.

    1 + (4N - 1) Δϱ² / (ϱ_o + ϱ_e)², the uniform body having density
    (ϱ_o + ϱ_e)/2. N may be a half-integer for a stack with an odd layer count.

    Raises:
        InvalidParameterError: If ϱ_o + ϱ_e is not positive
    """
    total = rho_o + rho_e
    if total <= 0:
        raise InvalidParameterError(f"layering ratio needs rho_o + rho_e > 0, got {total}")
    step = rho_o - rho_e
    return 1.0 + (4.0 * n_pairs - 1.0) * step * step / (total * total)


def uniform_equivalent(stack: LayerStack) -> LayerStack:
    """
    Uniform body with the stack's length, face and mass.

    Its density is the thickness-weighted mean of the layer densities.
    """
    return LayerStack.uniform(stack.d, stack.total_length, stack.mean_density)


def layering_reference(stack: LayerStack) -> LayerStack:
    """
    Uniform body that layering ratios are quoted against.

    For an alternating stack its density is (ϱ_o + ϱ_e)/2, the convention of
    layering_ratio; with an odd layer count this differs slightly from the
    same-mass body. Other stacks use the same-mass body.
    """
    pattern = stack.alternating_pattern()
    if pattern is None:
        return uniform_equivalent(stack)
    return LayerStack.uniform(stack.d, stack.total_length, 0.5 * (pattern[0] + pattern[1]))


def gamma_layered_small_delta(stack: LayerStack, disp: Displacement, params: PhysParams) -> RateResult:
    """
    Small-displacement rate Γ ≈ η^{zz} Δ_z² of a layered body.

    Args:
        stack (LayerStack): Layered body
        disp (Displacement): Displacement, along z only
        params (PhysParams): CSL parameters

    Returns:
        RateResult: Rate with method CONTINUOUS_SMALL_DELTA

    Raises:
        UnsupportedDisplacementError: For a displacement with x or y components
    """
    if not disp.along_z_only:
        raise UnsupportedDisplacementError(
            f"small-displacement rate of a layered body needs Δ along z, got {disp.components}"
        )
    delta = disp.magnitude
    flag = small_delta_flag(delta, params.r_c)
    if not flag.satisfied:
        logger.warning("small-displacement rate of a layered body used with Δ = %.3g r_C", delta / params.r_c)
    eta = eta_zz_layered(stack, params).total
    return RateResult(gamma=eta * delta * delta, method=Method.CONTINUOUS_SMALL_DELTA, validity=(flag,))


def _quad(integrand, lower: float, upper: float, what: str, **options) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(integrand, lower, upper, limit=_QUAD_LIMIT, **options)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"{what} did not converge: {exc}")
    return value


def _momentum_axis(length: float, r_c: float, power: int, rel_tol: float) -> float:
    # ∫ e^{-r_C²k²} 4 sin²(kL/2)/k² k^power dk over [-K, K]
    cutoff = settings.MOMENTUM_CUTOFF / r_c
    what = f"momentum integral k^{power} for L={length:g}"

    def integrand(k: float) -> float:
        profile = length * length * float(np.sinc(k * length / (2.0 * math.pi))) ** 2
        return math.exp(-(r_c * k) ** 2) * profile * k ** power

    if power % 2:
        # odd in k; the absolute tolerance is set by the scale of the even integrals
        return _quad(integrand, -cutoff, cutoff, what,
                     epsabs=rel_tol * length * length / r_c ** (power + 1), epsrel=rel_tol)
    return 2.0 * _quad(integrand, 0.0, cutoff, what, epsabs=0.0, epsrel=rel_tol)


def eta_momentum_space(geom: Geometry, params: PhysParams) -> DiffusionTensor:
    """
    Diffusion tensor of a cuboid from its mass-density Fourier transform.

    η_{αβ} = (λ r_C³ / 2π^{3/2}) ∫ d³k e^{-r_C²k²} |μ(k)|² k_α k_β with
    |μ(k)|² = ρ² Π_α 4 sin²(k_α L_α/2)/k_α². The integrand is a product over
    axes, so the cube [-K, K]³ (K = 10/r_C) integral is a product of
    one-dimensional adaptive quadratures at tolerance params.rel_tol.

    Args:
        geom (Geometry): Cuboid or cube
        params (PhysParams): CSL parameters

    Returns:
        DiffusionTensor: Tensor with method "momentum-space"

    Raises:
        InvalidGeometryError: If geom is not cuboidal
        QuadratureError: If an axis integral misses the tolerance
    """
    sides = cuboid_sides(geom)
    r_c, tol = params.r_c, params.rel_tol
    zeroth = [_momentum_axis(side, r_c, 0, tol) for side in sides]
    first = [_momentum_axis(side, r_c, 1, tol) for side in sides]
    second = [_momentum_axis(side, r_c, 2, tol) for side in sides]

    prefactor = params.lam * r_c ** 3 / (2.0 * math.pi ** 1.5) * geom.density_n ** 2
    eta = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            if a == b:
                factors = [second[c] if c == a else zeroth[c] for c in range(3)]
            else:
                factors = [first[c] if c in (a, b) else zeroth[c] for c in range(3)]
            eta[a, b] = prefactor * math.prod(factors)
    logger.debug("momentum-space tensor for sides %s", sides)
    return DiffusionTensor(eta=eta, method="momentum-space")
