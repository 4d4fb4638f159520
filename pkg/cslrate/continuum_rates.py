"""
Closed-form collapse rates for continuous mass distributions.

The cuboid rate factorizes into one-dimensional Gaussian correlation
integrals over segments. Everything here is expressed through

    G(x) = x² g(x) = 4 r_C² (e^{-a²} - 1 + √π a erf(a)),   a = x / 2r_C,

the double integral of e^{-(u-v)²/4r_C²} over a segment of length x, and its
second difference

    SD(b; h) = ½G(b + h) + ½G(b - h) - G(b),

which is the displaced integral L² g_Δ(L) with (b, h) = (Δ, L). Both are
computed without catastrophic cancellation: G through a Taylor series near
0 and SD through a Hermite series (G'' = 2 e^{-x²/4r_C²}) when the step is
small, or through erfc tail moments when the base exceeds both the step and 2r_C.

Key Features:
    - g_factor, g_shifted and mass_difference kernels
    - Exact cuboid rate for an arbitrary displacement 3-vector
    - Small-displacement rates for cuboids, spheres and cylinders
    - Literature estimates (GPR, Adler) with regime flags
"""

import logging
import math
from typing import Tuple

from . import settings
from .errors import InvalidGeometryError, UnsupportedDisplacementError
from .models import (
    Cube,
    Cuboid,
    Cylinder,
    Displacement,
    Geometry,
    Method,
    PhysParams,
    RateResult,
    RegimeFlag,
    Sphere,
    cuboid_sides,
    nucleon_count,
)
from .specfun import erf, gaussian_derivative, gaussian_tail_moment, scaled_bessel_sum

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)

# below this x/r_C, g(x) is taken from its Taylor polynomial
_G_TAYLOR_LIMIT = 1e-3
# Hermite series for SD is used when step/2r_C is at most this
_SD_SERIES_LIMIT = 1e-2
_SD_SERIES_TERMS = 6
# beyond this many kernel widths the Gaussian is zero in double precision
_KERNEL_UNDERFLOW = 40.0
_SPHERE_SERIES_TERMS = 30


def _h(a: float) -> float:
    # G(x) / 4r_C² as a function of a = x / 2r_C
    if a < 0.5 * _G_TAYLOR_LIMIT:
        a2 = a * a
        return a2 * (1.0 - a2 / 6.0 + a2 * a2 / 30.0 - a2 ** 3 / 168.0)
    return math.expm1(-a * a) + SQRT_PI * a * erf(a)


def big_g(x: float, r_c: float) -> float:
    """Double integral of the Gaussian kernel over a segment of length |x|."""
    return 4.0 * r_c * r_c * _h(abs(x) / (2.0 * r_c))


def second_difference(base: float, step: float, r_c: float) -> float:
    """
    ½G(base + step) + ½G(base - step) - G(base).

    Equals ∫_{-h}^{h} (h - |t|) e^{-(b+t)²/4r_C²} dt with b = |base|,
    h = |step|, hence it is non-negative.

    Args:
        base (float): Center of the difference in m
        step (float): Half-width of the difference in m
        r_c (float): Localization distance in m

    Returns:
        float: The second difference in m²
    """
    base, step = abs(base), abs(step)
    if step == 0:
        return 0.0
    width = 2.0 * r_c
    if base > step and (base - step) / width > _KERNEL_UNDERFLOW:
        return 0.0
    if step / width <= _SD_SERIES_LIMIT:
        # Σ_k G^{(2k)}(base) step^{2k} / (2k)!  with G^{(2k)} = 2 K^{(2k-2)}
        terms = [
            2.0 * gaussian_derivative(2 * k - 2, base, width) * step ** (2 * k) / math.factorial(2 * k)
            for k in range(1, _SD_SERIES_TERMS + 1)
        ]
        return max(math.fsum(terms), 0.0)
    if base > step and base > width:
        # ½G(x) = x∫₀^∞K - ∫₀^∞tK + T(x) with T(x) = ∫_x^∞ (t - x) K(t) dt; the
        # linear part has no second difference, and T is the small tail
        tails = [
            gaussian_tail_moment((base + step) / width),
            gaussian_tail_moment((base - step) / width),
            -2.0 * gaussian_tail_moment(base / width),
        ]
        return max(0.5 * width * width * math.fsum(tails), 0.0)
    value = 0.5 * big_g(base + step, r_c) + 0.5 * big_g(base - step, r_c) - big_g(base, r_c)
    return max(value, 0.0)


def g_factor(x: float, r_c: float) -> float:
    """
    Gaussian correlation factor of a uniform segment.

    g(x) = (4r_C²/x²)(e^{-x²/4r_C²} - 1 + √π (x/2r_C) erf(x/2r_C)), even in x,
    monotone decreasing from g(0) = 1. Below x/r_C = 1e-3 the Taylor form
    1 - a²/6 + a⁴/30 is used.

    Args:
        x (float): Segment length in m
        r_c (float): Localization distance in m

    Returns:
        float: g(x) in [0, 1]
    """
    a = abs(x) / (2.0 * r_c)
    if a < 0.5 * _G_TAYLOR_LIMIT:
        a2 = a * a
        return 1.0 - a2 / 6.0 + a2 * a2 / 30.0
    return _h(a) / (a * a)


def g_shifted(length: float, delta: float, r_c: float) -> float:
    """
    Displaced correlation factor g_Δ(L).

    (1/L²) ∫₀^L ∫₀^L e^{-(u-v-Δ)²/4r_C²} du dv, evaluated as
    [½G(L-Δ) + ½G(L+Δ) - G(Δ)] / L². g_Δ(L) with Δ = 0 is g(L).

    Args:
        length (float): Segment length L > 0 in m
        delta (float): Displacement in m (the result is even in it)
        r_c (float): Localization distance in m

    Returns:
        float: g_Δ(L) in [0, 1]
    """
    if delta == 0:
        return g_factor(length, r_c)
    return second_difference(delta, length, r_c) / (length * length)


def mass_difference(length: float, delta: float, r_c: float) -> float:
    """
    L²[g(L) - g_Δ(L)] = G(L) + G(Δ) - ½G(L-Δ) - ½G(L+Δ).

    The expression is symmetric under L ↔ Δ; the arguments are ordered
    before evaluation so the symmetry holds bit for bit.

    Args:
        length (float): Segment length in m
        delta (float): Displacement in m
        r_c (float): Localization distance in m

    Returns:
        float: Non-negative value in m²
    """
    small, large = sorted((abs(length), abs(delta)))
    if small == 0:
        return 0.0
    return max(big_g(small, r_c) - second_difference(large, small, r_c), 0.0)


def _axis_shifted(side: float, delta: float, r_c: float) -> float:
    # L² g_Δ(L), equal to G(L) when the axis is not displaced
    if delta == 0:
        return big_g(side, r_c)
    return second_difference(delta, side, r_c)


def gamma_cuboid(geom: Geometry, disp: Displacement, params: PhysParams) -> RateResult:
    """
    Exact collapse rate of a homogeneous cuboid.

    Γ_C = λ ρ² [Π_α G(L_α) - Π_α L_α² g_{Δ_α}(L_α)], rewritten as a
    telescoped sum of per-axis mass differences so that no two large
    numbers are subtracted:

        Γ_C = λ ρ² [D_x G_y G_z + S_x D_y G_z + S_x S_y D_z]

    with D_α = mass_difference(L_α, Δ_α) and S_α = L_α² g_{Δ_α}(L_α).

    Args:
        geom (Geometry): Cuboid or cube
        disp (Displacement): Any displacement vector
        params (PhysParams): CSL parameters

    Returns:
        RateResult: Rate with method CONTINUOUS_EXACT

    Raises:
        InvalidGeometryError: If geom is not cuboidal
    """
    sides = cuboid_sides(geom)
    r_c = params.r_c
    full = [big_g(side, r_c) for side in sides]
    shifted = [_axis_shifted(side, d, r_c) for side, d in zip(sides, disp.components)]
    diff = [mass_difference(side, d, r_c) for side, d in zip(sides, disp.components)]

    bracket = diff[0] * full[1] * full[2] + shifted[0] * diff[1] * full[2] + shifted[0] * shifted[1] * diff[2]
    gamma = max(params.lam * geom.density_n ** 2 * bracket, 0.0)
    return RateResult(gamma=gamma, method=Method.CONTINUOUS_EXACT)


def cuboid_small_delta_weight(geom: Geometry, r_c: float) -> float:
    """
    ρ² G(L_x) G(L_y) (1 - e^{-L_z²/4r_C²}), the z-diffusion weight of a cuboid.

    Multiplied by λ it is η^{zz}; multiplied further by Δ² it is the
    small-displacement rate.
    """
    lx, ly, lz = cuboid_sides(geom)
    edge = -math.expm1(-(lz / (2.0 * r_c)) ** 2)
    return geom.density_n ** 2 * big_g(lx, r_c) * big_g(ly, r_c) * edge


def _cylinder_factor(radius: float, r_c: float) -> float:
    # (4r_C²/R²)[1 - e^{-y}(I₀(y) + I₁(y))], y = R²/2r_C², → 1 as R → 0
    y = radius * radius / (2.0 * r_c * r_c)
    if y < 1e-3:
        return 1.0 - y / 2.0 + 5.0 * y * y / 24.0 - 7.0 * y ** 3 / 96.0
    return (2.0 / y) * (1.0 - scaled_bessel_sum(y))


def _sphere_factor(radius: float, r_c: float) -> float:
    # (3r_C⁴/R⁶)[e^{-x} - 1 + (x/2)(e^{-x} + 1)], x = R²/r_C², → 1/(4r_C²) as R → 0
    x = radius * radius / (r_c * r_c)
    if x < 1.0:
        # bracket = Σ_{k>=3} (-1)^k (2 - k) x^k / 2k!
        bracket = math.fsum(
            (-1) ** k * (2 - k) * x ** k / (2.0 * math.factorial(k)) for k in range(3, _SPHERE_SERIES_TERMS)
        )
    else:
        bracket = math.expm1(-x) + 0.5 * x * (math.exp(-x) + 1.0)
    return 3.0 * bracket / (x ** 3 * r_c * r_c)


def small_delta_flag(delta: float, r_c: float) -> RegimeFlag:
    """Regime flag of the small-displacement formulas, satisfied for Δ <= 0.1 r_C."""
    limit = settings.SMALL_DELTA_LIMIT
    return RegimeFlag(
        name="small_delta",
        satisfied=delta <= limit * r_c,
        detail=f"requires Δ <= {limit} r_C",
    )


def _require_axial(geom: Geometry, disp: Displacement) -> None:
    if not disp.along_z_only:
        raise UnsupportedDisplacementError(
            f"small-displacement rate of a {geom.kind} needs Δ along z, got {disp.components}"
        )


def gamma_small_delta(geom: Geometry, disp: Displacement, params: PhysParams) -> RateResult:
    """
    Small-displacement rate Γ ≈ λ η^{zz} Δ².

    Cuboids and cylinders need Δ along z (the cylinder axis). The sphere is
    isotropic and accepts any direction. Using the formula with Δ > 0.1 r_C
    is allowed but flagged and logged.

    Args:
        geom (Geometry): Any geometry
        disp (Displacement): Displacement vector
        params (PhysParams): CSL parameters

    Returns:
        RateResult: Rate with method CONTINUOUS_SMALL_DELTA

    Raises:
        UnsupportedDisplacementError: For off-axis Δ on cuboids and cylinders
    """
    r_c = params.r_c
    delta = disp.magnitude
    if isinstance(geom, (Cuboid, Cube)):
        _require_axial(geom, disp)
        weight = cuboid_small_delta_weight(geom, r_c)
    elif isinstance(geom, Cylinder):
        _require_axial(geom, disp)
        edge = -math.expm1(-(geom.l / (2.0 * r_c)) ** 2)
        weight = (geom.density_n * math.pi * geom.r ** 2) ** 2 * _cylinder_factor(geom.r, r_c) * edge
    elif isinstance(geom, Sphere):
        weight = nucleon_count(geom) ** 2 * _sphere_factor(geom.r, r_c)
    else:
        raise InvalidGeometryError(f"no small-displacement rate for {geom.kind}")

    flag = small_delta_flag(delta, r_c)
    if not flag.satisfied:
        logger.warning("small-displacement rate used with Δ = %.3g r_C", delta / r_c)
    return RateResult(
        gamma=params.lam * weight * delta * delta,
        method=Method.CONTINUOUS_SMALL_DELTA,
        validity=(flag,),
    )


def gamma_continuous(geom: Geometry, disp: Displacement, params: PhysParams) -> RateResult:
    """Exact rate for cuboidal bodies, small-displacement rate otherwise."""
    if isinstance(geom, (Cuboid, Cube)):
        return gamma_cuboid(geom, disp, params)
    return gamma_small_delta(geom, disp, params)


def sphere_nucleons(geom: Geometry, r_c: float) -> float:
    """Nucleons inside a sphere of radius r_C at the body's density."""
    return geom.density_n * 4.0 * math.pi / 3.0 * r_c ** 3


def _literature_flags(geom: Geometry, disp: Displacement, r_c: float) -> Tuple[RegimeFlag, ...]:
    ratio = settings.MUCH_LARGER
    return (
        RegimeFlag(
            name="size_regime",
            satisfied=geom.characteristic_radius >= ratio * r_c,
            detail=f"requires R >= {ratio:g} r_C",
        ),
        RegimeFlag(
            name="delta_regime",
            satisfied=disp.magnitude >= ratio * r_c,
            detail=f"requires Δ >= {ratio:g} r_C",
        ),
    )


def gamma_gpr(geom: Geometry, disp: Displacement, params: PhysParams) -> RateResult:
    """
    Estimate Γ_GPR = 6√π λ n N_OUT.

    n is the nucleon count of an r_C-sphere at the body's density and N_OUT
    the nucleons of one configuration lying outside the other, obtained from
    the overlap volume of the body with its displaced copy. The estimate is
    meant for R ≫ r_C and Δ ≫ r_C; both conditions are reported as flags.

    Args:
        geom (Geometry): Any homogeneous geometry
        disp (Displacement): Displacement vector
        params (PhysParams): CSL parameters

    Returns:
        RateResult: Rate with method GPR
    """
    n_out = geom.density_n * (geom.volume - geom.overlap_volume(disp))
    gamma = 6.0 * SQRT_PI * params.lam * sphere_nucleons(geom, params.r_c) * max(n_out, 0.0)
    return RateResult(gamma=gamma, method=Method.GPR, validity=_literature_flags(geom, disp, params.r_c))


def gamma_adler(geom: Geometry, disp: Displacement, params: PhysParams) -> RateResult:
    """
    Estimate Γ_A = λ n² N f(Δ).

    n is the r_C-sphere nucleon count, capped at N_TOT since a body smaller
    than an r_C-sphere forms a single sphere; N = N_TOT / n. f(Δ) = Δ²/2r_C²
    up to Δ = r_C and 1 beyond. Flags report whether Δ is far from r_C on
    either side and whether the two configurations overlap.

    Args:
        geom (Geometry): Any homogeneous geometry
        disp (Displacement): Displacement vector
        params (PhysParams): CSL parameters

    Returns:
        RateResult: Rate with method ADLER
    """
    r_c = params.r_c
    n_total = nucleon_count(geom)
    n = min(sphere_nucleons(geom, r_c), n_total)
    delta = disp.magnitude
    shape = delta * delta / (2.0 * r_c * r_c) if delta <= r_c else 1.0
    gamma = params.lam * n * n_total * shape

    extreme = delta >= settings.MUCH_LARGER * r_c or delta <= settings.MUCH_SMALLER * r_c
    flags = (
        RegimeFlag(
            name="delta_regime",
            satisfied=extreme,
            detail=f"requires Δ >= {settings.MUCH_LARGER:g} r_C or Δ <= {settings.MUCH_SMALLER:g} r_C",
        ),
        RegimeFlag(
            name="no_overlap",
            satisfied=geom.overlap_volume(disp) == 0.0,
            detail="requires the displaced body not to overlap the original",
        ),
    )
    return RateResult(gamma=gamma, method=Method.ADLER, validity=flags)
