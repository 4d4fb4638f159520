"""
Euler–Maclaurin analysis of lattice sums of Gaussian kernels.

Relates the discrete axis sums of lattice_rates to the continuous segment
integrals of continuum_rates. Applying the Euler–Maclaurin formula to both
the inner and the outer sum of Σ_{i,j} f(i-j) leaves, after the integral,
the boundary term

    (½ - 2B₂) [f(-δ) - ½f(n-δ) - ½f(-n-δ)],   ½ - 2B₂ = 1/6,

with an error of order l²/2r_C². The same pieces give an EM-corrected
prediction of the discrete rate and the leading relative error between the
discrete and the continuous pictures.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from scipy import integrate, special

from . import settings
from .continuum_rates import big_g, gamma_cuboid, mass_difference, second_difference
from .errors import DomainError, InvalidParameterError, UnsupportedOrderError
from .lattice_rates import factorized_rate, gamma_discrete
from .models import Cuboid, Displacement, Lattice, PhysParams
from .specfun import MAX_GAUSSIAN_ORDER, bernoulli, gaussian_derivative

logger = logging.getLogger(__name__)

MAX_EM_ORDER = 6

BOUNDARY_COEFFICIENT = 0.5 - 2.0 * bernoulli(2)
# single-sum coefficient ½ - B₂; kept to show that it misses the discrete sum
PRINTED_BOUNDARY_COEFFICIENT = 0.5 - bernoulli(2)


@dataclass(frozen=True)
class DerivativeOracle:
    """
    A function together with its derivatives.

    Attributes:
        func (Callable[[float, int], float]): func(x, k) returns f^{(k)}(x)
        max_order (int): Highest derivative order func can supply
        width (Optional[float]): Gaussian width in index units, if f is one
    """
    func: Callable[[float, int], float]
    max_order: int
    width: Optional[float] = None

    def __call__(self, x: float, k: int = 0) -> float:
        if k > self.max_order:
            raise UnsupportedOrderError(f"derivative of order {k} requested, oracle supplies up to {self.max_order}")
        return self.func(x, k)


def gaussian_oracle(s: float) -> DerivativeOracle:
    """Oracle for e^{-x²/s²} and its derivatives up to order 12."""
    return DerivativeOracle(
        func=lambda x, k: gaussian_derivative(k, x, s),
        max_order=MAX_GAUSSIAN_ORDER,
        width=s,
    )


def default_order(l: float, r_c: float) -> int:
    """
    Default Euler–Maclaurin order for a lattice of constant l.

    Higher orders stop helping once l is comparable to r_C, so p = 0 is used
    for l >= √2 r_C and p = 2 below.
    """
    return 0 if l >= math.sqrt(2.0) * r_c else 2


@dataclass(frozen=True)
class EmSum:
    """
    Euler–Maclaurin estimate of Σ_{i=1}^n f(i).

    Attributes:
        estimate (float): Integral plus boundary corrections
        remainder_bound (float): Bound on the neglected remainder
        order (int): Number p of Bernoulli corrections used
    """
    estimate: float
    remainder_bound: float
    order: int


def _quad(func: Callable[[float], float], upper: float) -> float:
    value, _ = integrate.quad(func, 0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=200)
    return value


def em_sum_generic(f: DerivativeOracle, n: int, p: Optional[int] = None) -> EmSum:
    """
    Euler–Maclaurin approximation of Σ_{i=1}^n f(i).

    Σ f(i) ≈ ∫₀^n f + ½[f(n) - f(0)] + Σ_{k=1}^p B_{2k}/(2k)! [f^{(2k-1)}(n) - f^{(2k-1)}(0)].
    The remainder is bounded by 2|B_{2p+2}|/(2p+2)! ∫|f^{(2p+2)}| when the
    oracle supplies that derivative, and otherwise by
    2ζ(2p+1)/(2π)^{2p+1} ∫|f^{(2p+1)}|.

    Args:
        f (DerivativeOracle): Function with derivatives
        n (int): Upper summation index
        p (Optional[int]): Order, 0..6; chosen from the oracle's width when omitted

    Returns:
        EmSum: Estimate and remainder bound

    Raises:
        UnsupportedOrderError: If p > 6 or the oracle lacks f^{(2p+1)}
        DomainError: If p < 0 or n < 1
    """
    if p is None:
        # unit index spacing against a kernel of width s = 2r_C
        p = default_order(1.0, 0.5 * f.width) if f.width is not None else 0
    if p < 0:
        raise DomainError(f"Euler-Maclaurin order must be >= 0, got {p}")
    if p > MAX_EM_ORDER:
        raise UnsupportedOrderError(f"Euler-Maclaurin order is capped at {MAX_EM_ORDER}, got {p}")
    if n < 1:
        raise DomainError(f"summation needs n >= 1, got {n}")
    if f.max_order < 2 * p + 1:
        raise UnsupportedOrderError(f"order p={p} needs derivatives up to {2 * p + 1}, oracle has {f.max_order}")

    parts = [_quad(lambda x: f(x, 0), n), 0.5 * (f(n, 0) - f(0, 0))]
    for k in range(1, p + 1):
        odd = 2 * k - 1
        parts.append(bernoulli(2 * k) / math.factorial(2 * k) * (f(n, odd) - f(0, odd)))

    if f.max_order >= 2 * p + 2:
        even = 2 * p + 2
        scale = 2.0 * abs(bernoulli(even)) / math.factorial(even)
        bound = scale * _quad(lambda x: abs(f(x, even)), n)
    else:
        odd = 2 * p + 1
        scale = 2.0 * special.zeta(odd) / (2.0 * math.pi) ** odd
        bound = scale * _quad(lambda x: abs(f(x, odd)), n)
    return EmSum(estimate=math.fsum(parts), remainder_bound=float(bound), order=p)


@dataclass(frozen=True)
class EmEstimate:
    """
    Continuum-plus-boundary approximation of one axis sum.

    Attributes:
        continuum_term (float): n² g_Δ(n l)
        boundary_term (float): Euler–Maclaurin boundary correction
        order (int): Euler–Maclaurin order of the approximation (always 0 here)
        error_order (float): Size l²/2r_C² of the neglected terms
    """
    continuum_term: float
    boundary_term: float
    order: int
    error_order: float

    @property
    def estimate(self) -> float:
        return self.continuum_term + self.boundary_term


def _kernel(x: float, r_c: float) -> float:
    return math.exp(-(x / (2.0 * r_c)) ** 2)


def _boundary(length: float, delta: float, r_c: float, coefficient: float) -> float:
    return coefficient * (_kernel(delta, r_c) - 0.5 * _kernel(length - delta, r_c)
                          - 0.5 * _kernel(length + delta, r_c))


def em_gaussian_double_sum(n: int, l: float, delta: float, r_c: float,
                           coefficient: float = BOUNDARY_COEFFICIENT) -> EmEstimate:
    """
    Approximate Σ_{i,j=1}^n e^{-(l(i-j) - Δ)²/4r_C²} by continuum and boundary terms.

    Args:
        n (int): Sites along the axis, n >= 2
        l (float): Lattice constant in m
        delta (float): Displacement in m
        r_c (float): Localization distance in m
        coefficient (float): Boundary coefficient, 1/6 unless overridden

    Returns:
        EmEstimate: The two terms and the error scale

    Raises:
        InvalidParameterError: If n < 2 or l <= 0
    """
    if n < 2:
        raise InvalidParameterError(f"the double-sum approximation needs n >= 2, got {n}")
    if l <= 0:
        raise InvalidParameterError(f"lattice constant must be positive, got {l}")
    length = n * l
    # n² g_Δ(L) = L² g_Δ(L) / l²
    continuum = second_difference(delta, length, r_c) if delta else big_g(length, r_c)
    return EmEstimate(
        continuum_term=continuum / (l * l),
        boundary_term=_boundary(length, delta, r_c, coefficient),
        order=0,
        error_order=l * l / (2.0 * r_c * r_c),
    )


class BodyRegime(Enum):
    """Size of the body compared with r_C."""
    LARGE_BODY = "large"
    SMALL_BODY = "small"


def body_regime(lat: Lattice, r_c: float) -> Optional[BodyRegime]:
    """LARGE_BODY if every side is ≫ r_C, SMALL_BODY if every side is ≪ r_C, else None."""
    sides = lat.dims
    if min(sides) >= settings.MUCH_LARGER * r_c:
        return BodyRegime.LARGE_BODY
    if max(sides) <= settings.MUCH_SMALLER * r_c:
        return BodyRegime.SMALL_BODY
    return None


def relative_error_predict(regime: BodyRegime, l: float, r_c: float) -> float:
    """
    Leading relative error |Γ_D - Γ_C| / Γ_C of the continuum picture.

    l²/6r_C² for bodies much larger than r_C and l²/3r_C² for bodies much
    smaller. The large-body value overestimates the measured error by about
    a factor 3 and serves as an upper bound.

    Args:
        regime (BodyRegime): Body size regime
        l (float): Lattice constant in m
        r_c (float): Localization distance in m

    Returns:
        float: Predicted relative error
    """
    if l <= 0:
        raise InvalidParameterError(f"lattice constant must be positive, got {l}")
    ratio = (l / r_c) ** 2
    if regime is BodyRegime.LARGE_BODY:
        return ratio / 6.0
    return ratio / 3.0


@dataclass(frozen=True)
class EmCorrection:
    """
    Continuous rate of a lattice and its Euler–Maclaurin-corrected version.

    Attributes:
        gamma_continuum (float): Γ_C of the cuboid filled by the lattice
        gamma_em (float): Γ_C plus the boundary corrections, a prediction of Γ_D
    """
    gamma_continuum: float
    gamma_em: float

    @property
    def relative_error(self) -> float:
        """Predicted (Γ_D - Γ_C) / Γ_C."""
        if self.gamma_continuum == 0:
            return 0.0
        return (self.gamma_em - self.gamma_continuum) / self.gamma_continuum


def _boundary_deficit(length: float, delta: float, r_c: float, coefficient: float) -> float:
    # b(0) - b(Δ) with the Δ-small part taken through expm1
    if delta == 0:
        return 0.0
    curvature = _kernel(length, r_c) - 0.5 * _kernel(length - delta, r_c) - 0.5 * _kernel(length + delta, r_c)
    return coefficient * (-math.expm1(-(delta / (2.0 * r_c)) ** 2) - curvature)


def continuum_cuboid(lat: Lattice) -> Cuboid:
    """Cuboid occupying the lattice's realized sides at the same nucleon density."""
    lx, ly, lz = lat.dims
    return Cuboid(lx=lx, ly=ly, lz=lz, density_n=lat.n_a / lat.l ** 3)


def gamma_discrete_em(lat: Lattice, disp: Displacement, params: PhysParams,
                      coefficient: float = BOUNDARY_COEFFICIENT) -> EmCorrection:
    """
    Euler–Maclaurin prediction of the discrete rate.

    Every axis sum is replaced by its continuum term plus boundary term and
    the rate is assembled exactly as the discrete one is.

    Args:
        lat (Lattice): Crystal geometry
        disp (Displacement): Any displacement vector
        params (PhysParams): CSL parameters
        coefficient (float): Boundary coefficient

    Returns:
        EmCorrection: Continuous and corrected rates
    """
    r_c, l = params.r_c, lat.l
    full, shifted, deficit = [], [], []
    for n, d in zip(lat.counts, disp.components):
        length = n * l
        full.append(big_g(length, r_c) / l ** 2 + _boundary(length, 0.0, r_c, coefficient))
        if d:
            shifted.append(second_difference(d, length, r_c) / l ** 2 + _boundary(length, d, r_c, coefficient))
        else:
            shifted.append(full[-1])
        deficit.append(mass_difference(length, d, r_c) / l ** 2 + _boundary_deficit(length, d, r_c, coefficient))

    gamma_c = gamma_cuboid(continuum_cuboid(lat), disp, params).gamma
    gamma_em = factorized_rate(params, lat.n_a, full, shifted, deficit)
    logger.debug("EM correction for %s: %.4g -> %.4g", lat.counts, gamma_c, gamma_em)
    return EmCorrection(gamma_continuum=gamma_c, gamma_em=gamma_em)


def discrete_relative_error(lat: Lattice, disp: Displacement, params: PhysParams) -> float:
    """Measured |Γ_D - Γ_C| / Γ_C for the lattice and its filled cuboid."""
    gamma_c = gamma_cuboid(continuum_cuboid(lat), disp, params).gamma
    if gamma_c == 0:
        raise DomainError("relative error is undefined for a vanishing continuous rate")
    gamma_d = gamma_discrete(lat, disp, params).gamma
    return abs(gamma_d - gamma_c) / gamma_c
