"""
Special functions used by the closed-form rates.

Thin, documented wrappers around scipy.special plus two small tables of our
own: Bernoulli numbers generated from their recurrence at import time, and
Gaussian derivatives expressed through physicists' Hermite polynomials.

Accuracy contracts:
    - erf: absolute error below 1e-15 (Cephes implementation in scipy)
    - gaussian_tail_moment: relative error below 1e-12 for u <= 20
    - bessel_i_scaled: e^{-x} I_n(x), relative error below 1e-12, no overflow
    - gaussian_derivative: exact up to rounding for n <= 12
"""

import math
from fractions import Fraction
from typing import Dict

from scipy import special

from .errors import DomainError, UnsupportedOrderError

MAX_GAUSSIAN_ORDER = 12
MAX_BERNOULLI_INDEX = 24

# beyond this |w|/s the Gaussian factor underflows and H_n(u) may overflow
_GAUSSIAN_ZERO_BEYOND = 40.0


def erf(x: float) -> float:
    """Error function."""
    return float(special.erf(x))


def gaussian_tail_moment(u: float) -> float:
    """
    e^{-u²} - √π u erfc(u), i.e. 2 ∫_u^∞ (t - u) e^{-t²} dt.

    Evaluated as e^{-u²}(1 - √π u erfcx(u)) so the result keeps its relative
    accuracy until e^{-u²} underflows.

    Args:
        u (float): Lower limit, u >= 0

    Returns:
        float: Tail moment in (0, 1]

    Raises:
        DomainError: If u is negative
    """
    if u < 0:
        raise DomainError(f"gaussian_tail_moment needs u >= 0, got {u}")
    return math.exp(-u * u) * (1.0 - math.sqrt(math.pi) * u * float(special.erfcx(u)))


def bessel_i_scaled(n: int, x: float) -> float:
    """
    Exponentially scaled modified Bessel function e^{-x} I_n(x).

    Args:
        n (int): Order, 0 or 1
        x (float): Argument, x >= 0

    Returns:
        float: e^{-x} I_n(x)

    Raises:
        DomainError: If n is not 0/1 or x is negative
    """
    if x < 0:
        raise DomainError(f"bessel_i_scaled needs x >= 0, got {x}")
    if n == 0:
        return float(special.i0e(x))
    if n == 1:
        return float(special.i1e(x))
    raise DomainError(f"bessel_i_scaled supports orders 0 and 1, got {n}")


def gaussian_derivative(n: int, w: float, s: float) -> float:
    """
    n-th derivative of e^{-w²/s²} with respect to w.

    Uses d^n/dw^n e^{-w²/s²} = (-1)^n s^{-n} H_n(w/s) e^{-w²/s²}, with H_n the
    physicists' Hermite polynomial (evaluated by scipy through its
    three-term recurrence).

    Args:
        n (int): Derivative order, 0 <= n <= 12
        w (float): Evaluation point
        s (float): Width, s > 0

    Returns:
        float: The derivative value

    Raises:
        UnsupportedOrderError: If n > 12
        DomainError: If n < 0 or s <= 0
    """
    if n > MAX_GAUSSIAN_ORDER:
        raise UnsupportedOrderError(
            f"Gaussian derivatives are capped at order {MAX_GAUSSIAN_ORDER}, got {n}"
        )
    if n < 0:
        raise DomainError(f"derivative order must be >= 0, got {n}")
    if s <= 0:
        raise DomainError(f"Gaussian width must be positive, got {s}")
    u = w / s
    if abs(u) > _GAUSSIAN_ZERO_BEYOND:
        return 0.0
    gauss = math.exp(-u * u)
    if n == 0:
        return gauss
    return (-1) ** n * s ** (-n) * float(special.eval_hermite(n, u)) * gauss


def _bernoulli_table(upto: int) -> Dict[int, Fraction]:
    # B_0 = 1 and sum_{j=0}^{m} C(m+1, j) B_j = 0 for m >= 1
    table = [Fraction(1)]
    for m in range(1, upto + 1):
        acc = sum(math.comb(m + 1, j) * table[j] for j in range(m))
        table.append(-acc / (m + 1))
    return {k: value for k, value in enumerate(table)}


_BERNOULLI = _bernoulli_table(MAX_BERNOULLI_INDEX)


def bernoulli_exact(k: int) -> Fraction:
    """Exact Bernoulli number B_k for even 2 <= k <= 24."""
    if k < 2 or k > MAX_BERNOULLI_INDEX or k % 2:
        raise DomainError(f"Bernoulli index must be even and in [2, {MAX_BERNOULLI_INDEX}], got {k}")
    return _BERNOULLI[k]


def bernoulli(k: int) -> float:
    """Bernoulli number B_k rendered as a float."""
    return float(bernoulli_exact(k))


def scaled_bessel_sum(x: float) -> float:
    """e^{-x}(I_0(x) + I_1(x)), the combination entering the cylinder rate."""
    return bessel_i_scaled(0, x) + bessel_i_scaled(1, x)


__all__ = [
    "erf",
    "gaussian_tail_moment",
    "bessel_i_scaled",
    "gaussian_derivative",
    "bernoulli",
    "bernoulli_exact",
    "scaled_bessel_sum",
    "MAX_GAUSSIAN_ORDER",
]
