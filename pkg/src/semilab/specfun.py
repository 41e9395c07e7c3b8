"""Scalar special functions with explicitly controlled accuracy.

Everything here is pure and stateless. Conventions:

* Hermite polynomials follow the probabilists' normalization
  (H_1 = x, H_2 = x^2 - 1, H_3 = x^3 - 3x), NOT the physicists' one.
* Bessel I is evaluated by its power series up to x = 30 and by the
  large-argument asymptotic expansion (log-scaled) beyond, so kernel code
  can go to x ~ 1e3 without overflow.
* Inverse functions (phi_theta_inverse, h_crit_inverse) are restricted to
  their increasing branches and solved by bracketed bisection plus a secant
  polish, 1e-12 absolute target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np

from .errors import AccuracyError, DomainError, UnsupportedDegreeError

ArrayLike = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)
EULER_GAMMA = 0.5772156649015328606

_HERMITE_MAX_DEGREE = 64
_BESSEL_SERIES_CUTOFF = 30.0


@dataclass(frozen=True)
class Accuracy:
    """Tolerance budget for series and iterative evaluations."""

    rel_tol: float = 1e-14
    abs_tol: float = 1e-14
    max_terms: int = 400

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be >= 1")


DEFAULT_ACCURACY = Accuracy()


@dataclass(frozen=True)
class RateConstants:
    """Derived constants of the mean-reverting diffusion at a fixed time.

    c_t is the Gaussian-tilt constant (equals e^{-t}/sqrt(1-e^{-2t}) in the
    standard normalization a=1, sigma=sqrt(2)); d_t is the drift constant
    2a e^{-at} / (sigma^2 (1 - e^{-2at})). Both are finite for t > 0.
    """

    t: float
    a: float
    sigma: float
    c_t: float
    d_t: float

    @classmethod
    def for_time(cls, t: float, a: float = 1.0, sigma: float = SQRT2) -> "RateConstants":
        if t <= 0:
            raise DomainError("RateConstants requires t > 0")
        if a <= 0 or sigma <= 0:
            raise DomainError("rates a, sigma must be positive")
        em = -math.expm1(-2.0 * a * t)  # 1 - e^{-2at}, no cancellation
        s_t = sigma * math.sqrt(em / (2.0 * a))  # conditional std dev
        c_t = math.exp(-a * t) / s_t
        d_t = 2.0 * a * math.exp(-a * t) / (sigma**2 * em)
        return cls(t=t, a=a, sigma=sigma, c_t=c_t, d_t=d_t)

    @property
    def conditional_std(self) -> float:
        """Std dev of the time-t state started from a point."""
        return math.exp(-self.a * self.t) / self.c_t


def hermite(n: int, x: ArrayLike) -> ArrayLike:
    """Probabilists' Hermite polynomial H_n(x) by the three-term recurrence
    H_{n+1}(x) = x H_n(x) - n H_{n-1}(x)."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    if n > _HERMITE_MAX_DEGREE:
        raise UnsupportedDegreeError(f"hermite degree {n} above cap {_HERMITE_MAX_DEGREE}")
    x = np.asarray(x, dtype=float) if isinstance(x, np.ndarray) else x
    h_prev = np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    if n == 0:
        return h_prev
    h = x
    for k in range(1, n):
        h, h_prev = x * h - k * h_prev, h
    return h


def _bessel_series(order: float, x: float, acc: Accuracy) -> float:
    """Power series sum_{n>=0} (x/2)^{2n+order} / (n! Gamma(n+order+1))."""
    half = 0.5 * x
    term = math.exp(order * math.log(half) - math.lgamma(order + 1.0))
    total = term
    for n in range(1, acc.max_terms + 1):
        term *= half * half / (n * (n + order))
        total += term
        if term < acc.rel_tol * total:
            return total
    raise AccuracyError(
        f"bessel series did not converge within {acc.max_terms} terms (order={order}, x={x})"
    )


def _bessel_asymptotic_factor(order: float, x: float, acc: Accuracy) -> float:
    """sum_k (-1)^k a_k(order)/x^k of the large-x expansion, truncated at the
    smallest term (standard asymptotic-series rule)."""
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    prev_abs = math.inf
    for k in range(1, acc.max_terms + 1):
        term *= -(mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(term) >= prev_abs:  # divergence onset: stop before it
            break
        total += term
        prev_abs = abs(term)
        if abs(term) < acc.rel_tol * abs(total):
            break
    return total


def log_bessel_i(order: float, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """log I_order(x), stable for arbitrarily large x."""
    if x <= 0:
        raise DomainError("log_bessel_i requires x > 0")
    if order <= -1:
        raise DomainError("order must exceed -1")
    if x <= _BESSEL_SERIES_CUTOFF:
        return math.log(_bessel_series(order, x, acc))
    factor = _bessel_asymptotic_factor(order, x, acc)
    return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(factor)


def bessel_i(order: float, x: float, acc: Accuracy = DEFAULT_ACCURACY) -> float:
    """Modified Bessel function of the first kind I_order(x), x > 0.

    Series evaluation up to x = 30; log-scaled asymptotic expansion beyond
    (may overflow on exponentiation only if I itself overflows).
    """
    return math.exp(log_bessel_i(order, x, acc))


_LOG_FACTORIAL_TABLE = np.array(
    [math.log(math.factorial(n)) if n > 1 else 0.0 for n in range(21)]
)


def log_factorial(n) -> ArrayLike:
    """log(n!), exact (integer product) for n <= 20, log-Gamma otherwise.

    Accepts a scalar or an integer ndarray.
    """
    if isinstance(n, np.ndarray):
        if (n < 0).any():
            raise DomainError("log_factorial requires n >= 0")
        from scipy.special import gammaln

        small = n <= 20
        out = gammaln(n + 1.0)
        out[small] = _LOG_FACTORIAL_TABLE[n[small]]
        return out
    n = int(n)
    if n < 0:
        raise DomainError("log_factorial requires n >= 0")
    if n <= 20:
        return float(_LOG_FACTORIAL_TABLE[n])
    return math.lgamma(n + 1.0)


# ---------------------------------------------------------------------------
# Compensated (double-double) arithmetic.  float64 carries ~5e-13 absolute
# error on log(1000!) from representation alone, which is too coarse for
# second differences of log-pmfs checked at 1e-12; hi/lo pairs fix that.
# ---------------------------------------------------------------------------

DD = Tuple[float, float]

_SPLITTER = 134217729.0  # 2^27 + 1, Dekker split


def _two_sum(a: float, b: float) -> DD:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float) -> DD:
    p = a * b
    a1 = a * _SPLITTER
    ah = a1 - (a1 - a)
    al = a - ah
    b1 = b * _SPLITTER
    bh = b1 - (b1 - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(x: DD, y: DD) -> DD:
    s, e = _two_sum(x[0], y[0])
    e += x[1] + y[1]
    return _two_sum(s, e)


def dd_scale_int(k: int, x: DD) -> DD:
    p, e = _two_prod(float(k), x[0])
    e += k * x[1]
    return _two_sum(p, e)


def dd_neg(x: DD) -> DD:
    return (-x[0], -x[1])


def dd_value(x: DD) -> float:
    return x[0] + x[1]


_LF_DD_CACHE: dict[int, DD] = {}


def log_factorial_dd(n: int) -> DD:
    """log(n!) as a (hi, lo) pair accurate to ~1e-30 absolute."""
    n = int(n)
    if n < 0:
        raise DomainError("log_factorial_dd requires n >= 0")
    hit = _LF_DD_CACHE.get(n)
    if hit is not None:
        return hit
    import mpmath

    with mpmath.workdps(40):
        v = mpmath.loggamma(n + 1)
        hi = float(v)
        lo = float(v - hi)
    _LF_DD_CACHE[n] = (hi, lo)
    return (hi, lo)


def log_dd(x: float) -> DD:
    """log(x) as a (hi, lo) pair."""
    import mpmath

    with mpmath.workdps(40):
        v = mpmath.log(x)
        hi = float(v)
        lo = float(v - hi)
    return (hi, lo)


# ---------------------------------------------------------------------------
# Increasing-branch inverses.
# ---------------------------------------------------------------------------


def _invert_increasing(
    fn: Callable[[float], float],
    y: float,
    lo: float,
    abs_tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Solve fn(x) = y for x >= lo with fn increasing on [lo, inf)."""
    f_lo = fn(lo)
    if y < f_lo - abs_tol:
        raise DomainError(f"target {y} below branch minimum {f_lo}")
    if y <= f_lo:
        return lo
    hi = max(2.0 * lo, lo + 1.0)
    for _ in range(400):
        if fn(hi) >= y:
            break
        hi *= 2.0
    else:
        raise AccuracyError("bracketing failed: fn(hi) never reached target")
    a, b = lo, hi
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        if fn(mid) < y:
            a = mid
        else:
            b = mid
        if b - a < max(abs_tol, 1e-15 * b):
            break
    # secant polish inside the bracket
    x0, x1 = a, b
    f0, f1 = fn(x0) - y, fn(x1) - y
    for _ in range(8):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (a <= x2 <= b):
            break
        x0, f0, x1 = x1, f1, x2
        f1 = fn(x1) - y
        if abs(f1) < abs_tol:
            break
    return x1


def phi_theta(theta: float, x: float) -> float:
    """Phi_theta(x) = x log x - x log theta - x + theta, defined for x >= 1."""
    if theta <= 0:
        raise DomainError("theta must be positive")
    if x < 1:
        raise DomainError("phi_theta is defined for x >= 1")
    return x * math.log(x) - x * math.log(theta) - x + theta


def phi_theta_inverse(theta: float, y: float, abs_tol: float = 1e-12) -> float:
    """Inverse of Phi_theta on its increasing branch x >= max(1, theta)."""
    lo = max(1.0, theta)
    return _invert_increasing(lambda x: phi_theta(theta, x), y, lo, abs_tol)


def h_crit(x: float) -> float:
    """H(x) = x log x - x, for x >= 1 (increasing there)."""
    if x < 1:
        raise DomainError("h_crit is defined for x >= 1")
    return x * math.log(x) - x


def h_crit_inverse(y: float, abs_tol: float = 1e-12) -> float:
    """Inverse of H(x) = x log x - x on the branch x >= 1 (H(1) = -1)."""
    return _invert_increasing(h_crit, y, 1.0, abs_tol)


# ---------------------------------------------------------------------------
# Digamma.
# ---------------------------------------------------------------------------

# Bernoulli-number coefficients B_{2k}/(2k) of the asymptotic expansion.
_DIGAMMA_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x: float) -> float:
    """psi(x) = Gamma'(x)/Gamma(x) via recurrence then asymptotic expansion."""
    if x <= 0:
        raise DomainError("digamma implemented for x > 0 only")
    result = 0.0
    while x < 10.0:
        result -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    power = inv2
    for c in _DIGAMMA_COEFFS:
        tail += c * power
        power *= inv2
    return result + math.log(x) - 0.5 / x - tail


# ---------------------------------------------------------------------------
# Closed form of the squared-bridge-weight time integral.
# ---------------------------------------------------------------------------


def _bridge_weight_core(tau: float) -> float:
    """g(tau) = (sinh tau cosh tau - tau) / (2 sinh^2 tau), monotone to 1/2."""
    if tau < 1e-3:
        return tau / 3.0 - (2.0 / 45.0) * tau**3
    em = -math.expm1(-2.0 * tau)  # 1 - e^{-2 tau}
    coth = (2.0 - em) / em
    correction = 4.0 * tau * (1.0 - em) / (em * em)
    return 0.5 * (coth - correction)


def alpha_integral(a: float, t: float) -> float:
    """Integral over [0, t] of (sinh(a(t-s))/sinh(at))^2 ds, in closed form.

    Equals (sinh(at)cosh(at) - at) / (2 a sinh^2(at)); bounded by 1/(2a),
    behaves like t/3 as t -> 0.
    """
    if a <= 0 or t <= 0:
        raise DomainError("alpha_integral requires a > 0 and t > 0")
    return _bridge_weight_core(a * t) / a
