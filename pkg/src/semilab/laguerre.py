"""Laguerre semigroups on (0, inf) against the Gamma measures nu_alpha.

The kernel

    G_t(x, y) = Gamma(alpha) e^t/(e^t-1) (e^t/(xy))^{(alpha-1)/2}
                exp(-(x+y)/(e^t-1)) I_{alpha-1}(2 sqrt(x y e^t)/(e^t-1))

is assembled entirely in log space (Bessel included), so it survives t near
0 and arguments up to ~1e3.  At alpha = 3/2 the Bessel factor collapses to
sinh and the second x-derivative of log G_t has the closed form

    (1/(4x^2)) (2 - z^2/sinh^2 z - z coth z),   z = c_t sqrt(xy),

with c_t = 2 e^{t/2}/(e^t - 1); the module exposes it, its finite-difference
cross-check, and the demonstration that it has no uniform lower bound.
The weak-L1 tail experiment runs the kernel-supremum strategy: per x the
supremum of G_s(x, .) (unimodal in log y, golden-section), then the exact
Gamma tail of the superlevel set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammainc, gammaincc, gammaincinv, gammaln

from . import specfun
from .errors import AccuracyError, DomainError, RangeError
from .results import CheckReport, TailCurve


@dataclass(frozen=True)
class GammaMeasure:
    """nu_alpha(dx) = x^{alpha-1} e^{-x} / Gamma(alpha) dx on (0, inf)."""

    alpha: float

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise DomainError("alpha must be positive")

    def log_density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (self.alpha - 1.0) * np.log(x) - x - gammaln(self.alpha)

    def density(self, x) -> np.ndarray:
        return np.exp(self.log_density(x))

    def upper_tail(self, x: float) -> float:
        """nu_alpha([x, inf)), exact regularized Gamma."""
        return float(gammaincc(self.alpha, x))

    def interval(self, a: float, b: float) -> float:
        """nu_alpha([a, b]); uses upper-tail differences deep in the tail,
        where the regularized lower function saturates to 1."""
        a = max(a, 0.0)
        if gammainc(self.alpha, a) > 0.5:
            return float(gammaincc(self.alpha, a) - gammaincc(self.alpha, b))
        return float(gammainc(self.alpha, b) - gammainc(self.alpha, a))

    def support_cutoff(self, cap: float = 1e-14) -> float:
        """R with nu_alpha([R, inf)) < cap."""
        return float(gammaincinv(self.alpha, 1.0 - cap)) + 1.0


@dataclass(frozen=True)
class LaguerreKernelParams:
    alpha: float
    t: float
    c_t_lag: float

    @classmethod
    def make(cls, alpha: float, t: float) -> "LaguerreKernelParams":
        if alpha <= 0 or t <= 0:
            raise DomainError("alpha and t must be positive")
        c = 2.0 * math.exp(0.5 * t) / math.expm1(t)
        return cls(alpha=alpha, t=t, c_t_lag=c)


# ---------------------------------------------------------------------------
# Eigenpolynomials.
# ---------------------------------------------------------------------------


def _laguerre_coeffs(alpha: float, k: int) -> np.ndarray:
    """Ascending coefficients of the degree-k eigenpolynomial Q_k.

    Three-term recurrence for the generalized Laguerre family with
    parameter nu = alpha - 1 (Q_0 = 1, Q_1 = alpha - x).
    """
    nu = alpha - 1.0
    prev = np.array([1.0])
    if k == 0:
        return prev
    cur = np.array([alpha, -1.0])
    for m in range(1, k):
        shifted = np.concatenate([[0.0], cur])  # x * cur
        a = np.concatenate([(2 * m + 1 + nu) * cur, [0.0]]) - shifted
        b = np.concatenate([(m + nu) * prev, [0.0, 0.0]])
        prev, cur = cur, (a - b) / (m + 1)
    return cur


def laguerre_poly(alpha: float, k: int, x) -> np.ndarray:
    """Q_k(x): eigenfunction of x f'' + (alpha - x) f' with eigenvalue -k."""
    if k < 0 or k > 10:
        raise DomainError("degree k must lie in 0..10 (closed-form recurrence)")
    coeffs = _laguerre_coeffs(alpha, k)
    return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)


def generator_check(alpha: float, k: int, x: float) -> float:
    """|x Q_k'' + (alpha - x) Q_k' + k Q_k| with exact polynomial derivatives."""
    coeffs = _laguerre_coeffs(alpha, k)
    d1 = np.polynomial.polynomial.polyder(coeffs)
    d2 = np.polynomial.polynomial.polyder(coeffs, 2)
    pv = np.polynomial.polynomial.polyval
    res = x * pv(x, d2) + (alpha - x) * pv(x, d1) + k * pv(x, coeffs)
    return float(abs(res))


# ---------------------------------------------------------------------------
# Kernel.
# ---------------------------------------------------------------------------


def laguerre_kernel_log(params: LaguerreKernelParams, x: float, y: float) -> float:
    """log G_t(x, y), assembled as summed logs (symmetric in x, y)."""
    if x <= 0 or y <= 0:
        raise DomainError("kernel arguments must be positive")
    alpha, t = params.alpha, params.t
    em1 = math.expm1(t)
    z = params.c_t_lag * math.sqrt(x * y)
    return (
        gammaln(alpha)
        + t
        - math.log(em1)
        + 0.5 * (alpha - 1.0) * (t - math.log(x) - math.log(y))
        - (x + y) / em1
        + specfun.log_bessel_i(alpha - 1.0, z)
    )


def laguerre_kernel(params: LaguerreKernelParams, x: float, y: float) -> float:
    out = laguerre_kernel_log(params, x, y)
    if out > 700.0:
        raise RangeError("kernel value overflows float; use laguerre_kernel_log")
    return math.exp(out)


def laguerre_apply(
    params: LaguerreKernelParams,
    f: Callable[[float], float],
    x: float,
    tail_cap: float = 1e-14,
    extra_points: Sequence[float] = (),
) -> float:
    """P_t f(x) = int G_t(x, y) f(y) dnu_alpha(y), adaptive quadrature.

    The domain is (0, R) with the Gamma tail below tail_cap; the integrable
    y^{alpha-1} endpoint singularity is removed by the substitution y = u^2
    when alpha < 1.  Pass breakpoints of a non-smooth f in extra_points so
    the adaptive rule cannot step over them.
    """
    measure = GammaMeasure(params.alpha)
    r = measure.support_cutoff(tail_cap) + abs(x) * math.exp(params.t)

    def integrand(y: float) -> float:
        return math.exp(laguerre_kernel_log(params, x, y) + float(measure.log_density(y)))

    peak = math.exp(-params.t) * x + (1.0 - math.exp(-params.t)) * params.alpha
    breaks = sorted({peak, *extra_points})
    if params.alpha < 1.0:
        g = lambda u: 2.0 * u * integrand(u * u) * f(u * u)
        val, err = quad(
            g, 0.0, math.sqrt(r), limit=400,
            points=[math.sqrt(max(b, 1e-12)) for b in breaks if b < r],
            epsabs=1e-13, epsrel=1e-11,
        )
    else:
        val, err = quad(
            lambda y: integrand(y) * f(y), 0.0, r, limit=400,
            points=[b for b in breaks if b < r], epsabs=1e-13, epsrel=1e-11,
        )
    if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise AccuracyError(f"semigroup quadrature failed (value {val}, err {err})")
    return float(val)


# ---------------------------------------------------------------------------
# Closed-form log-Hessian at alpha = 3/2 and its unboundedness.
# ---------------------------------------------------------------------------


def _hess_core(z: float) -> float:
    """F(z) = 2 - z^2/sinh^2 z - z coth z  (<= 0, ~ -2 z^4/45 near 0, ~ 2 - z large)."""
    if z < 1e-2:
        return -2.0 * z**4 / 45.0
    em = -math.expm1(-2.0 * z)  # 1 - e^{-2z}
    one_m = 1.0 - em  # e^{-2z}
    z_coth = z * (2.0 - em) / em
    z2_sinh2 = 4.0 * z * z * one_m / (em * em)
    return 2.0 - z2_sinh2 - z_coth


def log_hess_32(t: float, x: float, y: float) -> float:
    """Second x-derivative of log G_t(x, y) at alpha = 3/2, closed form."""
    if x <= 0 or y <= 0 or t <= 0:
        raise DomainError("t, x, y must be positive")
    z = LaguerreKernelParams.make(1.5, t).c_t_lag * math.sqrt(x * y)
    return _hess_core(z) / (4.0 * x * x)


def log_hess_32_fd(t: float, x: float, y: float, delta: Optional[float] = None) -> float:
    """Central finite difference of log G_t(., y) at alpha = 3/2 (the oracle).

    Richardson-extrapolated (steps delta and delta/2), so the h^2 truncation
    term cancels and the oracle stays sharp even where the Hessian nearly
    vanishes (small c_t sqrt(xy)).
    """
    params = LaguerreKernelParams.make(1.5, t)
    if delta is None:
        delta = 2e-3 * max(x, 0.05)
    lp = laguerre_kernel_log

    def second(h: float) -> float:
        return (lp(params, x + h, y) - 2.0 * lp(params, x, y) + lp(params, x - h, y)) / h**2

    return (4.0 * second(0.5 * delta) - second(delta)) / 3.0


def log_hess_unboundedness(
    t: float,
    x_grid: Optional[np.ndarray] = None,
    y_grid: Optional[np.ndarray] = None,
) -> CheckReport:
    """No uniform lower bound: the closed-form log-Hessian dives to -inf.

    Reports the grid minimum, verifies the value decreases monotonically
    along a geometric y-grid at fixed x, and that it is <= 0 everywhere.
    """
    if x_grid is None:
        x_grid = np.geomspace(0.1, 10.0, 25)
    if y_grid is None:
        y_grid = np.geomspace(1.0, 1e4, 41)
    report = CheckReport(name="log-hessian-unbounded")
    overall_min = math.inf
    for x in x_grid:
        vals = [log_hess_32(t, float(x), float(y)) for y in y_grid]
        overall_min = min(overall_min, min(vals))
        monotone = all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
        report.record(
            {"x": float(x), "min_val": min(vals), "monotone_down_in_y": monotone},
            violated=(not monotone) or (max(vals) > 1e-12),
        )
    report.constants["grid_min"] = overall_min
    return report


# ---------------------------------------------------------------------------
# Gamma-measure deviation counterexample.
# ---------------------------------------------------------------------------


def gamma_counterexample(
    alpha: float,
    beta: float,
    a_grid: Sequence[float],
    tol: float = 1e-9,
) -> CheckReport:
    """Semi-log-convex deviation fails under nu_alpha for beta > 0.

    For f_a = exp(-beta/2 (x-a)^2 + Z(a)) the level t(a) = exp(Z(a) - beta/2)
    makes {f_a >= t(a)} exactly the window [a-1, a+1], whose nu_alpha-mass is
    comparable to the density at a; t(a) * tail then stays above a positive
    floor while t(a) -> infinity.
    """
    if beta <= 0:
        raise DomainError("the construction needs beta > 0")
    measure = GammaMeasure(alpha)
    report = CheckReport(name="gamma-counterexample")
    width = 12.0 / math.sqrt(beta)
    products = []
    for a in a_grid:
        if a <= 2.0:
            raise DomainError("a must exceed 2 so the window stays in (0, inf)")
        lo, hi = max(0.0, a - width), a + width
        val, err = quad(
            lambda u: math.exp(-0.5 * beta * (u - a) ** 2 + float(measure.log_density(u))),
            lo, hi, limit=300, epsabs=1e-300, epsrel=1e-11,
        )
        if not np.isfinite(val) or val <= 0 or err > 1e-6 * val:
            raise AccuracyError("Z(a) quadrature failed")
        z_a = -math.log(val)
        log_t = z_a - 0.5 * beta
        tail = measure.interval(a - 1.0, a + 1.0)
        log_product = log_t + math.log(tail)
        density_ratio = tail / float(measure.density(a))
        products.append(math.exp(log_product))
        report.record(
            {
                "a": float(a),
                "log_t": log_t,
                "tail": tail,
                "product": math.exp(log_product),
                "window_over_density": density_ratio,
            },
            violated=math.exp(log_product) <= tol,
        )
    report.constants["product_floor"] = min(products)
    report.constants["window_const"] = min(r["window_over_density"] for r in report.rows)
    return report


# ---------------------------------------------------------------------------
# Weak-L1 tail experiment by the kernel supremum.
# ---------------------------------------------------------------------------


def kernel_zero_limit_log(params: LaguerreKernelParams, x: float) -> float:
    """lim_{y -> 0+} log G_t(x, y) = alpha (t - log(e^t - 1)) - x/(e^t - 1)."""
    em1 = math.expm1(params.t)
    return params.alpha * (params.t - math.log(em1)) - x / em1


def kernel_sup_over_y(
    params: LaguerreKernelParams,
    x: float,
    n_coarse: int = 120,
    span: float = 10.0,
    check_unimodal: bool = True,
) -> Tuple[float, float]:
    """(log sup_{y>0} G_s(x, y), maximizing y), golden-section on log y.

    For small x the profile decreases from the y -> 0 edge and the supremum
    is the analytic zero limit (returned with y = 0).  A maximum on the
    right window edge means the window is genuinely too small and raises
    RangeError.  With check_unimodal the coarse profile must be a single
    rising-then-falling pattern (up to 1e-12 wiggles).
    """
    center = math.log(max(x * math.exp(params.t), 1e-6))
    lo, hi = center - span, center + span
    ls = np.linspace(lo, hi, n_coarse)
    vals = np.array([laguerre_kernel_log(params, x, math.exp(v)) for v in ls])
    i = int(np.argmax(vals))
    zero_limit = kernel_zero_limit_log(params, x)
    if i == n_coarse - 1:
        raise RangeError("kernel supremum attained at the right search boundary")
    if check_unimodal:
        d = np.diff(vals)
        rising = d >= -1e-12
        first_fall = int(np.argmax(~rising)) if (~rising).any() else len(d)
        if (d[first_fall:] > 1e-10).any():
            raise AccuracyError(f"kernel profile is not unimodal in log y at x={x}")
    if i == 0:
        # decreasing from the left edge: the sup is the y -> 0 closure
        if zero_limit < vals[0] - 1e-9:
            raise RangeError("profile maximum escaped the left search boundary")
        return zero_limit, 0.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = ls[i - 1], ls[i + 1]
    f = lambda v: laguerre_kernel_log(params, x, math.exp(v))
    c1, c2 = b - invphi * (b - a), a + invphi * (b - a)
    f1, f2 = f(c1), f(c2)
    for _ in range(80):
        if f1 < f2:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = f(c2)
        else:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = f(c1)
    v_star = c1 if f1 >= f2 else c2
    interior = max(f1, f2, vals[i])
    if zero_limit > interior:
        return zero_limit, 0.0
    return interior, math.exp(v_star)


def laguerre_talagrand_tail(
    alpha: float,
    s: float,
    t_grid: Sequence[float],
    tol: float = 1e-9,
) -> TailCurve:
    """nu_alpha({x : sup_y G_s(x, y) >= t}) against c/(t sqrt(log t)), t > 1.

    sup_y G_s(x, .) is increasing in x on the tail region, so the superlevel
    set is an upper ray found by bisection; its measure is the exact
    regularized Gamma tail.  c(s, alpha) is fitted as the max scaled ratio.
    """
    t_grid = [float(t) for t in t_grid]
    if any(t <= 1.0 for t in t_grid):
        raise DomainError("thresholds must exceed 1")
    params = LaguerreKernelParams.make(alpha, s)
    measure = GammaMeasure(alpha)

    def log_sup(x: float) -> float:
        return kernel_sup_over_y(params, x, check_unimodal=False)[0]

    def bisect(x_lo: float, x_hi: float, log_t: float, increasing: bool) -> float:
        for _ in range(80):
            mid = 0.5 * (x_lo + x_hi)
            below = log_sup(mid) < log_t
            if below == increasing:
                x_lo = mid
            else:
                x_hi = mid
        return 0.5 * (x_lo + x_hi)

    curve = TailCurve(constants={"alpha": alpha, "s": s})
    ratios = []
    # the sup profile in x decreases from its x -> 0 value, then increases;
    # superlevel sets are a left block plus an upper ray
    x_turn = 1e-3
    coarse_x = np.geomspace(1e-3, 10.0, 40)
    coarse_v = np.array([log_sup(float(u)) for u in coarse_x])
    x_turn = float(coarse_x[int(np.argmin(coarse_v))])
    for t in t_grid:
        log_t = math.log(t)
        tail = 0.0
        x_hi = max(10.0, 2.0 * x_turn)
        while log_sup(x_hi) < log_t:
            x_hi *= 2.0
            if x_hi > 1e6:
                raise RangeError("threshold out of reach on the x axis")
        if log_sup(x_turn) >= log_t:
            tail = 1.0  # the whole profile sits above the threshold
        else:
            # upper ray
            ray_edge = bisect(x_turn, x_hi, log_t, increasing=True)
            tail = measure.upper_tail(ray_edge)
            # left block, present when the x -> 0 limit tops the threshold
            if log_sup(1e-8) >= log_t:
                block_edge = bisect(1e-8, x_turn, log_t, increasing=False)
                tail += measure.interval(0.0, block_edge)
        scaled = tail * t * math.sqrt(log_t)
        ratios.append(scaled)
        curve.add(t, tail, bound=float("nan"))
    c_fit = max(ratios)
    for row, scaled in zip(curve.rows, ratios):
        row["bound"] = c_fit / (row["t"] * math.sqrt(math.log(row["t"])))
        row["ratio"] = scaled / c_fit if c_fit > 0 else 0.0
    curve.constants["c_fit"] = c_fit
    if curve.violations(tol):
        curve.constants["violated"] = True
    return curve
