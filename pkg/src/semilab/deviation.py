"""Deviation-bound verification engine.

Three layers:

* Fenchel-Legendre machinery: numeric convex conjugates and the pointwise
  sup bound phi(x) - log int e^phi dmu_h <= (1/2) log((C+beta)/(2 pi)) + h(x)
  for semi-convex phi (phi'' >= -beta) against log-concave-type measures
  mu_h(dx) = e^{-h} dx with 0 <= h'' <= C.
* Tail measurements: mu_h(f >= t int f dmu_h) <= ((C+beta)/c) / (t sqrt(log t))
  for t >= 2 when c <= h'' <= C (exact quadrature), and the Poisson analogue
  for log-convex functions with its sqrt(log log t) envelope.
* Counterexamples: the Gaussian-bump families f_a showing that discrete
  semi-log-convexity with beta > 0 cannot beat Markov's inequality, with the
  floor T(a) pi_theta(f_a >= T(a)) >= e^{c_beta} verified at every a whose
  concave score is maximized at an integer.

All randomized corpora are seeded and versioned through seed labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp

from . import discrete, specfun
from .errors import AccuracyError, DomainError, GrowthError, RangeError
from .results import CheckReport, TailCurve
from .seeding import rng_for

_TWO_PI = 2.0 * math.pi


@dataclass
class SemiConvexFn:
    """phi on the reals with (log-scale) convexity defect beta: phi'' >= -beta."""

    phi: Callable
    beta: float
    normalized: bool = False
    label: str = ""

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise DomainError("beta must be >= 0")

    def verify(self, x_grid: np.ndarray, tol: float = 1e-6) -> None:
        """Finite-difference sweep of the semi-convexity defect."""
        x = np.asarray(x_grid, dtype=float)
        v = np.asarray(self.phi(x), dtype=float)
        h2 = np.diff(x)[:-1]
        second = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h2**2
        if (second < -self.beta - tol).any():
            worst = float(second.min())
            raise DomainError(f"phi'' dips to {worst}, below -beta = {-self.beta}")


@dataclass
class MeasureSpec:
    """A reference measure: gaussian-like mu_h = e^{-h} dx with c <= h'' <= C,
    or a Poisson / Gamma parameter carrier for the discrete experiments."""

    kind: str
    h0: Optional[Callable] = None
    d2h0: Optional[Callable] = None
    c: float = float("nan")
    C: float = float("nan")
    theta: float = float("nan")
    alpha: float = float("nan")
    log_norm: float = 0.0
    half_range: float = 40.0
    label: str = ""

    @classmethod
    def gaussian_like(
        cls,
        h0: Callable,
        d2h0: Callable,
        c: float,
        C: float,
        label: str = "",
        check_grid: Optional[np.ndarray] = None,
        symmetric_required: bool = True,
    ) -> "MeasureSpec":
        """mu_h(dx) = e^{-h(x)} dx normalized to a probability (h = h0 + logZ)."""
        if not (0 < c <= C):
            raise DomainError("need 0 < c <= C")
        half_range = math.sqrt(2.0 * 720.0 / c)  # e^{-c R^2/2} ~ 1e-313
        grid = (
            np.linspace(-half_range, half_range, 4001)
            if check_grid is None
            else np.asarray(check_grid, dtype=float)
        )
        vals2 = np.asarray(d2h0(grid), dtype=float)
        if (vals2 < c - 1e-9).any() or (vals2 > C + 1e-9).any():
            raise DomainError(
                f"h'' leaves [{c}, {C}]: range [{vals2.min()}, {vals2.max()}]"
            )
        if symmetric_required:
            sym = np.abs(np.asarray(h0(grid)) - np.asarray(h0(-grid)))
            if sym.max() > 1e-9:
                raise DomainError("h must be symmetric (simplifying assumption)")
        z, z_err = quad(
            lambda x: math.exp(-float(h0(np.asarray([x]))[0])),
            -half_range, half_range, limit=400, epsabs=0.0, epsrel=1e-12,
        )
        if not np.isfinite(z) or z <= 0 or z_err > 1e-8 * z:
            raise AccuracyError("normalization quadrature failed")
        return cls(
            kind="gaussian-like",
            h0=h0,
            d2h0=d2h0,
            c=c,
            C=C,
            log_norm=math.log(z),
            half_range=half_range,
            label=label,
        )

    @classmethod
    def poisson(cls, theta: float) -> "MeasureSpec":
        return cls(kind="poisson", theta=theta, label=f"poisson({theta})")

    @classmethod
    def gamma(cls, alpha: float) -> "MeasureSpec":
        return cls(kind="gamma", alpha=alpha, label=f"gamma({alpha})")

    # -- gaussian-like helpers ------------------------------------------------

    def _require_gaussian(self) -> None:
        if self.kind != "gaussian-like":
            raise DomainError(f"operation needs a gaussian-like measure, not {self.kind}")

    def h(self, x) -> np.ndarray:
        """The normalized exponent (integral of e^{-h} is exactly 1)."""
        self._require_gaussian()
        return np.asarray(self.h0(np.asarray(x, dtype=float)), dtype=float) + self.log_norm

    def density(self, x) -> np.ndarray:
        return np.exp(-self.h(x))

    def integral(self, g: Callable) -> float:
        """int g dmu_h by adaptive quadrature on the Gaussian-dominated range."""
        self._require_gaussian()
        val, err = quad(
            lambda x: float(g(np.asarray([x]))[0]) * math.exp(-float(self.h(np.asarray([x]))[0])),
            -self.half_range,
            self.half_range,
            limit=400,
            epsabs=1e-300,
            epsrel=1e-11,
        )
        if not np.isfinite(val):
            raise AccuracyError("measure integral diverged")
        if err > 1e-7 * max(1.0, abs(val)):
            raise AccuracyError(f"quadrature error {err} too large for integral {val}")
        return val

    def measure_of_superlevel(self, g: Callable, level: float, n_scan: int = 8001) -> float:
        """mu_h({x : g(x) >= level}), by crossing detection plus quadrature."""
        self._require_gaussian()
        xs = np.linspace(-self.half_range, self.half_range, n_scan)
        vals = np.asarray(g(xs), dtype=float) - level
        fn = lambda x: float(g(np.asarray([x]))[0]) - level
        return self._measure_from_scan(xs, vals, fn)

    def _measure_from_scan(
        self, xs: np.ndarray, vals: np.ndarray, fn: Optional[Callable] = None
    ) -> float:
        """Measure of {vals >= 0} with crossing refinement (bisection when the
        scalar callable is available, linear interpolation otherwise)."""
        inside = vals >= 0.0
        if not inside.any():
            return 0.0
        edges: List[Tuple[float, float]] = []
        start: Optional[float] = None
        for i in range(len(xs)):
            if inside[i] and start is None:
                start = (
                    xs[i]
                    if i == 0
                    else _refine_crossing(xs[i - 1], xs[i], vals[i - 1], vals[i], fn)
                )
            if not inside[i] and start is not None:
                edges.append((start, _refine_crossing(xs[i - 1], xs[i], vals[i - 1], vals[i], fn)))
                start = None
        if start is not None:
            edges.append((start, xs[-1]))
        total = 0.0
        for a, b in edges:
            if b > a:
                v, _ = quad(
                    lambda x: math.exp(-float(self.h(np.asarray([x]))[0])),
                    a, b, limit=200, epsabs=1e-300, epsrel=1e-12,
                )
                total += v
        return total


def _refine_crossing(
    a: float, b: float, fa: float, fb: float, fn: Optional[Callable] = None
) -> float:
    """Locate the sign change of a continuous function inside (a, b)."""
    if (fa >= 0) == (fb >= 0):  # no change: caller at a boundary cell
        return a
    if fn is None:
        return a + (b - a) * (-fa) / (fb - fa)
    for _ in range(60):
        m = 0.5 * (a + b)
        fm = fn(m)
        if (fm >= 0) == (fa >= 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


def gaussian_measure() -> MeasureSpec:
    """The standard normal as a gaussian-like measure (h = x^2/2 + const)."""
    return MeasureSpec.gaussian_like(
        h0=lambda x: 0.5 * np.asarray(x, dtype=float) ** 2,
        d2h0=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        c=1.0,
        C=1.0,
        label="x^2/2",
    )


def sqrt_perturbed_measure() -> MeasureSpec:
    """mu_h for h0 = x^2/2 + sqrt(1+x^2); 1 <= h'' <= 2."""
    return MeasureSpec.gaussian_like(
        h0=lambda x: 0.5 * np.asarray(x) ** 2 + np.sqrt(1.0 + np.asarray(x) ** 2),
        d2h0=lambda x: 1.0 + (1.0 + np.asarray(x) ** 2) ** (-1.5),
        c=1.0,
        C=2.0,
        label="x^2/2+sqrt(1+x^2)",
    )


# ---------------------------------------------------------------------------
# Convex conjugation.
# ---------------------------------------------------------------------------


def convex_conjugate(
    g: Callable,
    y_grid: np.ndarray,
    x_lo: float,
    x_hi: float,
    n_grid: int = 4001,
    refine_iters: int = 60,
    convexity_tol: float = 1e-8,
) -> np.ndarray:
    """g*(y) = sup_x {x y - g(x)} on [x_lo, x_hi], grid sup + golden refinement.

    g must be convex on the window (checked by a second-difference sweep).
    """
    xs = np.linspace(x_lo, x_hi, n_grid)
    gv = np.asarray(g(xs), dtype=float)
    h = xs[1] - xs[0]
    second = gv[2:] - 2.0 * gv[1:-1] + gv[:-2]
    if (second < -convexity_tol * max(1.0, np.abs(gv).max())).any():
        raise DomainError("g fails the convexity sweep on the window")

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    out = np.empty(len(y_grid))
    for m, y in enumerate(np.asarray(y_grid, dtype=float)):
        vals = xs * y - gv
        i = int(np.argmax(vals))
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, n_grid - 1)]
        # golden-section maximization of the concave section profile
        c1 = b - invphi * (b - a)
        c2 = a + invphi * (b - a)
        f1 = c1 * y - float(g(np.asarray([c1]))[0])
        f2 = c2 * y - float(g(np.asarray([c2]))[0])
        for _ in range(refine_iters):
            if f1 < f2:
                a, c1, f1 = c1, c2, f2
                c2 = a + invphi * (b - a)
                f2 = c2 * y - float(g(np.asarray([c2]))[0])
            else:
                b, c2, f2 = c2, c1, f1
                c1 = b - invphi * (b - a)
                f1 = c1 * y - float(g(np.asarray([c1]))[0])
        out[m] = max(vals[i], f1, f2)
    return out


# ---------------------------------------------------------------------------
# The pointwise sup bound and the continuous deviation theorem.
# ---------------------------------------------------------------------------


def check_semiconvex_sup_bound(
    mu: MeasureSpec, phi: SemiConvexFn, x_grid: np.ndarray, tol: float = 1e-9
) -> CheckReport:
    """Verify phi(x) - log int e^phi dmu_h <= (1/2) log((C+beta)/(2 pi)) + h(x)."""
    mu._require_gaussian()
    report = CheckReport(name="semiconvex-sup-bound")
    log_mass = math.log(mu.integral(lambda x: np.exp(phi.phi(x))))
    rhs_const = 0.5 * math.log((mu.C + phi.beta) / _TWO_PI)
    xs = np.asarray(x_grid, dtype=float)
    lhs = np.asarray(phi.phi(xs), dtype=float) - log_mass
    rhs = rhs_const + mu.h(xs)
    for x, l, r in zip(xs, lhs, rhs):
        report.record(
            {"x": float(x), "lhs": float(l), "rhs": float(r), "phi": phi.label},
            violated=l > r + tol,
        )
    report.constants["log_mass"] = log_mass
    return report


def deviation_bound_diffusion(
    mu: MeasureSpec, f: SemiConvexFn, t_grid: Sequence[float], tol: float = 1e-11
) -> TailCurve:
    """mu_h(f >= t int f dmu_h) against ((C+beta)/c) / (t sqrt(log t)), t >= 2."""
    mu._require_gaussian()
    t_grid = [float(t) for t in t_grid]
    if any(t < 2.0 for t in t_grid):
        raise DomainError("t_grid must stay within [2, inf)")
    mass = mu.integral(lambda x: np.exp(f.phi(x)))
    if not np.isfinite(mass) or mass <= 0:
        raise AccuracyError("int e^phi dmu_h did not converge")
    const = (mu.C + f.beta) / mu.c
    curve = TailCurve(constants={"C": mu.C, "c": mu.c, "beta": f.beta, "bound_const": const})
    for t in t_grid:
        level = math.log(t) + math.log(mass)
        tail = mu.measure_of_superlevel(lambda x: np.asarray(f.phi(x)), level)
        curve.add(t, tail, const / (t * math.sqrt(math.log(t))))
    if curve.violations(tol):
        curve.constants["violated"] = True
    return curve


def semiconvex_corpus(beta: float, size: int, seed: int) -> List[SemiConvexFn]:
    """Seeded family of functions with (log f)'' >= -beta.

    Mix of log-linear rays, tight Gaussian bumps of curvature exactly -beta
    (only when beta > 0), softened bumps, and log-sum-exp convex profiles.
    """
    rng = rng_for(seed, ["semiconvex-corpus", int(round(beta * 1000)), size])
    out: List[SemiConvexFn] = []
    for i in range(size):
        kind = i % 4
        if kind == 0:
            lam = float(rng.uniform(-3.0, 3.0))
            out.append(SemiConvexFn(lambda x, lam=lam: lam * np.asarray(x), beta, label=f"lin{lam:+.2f}"))
        elif kind == 1 and beta > 0:
            m = float(rng.uniform(-2.0, 2.0))
            out.append(
                SemiConvexFn(
                    lambda x, m=m: -0.5 * beta * (np.asarray(x) - m) ** 2,
                    beta,
                    label=f"bump@{m:+.2f}",
                )
            )
        elif kind == 2:
            s = float(rng.uniform(0.1, 1.0))
            m = float(rng.uniform(-2.0, 2.0))
            extra = (
                (lambda x, m=m, s=s: s * np.log(np.cosh(np.asarray(x) - m)))
                if beta == 0
                else (
                    lambda x, m=m, s=s: -0.5 * beta * (np.asarray(x) - m) ** 2
                    + s * np.log(np.cosh(np.asarray(x) - m))
                )
            )
            out.append(SemiConvexFn(extra, beta, label=f"soft@{m:+.2f}"))
        else:
            lams = rng.uniform(-2.5, 2.5, size=3)
            ws = rng.uniform(0.2, 1.0, size=3)
            out.append(
                SemiConvexFn(
                    lambda x, lams=lams, ws=ws: logsumexp(
                        np.add.outer(np.asarray(x, dtype=float), 0.0 * lams) * lams + np.log(ws),
                        axis=1,
                    ),
                    beta,
                    label="lse",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Poisson: log-convex deviation bound and the semi-log-convex counterexample.
# ---------------------------------------------------------------------------


def poisson_logconvex_deviation(
    theta: float,
    f: discrete.FuncOnN,
    t_grid: Sequence[float],
    k_cap: int = 200_000,
) -> TailCurve:
    """Exact pi_theta(f >= t int f dpi_theta) against c(theta) sqrt(log log t)/(t sqrt(log t)).

    f must be log-convex (Delta log f >= 0, verified on the working range);
    the envelope constant is fitted as the max scaled ratio and reported.
    """
    t_grid = [float(t) for t in t_grid]
    if any(t < 4.0 for t in t_grid):
        raise DomainError("t_grid must stay within [4, inf)")
    # working range: Poisson support + growth room
    k = discrete._poisson_support(theta, 1e-18) + 64
    while True:
        ks = np.arange(k + 1)
        fv = f.values(ks)
        if (fv < 0).any():
            raise DomainError("f must be non-negative")
        terms = fv * discrete.poisson_row(theta, k)
        tail_ratio = terms[-1] / max(terms.max(), 1e-300)
        if tail_ratio < 1e-18:
            break
        k *= 2
        if k > k_cap:
            raise GrowthError("int f dpi_theta does not close; f grows too fast")
    for n in range(1, min(k, 400)):
        if fv[n - 1] > 0 and fv[n] > 0 and fv[n + 1] > 0:
            d = math.log(fv[n + 1]) + math.log(fv[n - 1]) - 2.0 * math.log(fv[n])
            if d < -1e-9:
                raise DomainError(f"f is not log-convex at n={n} (Delta log f = {d})")
    mass = float(terms.sum())
    curve = TailCurve(constants={"theta": theta, "mass": mass})
    ratios = []
    for t in t_grid:
        level = t * mass
        mask = fv >= level
        tail = float(discrete.poisson_row(theta, k)[mask].sum())
        if mask[-1]:
            tail += discrete.poisson_tail(theta, k + 1)
        scaled = tail * t * math.sqrt(math.log(t)) / math.sqrt(math.log(math.log(t)))
        ratios.append(scaled)
        curve.add(t, tail, bound=float("nan"))
    c_fit = max(ratios) if ratios else 0.0
    for row, scaled in zip(curve.rows, ratios):
        t = row["t"]
        row["bound"] = c_fit * math.sqrt(math.log(math.log(t))) / (t * math.sqrt(math.log(t)))
        row["ratio"] = scaled / c_fit if c_fit > 0 else 0.0
    curve.constants["c_fit"] = c_fit
    return curve


def poisson_counterexample(
    theta: float,
    beta: float,
    a_search_range: Tuple[float, float] = (1.0, 60.0),
    tol: float = 1e-9,
) -> CheckReport:
    """Semi-log-convexity with beta > 0 cannot beat Markov under pi_theta.

    Builds f_a(n) = exp(-beta/2 (n-a)^2 + Z(a)) and, at every a in the range
    whose concave score Psi_a(u) = -beta/2 (u-a)^2 - log Gamma(u+1)
    + u log theta - theta peaks at an integer u_a, certifies the floor

        T(a) pi_theta(f_a >= T(a)) >= e^{c_beta},
        c_beta = -log(2 sum_n e^{-beta n^2 / 2}),

    with T(a) = exp(-beta/2 (u_a - a)^2 + Z(a)) increasing along the family.

    The stationarity condition Psi_a'(u) = -beta(u-a) - psi(u+1) + log theta
    inverts in closed form: u_a = n exactly when a = n + (psi(n+1) - log theta)/beta.
    Each such a is re-verified by a digamma root-solve.
    """
    if beta <= 0:
        raise DomainError("the construction needs beta > 0")
    if theta <= 0:
        raise DomainError("theta must be positive")
    lo, hi = a_search_range
    report = CheckReport(name="poisson-counterexample")

    # c_beta floor
    ssum = 0.0
    n = 0
    while True:
        term = math.exp(-0.5 * beta * n * n)
        ssum += term
        n += 1
        if term < 1e-30:
            break
    c_beta = -math.log(2.0 * ssum)
    floor = math.exp(c_beta)
    log_theta = math.log(theta)

    def psi_a_score(a: float, u: np.ndarray) -> np.ndarray:
        from scipy.special import gammaln as _gl

        return -0.5 * beta * (u - a) ** 2 - _gl(u + 1.0) + u * log_theta - theta

    def z_of(a: float) -> float:
        n_hi = int(math.ceil(a + 12.0 / math.sqrt(beta) + 40))
        ns = np.arange(0, n_hi + 1)
        logs = -0.5 * beta * (ns - a) ** 2 + discrete.log_poisson_pmf(theta, ns)
        return -float(logsumexp(logs))

    # enumerate integer-peak locations a_n = n + (psi(n+1) - log theta)/beta
    hits = []
    n = 1
    while True:
        a_n = n + (specfun.digamma(n + 1.0) - log_theta) / beta
        if a_n > hi:
            break
        if a_n >= max(lo, 1.0):
            hits.append((n, a_n))
        n += 1
    if len(hits) < 2:
        raise RangeError("search range contains fewer than two integer-peak points")

    prev_log_T = -math.inf
    for n_peak, a in hits:
        # root-solve verification of the stationarity condition
        g = lambda u: -beta * (u - a) - specfun.digamma(u + 1.0) + log_theta
        lo_u, hi_u = 1e-9, a + 10.0
        for _ in range(200):
            mid = 0.5 * (lo_u + hi_u)
            if g(mid) > 0:
                lo_u = mid
            else:
                hi_u = mid
        u_solved = 0.5 * (lo_u + hi_u)
        if abs(u_solved - n_peak) > 1e-7:
            raise AccuracyError(
                f"closed-form inversion and root-solve disagree: {u_solved} vs {n_peak}"
            )
        # strict concavity of the score around the peak
        us = np.linspace(max(0.0, n_peak - 5.0), n_peak + 5.0, 41)
        sc = psi_a_score(a, us)
        dd = sc[2:] - 2.0 * sc[1:-1] + sc[:-2]
        concave = bool((dd < 0).all())

        r = a - n_peak  # = psi(n+1)/beta - log theta / beta > 0 for moderate theta
        z_a = z_of(a)
        log_T = -0.5 * beta * r * r + z_a
        n_lo = max(0, math.ceil(a - abs(r) - 1e-12))
        n_hi = math.floor(a + abs(r) + 1e-12)
        ns = np.arange(n_lo, n_hi + 1)
        log_tail = float(logsumexp(discrete.log_poisson_pmf(theta, ns)))
        product = math.exp(log_T + log_tail)
        report.record(
            {
                "n": n_peak,
                "a": a,
                "u_solved": u_solved,
                "log_T": log_T,
                "tail": math.exp(log_tail),
                "product": product,
                "floor": floor,
                "concave": concave,
                "T_increasing": log_T > prev_log_T,
                "u_ge_sqrt_a": n_peak >= math.sqrt(a),
            },
            violated=(product < floor - tol) or not concave,
        )
        prev_log_T = log_T
    report.constants.update({"c_beta": c_beta, "floor": floor, "n_hits": len(hits)})
    return report


# ---------------------------------------------------------------------------
# End-to-end weak-L1 experiment for the perturbed diffusions.
# ---------------------------------------------------------------------------


def nonneg_corpus_1d(size: int, seed: int) -> List[Tuple[str, Callable]]:
    """Seeded non-negative test functions on the real line (unnormalized)."""
    rng = rng_for(seed, ["nonneg-corpus", size])
    out: List[Tuple[str, Callable]] = []
    for i in range(size):
        kind = i % 3
        if kind == 0:
            lam = float(rng.uniform(-2.0, 2.0))
            out.append((f"exp{lam:+.2f}", lambda x, lam=lam: np.exp(lam * np.asarray(x))))
        elif kind == 1:
            m = float(rng.uniform(-2.0, 2.0))
            w = float(rng.uniform(0.05, 0.5))
            out.append(
                (
                    f"spike@{m:+.2f}",
                    lambda x, m=m, w=w: np.exp(-0.5 * ((np.asarray(x) - m) / w) ** 2) / w,
                )
            )
        else:
            m = float(rng.uniform(-1.5, 1.5))
            out.append(
                (
                    f"bump@{m:+.2f}",
                    lambda x, m=m: 1.0 / (1.0 + (np.asarray(x) - m) ** 2),
                )
            )
    return out


def talagrand_diffusion_experiment(
    h_pot,
    mu: MeasureSpec,
    s: float,
    t_grid: Sequence[float],
    corpus: Optional[List[Tuple[str, Callable]]] = None,
    seed: int = 0,
    n_paths: int = 20000,
    x_grid_size: int = 161,
    use_quadrature: Optional[bool] = None,
    tol: float = 1e-9,
) -> TailCurve:
    """Measure mu_h(P_s g >= t int g dmu_h) for a corpus of g and compare to
    ((C + beta)/c) / (t sqrt(log t)) with beta = max(0, c_s^2 + (1-c)/2 + sup V''/2).

    For the unperturbed quadratic exponent the semigroup is evaluated by
    Mehler quadrature; otherwise by the conjugation + Feynman-Kac Monte
    Carlo on an x-grid (the noise floor is far below the slack in the bound).
    """
    from . import diffusion as dfn

    mu._require_gaussian()
    t_grid = [float(t) for t in t_grid]
    if any(t < 2.0 for t in t_grid):
        raise DomainError("t_grid must stay within [2, inf)")
    c_s = specfun.RateConstants.for_time(s).c_t
    xs_sup = np.linspace(-30.0, 30.0, 6001)
    sup_v2 = float(np.max(h_pot.d2v(xs_sup)))
    beta = max(0.0, c_s**2 + 0.5 * (1.0 - mu.c) + 0.5 * sup_v2)
    bound_const = (mu.C + beta) / mu.c
    if corpus is None:
        corpus = nonneg_corpus_1d(12, seed)
    if use_quadrature is None:
        use_quadrature = np.allclose(h_pot.d2h(np.linspace(-5, 5, 41)), 1.0)

    xg = np.linspace(-mu.half_range, mu.half_range, x_grid_size)
    params = dfn.OUParams()
    curve = TailCurve(
        constants={
            "beta": beta,
            "sup_v2": sup_v2,
            "c_s": c_s,
            "bound_const": bound_const,
            "quadrature": bool(use_quadrature),
        }
    )
    for label, g in corpus:
        mass = mu.integral(lambda x: np.asarray(g(x), dtype=float))
        if use_quadrature:
            ps_g = np.array(
                [dfn.ou_mehler_apply(params, g, s, float(x), quad_order=120) for x in xg]
            )
        else:
            vals = []
            for j, x in enumerate(xg):
                est, _ = dfn.lh_apply(h_pot, g, s, float(x), n_paths, seed=rng_for(seed, [label, j]).integers(2**63))
                vals.append(est)
            ps_g = np.array(vals)
        for t in t_grid:
            level = t * mass
            tail = mu._measure_from_scan(xg, ps_g - level)
            bound = bound_const / (t * math.sqrt(math.log(t)))
            curve.rows.append(
                {"t": t, "tail": tail, "bound": bound, "ratio": tail / bound, "g": label}
            )
    if curve.violations(tol):
        curve.constants["violated"] = True
    return curve
