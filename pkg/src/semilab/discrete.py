"""Exact computations for the M/M/infinity queue on the non-negative integers.

The queue with arrival rate lambda and per-customer service rate mu has the
remarkable exact transition law

    L(X_t | X_0 = n) = Binomial(n, p(t)) * Poisson(rho q(t)),

with p(t) = e^{-mu t}, q = 1 - p, rho = lambda/mu ("*" is convolution), and
is reversible with respect to Poisson(rho).  Everything in this module is
built on that identity: the semigroup action, the discrete log-Laplacian
bounds, the sup-semigroup statistic used for the weak-L1 tail experiment,
and the hypercube kernel supremum.

No path simulation happens here; the law is exact and sampling would only
add noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp

from . import specfun
from .errors import DomainError, GrowthError, RangeError
from .results import CheckReport, TailCurve

_TRUNCATION_CAP = 1e-15  # default mass allowed beyond a PmfTable's support
_NEG_INF = float("-inf")


@dataclass(frozen=True)
class MMParams:
    """Queue parameters at a fixed time t: p = e^{-mu t}, q = 1-p, rho = lambda/mu."""

    lam: float
    mu: float
    t: float
    rho: float
    p: float
    q: float

    @classmethod
    def make(cls, lam: float, mu: float, t: float) -> "MMParams":
        if lam <= 0 or mu <= 0:
            raise DomainError("rates lam, mu must be positive")
        if t < 0:
            raise DomainError("time must be non-negative")
        p = math.exp(-mu * t)
        return cls(lam=lam, mu=mu, t=t, rho=lam / mu, p=p, q=1.0 - p)

    @classmethod
    def from_rho(cls, rho: float, t: float) -> "MMParams":
        """Unit service rate, arrival rate rho."""
        return cls.make(lam=rho, mu=1.0, t=t)


@dataclass
class PmfTable:
    """Finite truncation of a pmf on {0, 1, ...} with recorded missing mass."""

    values: np.ndarray
    truncation_mass: float

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if (self.values < -1e-15).any():
            raise DomainError("pmf entries must be non-negative")
        total = float(self.values.sum()) + self.truncation_mass
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"pmf mass {total} deviates from 1 beyond 1e-12")

    @property
    def support(self) -> int:
        return len(self.values) - 1


@dataclass
class FuncOnN:
    """A function on the non-negative integers, with optional extras.

    fn may be scalar or vectorized over integer ndarrays (set `vectorized`).
    log_fn, when given, evaluates log f directly (for positivity-sensitive
    work); log_dd_fn returns compensated (hi, lo) pairs for checks that need
    second differences of large logs to better than float64 representation.
    """

    fn: Callable
    vectorized: bool = False
    support_bound: Optional[int] = None
    log_fn: Optional[Callable[[int], float]] = None
    log_dd_fn: Optional[Callable[[int], specfun.DD]] = None
    label: str = ""

    def value(self, k: int) -> float:
        if self.vectorized:
            return float(self.fn(np.asarray([k]))[0])
        return float(self.fn(k))

    def values(self, ks: np.ndarray) -> np.ndarray:
        ks = np.asarray(ks)
        if self.vectorized:
            return np.asarray(self.fn(ks), dtype=float)
        return np.fromiter((self.fn(int(k)) for k in ks), dtype=float, count=len(ks))

    def log_value(self, k: int) -> float:
        if self.log_fn is not None:
            return float(self.log_fn(k))
        v = self.value(k)
        if v <= 0:
            raise DomainError(f"log of non-positive value f({k}) = {v}")
        return math.log(v)

    def log_values(self, ks: np.ndarray) -> np.ndarray:
        """log f on an array; -inf where f = 0, error where f < 0."""
        if self.log_fn is not None:
            return np.fromiter((self.log_fn(int(k)) for k in ks), dtype=float, count=len(ks))
        vals = self.values(ks)
        if (vals < 0).any():
            raise DomainError("negative values where a non-negative f was required")
        with np.errstate(divide="ignore"):
            return np.log(vals)


def func_on_n(fn: Callable, **kw) -> FuncOnN:
    return FuncOnN(fn=fn, **kw)


# ---------------------------------------------------------------------------
# Poisson / binomial building blocks.
# ---------------------------------------------------------------------------


def log_poisson_pmf(theta: float, k) -> np.ndarray:
    """log pi_theta(k) = k log theta - theta - log k!; theta = 0 gives delta_0."""
    if theta < 0:
        raise DomainError("theta must be non-negative")
    k_arr = np.asarray(k, dtype=float)
    if theta == 0.0:
        return np.where(k_arr == 0, 0.0, _NEG_INF)
    return k_arr * math.log(theta) - theta - gammaln(k_arr + 1.0)


def poisson_pmf(theta: float, k: int) -> float:
    """pi_theta(k), computed in log space then exponentiated."""
    if k < 0:
        return 0.0
    return float(np.exp(log_poisson_pmf(theta, k)))


def poisson_row(theta: float, kmax: int) -> np.ndarray:
    """pi_theta on 0..kmax as a dense array."""
    return np.exp(log_poisson_pmf(theta, np.arange(kmax + 1)))


def poisson_pmf_func(theta: float) -> FuncOnN:
    """Poisson pmf as a FuncOnN, with compensated log evaluation attached."""
    if theta <= 0:
        raise DomainError("theta must be positive")
    log_theta_dd = specfun.log_dd(theta)

    def _log_dd(k: int) -> specfun.DD:
        acc = specfun.dd_scale_int(k, log_theta_dd)
        acc = specfun.dd_add(acc, (-theta, 0.0))
        return specfun.dd_add(acc, specfun.dd_neg(specfun.log_factorial_dd(k)))

    return FuncOnN(
        fn=lambda ks: np.exp(log_poisson_pmf(theta, ks)),
        vectorized=True,
        log_fn=lambda k: float(log_poisson_pmf(theta, k)),
        log_dd_fn=_log_dd,
        label=f"poisson_pmf(theta={theta})",
    )


def poisson_tail_bound(theta: float, u: int) -> float:
    """(2/sqrt(u)) exp(-Phi_theta(u)); a valid tail bound whenever u >= 2 theta."""
    if u < 1:
        raise DomainError("bound defined for integer u >= 1")
    return 2.0 / math.sqrt(u) * math.exp(-specfun.phi_theta(theta, float(u)))


def poisson_tail(theta: float, u: int) -> float:
    """Exact pi_theta([u, inf)), by summation with geometric tail closure.

    Also asserts the exp(-Phi) envelope whenever u >= 2 theta (it always
    holds; the check is cheap insurance on the pmf code).
    """
    if theta < 0:
        raise DomainError("theta must be non-negative")
    if u <= 0:
        return 1.0
    if theta == 0.0:
        return 0.0
    # Sum k = u .. K where K leaves a geometric tail below 1e-18 relative.
    k = u
    term = poisson_pmf(theta, u)
    total = term
    while True:
        k += 1
        term *= theta / k
        total += term
        if k >= 2 * theta and term < 1e-18 * max(total, 1e-300):
            r = theta / (k + 1)
            total += term * r / (1.0 - r)
            break
        if k > u + 10_000_000:  # unreachable for sane theta
            raise GrowthError("poisson_tail summation failed to close")
    if u >= 2 * theta:
        bound = poisson_tail_bound(theta, u)
        if total > bound * (1.0 + 1e-9):
            raise AssertionError(
                f"exact Poisson tail {total} exceeded its envelope {bound} at u={u}"
            )
    return min(total, 1.0)


def log_binomial_pmf(k: int, p: float, i) -> np.ndarray:
    """log P(Binomial(k, p) = i); exact at p in {0, 1}."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    i_arr = np.asarray(i, dtype=float)
    out = np.full(i_arr.shape, _NEG_INF)
    valid = (i_arr >= 0) & (i_arr <= k)
    if p == 0.0:
        return np.where(i_arr == 0, 0.0, _NEG_INF)
    if p == 1.0:
        return np.where(i_arr == k, 0.0, _NEG_INF)
    iv = i_arr[valid]
    out[valid] = (
        gammaln(k + 1.0)
        - gammaln(iv + 1.0)
        - gammaln(k - iv + 1.0)
        + iv * math.log(p)
        + (k - iv) * math.log1p(-p)
    )
    return out


def binomial_pmf(k: int, p: float, i: int) -> float:
    """P(Binomial(k, p) = i); 0 outside 0 <= i <= k (not an error)."""
    if i < 0 or i > k:
        return 0.0
    return float(np.exp(log_binomial_pmf(k, p, i)))


def binomial_mode(k: int, p: float) -> int:
    """Mode floor((k+1) p) of Binomial(k, p)."""
    return min(int(math.floor((k + 1) * p)), k)


def binomial_row(n: int, p: float) -> np.ndarray:
    """Binomial(n, p) pmf on 0..n."""
    return np.exp(log_binomial_pmf(n, p, np.arange(n + 1)))


# ---------------------------------------------------------------------------
# Transition law and semigroup action.
# ---------------------------------------------------------------------------


def mm_transition(params: MMParams, n: int, k: int) -> float:
    """P(X_t = k | X_0 = n): exact Binomial(n,p) * Poisson(rho q) convolution."""
    if n < 0 or k < 0:
        raise DomainError("states must be non-negative")
    theta = params.rho * params.q
    i = np.arange(0, min(n, k) + 1)
    logs = log_binomial_pmf(n, params.p, i) + log_poisson_pmf(theta, k - i)
    return float(np.exp(logsumexp(logs)))


def _poisson_support(theta: float, cap: float) -> int:
    """Smallest K with the exp(-Phi) tail bound below cap."""
    if theta == 0.0:
        return 0
    u = max(1, math.ceil(2.0 * theta))
    while poisson_tail_bound(theta, u) >= cap:
        u = max(u + 1, math.ceil(1.25 * u))
    return u


def mm_transition_row(
    params: MMParams, n: int, kmax: Optional[int] = None, cap: float = _TRUNCATION_CAP
) -> PmfTable:
    """Transition pmf row P(X_t = . | X_0 = n) as a PmfTable.

    Support is n plus the smallest Poisson support whose tail bound is below
    `cap`, unless kmax overrides it.
    """
    theta = params.rho * params.q
    if kmax is None:
        kmax = n + _poisson_support(theta, cap)
    row = np.convolve(binomial_row(n, params.p), poisson_row(theta, kmax))[: kmax + 1]
    return PmfTable(values=row, truncation_mass=max(0.0, 1.0 - float(row.sum())))


def log_mm_transition_matrix(params: MMParams, n_rows: int, kmax: int) -> np.ndarray:
    """Matrix of log P(X_t = k | X_0 = n) for n = 0..n_rows, k = 0..kmax.

    Log-space convolution, so far-tail entries keep full relative accuracy
    instead of underflowing to 0.
    """
    theta = params.rho * params.q
    lp = log_poisson_pmf(theta, np.arange(kmax + 1))
    out = np.empty((n_rows + 1, kmax + 1))
    for n in range(n_rows + 1):
        lb = log_binomial_pmf(n, params.p, np.arange(n + 1))
        acc = np.full(kmax + 1, _NEG_INF)
        for i in range(min(n, kmax) + 1):
            if lb[i] == _NEG_INF:
                continue
            shifted = np.full(kmax + 1, _NEG_INF)
            shifted[i:] = lb[i] + lp[: kmax + 1 - i]
            acc = np.logaddexp(acc, shifted)
        out[n] = acc
    return out


def mm_apply(
    params: MMParams,
    f: FuncOnN,
    n: int,
    acc: specfun.Accuracy = specfun.DEFAULT_ACCURACY,
    kmax_cap: int = 1_000_000,
) -> float:
    """P_t f(n) = sum_k f(k) P(X_t = k | X_0 = n), adaptively truncated.

    Truncation stops once (exact remaining mass bound) x (local max of |f|
    ahead) drops below abs_tol.  Raises GrowthError if that never happens
    before kmax_cap, which catches super-exponential f.
    """
    theta = params.rho * params.q
    kmax = n + _poisson_support(theta, _TRUNCATION_CAP)
    lookahead = 64
    while True:
        tail_mass = poisson_tail(theta, max(0, kmax - n)) if theta > 0 else 0.0
        ahead = np.abs(f.values(np.arange(kmax, kmax + lookahead + 1)))
        if tail_mass * float(ahead.max()) < acc.abs_tol:
            break
        if f.support_bound is not None and kmax >= f.support_bound:
            break
        kmax += max(lookahead, kmax // 4)
        if kmax > kmax_cap:
            raise GrowthError(
                "series for P_t f did not close; f grows too fast for the queue law"
            )
    table = mm_transition_row(params, n, kmax=kmax)
    ks = np.arange(kmax + 1)
    return float(np.dot(table.values, f.values(ks)))


# ---------------------------------------------------------------------------
# Discrete derivatives.
# ---------------------------------------------------------------------------


def discrete_laplacian(f: FuncOnN, n: int) -> float:
    """f(n+1) + f(n-1) - 2 f(n), n >= 1."""
    if n < 1:
        raise DomainError("discrete Laplacian needs n >= 1")
    return f.value(n + 1) + f.value(n - 1) - 2.0 * f.value(n)


def delta_log(f: FuncOnN, n: int) -> float:
    """log f(n+1) + log f(n-1) - 2 log f(n), n >= 1.

    Uses the function's compensated log evaluator when available: plain
    float64 logs of magnitude ~5e3 carry ~1e-12 of representation error,
    which is visible in second differences.
    """
    if n < 1:
        raise DomainError("delta_log needs n >= 1")
    if f.log_dd_fn is not None:
        acc_dd = specfun.dd_add(f.log_dd_fn(n + 1), f.log_dd_fn(n - 1))
        acc_dd = specfun.dd_add(acc_dd, specfun.dd_scale_int(-2, f.log_dd_fn(n)))
        return specfun.dd_value(acc_dd)
    return f.log_value(n + 1) + f.log_value(n - 1) - 2.0 * f.log_value(n)


def semilogconvexity_bound(params: MMParams) -> float:
    """log((1/12)(1 - p^2/(p + rho(1-p)^2)^2)): the universal Delta-log floor."""
    inner = 1.0 - params.p**2 / (params.p + params.rho * (1.0 - params.p) ** 2) ** 2
    if inner <= 0.0:
        return _NEG_INF
    return math.log(inner / 12.0)


def _log_apply_matrix(
    params: MMParams, f: FuncOnN, n_rows: int, kmax: Optional[int] = None
) -> np.ndarray:
    """log P_t f(n) for n = 0..n_rows, fully in log space (f >= 0)."""
    theta = params.rho * params.q
    if kmax is None:
        kmax = n_rows + _poisson_support(theta, 1e-30)
        if f.support_bound is not None:
            kmax = min(kmax, max(f.support_bound, n_rows + 1))
    logT = log_mm_transition_matrix(params, n_rows, kmax)
    logf = f.log_values(np.arange(kmax + 1))
    return logsumexp(logT + logf[None, :], axis=1)


def check_mm_semilogconvexity(
    params: MMParams, f: FuncOnN, n_max: int, tol: float = 1e-9
) -> CheckReport:
    """Check Delta log P_t f(n) >= log((1/12)(1 - p^2/(p+rho(1-p)^2)^2)).

    Exact convolution in log space; one row per n in 1..n_max.
    """
    report = CheckReport(name="mm-semilogconvexity")
    bound = semilogconvexity_bound(params)
    logP = _log_apply_matrix(params, f, n_max + 1)
    for n in range(1, n_max + 1):
        dlog = logP[n + 1] + logP[n - 1] - 2.0 * logP[n]
        report.record(
            {
                "n": n,
                "t": params.t,
                "rho": params.rho,
                "f": f.label,
                "delta_log": dlog,
                "bound": bound,
            },
            violated=dlog < bound - tol,
        )
    report.constants["bound"] = bound
    return report


def check_combination_lemma(
    funcs: Sequence[FuncOnN],
    betas: Sequence[float],
    weights: Sequence[float],
    n_max: int,
    tol: float = 1e-9,
) -> CheckReport:
    """Positive combinations of semi-log-convex functions stay semi-log-convex:
    Delta log(sum_i alpha_i f_i) >= -max_i beta_i."""
    if not (len(funcs) == len(betas) == len(weights)):
        raise DomainError("funcs, betas, weights must have equal length")
    if any(w <= 0 for w in weights):
        raise DomainError("weights must be positive")
    report = CheckReport(name="combination-lemma")
    # Verify the per-function premises first.
    for idx, (fi, bi) in enumerate(zip(funcs, betas)):
        for n in range(1, n_max + 1):
            d = delta_log(fi, n)
            if d < -bi - tol:
                report.record(
                    {"kind": "premise", "i": idx, "n": n, "delta_log": d, "beta": bi},
                    violated=True,
                )
    if not report.ok:
        report.constants["premise_failed"] = True
        return report
    beta_max = max(betas)
    combo = FuncOnN(
        fn=lambda ks: sum(w * fi.values(ks) for w, fi in zip(weights, funcs)),
        vectorized=True,
        label="combination",
    )
    for n in range(1, n_max + 1):
        d = delta_log(combo, n)
        report.record(
            {"kind": "combination", "n": n, "delta_log": d, "bound": -beta_max},
            violated=d < -beta_max - tol,
        )
    report.constants["beta_max"] = beta_max
    return report


def check_preservation(
    params: MMParams,
    f: FuncOnN,
    beta: float,
    n_max: int,
    kind: str = "semi-log-convex",
    tol: float = 1e-9,
    input_margin: int = 200,
) -> CheckReport:
    """Structure preservation by P_t.

    kind = "semi-log-convex": Delta log f >= -beta implies the same for P_t f;
    kind = "log-concave": Delta log f <= 0 implies Delta log P_t f <= 0
    (preservation of log-concavity; equivalently ultra-log-concavity of the
    time-t law when the initial law is f pi_rho).
    """
    if kind not in ("semi-log-convex", "log-concave"):
        raise DomainError(f"unknown preservation kind {kind!r}")
    if beta < 0:
        raise DomainError("beta must be non-negative")
    report = CheckReport(name=f"preservation[{kind}]")
    check_range = n_max + input_margin
    if f.support_bound is not None:
        check_range = min(check_range, f.support_bound - 1)
    for n in range(1, check_range + 1):
        d = delta_log(f, n)
        bad = d < -beta - tol if kind == "semi-log-convex" else d > tol
        if bad:
            report.record({"kind": "input", "n": n, "delta_log": d}, violated=True)
    if not report.ok:
        raise DomainError(f"input violates the {kind} property; first: {report.violations[0]}")
    logP = _log_apply_matrix(params, f, n_max + 1)
    for n in range(1, n_max + 1):
        d = logP[n + 1] + logP[n - 1] - 2.0 * logP[n]
        bad = d < -beta - tol if kind == "semi-log-convex" else d > tol
        report.record({"kind": "output", "n": n, "delta_log": d, "beta": beta}, violated=bad)
    return report


def random_f_corpus(size: int, seed: int, k_span: int = 260) -> List[FuncOnN]:
    """Seeded non-negative test functions on the integers.

    Families: sparse indicators, random log-linear mixtures, sparse positive
    spikes, and integer Gaussian bumps.  Used by the semi-log-convexity
    sweeps, which quantify over all non-negative f.
    """
    from .seeding import rng_for

    rng = rng_for(seed, ["mm-f-corpus", size, k_span])
    out: List[FuncOnN] = []
    for i in range(size):
        kind = i % 4
        if kind == 0:
            pts = np.sort(rng.choice(k_span, size=int(rng.integers(1, 6)), replace=False))
            out.append(
                FuncOnN(
                    fn=lambda ks, pts=pts: np.isin(ks, pts).astype(float),
                    vectorized=True,
                    support_bound=int(pts.max()) + 1,
                    label=f"indicator[{i}]",
                )
            )
        elif kind == 1:
            lams = rng.uniform(-1.5, 0.8, size=3)
            ws = rng.uniform(0.1, 1.0, size=3)
            out.append(
                FuncOnN(
                    fn=lambda ks, lams=lams, ws=ws: np.exp(
                        np.log(ws) + np.outer(ks.astype(float), lams)
                    ).sum(axis=1),
                    vectorized=True,
                    label=f"loglin-mix[{i}]",
                )
            )
        elif kind == 2:
            pts = np.sort(rng.choice(k_span, size=int(rng.integers(2, 8)), replace=False))
            hts = rng.uniform(0.1, 10.0, size=len(pts))
            def spike(ks, pts=pts, hts=hts):
                vals = np.zeros(len(ks))
                for p, h in zip(pts, hts):
                    vals[ks == p] = h
                return vals
            out.append(
                FuncOnN(
                    fn=spike,
                    vectorized=True,
                    support_bound=int(pts.max()) + 1,
                    label=f"spikes[{i}]",
                )
            )
        else:
            m = float(rng.uniform(0.0, 40.0))
            w = float(rng.uniform(0.5, 8.0))
            out.append(
                FuncOnN(
                    fn=lambda ks, m=m, w=w: np.exp(-0.5 * ((ks.astype(float) - m) / w) ** 2),
                    vectorized=True,
                    label=f"bump[{i}]",
                )
            )
    return out


def log_concave_corpus(size: int, seed: int) -> List[FuncOnN]:
    """Seeded positive log-concave functions on the integers."""
    from .seeding import rng_for

    rng = rng_for(seed, ["mm-logconcave-corpus", size])
    out: List[FuncOnN] = []
    for i in range(size):
        kind = i % 3
        if kind == 0:
            out.append(
                FuncOnN(
                    fn=lambda ks: 1.0 / (ks.astype(float) + 1.0),
                    vectorized=True,
                    label="1/(k+1)",
                )
            )
        elif kind == 1:
            r = float(rng.uniform(0.2, 0.95))
            out.append(
                FuncOnN(
                    fn=lambda ks, r=r: r ** ks.astype(float),
                    vectorized=True,
                    label=f"geom{r:.2f}",
                )
            )
        else:
            m = float(rng.uniform(0.0, 20.0))
            w = float(rng.uniform(1.0, 6.0))
            out.append(
                FuncOnN(
                    fn=lambda ks, m=m, w=w: np.exp(-0.5 * ((ks.astype(float) - m) / w) ** 2),
                    vectorized=True,
                    label=f"gauss@{m:.1f}",
                )
            )
    return out


# ---------------------------------------------------------------------------
# Sup-semigroup statistic (rho = 1) and the weak-L1 tail experiment.
# ---------------------------------------------------------------------------


@dataclass
class SupStatistic:
    """Result of the DP sweep: psi[n] = e sup_k P(X_s = n | X_0 = k)."""

    s: float
    psi: np.ndarray
    arg_k: np.ndarray
    k_max: int

    def log_sup_semigroup(self, n: int) -> float:
        """log of n! Psi_s(n) = log sup over normalized f >= 0 of P_s f(n)."""
        return specfun.log_factorial(n) + math.log(self.psi[n])


def psi_s_batch(
    s: float, n_max: int, k_max: Optional[int] = None, max_doublings: int = 12
) -> SupStatistic:
    """Psi_s(n) for all n <= n_max at once, rho = 1.

    By reversibility Psi_s(n) = e sup_{k>=0} P(X_s = n | X_0 = k); the sweep
    runs the one-step thinning recursion g_{k+1} = (1-p) g_k + p shift(g_k)
    with g_0 = Poisson(q), tracking the running max per column.  k_max grows
    by doubling until every argmax sits at least 10 below the boundary and
    the boundary row is strictly dominated.
    """
    if s <= 0:
        raise DomainError("psi_s requires s > 0")
    p = math.exp(-s)
    q = 1.0 - p
    if k_max is None:
        k_max = int(math.ceil((n_max + 8) * math.exp(s) * 1.25)) + 64
    for _ in range(max_doublings):
        m = np.arange(n_max + 1)
        g = np.exp(log_poisson_pmf(q, m))
        best = g.copy()
        arg_k = np.zeros(n_max + 1, dtype=np.int64)
        shifted = np.empty_like(g)
        for k in range(1, k_max + 1):
            shifted[0] = 0.0
            shifted[1:] = g[:-1]
            g = (1.0 - p) * g + p * shifted
            upd = g > best
            if upd.any():
                best[upd] = g[upd]
                arg_k[upd] = k
        interior = (arg_k <= k_max - 10).all()
        dominated = (g < best).all()
        if interior and dominated:
            return SupStatistic(s=s, psi=math.e * best, arg_k=arg_k, k_max=k_max)
        k_max *= 2
    raise RangeError("k_max doubling exhausted without interior supremum")


def psi_s(s: float, n: int, k_max: Optional[int] = None) -> Tuple[float, int]:
    """Psi_s(n) and the maximizing k, rho = 1."""
    stat = psi_s_batch(s, n, k_max=k_max)
    return float(stat.psi[n]), int(stat.arg_k[n])


def mm_sup_semigroup(s: float, n: int, k_max: Optional[int] = None) -> float:
    """sup over f >= 0 with integral 1 (against pi_1) of P_s f(n) = n! Psi_s(n)."""
    value, _ = psi_s(s, n, k_max=k_max)
    return math.exp(specfun.log_factorial(n) + math.log(value))


def mm_talagrand_tail(
    s: float,
    t_grid: Sequence[float],
    n_scan: int = 1000,
    ray_check: bool = True,
) -> TailCurve:
    """Exact tail pi_1({n : n! Psi_s(n) >= t}) versus the weak-L1 envelope.

    The threshold set is verified to be an upper ray in n (log(n! Psi_s(n))
    grows once factorial growth takes over); the tail is then an exact
    Poisson tail.  The envelope constant c(s) is fitted as the largest
    observed tail * t * sqrt(log t) / sqrt(log log t) and reported.
    """
    t_grid = list(t_grid)
    if any(t < 4.0 for t in t_grid):
        raise DomainError("t_grid entries must be >= 4")
    if sorted(t_grid) != t_grid:
        raise DomainError("t_grid must be increasing")
    stat = psi_s_batch(s, n_scan)
    log_s_vals = specfun.log_factorial(np.arange(n_scan + 1)) + np.log(stat.psi)
    curve = TailCurve()
    ratios = []
    for t in t_grid:
        log_t = math.log(t)
        above = np.nonzero(log_s_vals >= log_t)[0]
        if len(above) == 0:
            raise RangeError(f"threshold t={t} not reached below n_scan={n_scan}")
        n_star = int(above[0])
        if ray_check and not (log_s_vals[n_star:] >= log_t - 1e-12).all():
            raise AssertionError(f"threshold set at t={t} is not an upper ray")
        tail = poisson_tail(1.0, n_star)
        ratios.append(tail * t * math.sqrt(log_t) / math.sqrt(math.log(log_t)))
        curve.add(t, tail, bound=float("nan"))
    c_fit = max(ratios)
    for row, ratio in zip(curve.rows, ratios):
        row["bound"] = c_fit * math.sqrt(math.log(math.log(row["t"]))) / (
            row["t"] * math.sqrt(math.log(row["t"]))
        )
        row["ratio"] = ratio / c_fit
    curve.constants["c_fit"] = c_fit
    curve.constants["max_scaled_ratio"] = c_fit
    curve.constants["s"] = s
    return curve


def optimality_ratio(k: int) -> Tuple[float, float]:
    """Witness that the sqrt(log log t) factor is needed.

    For the normalized log-linear family f_lambda with lambda = log k and
    t = e k^k e^{-k}, returns (measured, floor) where measured is
    t sqrt(log t)/sqrt(log log t) * pi_1(f_lambda >= t) computed from the
    exact Poisson tail, and floor = (1/3)((1+k log k-k)/(k log(1+k log k-k)))^{1/2};
    measured >= floor, and floor -> 1/3.
    """
    if k < 3:
        raise DomainError("need k >= 3 so that log log t > 0")
    log_t = 1.0 + k * math.log(k) - k
    tail = poisson_tail(1.0, k)  # {f_lambda >= t} = [k, inf) by construction
    measured = math.exp(log_t) * math.sqrt(log_t) / math.sqrt(math.log(log_t)) * tail
    floor = (1.0 / 3.0) * math.sqrt((1.0 + k * math.log(k) - k) / (k * math.log(1.0 + k * math.log(k) - k)))
    return measured, floor


# ---------------------------------------------------------------------------
# Hypercube kernel supremum.
# ---------------------------------------------------------------------------


def hypercube_sup(s: float, n_dim: int) -> float:
    """sup over normalized f >= 0 of the heat-kernel action on the n-cube.

    Equals (1 + e^{-s})^n_dim for every base point; t * tail therefore
    vanishes for every t above this value.
    """
    if s <= 0:
        raise DomainError("s must be positive")
    if n_dim < 1:
        raise DomainError("n_dim must be >= 1")
    return (1.0 + math.exp(-s)) ** n_dim


def hypercube_sup_enumerate(s: float, sigma: Sequence[int]) -> float:
    """Brute-force sup over eta in {-1, 1}^n of prod_i (1 + e^{-s} sigma_i eta_i)."""
    sigma = np.asarray(sigma, dtype=float)
    n = len(sigma)
    if n > 20:
        raise DomainError("enumeration capped at n = 20")
    if not np.isin(sigma, (-1.0, 1.0)).all():
        raise DomainError("sigma entries must be +-1")
    e = math.exp(-s)
    best = -math.inf
    for mask in range(1 << n):
        eta = np.array([1.0 if mask >> i & 1 else -1.0 for i in range(n)])
        best = max(best, float(np.prod(1.0 + e * sigma * eta)))
    return best
