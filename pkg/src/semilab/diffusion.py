"""Ornstein-Uhlenbeck semigroup, exact bridges, and Feynman-Kac estimators.

The process dX = -a X dt + sigma dB has exact Gaussian transitions, so paths
on a grid carry no discretization bias; the only grid effect is the
trapezoidal time integral of the potential along paths (refinable).  On top
of the sampler this module implements

* Mehler-quadrature evaluation of the unperturbed semigroup and its
  log-derivatives (Gauss-Hermite),
* the explicit endpoint-conditioned bridge, linear in the starting point,
* Monte-Carlo estimation of P_t^V f = E[f(X_t) e^{-int V}] together with
  the gradient and Hessian of log P_t^V f through the path statistic

      A_t^x = -int_0^t grad V(X_s) sinh(a(t-s))/sinh(at) ds
              + d_t (X_t - e^{-at} x),

  using self-normalized importance weights w = f(X_t) e^{-int V} and
  delta-method standard errors,
* the unitary conjugation turning a reversible drift generator
  f'' - h' f' into a Schrodinger-type multiplicative perturbation (W, V).

States are internally (n_paths, dim) arrays; scalar 1-d callables are
adapted on the way in.  Monte Carlo is chunked with per-chunk derived seeds
and index-ordered reduction, so a run is reproducible bit-for-bit for a
fixed chunk size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from . import specfun
from .errors import (
    AccuracyError,
    DegenerateInputError,
    DomainError,
    InadmissibleError,
    RangeError,
)
from .seeding import rng_for

DEFAULT_STEPS = 256
DEFAULT_CHUNK = 65536
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class OUParams:
    """Mean-reversion rate a, noise level sigma, state dimension."""

    a: float = 1.0
    sigma: float = specfun.SQRT2
    dim: int = 1

    def __post_init__(self) -> None:
        if self.a <= 0 or self.sigma <= 0:
            raise DomainError("a and sigma must be positive")
        if self.dim < 1:
            raise DomainError("dim must be >= 1")

    def mean_factor(self, t: float) -> float:
        return math.exp(-self.a * t)

    def cond_var(self, t: float) -> float:
        """Variance of X_t given X_0 = x (per coordinate)."""
        return self.sigma**2 * (-math.expm1(-2.0 * self.a * t)) / (2.0 * self.a)

    def stationary_std(self) -> float:
        return self.sigma / math.sqrt(2.0 * self.a)

    def rate_constants(self, t: float) -> specfun.RateConstants:
        return specfun.RateConstants.for_time(t, a=self.a, sigma=self.sigma)


STANDARD_OU = OUParams()


def alpha_weight(a: float, t: float, s) -> np.ndarray:
    """sinh(a(t-s))/sinh(at), evaluated without overflow."""
    s = np.asarray(s, dtype=float)
    em_t = -math.expm1(-2.0 * a * t)
    return np.exp(-a * s) * (-np.expm1(-2.0 * a * (t - s))) / em_t


def _bridge_y_weight(a: float, t: float, s) -> np.ndarray:
    """sinh(as)/sinh(at): weight of the terminal point in the bridge mean."""
    s = np.asarray(s, dtype=float)
    em_t = -math.expm1(-2.0 * a * t)
    return np.exp(-a * (t - s)) * (-np.expm1(-2.0 * a * s)) / em_t


# ---------------------------------------------------------------------------
# Potentials and smooth test functions.
# ---------------------------------------------------------------------------


def _adapt_scalar_field(fn: Callable, dim: int) -> Callable:
    """Wrap a 1-d scalar-array callable into the (n, dim) -> (n,) convention."""
    if dim != 1:
        return fn
    return lambda X: np.asarray(fn(np.asarray(X)[:, 0]), dtype=float)


@dataclass
class Potential:
    """Multiplicative potential V with derivatives, in array conventions
    v: (n, dim) -> (n,), grad_v: -> (n, dim), hess_v: -> (n, dim, dim)."""

    v: Callable
    grad_v: Callable
    hess_v: Optional[Callable] = None
    growth_degree: float = 2.0
    lower_bound: Optional[float] = None
    label: str = ""

    @classmethod
    def from_1d(
        cls,
        v: Callable,
        dv: Callable,
        d2v: Optional[Callable] = None,
        growth_degree: float = 2.0,
        lower_bound: Optional[float] = None,
        label: str = "",
    ) -> "Potential":
        """Build from scalar-array callables on 1-d states."""
        hess = None
        if d2v is not None:
            hess = lambda X: np.asarray(d2v(X[:, 0]), dtype=float)[:, None, None]
        return cls(
            v=lambda X: np.asarray(v(X[:, 0]), dtype=float),
            grad_v=lambda X: np.asarray(dv(X[:, 0]), dtype=float)[:, None],
            hess_v=hess,
            growth_degree=growth_degree,
            lower_bound=lower_bound,
            label=label,
        )

    @classmethod
    def zero(cls, dim: int = 1) -> "Potential":
        return cls(
            v=lambda X: np.zeros(len(X)),
            grad_v=lambda X: np.zeros_like(np.asarray(X, dtype=float)),
            hess_v=lambda X: np.zeros((len(X), X.shape[1], X.shape[1])),
            growth_degree=0.0,
            lower_bound=0.0,
            label="V=0",
        )


@dataclass
class SmoothFn:
    """Positive test function with derivatives (for the smooth-f estimator)."""

    f: Callable
    grad: Callable
    hess: Callable
    label: str = ""

    @classmethod
    def from_1d(cls, f, df, d2f, label: str = "") -> "SmoothFn":
        return cls(
            f=lambda X: np.asarray(f(X[:, 0]), dtype=float),
            grad=lambda X: np.asarray(df(X[:, 0]), dtype=float)[:, None],
            hess=lambda X: np.asarray(d2f(X[:, 0]), dtype=float)[:, None, None],
            label=label,
        )


@dataclass
class HPotential:
    """Confining exponent h of a reversible drift generator, 1-d.

    Carries h and derivatives up to fourth order; the conjugation below
    produces W = x^2/2 - h and V = (1 - h'')/2 - (x^2 - h'^2)/4, whose own
    second derivative needs h''''.
    """

    h: Callable
    dh: Callable
    d2h: Callable
    d3h: Callable
    d4h: Callable
    label: str = ""

    def w(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * x**2 - self.h(x)

    def v(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (1.0 - self.d2h(x)) - 0.25 * (x**2 - self.dh(x) ** 2)

    def dv(self, x):
        x = np.asarray(x, dtype=float)
        return -0.5 * self.d3h(x) - 0.5 * x + 0.5 * self.dh(x) * self.d2h(x)

    def d2v(self, x):
        x = np.asarray(x, dtype=float)
        return -0.5 * self.d4h(x) - 0.5 + 0.5 * (self.d2h(x) ** 2 + self.dh(x) * self.d3h(x))


def quadratic_h() -> HPotential:
    """h(x) = x^2/2: the unperturbed case W = V = 0."""
    return HPotential(
        h=lambda x: 0.5 * np.asarray(x, dtype=float) ** 2,
        dh=lambda x: np.asarray(x, dtype=float),
        d2h=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        d3h=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        d4h=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        label="x^2/2",
    )


def power_perturbed_h(p: float) -> HPotential:
    """h(x) = x^2/2 + (1+x^2)^{p/2}; admissible for p <= 2."""

    def g(x):  # (1+x^2)^{p/2} and derivatives
        return (1.0 + x**2) ** (p / 2.0)

    def dg(x):
        return p * x * (1.0 + x**2) ** (p / 2.0 - 1.0)

    def d2g(x):
        u = 1.0 + x**2
        return p * u ** (p / 2.0 - 2.0) * (u + (p - 2.0) * x**2)

    def d3g(x):
        u = 1.0 + x**2
        return p * (p - 2.0) * x * u ** (p / 2.0 - 3.0) * (3.0 * u + (p - 4.0) * x**2)

    def d4g(x):
        u = 1.0 + x**2
        return (
            p
            * (p - 2.0)
            * u ** (p / 2.0 - 4.0)
            * (3.0 * u**2 + 6.0 * (p - 4.0) * x**2 * u + (p - 4.0) * (p - 6.0) * x**4)
        )

    x_ = lambda x: np.asarray(x, dtype=float)
    return HPotential(
        h=lambda x: 0.5 * x_(x) ** 2 + g(x_(x)),
        dh=lambda x: x_(x) + dg(x_(x)),
        d2h=lambda x: 1.0 + d2g(x_(x)),
        d3h=lambda x: d3g(x_(x)),
        d4h=lambda x: d4g(x_(x)),
        label=f"x^2/2+(1+x^2)^{p}/2",
    )


def h_transform(h: HPotential) -> Tuple[Callable, Potential]:
    """(W, V) of the unitary conjugation; W(x) = x^2/2 - h(x)."""
    potential = Potential.from_1d(
        v=h.v, dv=h.dv, d2v=h.d2v, label=f"V[{h.label}]"
    )
    return h.w, potential


# ---------------------------------------------------------------------------
# Mehler quadrature.
# ---------------------------------------------------------------------------


def _gauss_hermite_prob(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights integrating against the standard normal density."""
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    return nodes * math.sqrt(2.0), weights / math.sqrt(math.pi)


def ou_mehler_apply(
    params: OUParams,
    g: Callable,
    t: float,
    x,
    quad_order: int = 80,
) -> float:
    """P_t g(x) = E[g(e^{-at} x + s_t xi)] by Gauss-Hermite quadrature.

    Dimensions 1 and 2 (tensor grid).  g takes a 1-d array in dimension 1,
    an (n, 2) array in dimension 2.
    """
    if t <= 0:
        raise DomainError("t must be positive")
    if quad_order < 20:
        raise DomainError("quad_order must be >= 20")
    m = params.mean_factor(t)
    s = math.sqrt(params.cond_var(t))
    nodes, weights = _gauss_hermite_prob(quad_order)
    if params.dim == 1:
        x = float(np.asarray(x).reshape(()))
        return float(np.dot(weights, np.asarray(g(m * x + s * nodes), dtype=float)))
    if params.dim == 2:
        x = np.asarray(x, dtype=float).reshape(2)
        n1, n2 = np.meshgrid(nodes, nodes, indexing="ij")
        pts = m * x[None, :] + s * np.stack([n1.ravel(), n2.ravel()], axis=1)
        w2 = np.outer(weights, weights).ravel()
        return float(np.dot(w2, np.asarray(g(pts), dtype=float)))
    raise DomainError("quadrature supports dim 1 and 2 only")


def ou_log_derivative(
    params: OUParams,
    g: Callable,
    t: float,
    x: float,
    order: int,
    quad_order: int = 120,
) -> float:
    """First or second derivative of log P_t g at x, dimension 1.

    order 1: c_t E_x[xi] under the g-tilted Gaussian; order 2:
    c_t^2 (-1 + Var_x(xi)), which is >= -c_t^2 for any positive g.
    """
    if params.dim != 1:
        raise DomainError("log-derivatives implemented in dimension 1")
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    m = params.mean_factor(t)
    s = math.sqrt(params.cond_var(t))
    c = m / s
    nodes, weights = _gauss_hermite_prob(quad_order)
    vals = weights * np.asarray(g(m * float(x) + s * nodes), dtype=float)
    if (vals < 0).any():
        raise DomainError("g must be non-negative")
    z = float(vals.sum())
    if z <= 1e-300:
        raise DegenerateInputError("P_t g(x) vanished under quadrature")
    mu1 = float(np.dot(vals, nodes)) / z
    if order == 1:
        return c * mu1
    mu2 = float(np.dot(vals, nodes**2)) / z - mu1**2
    return c * c * (-1.0 + mu2)


# ---------------------------------------------------------------------------
# Exact path and bridge sampling.
# ---------------------------------------------------------------------------


def default_time_grid(t: float, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return np.linspace(0.0, t, steps + 1)


def _check_grid(time_grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or (np.diff(grid) <= 0).any():
        raise DomainError("time_grid must be strictly increasing with >= 2 points")
    return grid


def sample_ou_paths(
    params: OUParams,
    x,
    time_grid,
    n_paths: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Exact-in-distribution paths on the grid; shape (n_paths, len(grid), dim)."""
    grid = _check_grid(time_grid)
    if grid[0] != 0.0:
        raise DomainError("path grid must start at 0")
    x = np.asarray(x, dtype=float).reshape(params.dim)
    out = np.empty((n_paths, len(grid), params.dim))
    out[:, 0, :] = x
    state = np.tile(x, (n_paths, 1))
    for i in range(1, len(grid)):
        dt = grid[i] - grid[i - 1]
        decay = params.mean_factor(dt)
        std = math.sqrt(params.cond_var(dt))
        state = decay * state + std * rng.standard_normal((n_paths, params.dim))
        out[:, i, :] = state
    return out


def sample_ou_path(params: OUParams, x, time_grid, seed: int) -> np.ndarray:
    """Single exact path; shape (len(grid), dim)."""
    return sample_ou_paths(params, x, time_grid, 1, rng_for(seed))[0]


def sample_ou_bridge(
    params: OUParams,
    x,
    y,
    t: float,
    time_grid,
    rng: np.random.Generator,
    n_paths: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Endpoint-conditioned paths by the explicit linear representation

        Z_s = alpha_t(s) x + (sinh(as)/sinh(at)) y
              + sigma sinh(a(t-s)) int_0^s dB_r / sinh(a(t-r)),

    with the stochastic integral discretized exactly (independent Gaussian
    increments carrying the closed-form variance of each sub-interval).
    Returns (grid_with_endpoint, states of shape (n_paths, len(grid), dim)).
    """
    a = params.a
    grid = _check_grid(time_grid)
    if grid[0] != 0.0 or grid[-1] >= t:
        raise DomainError("bridge grid must start at 0 and stay below t")
    if a * t > 300.0:
        raise DomainError("a*t too large for the sinh-weighted representation")
    full = np.concatenate([grid, [t]])
    x = np.asarray(x, dtype=float).reshape(params.dim)
    y = np.asarray(y, dtype=float).reshape(params.dim)

    coth = lambda u: 1.0 / np.tanh(u)
    inc_var = (coth(a * (t - grid[1:])) - coth(a * (t - grid[:-1]))) / a  # >= 0
    inc_std = np.sqrt(np.maximum(inc_var, 0.0))

    n_grid = len(grid)
    states = np.empty((n_paths, n_grid + 1, params.dim))
    mart = np.zeros((n_paths, params.dim))  # int_0^s dB / sinh(a(t-r))
    ax = alpha_weight(a, t, grid)
    ay = _bridge_y_weight(a, t, grid)
    for i in range(n_grid):
        if i > 0:
            mart = mart + inc_std[i - 1] * rng.standard_normal((n_paths, params.dim))
        noise_scale = params.sigma * math.sinh(a * (t - grid[i]))
        states[:, i, :] = ax[i] * x + ay[i] * y + noise_scale * mart
    states[:, n_grid, :] = y  # continuity at the terminal time
    return full, states


# ---------------------------------------------------------------------------
# Feynman-Kac streaming core.
# ---------------------------------------------------------------------------


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    d = np.diff(grid)
    w = np.zeros(len(grid))
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def _wrap_f(f: Callable, dim: int) -> Callable:
    return _adapt_scalar_field(f, dim)


def _stream_chunk(
    params: OUParams,
    potential: Potential,
    f_field: Callable,
    t: float,
    x: np.ndarray,
    n: int,
    grid: np.ndarray,
    rng: np.random.Generator,
    need_hess: bool,
    need_alt: bool,
    smooth_f: Optional[SmoothFn],
) -> Dict[str, np.ndarray]:
    """Simulate one chunk, accumulating path functionals without storing paths."""
    a, d = params.a, params.dim
    w_tr = _trapezoid_weights(grid)
    alph = alpha_weight(a, t, grid)
    exp_as = np.exp(-a * grid)
    exp_2as = exp_as**2

    X = np.tile(x, (n, 1))
    int_v = np.zeros(n)
    int_grad_alpha = np.zeros((n, d))
    int_hess_alpha2 = np.zeros((n, d, d)) if need_hess else None
    int_grad_exp = np.zeros((n, d)) if need_alt else None
    int_hess_exp2 = np.zeros((n, d, d)) if need_alt else None

    def absorb(i: int) -> None:
        nonlocal int_v, int_grad_alpha, int_hess_alpha2, int_grad_exp, int_hess_exp2
        vv = potential.v(X)
        gg = potential.grad_v(X)
        int_v += w_tr[i] * vv
        int_grad_alpha += (w_tr[i] * alph[i]) * gg
        if need_hess or need_alt:
            hh = potential.hess_v(X)
            if need_hess:
                int_hess_alpha2 += (w_tr[i] * alph[i] ** 2) * hh
            if need_alt:
                int_hess_exp2 += (w_tr[i] * exp_2as[i]) * hh
        if need_alt:
            int_grad_exp += (w_tr[i] * exp_as[i]) * gg

    absorb(0)
    for i in range(1, len(grid)):
        dt = grid[i] - grid[i - 1]
        X = params.mean_factor(dt) * X + math.sqrt(params.cond_var(dt)) * rng.standard_normal(
            (n, d)
        )
        absorb(i)

    rates = params.rate_constants(t)
    out: Dict[str, np.ndarray] = {
        "X_T": X,
        "log_w": -int_v,
        "f": np.asarray(f_field(X), dtype=float),
        "A": -int_grad_alpha + rates.d_t * (X - math.exp(-a * t) * x[None, :]),
    }
    if need_hess:
        out["B"] = int_hess_alpha2
    if need_alt:
        ff = out["f"]
        grads = smooth_f.grad(X)
        hesss = smooth_f.hess(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad_log_f = grads / ff[:, None]
            hess_log_f = hesss / ff[:, None, None] - np.einsum(
                "ni,nj->nij", grad_log_f, grad_log_f
            )
        out["G_alt"] = math.exp(-a * t) * grad_log_f - int_grad_exp
        out["B_alt"] = int_hess_exp2 - math.exp(-2.0 * a * t) * hess_log_f
    return out


@dataclass
class FkPathBatch:
    """A simulated batch: weights, terminal values and A-statistics (and,
    for small batches, the raw states)."""

    n_paths: int
    time_grid: np.ndarray
    log_weights: np.ndarray
    terminal_f: np.ndarray
    a_stat: np.ndarray
    seed: int
    states: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.log_weights).all():
            raise DomainError("non-finite log-weights in batch")


def simulate_fk_batch(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    x,
    n_paths: int,
    time_grid=None,
    seed: int = 0,
    keep_states: bool = False,
) -> FkPathBatch:
    """One explicitly stored batch (testing / harness summaries)."""
    grid = default_time_grid(t) if time_grid is None else _check_grid(time_grid)
    x = np.asarray(x, dtype=float).reshape(params.dim)
    rng = rng_for(seed, ["fk-batch"])
    states = sample_ou_paths(params, x, grid, n_paths, rng) if keep_states else None
    # re-simulate streaming with an identically seeded generator for the stats
    res = _stream_chunk(
        params, potential, _wrap_f(f, params.dim), t, x, n_paths, grid,
        rng_for(seed, ["fk-batch"]), need_hess=False, need_alt=False, smooth_f=None,
    )
    return FkPathBatch(
        n_paths=n_paths,
        time_grid=grid,
        log_weights=res["log_w"],
        terminal_f=res["f"],
        a_stat=res["A"],
        seed=seed,
        states=states,
    )


def a_statistic(params: OUParams, potential: Potential, path: np.ndarray, t: float, x) -> np.ndarray:
    """A_t^x for one stored path on a grid covering [0, t]."""
    path = np.asarray(path, dtype=float)
    if path.ndim == 1:
        path = path[:, None]
    grid = default_time_grid(t, steps=len(path) - 1)
    w_tr = _trapezoid_weights(grid)
    alph = alpha_weight(params.a, t, grid)
    grads = potential.grad_v(path)  # (M+1, dim)
    integral = np.einsum("i,ij->j", w_tr * alph, grads)
    rates = params.rate_constants(t)
    x = np.asarray(x, dtype=float).reshape(params.dim)
    return -integral + rates.d_t * (path[-1] - math.exp(-params.a * t) * x)


# ---------------------------------------------------------------------------
# Monte-Carlo estimators.
# ---------------------------------------------------------------------------


def _chunk_sizes(n_paths: int, chunk_size: int):
    full, rem = divmod(n_paths, chunk_size)
    return [chunk_size] * full + ([rem] if rem else [])


class _MomentAccumulator:
    """Running sums of per-path feature vectors and their outer products."""

    def __init__(self, m: int) -> None:
        self.s1 = np.zeros(m)
        self.s2 = np.zeros((m, m))
        self.n = 0
        self.rejected = 0

    def add(self, q: np.ndarray) -> None:
        ok = np.isfinite(q).all(axis=1)
        self.rejected += int((~ok).sum())
        q = q[ok]
        self.s1 += q.sum(axis=0)
        self.s2 += q.T @ q
        self.n += len(q)

    def finish(self) -> Tuple[np.ndarray, np.ndarray, int]:
        if self.n < 2:
            raise DegenerateInputError("not enough accepted paths")
        total = self.n + self.rejected
        if self.rejected > 0.001 * total:
            raise AccuracyError(
                f"{self.rejected}/{total} paths rejected; refine the integration grid"
            )
        mean = self.s1 / self.n
        cov = (self.s2 / self.n - np.outer(mean, mean)) * (self.n / (self.n - 1))
        return mean, cov, self.n


def _run_moments(
    params: OUParams,
    potential: Potential,
    f_field: Callable,
    t: float,
    x,
    n_paths: int,
    seed: int,
    time_grid,
    chunk_size: int,
    need_hess: bool,
    need_alt: bool,
    smooth_f: Optional[SmoothFn],
    features: Callable[[Dict[str, np.ndarray]], np.ndarray],
    m: int,
    label: str,
):
    """f_field must already follow the (n, dim) -> (n,) convention."""
    grid = default_time_grid(t) if time_grid is None else _check_grid(time_grid)
    x_arr = np.asarray(x, dtype=float).reshape(params.dim)
    acc = _MomentAccumulator(m)
    for ci, n in enumerate(_chunk_sizes(n_paths, chunk_size)):
        res = _stream_chunk(
            params, potential, f_field, t, x_arr, n, grid,
            rng_for(seed, [label, ci]), need_hess, need_alt, smooth_f,
        )
        acc.add(features(res))
    return acc.finish()


def feynman_kac_apply(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    x,
    n_paths: int,
    time_grid=None,
    seed: int = 0,
    chunk_size: int = DEFAULT_CHUNK,
) -> Tuple[float, float]:
    """Monte-Carlo P_t^V f(x) = E[f(X_t) e^{-int_0^t V(X_s) ds}] and its SE."""

    def features(res):
        return (res["f"] * np.exp(res["log_w"]))[:, None]

    mean, cov, n = _run_moments(
        params, potential, _wrap_f(f, params.dim), t, x, n_paths, seed,
        time_grid, chunk_size, need_hess=False, need_alt=False, smooth_f=None,
        features=features, m=1, label="fk",
    )
    return float(mean[0]), float(math.sqrt(max(cov[0, 0], 0.0) / n))


def _tri_pairs(d: int):
    return [(j, k) for j in range(d) for k in range(j, d)]


def _weighted_features(res: Dict[str, np.ndarray], g_key: str, b_key: Optional[str], d: int):
    """Columns: [W, W G_j ..., W G_j G_k (j<=k)..., W B_jk (j<=k)...]."""
    w = res["f"] * np.exp(res["log_w"])
    g = res[g_key]
    cols = [w] + [w * g[:, j] for j in range(d)]
    for j, k in _tri_pairs(d):
        cols.append(w * g[:, j] * g[:, k])
    if b_key is not None:
        b = res[b_key]
        for j, k in _tri_pairs(d):
            cols.append(w * b[:, j, k])
    return np.stack(cols, axis=1)


def grad_log_fk(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    x,
    n_paths: int,
    seed: int = 0,
    time_grid=None,
    chunk_size: int = DEFAULT_CHUNK,
) -> Tuple[np.ndarray, np.ndarray]:
    """grad log P_t^V f(x) = E_{f,x}[A_t^x], self-normalized, with SEs."""
    d = params.dim
    mean, cov, n = _run_moments(
        params, potential, _wrap_f(f, params.dim), t, x, n_paths, seed,
        time_grid, chunk_size, need_hess=False, need_alt=False, smooth_f=None,
        features=lambda res: _weighted_features(res, "A", None, d),
        m=1 + d + len(_tri_pairs(d)), label="grad",
    )
    if mean[0] <= 0:
        raise DegenerateInputError("all importance weights vanished (f zero on paths?)")
    est = mean[1 : 1 + d] / mean[0]
    se = np.empty(d)
    for j in range(d):
        grad_vec = np.zeros(len(mean))
        grad_vec[0] = -mean[1 + j] / mean[0] ** 2
        grad_vec[1 + j] = 1.0 / mean[0]
        se[j] = math.sqrt(max(grad_vec @ cov @ grad_vec, 0.0) / n)
    return est, se


@dataclass
class HessEstimate:
    """Symmetric Hessian estimate with per-entry Monte-Carlo SEs."""

    value: np.ndarray
    std_error: np.ndarray
    n_paths: int

    def __post_init__(self) -> None:
        if not np.allclose(self.value, self.value.T, atol=1e-12):
            raise DomainError("Hessian estimate must be symmetric")


def _assemble_hessian(
    mean: np.ndarray, cov: np.ndarray, n: int, d: int, const_diag: float
) -> HessEstimate:
    """Common delta-method assembly for both Hessian estimators.

    Estimate per entry: const 1_{j=k} + m_GG/m_0 - m_j m_k / m_0^2 - m_B/m_0.
    """
    pairs = _tri_pairs(d)
    npairs = len(pairs)
    idx_g = lambda j: 1 + j
    idx_gg = {pair: 1 + d + i for i, pair in enumerate(pairs)}
    idx_b = {pair: 1 + d + npairs + i for i, pair in enumerate(pairs)}
    m0 = mean[0]
    if m0 <= 0:
        raise DegenerateInputError("all importance weights vanished")
    value = np.zeros((d, d))
    se = np.zeros((d, d))
    for (j, k) in pairs:
        mj, mk = mean[idx_g(j)], mean[idx_g(k)]
        mgg, mb = mean[idx_gg[(j, k)]], mean[idx_b[(j, k)]]
        f_val = mgg / m0 - mj * mk / m0**2 - mb / m0
        g_vec = np.zeros(len(mean))
        g_vec[0] = -mgg / m0**2 + 2.0 * mj * mk / m0**3 + mb / m0**2
        g_vec[idx_g(j)] += -mk / m0**2
        g_vec[idx_g(k)] += -mj / m0**2
        g_vec[idx_gg[(j, k)]] = 1.0 / m0
        g_vec[idx_b[(j, k)]] = -1.0 / m0
        err = math.sqrt(max(g_vec @ cov @ g_vec, 0.0) / n)
        value[j, k] = value[k, j] = f_val + (const_diag if j == k else 0.0)
        se[j, k] = se[k, j] = err
    return HessEstimate(value=value, std_error=se, n_paths=n)


def hess_log_fk(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    x,
    n_paths: int,
    seed: int = 0,
    time_grid=None,
    chunk_size: int = DEFAULT_CHUNK,
) -> HessEstimate:
    """Hess log P_t^V f(x) from the path-statistic identity

        -d_t e^{-at} Id - int alpha^2 E[Hess V] + Cov_{f,x}(A_t^x),

    all terms estimated on one weighted batch."""
    if potential.hess_v is None:
        raise DomainError("potential must provide hess_v")
    d = params.dim
    mean, cov, n = _run_moments(
        params, potential, _wrap_f(f, params.dim), t, x, n_paths, seed,
        time_grid, chunk_size, need_hess=True, need_alt=False, smooth_f=None,
        features=lambda res: _weighted_features(res, "A", "B", d),
        m=1 + d + 2 * len(_tri_pairs(d)), label="hess",
    )
    rates = params.rate_constants(t)
    const = -rates.d_t * math.exp(-params.a * t)
    return _assemble_hessian(mean, cov, n, d, const)


def hess_log_fk_alt(
    params: OUParams,
    potential: Potential,
    f: SmoothFn,
    t: float,
    x,
    n_paths: int,
    seed: int = 0,
    time_grid=None,
    chunk_size: int = DEFAULT_CHUNK,
) -> HessEstimate:
    """Smooth-f route to the same Hessian:

        e^{-2at} E_{f,x}[Hess log f(X_t)] - int e^{-2as} E[Hess V]
        + Cov_{f,x}(e^{-at} grad log f(X_t) - int e^{-as} grad V ds).

    Must agree with :func:`hess_log_fk` within combined Monte-Carlo error.
    """
    if not isinstance(f, SmoothFn):
        raise DomainError("hess_log_fk_alt requires a SmoothFn with derivatives")
    if potential.hess_v is None:
        raise DomainError("potential must provide hess_v")
    d = params.dim
    mean, cov, n = _run_moments(
        params, potential, f.f, t, x, n_paths, seed, time_grid, chunk_size,
        need_hess=False, need_alt=True, smooth_f=f,
        features=lambda res: _weighted_features(res, "G_alt", "B_alt", d),
        m=1 + d + 2 * len(_tri_pairs(d)), label="hess-alt",
    )
    return _assemble_hessian(mean, cov, n, d, const_diag=0.0)


# ---------------------------------------------------------------------------
# Common-random-number finite differences (the independent oracle).
# ---------------------------------------------------------------------------


def fk_log_values_crn(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    xs: Sequence[float],
    n_paths: int,
    seed: int = 0,
    time_grid=None,
    chunk_size: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """log P_t^V f at several points with SHARED noise across points; the
    correlation is what kills the variance of finite differences. Dimension 1."""
    if params.dim != 1:
        raise DomainError("CRN evaluation implemented in dimension 1")
    grid = default_time_grid(t) if time_grid is None else _check_grid(time_grid)
    sums, n = _crn_stencil_pass(
        params, potential, _wrap_f(f, 1), t, xs, n_paths, seed, grid, chunk_size, None
    )
    m = sums / n
    if (m <= 0).any():
        raise DegenerateInputError("vanishing semigroup estimate at a stencil point")
    return np.log(m)


def _crn_stencil_pass(
    params: OUParams,
    potential: Potential,
    f_field: Callable,
    t: float,
    xs: Sequence[float],
    n_paths: int,
    seed: int,
    grid: np.ndarray,
    chunk_size: int,
    influence: Optional[np.ndarray],
):
    """One sweep over the CRN path stream.

    With influence=None accumulates the stencil sums Sum_paths y_i; with an
    influence vector c accumulates Sum z and Sum z^2 for z = c . y per path.
    Identical seeds make both passes see identical paths.
    """
    k = len(xs)
    w_tr = _trapezoid_weights(grid)
    s_tot = np.zeros(k)
    sz = sz2 = 0.0
    n_ok = 0
    rejected = 0
    for ci, n in enumerate(_chunk_sizes(n_paths, chunk_size)):
        rng = rng_for(seed, ["fk-crn", ci])
        X = np.tile(np.asarray(xs, dtype=float)[:, None], (1, n))  # (k, n)
        int_v = w_tr[0] * potential.v(X.reshape(-1, 1)).reshape(k, n)
        for i in range(1, len(grid)):
            dt = grid[i] - grid[i - 1]
            xi = rng.standard_normal(n)
            X = params.mean_factor(dt) * X + math.sqrt(params.cond_var(dt)) * xi[None, :]
            int_v += w_tr[i] * potential.v(X.reshape(-1, 1)).reshape(k, n)
        y = f_field(X.reshape(-1, 1)).reshape(k, n) * np.exp(-int_v)
        ok = np.isfinite(y).all(axis=0)
        rejected += int((~ok).sum())
        y = y[:, ok]
        n_ok += y.shape[1]
        if influence is None:
            s_tot += y.sum(axis=1)
        else:
            z = influence @ y
            sz += float(z.sum())
            sz2 += float((z * z).sum())
    if rejected > 0.001 * n_paths:
        raise AccuracyError(f"{rejected}/{n_paths} paths rejected; refine the grid")
    if n_ok < 2:
        raise DegenerateInputError("not enough accepted paths")
    return (s_tot, n_ok) if influence is None else (sz, sz2, n_ok)


def _crn_log_combination(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    xs: Sequence[float],
    coeff: np.ndarray,
    n_paths: int,
    seed: int,
    time_grid,
    chunk_size: int,
) -> Tuple[float, float]:
    """sum_i coeff_i log P_t^V f(x_i) with common random numbers.

    The variance comes from an exact second pass over the same paths using
    the per-path influence z = sum_i (coeff_i / m_i) y_i; combining the
    near-singular stencil covariance with O(1/delta^2) coefficients in one
    quadratic form would lose all precision to cancellation.
    """
    if params.dim != 1:
        raise DomainError("CRN evaluation implemented in dimension 1")
    grid = default_time_grid(t) if time_grid is None else _check_grid(time_grid)
    f_field = _wrap_f(f, 1)
    sums, n = _crn_stencil_pass(
        params, potential, f_field, t, xs, n_paths, seed, grid, chunk_size, None
    )
    m = sums / n
    if (m <= 0).any():
        raise DegenerateInputError("vanishing semigroup estimate at a stencil point")
    value = float(coeff @ np.log(m))
    sz, sz2, n2 = _crn_stencil_pass(
        params, potential, f_field, t, xs, n_paths, seed, grid, chunk_size, coeff / m
    )
    var_z = (sz2 / n2 - (sz / n2) ** 2) * n2 / (n2 - 1)
    return value, math.sqrt(max(var_z, 0.0) / n2)


def fd_hess_log_fk(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    x: float,
    n_paths: int,
    seed: int = 0,
    time_grid=None,
    delta: Optional[float] = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> Tuple[float, float]:
    """Central second difference of log P_t^V f with common random numbers.

    Step defaults to eps^{1/4} * scale (second-derivative optimum)."""
    if delta is None:
        delta = _EPS**0.25 * max(1.0, abs(x))
    xs = [x - delta, x, x + delta]
    coeff = np.array([1.0, -2.0, 1.0]) / delta**2
    return _crn_log_combination(
        params, potential, f, t, xs, coeff, n_paths, seed, time_grid, chunk_size
    )


def fd_grad_log_fk(
    params: OUParams,
    potential: Potential,
    f: Callable,
    t: float,
    x: float,
    n_paths: int,
    seed: int = 0,
    time_grid=None,
    delta: Optional[float] = None,
    chunk_size: int = DEFAULT_CHUNK,
) -> Tuple[float, float]:
    """Central first difference of log P_t^V f with common random numbers."""
    if delta is None:
        delta = _EPS ** (1.0 / 3.0) * max(1.0, abs(x))
    xs = [x - delta, x + delta]
    coeff = np.array([-1.0, 1.0]) / (2.0 * delta)
    return _crn_log_combination(
        params, potential, f, t, xs, coeff, n_paths, seed, time_grid, chunk_size
    )


# ---------------------------------------------------------------------------
# Reversible-drift semigroup via the conjugation.
# ---------------------------------------------------------------------------


def check_bounded_below(
    potential: Potential, center: float, spread: float, n_grid: int = 2001
) -> float:
    """Min of V over the sampling envelope [center - spread, center + spread].

    Raises InadmissibleError when the edge values undercut the interior
    minimum while still decreasing (V running away to -inf on the range).
    """
    xs = np.linspace(center - spread, center + spread, n_grid)
    vals = potential.v(xs[:, None])
    vmin = float(vals.min())
    interior_min = float(vals[10:-10].min())
    left_runaway = vals[0] < interior_min - 1.0 and vals[0] < vals[10]
    right_runaway = vals[-1] < interior_min - 1.0 and vals[-1] < vals[-11]
    if left_runaway or right_runaway:
        raise InadmissibleError(
            f"V decreasing past the envelope edge (min {vmin}); declare a bound or shrink x"
        )
    if potential.lower_bound is not None and vmin < potential.lower_bound - 1e-9:
        raise InadmissibleError(
            f"V dips to {vmin}, below its declared lower bound {potential.lower_bound}"
        )
    return vmin


def lh_apply(
    h: HPotential,
    f: Callable,
    t: float,
    x: float,
    n_paths: int,
    seed: int = 0,
    time_grid=None,
) -> Tuple[float, float]:
    """Semigroup of d^2/dx^2 - h' d/dx at (t, x), via the conjugation

        P_t f = e^{-W/2} P_t^V(e^{W/2} f),   W = x^2/2 - h,

    with the right-hand side estimated by Feynman-Kac (a = 1, sigma = sqrt(2)).
    """
    w_fn, potential = h_transform(h)
    params = OUParams(a=1.0, sigma=specfun.SQRT2, dim=1)
    spread = 10.0 * params.stationary_std() + abs(x)
    check_bounded_below(potential, center=0.0, spread=spread)

    def g(u):
        return np.exp(0.5 * w_fn(u)) * np.asarray(f(u), dtype=float)

    est, se = feynman_kac_apply(params, potential, g, t, x, n_paths, time_grid, seed)
    scale = math.exp(-0.5 * float(w_fn(np.asarray([x]))[0]))
    return scale * est, scale * se


def hess_lower_bound(
    h: HPotential,
    t: float,
    x: float,
    sup_v2: Optional[float] = None,
    bracket: Tuple[float, float] = (-30.0, 30.0),
    n_grid: int = 6001,
) -> float:
    """Certified floor -c_t^2 - (1 - h''(x))/2 - sup V''/2 for (log P_t f)''.

    sup V'' is taken as supplied, otherwise bracketed numerically on
    `bracket`; a supremum attained while still increasing at the edge raises
    RangeError.
    """
    c_t = specfun.RateConstants.for_time(t).c_t
    if sup_v2 is None:
        xs = np.linspace(bracket[0], bracket[1], n_grid)
        vals = h.d2v(xs)
        i = int(np.argmax(vals))
        if i in (0, n_grid - 1):
            inward = vals[1] if i == 0 else vals[-2]
            if vals[i] > inward + 1e-12:
                raise RangeError("sup V'' attained at the bracket edge; widen the bracket")
        sup_v2 = float(vals[i])
    h2x = float(h.d2h(np.asarray([x]))[0])
    return -c_t**2 - 0.5 * (1.0 - h2x) - 0.5 * sup_v2
