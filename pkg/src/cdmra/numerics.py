"""Probability kernels, integer-order incomplete gammas, a robust 1-D
maximizer, and the deterministic random-stream contract shared by the
analytic and simulation paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

__all__ = [
    "RngStream",
    "derive_seed",
    "erlang_gamma_lower",
    "erlang_gamma_upper",
    "log_factorial",
    "maximize_1d",
    "poisson_cdf",
    "poisson_pmf",
    "poisson_pmf_table",
    "poisson_trunc",
]

# Above this the e^-x prefactor of the term recurrence underflows, so the
# term table switches to per-term log evaluation.
_LOG_SPACE_CUTOFF = 700.0


def log_factorial(n: int) -> float:
    """ln(n!) for integer n >= 0."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return math.lgamma(n + 1.0)


def _check_rate(lam: float) -> None:
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0):
        raise ValueError(f"rate must be positive and finite, got {lam!r}")


def poisson_pmf(k: int, lam: float) -> float:
    """P{X = k} for X ~ Poisson(lam), evaluated in log space."""
    _check_rate(lam)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1.0))


def poisson_pmf_table(x: float, kmax: int) -> np.ndarray:
    """Array of e^-x x^k / k! for k = 0..kmax.

    Accepts x = 0 (degenerate mass at k = 0) so the same table doubles as
    the Erlang tail-sum helper.
    """
    if kmax < 0:
        raise ValueError(f"kmax must be >= 0, got {kmax}")
    if not (math.isfinite(x) and x >= 0):
        raise ValueError(f"x must be >= 0 and finite, got {x!r}")
    if x == 0.0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    if x < _LOG_SPACE_CUTOFF:
        # Term recurrence t_{k+1} = t_k * x/(k+1); every partial product is a
        # pmf value in [0, ~1/sqrt(x)] so nothing overflows below the cutoff.
        out = np.empty(kmax + 1)
        out[0] = 1.0
        if kmax > 0:
            np.cumprod(x / np.arange(1.0, kmax + 1.0), out=out[1:])
        out *= math.exp(-x)
        return out
    ks = np.arange(kmax + 1)
    return np.exp(ks * math.log(x) - x - gammaln(ks + 1.0))


def poisson_cdf(k: int, lam: float) -> float:
    """P{X <= k} for X ~ Poisson(lam)."""
    _check_rate(lam)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return min(1.0, float(poisson_pmf_table(lam, k).sum()))


def poisson_trunc(lam: float) -> int:
    """Summation cap leaving Poisson tail mass below 1e-12 for lam <= 1e4."""
    return int(math.ceil(lam + 12.0 * math.sqrt(lam) + 30.0))


def erlang_gamma_upper(v: int, x: float) -> float:
    """Regularized upper incomplete gamma for integer order v >= 1.

    Equals e^-x * sum_{m<v} x^m/m!, i.e. the survival function of an
    Erlang(v) variable evaluated at x.
    """
    if v < 1:
        raise ValueError(f"order must be >= 1, got {v}")
    if not (math.isfinite(x) and x >= 0):
        raise ValueError(f"x must be >= 0 and finite, got {x!r}")
    return min(1.0, float(poisson_pmf_table(x, v - 1).sum()))


def erlang_gamma_lower(v: int, x: float) -> float:
    """Regularized lower incomplete gamma for integer order v >= 1 (the
    Erlang(v) CDF at x), computed as the exact complement of the tail sum."""
    return 1.0 - erlang_gamma_upper(v, x)


def maximize_1d(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-6,
    grid_points: int = 256,
) -> tuple[float, float]:
    """Global 1-D maximization: coarse grid scan, then golden-section
    refinement of the bracketing interval down to width <= tol.

    Returns the best (argmax, max) over every point evaluated, so the result
    never falls below any coarse-grid value. Raises ValueError on non-finite
    evaluations.
    """
    if not (lo < hi):
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    grid_points = max(int(grid_points), 256)

    best_x = math.nan
    best_v = -math.inf

    def eval_at(x: float) -> float:
        nonlocal best_x, best_v
        v = f(x)
        if not math.isfinite(v):
            raise ValueError(f"objective returned non-finite value {v!r} at x={x!r}")
        if v > best_v:
            best_x, best_v = x, v
        return v

    xs = np.linspace(lo, hi, grid_points)
    vals = [eval_at(float(x)) for x in xs]
    i = int(np.argmax(vals))
    a = float(xs[max(i - 1, 0)])
    b = float(xs[min(i + 1, grid_points - 1)])

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc = eval_at(c)
    fd = eval_at(d)
    while (b - a) > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = eval_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = eval_at(d)
    return best_x, best_v


@dataclass(frozen=True)
class RngStream:
    """Addressable deterministic random substream.

    The same (seed, stream_index) pair always yields a generator producing
    the identical bit sequence; distinct stream indices are statistically
    independent. Each call to generator() restarts the stream.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ValueError(f"seed must be an integer in [0, 2^64), got {self.seed!r}")
        if not (isinstance(self.stream_index, int) and self.stream_index >= 0):
            raise ValueError(f"stream_index must be a non-negative integer, got {self.stream_index!r}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, index: int) -> int:
    """Stable 64-bit sub-seed for work item `index` under a base seed."""
    ss = np.random.SeedSequence(entropy=(seed, index))
    return int(ss.generate_state(1, np.uint64)[0])
