"""Closed-form collision probability, per-policy capture probability, and
throughput for sequence-based slotted random access with SINR capture.

Conventions: k is the number of simultaneous transmitters in a slot, gains
are unit-mean exponential (Rayleigh power), interference from the other
k - 1 transmitters is scaled by 1/proc_gain, and a packet is captured when
its sequence is unique in the slot and its SINR exceeds sinr_min.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Scheme, SystemParams, noise_term
from .numerics import log_factorial, poisson_pmf_table, poisson_trunc

__all__ = [
    "CaseSplit",
    "case_split",
    "collision_prob",
    "inv_success_limit",
    "ps_conv",
    "ps_const",
    "ps_inv",
    "ps_table",
    "success_prob",
    "throughput_conv_closed",
    "throughput_inv_closed",
    "throughput_sum",
]

# Direct binomial coefficients up to this k-1; log-space beyond to avoid
# overflow of C(k-1, v) in the deferral mixture.
_DIRECT_BINOM_MAX = 60


def collision_prob(n_seq: int | float, k: int) -> float:
    """Probability that a given transmitter shares its sequence with at
    least one of the other k - 1 transmitters: 1 - (1 - 1/n_seq)^(k-1)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not n_seq >= 1:
        raise ValueError(f"n_seq must be >= 1, got {n_seq!r}")
    return 1.0 - (1.0 - 1.0 / n_seq) ** (k - 1)


@dataclass(frozen=True)
class CaseSplit:
    """Geometry of the thresholded-gain capture integral.

    For k at or below k_boundary the interference sum can stay small enough
    that a threshold-level gain always captures; above it the capture event
    always depends on the exponential tail. a_const is the interference
    level at which the capture threshold equals the gain threshold, and
    beta = 1 + sinr_min/proc_gain is the Erlang tilt factor.
    """

    k_boundary: float
    a_const: float
    beta: float
    gain_threshold: float

    def b_for(self, k: int) -> float:
        return self.a_const - (k - 1) * self.gain_threshold


def case_split(params: SystemParams) -> CaseSplit:
    g = params.gain_threshold
    if g <= 0.0:
        raise ValueError("case split is defined only for a positive gain threshold")
    eta = params.sinr_min
    n = params.proc_gain
    noise = noise_term(params, Scheme.ADAPTIVE_CONST)
    a = n * (g / eta - noise)
    return CaseSplit(
        k_boundary=1.0 + a / g,
        a_const=a,
        beta=1.0 + eta / n,
        gain_threshold=g,
    )


def ps_conv(k: int, params: SystemParams) -> float:
    """Capture probability with immediate fixed-power transmission:
    e^(-sinr_min*noise) * (proc_gain/(sinr_min+proc_gain))^(k-1)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    eta = params.sinr_min
    n = params.proc_gain
    noise = noise_term(params, Scheme.CONVENTIONAL)
    return math.exp(-eta * noise) * (n / (eta + n)) ** (k - 1)


def _binom_weights(km1: int, p: float) -> np.ndarray:
    """Binomial(km1, p) pmf over v = 1..km1."""
    vs = np.arange(1, km1 + 1)
    if km1 <= _DIRECT_BINOM_MAX:
        coeff = np.array([math.comb(km1, int(v)) for v in vs], dtype=float)
        return coeff * p**vs * (1.0 - p) ** (km1 - vs)
    log_coeff = (
        log_factorial(km1)
        - np.array([log_factorial(int(v)) for v in vs])
        - np.array([log_factorial(int(km1 - v)) for v in vs])
    )
    return np.exp(log_coeff + vs * math.log(p) + (km1 - vs) * math.log1p(-p))


def _ps_const_case1(k: int, g: float, eta: float, n: float, noise: float) -> float:
    """Erlang-mixture branch, valid while (k-1)*g <= a_const.

    Conditioning on v of the k-1 interferers drawing above the threshold,
    the interference is (k-1)*g plus an Erlang(v) excess; capture splits
    into a certain part (interference below a_const) and a tilted tail.
    """
    if k == 1:
        return 1.0
    km1 = k - 1
    p_above = math.exp(-g)
    q_below = -math.expm1(-g)
    a = n * (g / eta - noise)
    b = max(a - km1 * g, 0.0)
    beta = 1.0 + eta / n
    exp_fac = math.exp(-eta * (km1 * g / n + noise))

    wts = _binom_weights(km1, p_above)
    terms_b = poisson_pmf_table(b, km1 - 1)
    lower = 1.0 - np.cumsum(terms_b)            # Erlang(v) CDF at b, index v-1
    terms_bb = poisson_pmf_table(b * beta, km1 - 1)
    upper = np.cumsum(terms_bb)                 # Erlang(v) tail at b*beta
    vs = np.arange(1, k)
    bracket = lower + exp_fac * np.exp(-vs * math.log(beta)) * upper

    val = q_below**km1 + float(np.dot(wts, bracket))
    if not math.isfinite(val):
        raise FloatingPointError(f"non-finite capture probability at k={k}")
    return min(1.0, max(0.0, val))


def _ps_const_case2(k: int | np.ndarray, g: float, eta: float, n: float, noise: float):
    """Tail-only branch: every interference level forces tail capture."""
    km1 = np.asarray(k) - 1
    base = 1.0 - math.exp(-g) * eta / (n + eta)
    return np.exp(-eta * (km1 * g / n + noise)) * base**km1


def ps_const(k: int, params: SystemParams) -> float:
    """Capture probability with deferral below the gain threshold and fixed
    transmit power. With a zero threshold the policy is the conventional
    one and this delegates accordingly."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    g = params.gain_threshold
    if g == 0.0:
        return ps_conv(k, params)
    eta = params.sinr_min
    n = params.proc_gain
    noise = noise_term(params, Scheme.ADAPTIVE_CONST)
    boundary = 1.0 + (n / g) * (g / eta - noise)
    if k <= boundary:
        return _ps_const_case1(k, g, eta, n, noise)
    return float(_ps_const_case2(k, g, eta, n, noise))


def inv_success_limit(params: SystemParams, boundary_rule: str = "sinr") -> int:
    """Largest transmitter count the gain-inverting policy can capture.

    Constant received power makes the SINR a deterministic function of k;
    it exceeds sinr_min exactly for k < x with
    x = 1 + proc_gain*(1/sinr_min - noise). The default 'sinr' rule counts
    those k (ceil(x) - 1); the 'floor-strict' rule instead requires
    k < floor(x), which drops one k whenever x is non-integral.
    """
    noise = noise_term(params, Scheme.ADAPTIVE_INV)
    x = 1.0 + params.proc_gain * (1.0 / params.sinr_min - noise)
    if boundary_rule == "sinr":
        limit = math.ceil(x) - 1
    elif boundary_rule == "floor-strict":
        limit = math.floor(x) - 1
    else:
        raise ValueError(f"unknown boundary_rule {boundary_rule!r}")
    return max(0, int(limit))


def ps_inv(k: int, params: SystemParams, boundary_rule: str = "sinr") -> float:
    """Capture probability with gain inversion: 1 up to the deterministic
    transmitter limit, 0 beyond it. Independent of the gain threshold."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return 1.0 if k <= inv_success_limit(params, boundary_rule) else 0.0


def success_prob(k: int, params: SystemParams, scheme: Scheme) -> float:
    """Per-policy capture probability for k simultaneous transmitters,
    conditioned on no sequence collision."""
    if scheme is Scheme.CONVENTIONAL:
        return ps_conv(k, params)
    if scheme is Scheme.ADAPTIVE_CONST:
        return ps_const(k, params)
    return ps_inv(k, params)


def ps_table(params: SystemParams, scheme: Scheme, kmax: int) -> np.ndarray:
    """Vector of success_prob(k) for k = 0..kmax (index 0 is unused, 0.0)."""
    if kmax < 1:
        raise ValueError(f"kmax must be >= 1, got {kmax}")
    eta = params.sinr_min
    n = params.proc_gain
    ks = np.arange(kmax + 1)
    if scheme is Scheme.CONVENTIONAL or (
        scheme is Scheme.ADAPTIVE_CONST and params.gain_threshold == 0.0
    ):
        noise = noise_term(params, Scheme.CONVENTIONAL)
        out = math.exp(-eta * noise) * (n / (eta + n)) ** (ks - 1.0)
    elif scheme is Scheme.ADAPTIVE_CONST:
        g = params.gain_threshold
        noise = noise_term(params, scheme)
        out = np.asarray(_ps_const_case2(ks, g, eta, n, noise), dtype=float)
        boundary = 1.0 + (n / g) * (g / eta - noise)
        for k in range(1, min(kmax, math.floor(boundary)) + 1):
            out[k] = _ps_const_case1(k, g, eta, n, noise)
    else:
        limit = inv_success_limit(params)
        out = np.where(ks <= limit, 1.0, 0.0)
    out[0] = 0.0
    return out


# Per-(params, scheme) cache of k * ps(k) * (1 - p_coll(k)) weights; reads
# and writes are GIL-atomic dict operations, so concurrent sweep workers at
# worst duplicate a computation.
_WEIGHT_CACHE: dict[tuple[SystemParams, Scheme], np.ndarray] = {}


def _throughput_weights(params: SystemParams, scheme: Scheme, kmax: int) -> np.ndarray:
    key = (params, scheme)
    cached = _WEIGHT_CACHE.get(key)
    if cached is not None and cached.shape[0] >= kmax + 1:
        return cached
    size = max(kmax, 256)
    ks = np.arange(size + 1)
    collision_factor = np.empty(size + 1)
    collision_factor[0] = 0.0
    collision_factor[1:] = (1.0 - 1.0 / params.n_seq) ** (ks[1:] - 1)
    weights = ks * ps_table(params, scheme, size) * collision_factor
    weights[0] = 0.0
    _WEIGHT_CACHE[key] = weights
    return weights


def throughput_sum(lam: float, params: SystemParams, scheme: Scheme) -> float:
    """Expected captures per slot at Poisson arrival rate lam:
    sum_k k * p_s(k) * (1 - p_coll(k)) * P{K = k}, truncated where the
    Poisson tail mass is negligible (and never beyond the station count)."""
    if not lam > 0:
        raise ValueError(f"arrival rate must be positive, got {lam!r}")
    kcap = min(params.n_stations, poisson_trunc(lam))
    weights = _throughput_weights(params, scheme, kcap)
    pmf = poisson_pmf_table(lam, kcap)
    return float(np.dot(weights[: kcap + 1], pmf))


def throughput_conv_closed(lam: float, params: SystemParams) -> float:
    """Closed form of the conventional-policy throughput: the Poisson sum
    telescopes into lam * e^(-sinr_min*(lam/(sinr_min+proc_gain) + noise))
    * e^(-proc_gain*lam/((sinr_min+proc_gain)*n_seq))."""
    if not lam > 0:
        raise ValueError(f"arrival rate must be positive, got {lam!r}")
    eta = params.sinr_min
    n = params.proc_gain
    noise = noise_term(params, Scheme.CONVENTIONAL)
    return (
        lam
        * math.exp(-eta * (lam / (eta + n) + noise))
        * math.exp(-n * lam / ((eta + n) * params.n_seq))
    )


def throughput_inv_closed(lam: float, params: SystemParams) -> float:
    """Closed form of the gain-inverting throughput: lam * e^-lam times the
    truncated exponential series in lam*(1 - 1/n_seq), one term per
    capturable transmitter count. Independent of the gain threshold."""
    if not lam > 0:
        raise ValueError(f"arrival rate must be positive, got {lam!r}")
    limit = inv_success_limit(params)
    if limit < 1:
        return 0.0
    scaled = lam * (1.0 - 1.0 / params.n_seq)
    series = float(poisson_pmf_table(scaled, limit - 1).sum())
    return lam * math.exp(scaled - lam) * series
