"""Parameter types, validation, and unit conversions for sequence-based
slotted random access under an SINR capture rule.

All physical quantities are stored in linear units; decibels exist only at
the CLI boundary.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

from scipy.special import exp1

__all__ = [
    "INFINITE_SEQUENCES",
    "ParameterError",
    "Scheme",
    "SystemParams",
    "ThroughputPoint",
    "db_to_linear",
    "gth_from_outage",
    "linear_to_db",
    "noise_term",
    "outage_from_gth",
    "validate",
]

#: Sentinel for an unbounded sequence pool (no sequence collisions).
INFINITE_SEQUENCES = math.inf


class Scheme(Enum):
    """Access policy: how transmit power and deferral react to channel gain."""

    CONVENTIONAL = "conv"          # fixed power, transmit immediately
    ADAPTIVE_CONST = "const"       # defer until gain >= threshold, fixed power
    ADAPTIVE_INV = "inv"           # defer + invert gain for constant received power

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        for s in cls:
            if s.value == text.strip().lower():
                return s
        raise ValueError(f"unknown scheme {text!r}; expected one of "
                         f"{[s.value for s in cls]}")

    @property
    def is_adaptive(self) -> bool:
        return self is not Scheme.CONVENTIONAL


class ParameterError(ValueError):
    """Raised by validate() with one entry per violated invariant."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid parameters: " + "; ".join(self.problems))


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def gth_from_outage(p_o: float) -> float:
    """Gain threshold giving deferral probability p_o under a unit-mean
    exponential gain distribution: the exact inverse CDF -ln(1 - p_o)."""
    if not (0.0 <= p_o < 1.0):
        raise ValueError(f"outage must lie in [0, 1), got {p_o!r}")
    return -math.log1p(-p_o)


def outage_from_gth(g_th: float) -> float:
    """Deferral probability below a gain threshold, 1 - e^-g_th."""
    if g_th < 0:
        raise ValueError(f"gain threshold must be >= 0, got {g_th!r}")
    return -math.expm1(-g_th)


@dataclass(frozen=True)
class SystemParams:
    """Physical and protocol constants consumed by every formula.

    snr is the single ratio (average received packet energy over noise
    density) that all success probabilities consume; n_seq may be
    INFINITE_SEQUENCES for the collision-free limit.
    """

    n_stations: int = 8192
    proc_gain: float = 64.0
    n_seq: int | float = 128
    sinr_min: float = 3.1622776601683795   # 5 dB
    snr: float = 1000.0                    # 30 dB
    outage: float = 0.7
    power_norm: str = "received"           # or "average-tx"

    @property
    def gain_threshold(self) -> float:
        return gth_from_outage(self.outage)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


def validate(params: SystemParams) -> SystemParams:
    """Return normalized params, or raise ParameterError naming every
    violated invariant. Idempotent."""
    problems: list[str] = []

    n_stations = params.n_stations
    if isinstance(n_stations, float) and n_stations.is_integer():
        n_stations = int(n_stations)
    if not (isinstance(n_stations, int) and n_stations >= 1):
        problems.append(f"n_stations: must be an integer >= 1, got {params.n_stations!r}")

    proc_gain = params.proc_gain
    if not (isinstance(proc_gain, (int, float)) and math.isfinite(proc_gain) and proc_gain >= 1):
        problems.append(f"proc_gain: must be finite and >= 1, got {proc_gain!r}")
    else:
        proc_gain = float(proc_gain)

    n_seq = params.n_seq
    if isinstance(n_seq, float) and n_seq == INFINITE_SEQUENCES:
        pass
    else:
        if isinstance(n_seq, float) and n_seq.is_integer():
            n_seq = int(n_seq)
        if not (isinstance(n_seq, int) and n_seq >= 1):
            problems.append(f"n_seq: must be an integer >= 1 or infinite, got {params.n_seq!r}")

    sinr_min = params.sinr_min
    if not (isinstance(sinr_min, (int, float)) and math.isfinite(sinr_min) and sinr_min > 0):
        problems.append(f"sinr_min: must be positive and finite, got {sinr_min!r}")
    else:
        sinr_min = float(sinr_min)

    snr = params.snr
    if not (isinstance(snr, (int, float)) and snr > 0):   # +inf = noise-free limit, allowed
        problems.append(f"snr: must be positive, got {snr!r}")
    else:
        snr = float(snr)

    outage = params.outage
    if not (isinstance(outage, (int, float)) and 0.0 <= outage < 1.0):
        problems.append(f"outage: must lie in [0, 1) so the gain threshold is finite, got {outage!r}")
    else:
        outage = float(outage)

    power_norm = str(params.power_norm).strip().lower()
    if power_norm not in ("received", "average-tx"):
        problems.append(f"power_norm: must be 'received' or 'average-tx', got {params.power_norm!r}")

    if problems:
        raise ParameterError(problems)
    return SystemParams(
        n_stations=n_stations,
        proc_gain=proc_gain,
        n_seq=n_seq,
        sinr_min=sinr_min,
        snr=snr,
        outage=outage,
        power_norm=power_norm,
    )


def noise_term(params: SystemParams, scheme: Scheme) -> float:
    """Noise-to-received-power ratio entering every SINR denominator.

    Under the default received-power normalization this is 1/snr for every
    scheme. Under 'average-tx' the gain-inverting scheme spends extra power
    on weak channels, so its constant received level solves
    E[1/gain | transmitting] * received / noise = snr, giving a noise term
    of E[1/gain | transmitting] / snr. The conditional expectation over the
    thresholded gain distribution (point mass below the threshold, shifted
    exponential tail above) is (1 - e^-g)/g + E1(g).
    """
    if params.power_norm == "average-tx" and scheme is Scheme.ADAPTIVE_INV:
        g = params.gain_threshold
        if g == 0.0:
            # E[1/gain] diverges for an untruncated exponential: a finite
            # power budget then buys zero received power.
            return math.inf
        mean_inv_gain = -math.expm1(-g) / g + float(exp1(g))
        return mean_inv_gain / params.snr
    return 1.0 / params.snr


@dataclass(frozen=True)
class ThroughputPoint:
    """One throughput value at one arrival rate, analytic or simulated."""

    lam: float
    value: float
    source: str              # "analytic" | "simulated"
    stderr: float = 0.0

    def __post_init__(self):
        if self.source not in ("analytic", "simulated"):
            raise ValueError(f"source must be 'analytic' or 'simulated', got {self.source!r}")
        if self.value < 0:
            raise ValueError(f"throughput must be >= 0, got {self.value!r}")
        if self.stderr < 0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr!r}")
        if self.source == "analytic" and self.stderr != 0.0:
            raise ValueError("analytic points carry stderr 0")
