"""Seeded Monte Carlo realization of the slot model: the independent oracle
for every closed form and the source of simulated throughput curves.

Slots are processed in fixed batches of 1024, each driven by its own
RngStream(seed, batch_index), so estimates are bit-identical regardless of
how many workers run the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .model import Scheme, SystemParams, noise_term
from .numerics import RngStream

__all__ = [
    "BATCH_SLOTS",
    "SimEstimate",
    "SlotOutcome",
    "estimate_ps_given_k",
    "estimate_throughput",
    "sample_gain",
    "simulate_slot",
]

BATCH_SLOTS = 1024
_TRIAL_BATCH = 8192


@dataclass(frozen=True)
class SlotOutcome:
    """Tally of one random access slot."""

    arrivals: int
    successes: int
    collided: int
    capture_failed: int

    def __post_init__(self):
        if self.successes + self.collided + self.capture_failed != self.arrivals:
            raise ValueError(f"slot tally does not conserve transmitters: {self}")


@dataclass(frozen=True)
class SimEstimate:
    """Sample mean with its standard error; reproducible from (seed, samples)
    independently of worker scheduling."""

    mean: float
    stderr: float
    samples: int
    seed: int


def sample_gain(rng: np.random.Generator, scheme: Scheme, gain_threshold: float, size=None):
    """Channel gain seen at transmission time.

    Conventional transmitters see a fresh unit-mean exponential draw.
    Adaptive transmitters defer until the gain reaches the threshold, which
    piles the below-threshold mass onto the threshold itself: max(draw, g).
    """
    if gain_threshold < 0:
        raise ValueError(f"gain threshold must be >= 0, got {gain_threshold!r}")
    draw = rng.exponential(1.0, size)
    if scheme.is_adaptive and gain_threshold > 0.0:
        return np.maximum(draw, gain_threshold) if size is not None else max(draw, gain_threshold)
    return draw


def _draw_batch(rng: np.random.Generator, params: SystemParams, scheme: Scheme,
                lam: float, n_slots: int):
    """Draw one batch: arrival counts (Poisson, redrawn above the station
    count), sequence choices, then received powers, in that fixed order."""
    ks = rng.poisson(lam, n_slots).astype(np.int64)
    over = ks > params.n_stations
    while np.any(over):
        ks[over] = rng.poisson(lam, int(over.sum()))
        over = ks > params.n_stations
    total = int(ks.sum())
    if math.isfinite(params.n_seq):
        seqs = rng.integers(0, int(params.n_seq), total, dtype=np.int64)
    else:
        seqs = np.zeros(0, dtype=np.int64)
    gains = sample_gain(rng, scheme, params.gain_threshold, total)
    if scheme is Scheme.ADAPTIVE_INV:
        powers = np.ones(total)          # gain inversion: constant received power
    else:
        powers = gains
    return ks, seqs, powers


def _tally_batch(rng, params, scheme, lam, n_slots):
    ks, seqs, powers = _draw_batch(rng, params, scheme, lam, n_slots)
    n_seq = int(params.n_seq) if math.isfinite(params.n_seq) else 0
    succ, coll, fail = _backend.kernels.slot_tally(
        ks, seqs, powers,
        noise_term(params, scheme), params.proc_gain, params.sinr_min, n_seq,
    )
    return ks, succ, coll, fail


def simulate_slot(rng: np.random.Generator, params: SystemParams, scheme: Scheme,
                  lam: float) -> SlotOutcome:
    """Realize a single slot and classify every transmitter."""
    ks, succ, coll, fail = _tally_batch(rng, params, scheme, lam, 1)
    return SlotOutcome(int(ks[0]), int(succ[0]), int(coll[0]), int(fail[0]))


def _combine(moments) -> tuple[float, float]:
    """Mean and standard error from per-batch (count, sum, sum-of-squares)
    triples, reduced in batch order. Integer sums keep this exact."""
    n = sum(m[0] for m in moments)
    s = sum(m[1] for m in moments)
    s2 = sum(m[2] for m in moments)
    mean = s / n
    if n < 2:
        return mean, 0.0
    var = (s2 - (s * s) / n) / (n - 1)
    return mean, math.sqrt(max(var, 0.0) / n)


def _run_batches(worker, n_batches: int, threads: int):
    if threads <= 1 or n_batches == 1:
        return [worker(b) for b in range(n_batches)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n_batches)))


def estimate_throughput(params: SystemParams, scheme: Scheme, lam: float,
                        slots: int, seed: int, threads: int = 1) -> SimEstimate:
    """Mean successes per slot over `slots` independent slots.

    A run with slots = 1 cannot estimate spread and reports stderr 0.
    """
    if slots < 1:
        raise ValueError(f"slots must be >= 1, got {slots}")
    if not lam > 0:
        raise ValueError(f"arrival rate must be positive, got {lam!r}")
    n_batches = -(-slots // BATCH_SLOTS)

    def worker(b: int):
        n = min(BATCH_SLOTS, slots - b * BATCH_SLOTS)
        rng = RngStream(seed, b).generator()
        _, succ, _, _ = _tally_batch(rng, params, scheme, lam, n)
        return n, int(succ.sum()), int((succ * succ).sum())

    mean, stderr = _combine(_run_batches(worker, n_batches, threads))
    return SimEstimate(mean=mean, stderr=stderr, samples=slots, seed=seed)


def estimate_ps_given_k(params: SystemParams, scheme: Scheme, k: int,
                        trials: int, seed: int, threads: int = 1) -> SimEstimate:
    """Capture rate of one tagged transmitter with exactly k transmitters in
    the slot, conditioned on no sequence collision (sequence choice is not
    simulated). The direct oracle for the per-policy capture formulas."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    noise = noise_term(params, scheme)
    eta = params.sinr_min
    n_gain = params.proc_gain
    n_batches = -(-trials // _TRIAL_BATCH)

    def worker(b: int):
        n = min(_TRIAL_BATCH, trials - b * _TRIAL_BATCH)
        if scheme is Scheme.ADAPTIVE_INV:
            # constant received power: the SINR is deterministic in k
            sinr = 1.0 / (noise + (k - 1) / n_gain) if (noise > 0 or k > 1) else math.inf
            hits = n if sinr > eta else 0
            return n, hits, hits
        rng = RngStream(seed, b).generator()
        gains = sample_gain(rng, scheme, params.gain_threshold, (n, k))
        interference = gains[:, 1:].sum(axis=1)
        with np.errstate(divide="ignore"):
            captured = gains[:, 0] / (noise + interference / n_gain) > eta
        hits = int(captured.sum())
        return n, hits, hits

    mean, stderr = _combine(_run_batches(worker, n_batches, threads))
    return SimEstimate(mean=mean, stderr=stderr, samples=trials, seed=seed)
