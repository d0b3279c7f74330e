"""Pure-numpy slot-tally kernel, the fallback when the compiled extension
is unavailable.

Bit-compatible with the compiled kernel: per-slot power totals accumulate
in draw order (np.bincount adds weights in array order, matching the C
loop) and the SINR test uses the identical expression, so both backends
return identical tallies for identical inputs.
"""

from __future__ import annotations

import numpy as np


def slot_tally(arrivals, seq_ids, powers, noise, proc_gain, sinr_min, n_seq):
    """Count successes / sequence collisions / capture failures per slot.

    arrivals[s] transmitters occupy consecutive entries of seq_ids and
    powers. n_seq <= 0 means an unbounded sequence pool (seq_ids ignored).
    A station succeeds iff its sequence is unique within its slot and
    power / (noise + (slot_total - power)/proc_gain) > sinr_min.
    """
    arrivals = np.ascontiguousarray(arrivals, dtype=np.int64)
    powers = np.ascontiguousarray(powers, dtype=np.float64)
    n_slots = arrivals.shape[0]
    slot_of = np.repeat(np.arange(n_slots, dtype=np.int64), arrivals)

    totals = np.bincount(slot_of, weights=powers, minlength=n_slots)
    denom = noise + (totals[slot_of] - powers) / proc_gain
    with np.errstate(divide="ignore"):
        captured = powers / denom > sinr_min

    if n_seq > 0 and powers.shape[0] > 0:
        seq_ids = np.ascontiguousarray(seq_ids, dtype=np.int64)
        keys = slot_of * np.int64(n_seq) + seq_ids
        _, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        unique_seq = counts[inverse] == 1
    else:
        unique_seq = np.ones(powers.shape[0], dtype=bool)

    successes = np.bincount(slot_of[unique_seq & captured], minlength=n_slots).astype(np.int64)
    collided = np.bincount(slot_of[~unique_seq], minlength=n_slots).astype(np.int64)
    capture_failed = arrivals - successes - collided
    return successes, collided, capture_failed
