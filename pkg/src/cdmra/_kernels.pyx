# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot-tally kernel: the hot loop of the Monte Carlo simulator.

Must stay bit-compatible with _kernels_py.slot_tally: per-slot power totals
accumulate in draw order and the SINR test uses the identical floating
expression.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def slot_tally(arrivals_in, seq_ids_in, powers_in, double noise,
               double proc_gain, double sinr_min, long long n_seq):
    """Count successes / sequence collisions / capture failures per slot.

    arrivals[s] transmitters occupy consecutive entries of seq_ids and
    powers. n_seq <= 0 means an unbounded sequence pool (seq_ids ignored).
    """
    cdef cnp.int64_t[::1] arrivals = np.ascontiguousarray(arrivals_in, dtype=np.int64)
    cdef cnp.float64_t[::1] powers = np.ascontiguousarray(powers_in, dtype=np.float64)
    cdef cnp.int64_t[::1] seq_ids
    cdef Py_ssize_t n_slots = arrivals.shape[0]

    succ_arr = np.zeros(n_slots, dtype=np.int64)
    coll_arr = np.zeros(n_slots, dtype=np.int64)
    fail_arr = np.zeros(n_slots, dtype=np.int64)
    cdef cnp.int64_t[::1] succ = succ_arr
    cdef cnp.int64_t[::1] coll = coll_arr
    cdef cnp.int64_t[::1] fail = fail_arr

    cdef bint check_collisions = n_seq > 0
    cdef cnp.int64_t[::1] count
    cdef cnp.int64_t[::1] seen_in_slot
    if check_collisions:
        seq_ids = np.ascontiguousarray(seq_ids_in, dtype=np.int64)
        count = np.zeros(n_seq, dtype=np.int64)
        seen_in_slot = np.full(n_seq, -1, dtype=np.int64)
    else:
        seq_ids = np.zeros(1, dtype=np.int64)
        count = np.zeros(1, dtype=np.int64)
        seen_in_slot = np.zeros(1, dtype=np.int64)

    cdef Py_ssize_t s, i, off = 0
    cdef cnp.int64_t k, sid, n_succ, n_coll, n_fail
    cdef double total, p, denom

    with nogil:
        for s in range(n_slots):
            k = arrivals[s]
            total = 0.0
            for i in range(off, off + k):
                total += powers[i]
            if check_collisions:
                # count[] entries are valid only while seen_in_slot[] == s,
                # so the arrays never need clearing between slots
                for i in range(off, off + k):
                    sid = seq_ids[i]
                    if seen_in_slot[sid] != s:
                        seen_in_slot[sid] = s
                        count[sid] = 1
                    else:
                        count[sid] += 1
            n_succ = 0
            n_coll = 0
            n_fail = 0
            for i in range(off, off + k):
                if check_collisions and count[seq_ids[i]] > 1:
                    n_coll += 1
                else:
                    p = powers[i]
                    denom = noise + (total - p) / proc_gain
                    if p / denom > sinr_min:
                        n_succ += 1
                    else:
                        n_fail += 1
            succ[s] = n_succ
            coll[s] = n_coll
            fail[s] = n_fail
            off += k

    return succ_arr, coll_arr, fail_arr
