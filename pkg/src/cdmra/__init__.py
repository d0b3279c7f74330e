"""Throughput of sequence-based slotted random access under an SINR capture
rule: closed forms for three access policies, a seeded Monte Carlo slot
simulator that validates them, and a sweep engine that regenerates the
reference result tables.
"""

from ._version import __version__

from .model import (  # noqa: E402
    INFINITE_SEQUENCES,
    ParameterError,
    Scheme,
    SystemParams,
    ThroughputPoint,
    db_to_linear,
    gth_from_outage,
    linear_to_db,
    noise_term,
    outage_from_gth,
    validate,
)
from .numerics import RngStream, maximize_1d  # noqa: E402
from .analytic import (  # noqa: E402
    collision_prob,
    inv_success_limit,
    ps_const,
    ps_conv,
    ps_inv,
    success_prob,
    throughput_conv_closed,
    throughput_inv_closed,
    throughput_sum,
)
from .simulator import (  # noqa: E402
    SimEstimate,
    SlotOutcome,
    estimate_ps_given_k,
    estimate_throughput,
    sample_gain,
    simulate_slot,
)
from .sweep import (  # noqa: E402
    SequenceSearch,
    SweepResult,
    SweepRow,
    SweepSpec,
    crossover_lambda,
    limit_throughput,
    max_throughput,
    run_sweep,
    sequences_for_fraction,
)
from ._backend import BACKEND  # noqa: E402

__all__ = [
    "BACKEND",
    "INFINITE_SEQUENCES",
    "ParameterError",
    "RngStream",
    "Scheme",
    "SequenceSearch",
    "SimEstimate",
    "SlotOutcome",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "SystemParams",
    "ThroughputPoint",
    "collision_prob",
    "crossover_lambda",
    "db_to_linear",
    "estimate_ps_given_k",
    "estimate_throughput",
    "gth_from_outage",
    "inv_success_limit",
    "limit_throughput",
    "linear_to_db",
    "max_throughput",
    "maximize_1d",
    "noise_term",
    "outage_from_gth",
    "ps_const",
    "ps_conv",
    "ps_inv",
    "run_sweep",
    "sample_gain",
    "sequences_for_fraction",
    "simulate_slot",
    "success_prob",
    "throughput_conv_closed",
    "throughput_inv_closed",
    "throughput_sum",
    "validate",
    "__version__",
]
