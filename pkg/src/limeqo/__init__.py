"""Offline query-hint exploration on a partially observed workload matrix.

Low-rank completion (censored, non-negative ALS) predicts the latency of
unmeasured (query, hint) pairs; exploration policies decide which pairs to
measure next; a replay simulator scores them against known latencies.
"""
from .completion import AlsConfig, Factorization, als_complete, effective_rank, singular_spectrum
from .errors import LimeQOError
from .matrix_core import (
    Censored,
    Complete,
    GroundTruthMatrix,
    Unobserved,
    WorkloadState,
    best_hints,
    bootstrap,
    exploration_time,
    observe,
    row_timeout,
    workload_latency,
)
from .policies import (
    Candidate,
    PolicyConfig,
    improvement_ratio,
    select_cost_greedy,
    select_greedy,
    select_limeqo,
    select_random,
)
from .simulator import (
    DataShift,
    ExplorationTrace,
    GuardConfig,
    ShiftEvent,
    SimConfig,
    WorkloadShift,
    compare_policies,
    guarded_latency,
    run,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
