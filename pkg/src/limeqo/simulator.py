"""Deterministic replay of offline exploration against a known latency matrix."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .completion import AlsConfig, als_complete
from .errors import NothingToExplore
from .matrix_core import (
    COMPLETE,
    GroundTruthMatrix,
    WorkloadState,
    best_hints,
    bootstrap,
    exploration_time,
    workload_latency,
)
from .policies import PolicyConfig, select

__all__ = [
    "SimConfig",
    "TracePoint",
    "ExplorationTrace",
    "WorkloadShift",
    "DataShift",
    "ShiftEvent",
    "GuardConfig",
    "ReportRow",
    "bootstrap",
    "run",
    "guarded_latency",
    "compare_policies",
]

# Offsets mixed into the master seed so policy draws and ALS inits never share a stream.
POLICY_STREAM = 0
ALS_STREAM = 1


@dataclass(frozen=True)
class SimConfig:
    policy: PolicyConfig
    budget: float
    als: AlsConfig = AlsConfig()
    refit_every: int = 1
    charge_default: bool = False
    record_every: int = 1

    def __post_init__(self):
        if not self.budget > 0:
            raise ValueError(f"budget must be > 0, got {self.budget}")
        if self.refit_every < 1 or self.record_every < 1:
            raise ValueError("refit_every and record_every must be >= 1")


@dataclass(frozen=True)
class TracePoint:
    explore_seconds: float
    workload_latency: float
    n_complete: int
    n_censored: int


@dataclass
class ExplorationTrace:
    points: list
    final_hints: np.ndarray
    # index into ``points`` of the first point recorded after each shift
    segment_starts: list = field(default_factory=list)
    final_state: Optional[WorkloadState] = None

    @property
    def final_latency(self) -> float:
        return self.points[-1].workload_latency

    @property
    def final_explore_seconds(self) -> float:
        return self.points[-1].explore_seconds

    def segments(self):
        """Split the points at shift boundaries."""
        bounds = [0, *self.segment_starts, len(self.points)]
        return [self.points[a:b] for a, b in zip(bounds, bounds[1:]) if b > a]


@dataclass(frozen=True)
class WorkloadShift:
    """New queries join the workload; ``rows`` holds their ground truth."""

    rows: GroundTruthMatrix
    cost_rows: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DataShift:
    """The data changed: same queries and hints, new latencies."""

    truth: GroundTruthMatrix


@dataclass(frozen=True)
class ShiftEvent:
    at: float
    kind: Union[WorkloadShift, DataShift]


@dataclass(frozen=True)
class GuardConfig:
    K: float
    tail_headroom: bool = True

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be >= 0")


def _point(spent, state):
    return TracePoint(spent, workload_latency(state), state.n_complete(), state.n_censored())


def _apply_shift(event, truth, state, cost):
    if isinstance(event.kind, WorkloadShift):
        rows = event.kind.rows
        if rows.shape[1] != truth.shape[1]:
            raise ValueError(f"shifted rows have {rows.shape[1]} hints, expected {truth.shape[1]}")
        added = bootstrap(rows, state.default_hint)
        state = WorkloadState(
            np.vstack([state.status, added.status]),
            np.vstack([state.values, added.values]),
            state.default_hint,
            state.query_ids + rows.query_ids,
            state.hint_labels,
        )
        truth = np.vstack([truth, rows.values])
        if cost is not None:
            if event.kind.cost_rows is None:
                raise ValueError("cost policy needs cost_rows for a workload shift")
            cost = np.vstack([cost, np.asarray(event.kind.cost_rows, dtype=np.float64)])
        return truth, state, cost

    new = event.kind.truth
    if new.shape != truth.shape:
        raise ValueError(f"data shift matrix shape {new.shape} does not match {truth.shape}")
    # Carry the chosen hints over: re-measure them and the default plan under the
    # new data (paid by the online workload), forget everything else.
    hints = best_hints(state)
    fresh = bootstrap(new, state.default_hint)
    rows = np.arange(state.n_queries)
    fresh.status[rows, hints] = COMPLETE
    fresh.values[rows, hints] = new.values[rows, hints]
    fresh.query_ids, fresh.hint_labels = state.query_ids, state.hint_labels
    return new.values.copy(), fresh, cost


def _fit_budget(state, i, j, budget, charge_default):
    # The state sums its charges in a different order than the running total;
    # shave the last bound by ulps so the state's own total never tops the budget.
    while exploration_time(state, charge_default) > budget and state.values[i, j] > 0:
        state.values[i, j] = np.nextafter(state.values[i, j], 0.0)


def run(
    ground_truth: GroundTruthMatrix,
    default_hint: int,
    cfg: SimConfig,
    shifts: Sequence[ShiftEvent] = (),
    seed=0,
    cost_matrix=None,
    backend: Optional[str] = None,
) -> ExplorationTrace:
    """Replay the exploration loop until the budget runs out or nothing is left to explore.

    Each round: refit ALS (LimeQO only, every ``refit_every`` rounds), select a
    batch, and measure each candidate against the oracle with its timeout.
    A candidate that would overrun the budget runs with the timeout cut to
    what is left, is recorded as censored, and ends the run. That last run
    gets a trace point unless nothing before it ran in full, so a budget
    below every candidate leaves the bootstrap point alone.

    ``explore_seconds`` in the trace counts every second charged, including
    earlier censored runs of cells that were later re-measured, so it can
    exceed ``exploration_time`` of the final state.
    """
    if list(shifts) != sorted(shifts, key=lambda e: e.at):
        raise ValueError("shifts must be sorted by time")
    truth = ground_truth.values.copy()
    state = bootstrap(ground_truth, default_hint)
    cost = None if cost_matrix is None else np.asarray(cost_matrix, dtype=np.float64)
    if cfg.policy.kind == "cost" and cost is None:
        raise ValueError("cost policy needs a cost matrix")

    spent = exploration_time(state, charge_default=True) if cfg.charge_default else 0.0
    budget = cfg.budget
    points = [_point(spent, state)]
    segment_starts = []
    pending = list(shifts)
    fact = None
    rounds = 0
    finished = False
    unrecorded = False
    ran_any = False

    while not finished and spent < budget:
        while pending and spent >= pending[0].at:
            truth, state, cost = _apply_shift(pending.pop(0), truth, state, cost)
            segment_starts.append(len(points))
            fact = None

        if cfg.policy.kind == "limeqo" and (fact is None or rounds % cfg.refit_every == 0):
            fact = als_complete(state, replace(cfg.als, seed=(seed, ALS_STREAM, rounds)), backend)
        try:
            batch = select(cfg.policy, state, (seed, POLICY_STREAM, rounds), fact, cost)
        except NothingToExplore:
            break

        for cand in batch:
            i, j = cand.query, cand.hint
            true = truth[i, j]
            if spent + min(true, cand.timeout) > budget:
                remaining = budget - spent
                if remaining > state.values[i, j]:
                    state.observe(i, j, true, remaining)
                    _fit_budget(state, i, j, budget, cfg.charge_default)
                    unrecorded = unrecorded or ran_any
                spent = budget
                finished = True
                break
            spent += state.observe(i, j, true, cand.timeout)
            unrecorded = ran_any = True

        rounds += 1
        if unrecorded and rounds % cfg.record_every == 0:
            points.append(_point(spent, state))
            unrecorded = False

    if unrecorded:
        points.append(_point(spent, state))
    segment_starts = sorted({s for s in segment_starts if s < len(points)})
    return ExplorationTrace(points, best_hints(state), segment_starts, state)


def guarded_latency(default_latency, candidate_true_latency, headroom, K):
    """Try a candidate plan online without regressing more than ``min(headroom, K)``.

    The trial runs with that slack as its timeout. If it finishes in time it is
    adopted; otherwise the slack is lost and the default plan runs after it.
    Returns ``(executed_seconds, adopted)``.
    """
    for name, v in (("default_latency", default_latency), ("candidate", candidate_true_latency),
                    ("headroom", headroom), ("K", K)):
        if not v >= 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    slack = min(headroom, K)
    if candidate_true_latency < slack:
        return candidate_true_latency, True
    return slack + default_latency, False


@dataclass(frozen=True)
class ReportRow:
    policy: str
    budget: Optional[float]
    mean: float
    stddev: float


def _final_latency(job):
    truth, default_hint, cfg, seed, cost = job
    return run(truth, default_hint, cfg, seed=seed, cost_matrix=cost).final_latency


def compare_policies(
    ground_truth: GroundTruthMatrix,
    default_hint: int,
    configs: Sequence[SimConfig],
    budgets: Sequence[float],
    seeds: Union[int, Sequence[int]],
    cost_matrix=None,
    workers: int = 1,
) -> list:
    """Mean and stddev of the final workload latency per (policy, budget) over ``seeds``.

    Opens with Default (no exploration) and Optimal (oracle row minimum) rows.
    """
    seeds = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    jobs, keys = [], []
    for cfg in configs:
        for budget in budgets:
            keys.append((cfg.policy.kind, float(budget)))
            jobs.extend(
                (ground_truth, default_hint, replace(cfg, budget=float(budget)), s, cost_matrix) for s in seeds
            )
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            finals = list(pool.map(_final_latency, jobs))
    else:
        finals = [_final_latency(job) for job in jobs]

    rows = [
        ReportRow("Default", None, ground_truth.default_latency(default_hint), 0.0),
        ReportRow("Optimal", None, ground_truth.optimal_latency(), 0.0),
    ]
    per = len(seeds)
    for n, (kind, budget) in enumerate(keys):
        vals = np.array(finals[n * per:(n + 1) * per])
        rows.append(ReportRow(kind, budget, float(vals.mean()), float(vals.std())))
    return rows


def budget_grid(ground_truth: GroundTruthMatrix, default_hint: int, multiples=(0.25, 0.5, 1, 2, 4)):
    """Budgets as multiples of the default workload latency."""
    base = ground_truth.default_latency(default_hint)
    return [m * base for m in multiples]
