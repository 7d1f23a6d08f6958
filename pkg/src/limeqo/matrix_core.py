"""Partially observed workload matrix and its two objectives.

A workload matrix holds the latency of every (query, hint) pair. Only some
entries have been measured; a measurement that hit its timeout is kept as a
censored lower bound instead of a latency.

Internally every cell is a status code plus a float: the latency for complete
cells, the bound for censored cells and 0 for unobserved cells. Unobserved is a
status, never a stored infinity, so all arithmetic stays finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import (
    AlreadyComplete,
    NonIncreasingTimeout,
    NonPositiveTimeout,
    RowUnbootstrapped,
)

UNOBSERVED = 0
COMPLETE = 1
CENSORED = 2


@dataclass(frozen=True)
class Unobserved:
    pass


@dataclass(frozen=True)
class Complete:
    latency: float

    def __post_init__(self):
        if not (np.isfinite(self.latency) and self.latency > 0):
            raise ValueError(f"complete latency must be finite and > 0, got {self.latency}")


@dataclass(frozen=True)
class Censored:
    bound: float

    def __post_init__(self):
        if not (np.isfinite(self.bound) and self.bound > 0):
            raise ValueError(f"censored bound must be finite and > 0, got {self.bound}")


EntryStatus = Union[Unobserved, Complete, Censored]


def _default_labels(prefix, count):
    return tuple(f"{prefix}{i + 1}" for i in range(count))


@dataclass(eq=False)
class GroundTruthMatrix:
    """Fully measured latencies, used by the simulator as an oracle."""

    values: np.ndarray
    query_ids: tuple = None
    hint_labels: tuple = None

    def __post_init__(self):
        self.values = np.array(self.values, dtype=np.float64)
        if self.values.ndim != 2 or 0 in self.values.shape:
            raise ValueError(f"ground truth must be a non-empty 2-d grid, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise ValueError("ground truth latencies must be finite and > 0")
        n, k = self.values.shape
        self.query_ids = tuple(self.query_ids) if self.query_ids is not None else _default_labels("q", n)
        self.hint_labels = tuple(self.hint_labels) if self.hint_labels is not None else _default_labels("h", k)
        if len(self.query_ids) != n or len(self.hint_labels) != k:
            raise ValueError("label counts do not match matrix shape")

    @property
    def shape(self):
        return self.values.shape

    def optimal_latency(self) -> float:
        return float(self.values.min(axis=1).sum())

    def default_latency(self, default_hint: int) -> float:
        return float(self.values[:, default_hint].sum())

    def headroom(self, default_hint: int = 0) -> float:
        """Default workload latency divided by the oracle-optimal latency."""
        return self.default_latency(default_hint) / self.optimal_latency()

    def __eq__(self, other):
        if not isinstance(other, GroundTruthMatrix):
            return NotImplemented
        return (
            self.query_ids == other.query_ids
            and self.hint_labels == other.hint_labels
            and np.array_equal(self.values, other.values)
        )


@dataclass(eq=False)
class WorkloadState:
    """The partially observed matrix: one status and one value per cell."""

    status: np.ndarray
    values: np.ndarray
    default_hint: int = 0
    query_ids: tuple = None
    hint_labels: tuple = None

    def __post_init__(self):
        self.status = np.array(self.status, dtype=np.int8)
        self.values = np.array(self.values, dtype=np.float64)
        if self.status.ndim != 2 or self.status.shape != self.values.shape:
            raise ValueError("status and values must be 2-d grids of equal shape")
        n, k = self.status.shape
        if not 0 <= self.default_hint < k:
            raise ValueError(f"default_hint {self.default_hint} out of range for {k} hints")
        if not np.isin(self.status, (UNOBSERVED, COMPLETE, CENSORED)).all():
            raise ValueError("unknown status code")
        observed = self.status != UNOBSERVED
        vals = self.values[observed]
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("observed latencies and bounds must be finite and > 0")
        self.values[~observed] = 0.0
        self.query_ids = tuple(self.query_ids) if self.query_ids is not None else _default_labels("q", n)
        self.hint_labels = tuple(self.hint_labels) if self.hint_labels is not None else _default_labels("h", k)
        if len(self.query_ids) != n or len(self.hint_labels) != k:
            raise ValueError("label counts do not match matrix shape")

    @classmethod
    def empty(cls, n_queries, n_hints, default_hint=0, query_ids=None, hint_labels=None):
        return cls(
            np.zeros((n_queries, n_hints), dtype=np.int8),
            np.zeros((n_queries, n_hints)),
            default_hint,
            query_ids,
            hint_labels,
        )

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence[EntryStatus]], default_hint=0, **labels):
        n = len(entries)
        k = len(entries[0]) if n else 0
        state = cls.empty(n, k, default_hint, **labels)
        for i, row in enumerate(entries):
            if len(row) != k:
                raise ValueError(f"row {i} has {len(row)} entries, expected {k}")
            for j, entry in enumerate(row):
                state.set_entry(i, j, entry)
        return state

    @property
    def n_queries(self):
        return self.status.shape[0]

    @property
    def n_hints(self):
        return self.status.shape[1]

    @property
    def shape(self):
        return self.status.shape

    def entry(self, i, j) -> EntryStatus:
        s = self.status[i, j]
        if s == COMPLETE:
            return Complete(float(self.values[i, j]))
        if s == CENSORED:
            return Censored(float(self.values[i, j]))
        return Unobserved()

    def set_entry(self, i, j, entry: EntryStatus):
        if isinstance(entry, Complete):
            self.status[i, j], self.values[i, j] = COMPLETE, entry.latency
        elif isinstance(entry, Censored):
            self.status[i, j], self.values[i, j] = CENSORED, entry.bound
        elif isinstance(entry, Unobserved):
            self.status[i, j], self.values[i, j] = UNOBSERVED, 0.0
        else:
            raise TypeError(f"not an entry status: {entry!r}")

    def copy(self) -> "WorkloadState":
        return WorkloadState(
            self.status.copy(), self.values.copy(), self.default_hint, self.query_ids, self.hint_labels
        )

    # Derived matrices consumed by the completion step.

    @property
    def complete(self) -> np.ndarray:
        return self.status == COMPLETE

    @property
    def censored(self) -> np.ndarray:
        return self.status == CENSORED

    def mask(self) -> np.ndarray:
        """1.0 where the entry is complete, else 0.0. Censored cells are not in the mask."""
        return self.complete.astype(np.float64)

    def timeouts(self) -> np.ndarray:
        """Censoring bounds where censored, else 0."""
        return np.where(self.censored, self.values, 0.0)

    def observed(self) -> np.ndarray:
        """Complete latencies, 0 elsewhere."""
        return np.where(self.complete, self.values, 0.0)

    def n_complete(self) -> int:
        return int(np.count_nonzero(self.complete))

    def n_censored(self) -> int:
        return int(np.count_nonzero(self.censored))

    def row_minima(self) -> np.ndarray:
        """Best complete latency per row; raises if some row has none."""
        best = np.where(self.complete, self.values, np.inf).min(axis=1)
        missing = np.flatnonzero(np.isinf(best))
        if missing.size:
            raise RowUnbootstrapped(int(missing[0]))
        return best

    def explorable(self) -> np.ndarray:
        """Cells a policy may still measure.

        Unobserved cells, plus censored cells whose bound is below the row's
        current best latency (a larger timeout could still reveal a win).
        """
        best = self.row_minima()
        return (self.status == UNOBSERVED) | (self.censored & (self.values < best[:, None]))

    def observe(self, i, j, true_latency, timeout) -> float:
        """Measure cell (i, j) in place with the given timeout; return seconds charged."""
        if not timeout > 0:
            raise NonPositiveTimeout(f"timeout must be > 0, got {timeout}")
        if not true_latency > 0:
            raise ValueError(f"true latency must be > 0, got {true_latency}")
        s = self.status[i, j]
        if s == COMPLETE:
            raise AlreadyComplete(i, j)
        if s == CENSORED and not self.values[i, j] < timeout:
            raise NonIncreasingTimeout(
                f"entry ({i}, {j}) already censored at {self.values[i, j]}, timeout {timeout} is not larger"
            )
        if true_latency < timeout:
            self.status[i, j], self.values[i, j] = COMPLETE, true_latency
            return float(true_latency)
        self.status[i, j], self.values[i, j] = CENSORED, timeout
        return float(timeout)

    def __eq__(self, other):
        if not isinstance(other, WorkloadState):
            return NotImplemented
        return (
            self.default_hint == other.default_hint
            and self.query_ids == other.query_ids
            and self.hint_labels == other.hint_labels
            and np.array_equal(self.status, other.status)
            and np.array_equal(self.values, other.values)
        )


def workload_latency(state: WorkloadState) -> float:
    """Sum over queries of the best complete latency."""
    return float(state.row_minima().sum())


def exploration_time(state: WorkloadState, charge_default: bool = True) -> float:
    """Seconds spent revealing the current matrix.

    A complete cell cost its latency, a censored cell cost its timeout. With
    ``charge_default=False`` the default column is free, since the online
    workload already ran those plans.
    """
    paid = state.status != UNOBSERVED
    if not charge_default:
        paid = paid.copy()
        paid[:, state.default_hint] = False
    return float(state.values[paid].sum())


def row_timeout(state: WorkloadState, i: int) -> float:
    row = state.values[i][state.status[i] == COMPLETE]
    if row.size == 0:
        raise RowUnbootstrapped(i)
    return float(row.min())


def observe(state: WorkloadState, i, j, true_latency, timeout):
    """Functional variant of :meth:`WorkloadState.observe`: returns ``(new_state, charged)``."""
    new = state.copy()
    charged = new.observe(i, j, true_latency, timeout)
    return new, charged


def best_hints(state: WorkloadState) -> np.ndarray:
    """Per query, the column of the fastest complete entry (lowest index on ties)."""
    state.row_minima()
    return np.where(state.complete, state.values, np.inf).argmin(axis=1)


def bootstrap(truth: GroundTruthMatrix, default_hint: int = 0) -> WorkloadState:
    """Reveal the default column: the online workload has always run those plans."""
    n, k = truth.shape
    state = WorkloadState.empty(n, k, default_hint, truth.query_ids, truth.hint_labels)
    state.status[:, default_hint] = COMPLETE
    state.values[:, default_hint] = truth.values[:, default_hint]
    return state
