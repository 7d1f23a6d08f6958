"""Exploration policies: which (query, hint) cells to measure next.

Every policy draws from the *explorable* cells of the state: unobserved
cells, and censored cells whose bound is still below the row's best latency.
A censored cell at or above the row best can never become the row minimum,
so measuring it again is wasted time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NothingToExplore, ZeroPrediction
from .matrix_core import WorkloadState, row_timeout

POLICY_KINDS = ("random", "greedy", "limeqo", "cost")


@dataclass(frozen=True)
class Candidate:
    query: int
    hint: int
    timeout: float
    predicted: Optional[float] = None


@dataclass(frozen=True)
class PolicyConfig:
    kind: str = "limeqo"
    batch: int = 10
    alpha: float = 2.0
    seed: object = 0

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")
        if not self.alpha >= 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")


def _explorable_cells(state):
    cells = np.argwhere(state.explorable())
    if len(cells) == 0:
        raise NothingToExplore("every entry is complete or censored at the row best")
    return cells


def _predictions(w_hat):
    return np.asarray(getattr(w_hat, "W_hat", w_hat), dtype=np.float64)


def select_random(state: WorkloadState, m: int, seed=None) -> list[Candidate]:
    """Up to ``m`` distinct explorable cells, uniformly at random."""
    cells = _explorable_cells(state)
    best = state.row_minima()
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(cells), size=min(m, len(cells)), replace=False)
    return [Candidate(int(i), int(j), float(best[i])) for i, j in cells[picks]]


def select_greedy(state: WorkloadState, m: int, seed=None) -> list[Candidate]:
    """The ``m`` slowest queries (by best observed latency), one random explorable hint each."""
    explorable = state.explorable()
    if not explorable.any():
        raise NothingToExplore("every entry is complete or censored at the row best")
    best = state.row_minima()
    rows = np.arange(state.n_queries)
    order = np.lexsort((rows, -best))
    order = order[explorable[order].any(axis=1)][:m]
    rng = np.random.default_rng(seed)
    out = []
    for i in order:
        j = rng.choice(np.flatnonzero(explorable[i]))
        out.append(Candidate(int(i), int(j), float(best[i])))
    return out


def improvement_ratio(state: WorkloadState, w_hat, i: int) -> float:
    """Relative gain of the best predicted latency over the best observed one for row ``i``."""
    predicted = _predictions(w_hat)[i].min()
    if predicted <= 0:
        raise ZeroPrediction(f"row {i} has non-positive predicted minimum {predicted}")
    return float((row_timeout(state, i) - predicted) / predicted)


def limeqo_timeouts(state: WorkloadState, w_hat, alpha: float) -> np.ndarray:
    """Per-cell timeout: row best, or alpha times the prediction if that is smaller.

    The scaled prediction is only used when it exceeds what is already known
    about the cell (its censoring bound, or 0), otherwise the row best applies.
    """
    W = _predictions(w_hat)
    best = state.row_minima()[:, None]
    scaled = alpha * W
    return np.where(scaled > state.timeouts(), np.minimum(best, scaled), np.broadcast_to(best, W.shape))


def select_limeqo(state: WorkloadState, factorization, m: int, alpha: float = 2.0, seed=None) -> list[Candidate]:
    """Pick the rows with the largest predicted improvement ratio, probing their predicted-best hint.

    A row qualifies when its ratio is positive and its predicted-best cell is
    still explorable. Rows are taken in descending ratio (lowest index on
    ties). If fewer than ``m`` qualify, the batch is topped up with random
    explorable cells.
    """
    explorable = state.explorable()
    if not explorable.any():
        raise NothingToExplore("every entry is complete or censored at the row best")
    W = _predictions(factorization)
    if W.shape != state.shape:
        raise ValueError(f"prediction shape {W.shape} does not match state {state.shape}")
    best = state.row_minima()
    timeouts = limeqo_timeouts(state, W, alpha)

    rows = np.arange(state.n_queries)
    jstar = W.argmin(axis=1)
    pmin = W[rows, jstar]
    positive = pmin > 0
    ratio = np.full(state.n_queries, -np.inf)
    ratio[positive] = (best[positive] - pmin[positive]) / pmin[positive]
    eligible = (ratio > 0) & explorable[rows, jstar]
    order = np.lexsort((rows, -ratio))
    chosen = [int(i) for i in order if eligible[i]][:m]

    out = [Candidate(i, int(jstar[i]), float(timeouts[i, jstar[i]]), float(W[i, jstar[i]])) for i in chosen]
    if len(out) < m:
        pool = explorable.copy()
        for c in out:
            pool[c.query, c.hint] = False
        cells = np.argwhere(pool)
        if len(cells):
            rng = np.random.default_rng(seed)
            picks = rng.choice(len(cells), size=min(m - len(out), len(cells)), replace=False)
            out.extend(Candidate(int(i), int(j), float(timeouts[i, j]), float(W[i, j])) for i, j in cells[picks])
    return out


def select_cost_greedy(state: WorkloadState, cost_matrix, m: int) -> list[Candidate]:
    """The ``m`` explorable cells with the lowest optimizer cost (row-major on ties)."""
    costs = np.asarray(cost_matrix, dtype=np.float64)
    if costs.shape != state.shape:
        raise ValueError(f"cost matrix shape {costs.shape} does not match state {state.shape}")
    cells = _explorable_cells(state)
    best = state.row_minima()
    i, j = cells[:, 0], cells[:, 1]
    order = np.lexsort((j, i, costs[i, j]))[:m]
    return [Candidate(int(i[o]), int(j[o]), float(best[i[o]])) for o in order]


def select(cfg: PolicyConfig, state: WorkloadState, seed=None, factorization=None, cost_matrix=None):
    """Dispatch to the policy named by ``cfg.kind``."""
    seed = cfg.seed if seed is None else seed
    if cfg.kind == "random":
        return select_random(state, cfg.batch, seed)
    if cfg.kind == "greedy":
        return select_greedy(state, cfg.batch, seed)
    if cfg.kind == "limeqo":
        if factorization is None:
            raise ValueError("limeqo policy needs a factorization")
        return select_limeqo(state, factorization, cfg.batch, cfg.alpha, seed)
    if cost_matrix is None:
        raise ValueError("cost policy needs a cost matrix")
    return select_cost_greedy(state, cost_matrix, cfg.batch)
