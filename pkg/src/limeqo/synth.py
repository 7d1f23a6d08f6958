"""Planted low-rank workload matrices with known ground truth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix_core import GroundTruthMatrix

ETL_FACTOR = 10.0


@dataclass(frozen=True)
class SynthConfig:
    n: int = 100
    k: int = 20
    rank: int = 3
    noise: float = 0.0
    scale: float = 10.0
    etl_rows: int = 0
    seed: object = 0

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise ValueError("n and k must be positive")
        if not 1 <= self.rank <= min(self.n, self.k):
            raise ValueError(f"rank must be in [1, {min(self.n, self.k)}], got {self.rank}")
        if not 0 <= self.noise < 1:
            raise ValueError(f"noise must be in [0, 1), got {self.noise}")
        if not self.scale > 0:
            raise ValueError("scale must be > 0")
        if not 0 <= self.etl_rows <= self.n:
            raise ValueError(f"etl_rows must be in [0, n], got {self.etl_rows}")


def generate(cfg: SynthConfig) -> GroundTruthMatrix:
    """W = Q H^T with Q, H uniform on [0.1, 1.1), median rescaled to ``cfg.scale``.

    Multiplicative noise ``1 + eps`` (eps uniform in [-noise, noise]) is applied
    after rescaling. ETL rows, drawn at random, are then overwritten with the
    constant ``10 * scale``: no hint helps them.
    """
    rng = np.random.default_rng(cfg.seed)
    Q = rng.uniform(0.1, 1.1, (cfg.n, cfg.rank))
    H = rng.uniform(0.1, 1.1, (cfg.k, cfg.rank))
    W = Q @ H.T
    W *= cfg.scale / np.median(W)
    if cfg.noise > 0:
        W *= 1.0 + rng.uniform(-cfg.noise, cfg.noise, W.shape)
    if cfg.etl_rows:
        rows = rng.choice(cfg.n, size=cfg.etl_rows, replace=False)
        W[rows] = ETL_FACTOR * cfg.scale
    return GroundTruthMatrix(W)


def etl_row_indices(truth: GroundTruthMatrix) -> np.ndarray:
    """Rows whose latency is identical under every hint."""
    v = truth.values
    return np.flatnonzero(v.max(axis=1) == v.min(axis=1))


def optimizer_costs(truth: GroundTruthMatrix, noise: float = 0.5, seed=None) -> np.ndarray:
    """Unitless cost estimates correlated with latency through log-normal error.

    Stands in for optimizer cost exports when driving the cost-greedy policy
    on synthetic workloads.
    """
    rng = np.random.default_rng(seed)
    return 1000.0 * truth.values * np.exp(rng.normal(0.0, noise, truth.shape))
