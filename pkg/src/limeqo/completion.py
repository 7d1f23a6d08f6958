"""Censored non-negative ALS matrix completion and singular-spectrum tools.

Two update rules are available. ``solver="masked"`` (default) re-solves each
factor row against only the cells that carry information: complete cells at
their latency, and censored cells whose prediction falls below their bound,
pulled toward that bound. ``solver="filled"``
fills every unobserved cell with the current prediction and solves against
the dense filled matrix with one shared Gram matrix. Both clamp censored
cells up to their bound and zero-clip the factors after every solve.

The sweep kernel comes in two builds with the same contract: a compiled
Cython extension (``limeqo._als_ext``) and a numpy fallback
(``limeqo._als_py``). The compiled one is used when importable unless the
``LIMEQO_PURE_PYTHON`` environment variable is set.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _als_py
from .errors import DegenerateConfig, EmptySpectrum, SingularSystem
from .matrix_core import WorkloadState

try:
    if os.environ.get("LIMEQO_PURE_PYTHON"):
        raise ImportError("compiled kernel disabled by LIMEQO_PURE_PYTHON")
    from ._als_ext import censored_als as _compiled_als
except ImportError:
    _compiled_als = None

BACKENDS = {"python": _als_py.censored_als}
if _compiled_als is not None:
    BACKENDS["compiled"] = _compiled_als
DEFAULT_BACKEND = "compiled" if _compiled_als is not None else "python"
SOLVERS = ("masked", "filled")


@dataclass(frozen=True)
class AlsConfig:
    rank: int = 5
    lam: float = 0.2
    iterations: int = 50
    seed: object = 0
    solver: str = "masked"

    def validate(self, n, k):
        if self.rank < 1 or self.rank > min(n, k):
            raise DegenerateConfig(f"rank {self.rank} must be in [1, min(n, k) = {min(n, k)}]")
        if self.iterations < 1:
            raise DegenerateConfig(f"iterations must be >= 1, got {self.iterations}")
        if self.lam < 0:
            raise DegenerateConfig(f"lambda must be >= 0, got {self.lam}")
        if self.solver not in SOLVERS:
            raise DegenerateConfig(f"solver must be one of {SOLVERS}, got {self.solver!r}")


@dataclass(eq=False)
class Factorization:
    Q: np.ndarray
    H: np.ndarray
    W_hat: np.ndarray


def als_complete(state: WorkloadState, cfg: AlsConfig = AlsConfig(), backend: str | None = None) -> Factorization:
    """Complete ``state`` with censored non-negative ALS.

    Each sweep fills the estimate (censored cells clamped up to their bound),
    solves for Q by ridge least squares, zero-clips it, then does the same
    for H. Factors start i.i.d. uniform on [0, 1) from
    ``cfg.seed``. In the returned estimate complete cells equal the
    observation exactly and censored cells are at least their bound.
    """
    n, k = state.shape
    cfg.validate(n, k)
    if state.n_complete() == 0:
        raise ValueError("state has no complete entry to learn from")
    kernel = BACKENDS[backend or DEFAULT_BACKEND]

    observed = np.ascontiguousarray(state.observed())
    mask = np.ascontiguousarray(state.mask())
    timeouts = np.ascontiguousarray(state.timeouts())
    rng = np.random.default_rng(cfg.seed)
    Q = rng.random((n, cfg.rank))
    H = rng.random((k, cfg.rank))

    if kernel(observed, mask, timeouts, Q, H, float(cfg.lam), int(cfg.iterations), cfg.solver == "masked") != 0:
        raise SingularSystem(f"Gram matrix is numerically singular (lambda = {cfg.lam})")
    return Factorization(Q, H, _als_py.fill(observed, mask, timeouts, Q, H))


def als_objective(state: WorkloadState, Q, H, lam) -> float:
    """Masked squared reconstruction error plus ridge penalty on both factors."""
    resid = state.mask() * (state.observed() - Q @ H.T)
    return float((resid**2).sum() + lam * ((Q**2).sum() + (H**2).sum()))


def singular_spectrum(matrix) -> np.ndarray:
    """Singular values of a fully observed matrix, descending."""
    return np.linalg.svd(np.asarray(matrix, dtype=np.float64), compute_uv=False)


def effective_rank(spectrum, energy_fraction: float) -> int:
    """Smallest m whose leading m singular values hold ``energy_fraction`` of the squared mass."""
    s = np.asarray(spectrum, dtype=np.float64)
    if s.size == 0:
        raise EmptySpectrum("spectrum is empty")
    if not 0 <= energy_fraction <= 1:
        raise ValueError(f"energy_fraction must be in [0, 1], got {energy_fraction}")
    energy = np.cumsum(s**2)
    total = energy[-1]
    if total == 0:
        return 0 if energy_fraction == 0 else int(s.size)
    # relative slack so fraction 1.0 is reachable despite rounding in cumsum
    hit = np.flatnonzero(energy >= energy_fraction * total * (1 - 1e-12))
    return int(hit[0]) + 1
