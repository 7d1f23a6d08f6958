"""Pure numpy censored ALS sweeps, used when the compiled kernel is unavailable."""
import numpy as np

SINGULAR_RTOL = 1e-12


def fill(observed, mask, timeouts, Q, H):
    """Observed cells pass through; other cells take Q H^T, raised to any censoring bound."""
    what = Q @ H.T
    censored = timeouts > 0
    what[censored] = np.maximum(what[censored], timeouts[censored])
    return np.where(mask != 0, observed, what)


def _nonsingular(G, lam):
    # G is (..., r, r); same pivot test as the compiled Cholesky.
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return False
    if lam == 0.0:
        scale = G.diagonal(axis1=-2, axis2=-1).max(axis=-1)
        pivots = L.diagonal(axis1=-2, axis2=-1).min(axis=-1) ** 2
        if np.any(pivots <= SINGULAR_RTOL * scale):
            return False
    return True


def _shared_update(what, other, lam):
    G = other.T @ other + lam * np.eye(other.shape[1])
    if not _nonsingular(G, lam):
        return None
    X = np.linalg.solve(G, (what @ other).T).T
    X[X < 0] = 0
    return X


def _masked_update(what, cells, other, lam):
    # One ridge system per row of `what`, over that row's informative cells.
    r = other.shape[1]
    outer = (other[:, :, None] * other[:, None, :]).reshape(len(other), r * r)
    G = (cells @ outer).reshape(-1, r, r) + lam * np.eye(r)
    if not _nonsingular(G, lam):
        return None
    rhs = (cells * what) @ other
    X = np.linalg.solve(G, rhs[..., None])[..., 0]
    X[X < 0] = 0
    return X


def _active(mask, timeouts, Q, H):
    # Complete cells, plus censored cells currently predicted below their bound.
    return ((mask != 0) | ((timeouts > 0) & (Q @ H.T < timeouts))).astype(np.float64)


def censored_als(observed, mask, timeouts, Q, H, lam, iters, masked=True):
    """Run ``iters`` sweeps, updating ``Q`` and ``H`` in place. Returns 0, or -1 on a singular Gram."""
    for _ in range(iters):
        what = fill(observed, mask, timeouts, Q, H)
        if masked:
            X = _masked_update(what, _active(mask, timeouts, Q, H), H, lam)
        else:
            X = _shared_update(what, H, lam)
        if X is None:
            return -1
        Q[:] = X

        what = fill(observed, mask, timeouts, Q, H)
        if masked:
            X = _masked_update(what.T, _active(mask, timeouts, Q, H).T, Q, lam)
        else:
            X = _shared_update(what.T, Q, lam)
        if X is None:
            return -1
        H[:] = X
    return 0
