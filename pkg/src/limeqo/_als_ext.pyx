# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused censored ALS sweeps. Compiled twin of ``limeqo._als_py``.

Every half-step fills the estimate (observed pass-through, censored clamp)
into one reusable buffer, then re-solves one factor row by row against an
r x r Cholesky factor and zero-clips the result.

``masked=True``: each row's normal equations use only its complete cells and
the censored cells currently predicted below their bound, so every row owns
its Gram matrix.
``masked=False``: every cell takes part with its filled value and all rows
share a single Gram matrix.
"""
import numpy as np
from libc.math cimport sqrt

cdef double SINGULAR_RTOL = 1e-12


cdef void _fill(const double[:, ::1] obs, const double[:, ::1] mask, const double[:, ::1] tmo,
                const double[:, ::1] A, const double[:, ::1] B, double[:, ::1] out,
                char[:, ::1] active) noexcept nogil:
    cdef Py_ssize_t n = obs.shape[0], k = obs.shape[1], r = A.shape[1]
    cdef Py_ssize_t i, j, c
    cdef double v
    for i in range(n):
        for j in range(k):
            if mask[i, j] != 0.0:
                out[i, j] = obs[i, j]
                active[i, j] = 1
            else:
                v = 0.0
                for c in range(r):
                    v += A[i, c] * B[j, c]
                active[i, j] = 0
                if tmo[i, j] > 0.0 and v < tmo[i, j]:
                    v = tmo[i, j]
                    active[i, j] = 1
                out[i, j] = v


cdef int _factor(double[:, ::1] G, double lam) noexcept nogil:
    # In-place lower Cholesky of the lower triangle of G; -1 if singular.
    cdef Py_ssize_t r = G.shape[0]
    cdef Py_ssize_t a, b, c
    cdef double s, scale = 0.0
    for a in range(r):
        if G[a, a] > scale:
            scale = G[a, a]
    for a in range(r):
        for b in range(a + 1):
            s = G[a, b]
            for c in range(b):
                s -= G[a, c] * G[b, c]
            if a == b:
                if s <= 0.0 or (lam == 0.0 and s <= SINGULAR_RTOL * scale):
                    return -1
                G[a, a] = sqrt(s)
            else:
                G[a, b] = s / G[b, b]
    return 0


cdef void _solve_clip(const double[:, ::1] L, double[:, ::1] X, Py_ssize_t row) noexcept nogil:
    # Solve L L^T x = X[row] in place, then zero negative entries.
    cdef Py_ssize_t r = L.shape[0]
    cdef Py_ssize_t a, c
    cdef double s
    for a in range(r):
        s = X[row, a]
        for c in range(a):
            s -= L[a, c] * X[row, c]
        X[row, a] = s / L[a, a]
    for a in range(r - 1, -1, -1):
        s = X[row, a]
        for c in range(a + 1, r):
            s -= L[c, a] * X[row, c]
        X[row, a] = s / L[a, a]
    for a in range(r):
        if X[row, a] < 0.0:
            X[row, a] = 0.0


cdef int _shared_update(const double[:, ::1] what, const double[:, ::1] other, double[:, ::1] X,
                        double[:, ::1] G, double lam, bint transpose) noexcept nogil:
    # X <- clip(what @ other @ (other^T other + lam I)^-1); what is read transposed if asked.
    cdef Py_ssize_t m = X.shape[0], p = other.shape[0], r = X.shape[1]
    cdef Py_ssize_t a, b, i, j, c
    cdef double s, w
    for a in range(r):
        for b in range(a + 1):
            s = 0.0
            for i in range(p):
                s += other[i, a] * other[i, b]
            G[a, b] = s
        G[a, a] += lam
    if _factor(G, lam) != 0:
        return -1
    for i in range(m):
        for c in range(r):
            X[i, c] = 0.0
    if transpose:
        for j in range(p):
            for i in range(m):
                w = what[j, i]
                for c in range(r):
                    X[i, c] += w * other[j, c]
    else:
        for i in range(m):
            for j in range(p):
                w = what[i, j]
                for c in range(r):
                    X[i, c] += w * other[j, c]
    for i in range(m):
        _solve_clip(G, X, i)
    return 0


cdef int _masked_update(const double[:, ::1] what, const char[:, ::1] active,
                        const double[:, ::1] other, double[:, ::1] X, double[:, ::1] G,
                        double lam, bint transpose) noexcept nogil:
    # Row-wise ridge solves over the active cells of each row of X.
    cdef Py_ssize_t m = X.shape[0], p = other.shape[0], r = X.shape[1]
    cdef Py_ssize_t a, b, i, j, c
    cdef double w
    for i in range(m):
        for a in range(r):
            X[i, a] = 0.0
            for b in range(a + 1):
                G[a, b] = 0.0
            G[a, a] = lam
        for j in range(p):
            if transpose:
                if not active[j, i]:
                    continue
                w = what[j, i]
            else:
                if not active[i, j]:
                    continue
                w = what[i, j]
            for a in range(r):
                X[i, a] += w * other[j, a]
                for b in range(a + 1):
                    G[a, b] += other[j, a] * other[j, b]
        if _factor(G, lam) != 0:
            return -1
        _solve_clip(G, X, i)
    return 0


def censored_als(const double[:, ::1] observed, const double[:, ::1] mask,
                 const double[:, ::1] timeouts, double[:, ::1] Q, double[:, ::1] H,
                 double lam, int iters, bint masked=True):
    """Run ``iters`` sweeps, updating ``Q`` and ``H`` in place. Returns 0, or -1 on a singular Gram."""
    cdef Py_ssize_t n = observed.shape[0], k = observed.shape[1], r = Q.shape[1]
    cdef Py_ssize_t t
    cdef double[:, ::1] what = np.empty((n, k))
    cdef double[:, ::1] G = np.zeros((r, r))
    cdef char[:, ::1] active = np.zeros((n, k), dtype=np.int8)
    cdef int status = 0
    with nogil:
        for t in range(iters):
            _fill(observed, mask, timeouts, Q, H, what, active)
            if masked:
                status = _masked_update(what, active, H, Q, G, lam, False)
            else:
                status = _shared_update(what, H, Q, G, lam, False)
            if status != 0:
                break
            _fill(observed, mask, timeouts, Q, H, what, active)
            if masked:
                status = _masked_update(what, active, Q, H, G, lam, True)
            else:
                status = _shared_update(what, Q, H, G, lam, True)
            if status != 0:
                break
    return status
