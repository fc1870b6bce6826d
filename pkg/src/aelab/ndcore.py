"""Dense linear-algebra kernels every other module builds on.

All kernels operate on float64 row-major arrays (rows = observations) and are
pure: inputs are never mutated and identical inputs give bit-identical
outputs for a given backend.

Hot inner loops (pairwise distances, joint histograms) have numba-jitted
implementations with a pure-numpy fallback. Set AELAB_NO_NUMBA=1 to force
the numpy path; `NUMBA_ENABLED` reports which backend is live.
"""

import os

import numpy as np

from .errors import EmptyInputError, ShapeError

_NO_NUMBA = os.environ.get("AELAB_NO_NUMBA", "").lower() in ("1", "true", "yes")

if not _NO_NUMBA:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is an optional extra
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):  # noqa: D103 - decorator stub, jit disabled
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def as_matrix(a):
    """Coerce to a 2-D float64 array without copying when possible."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    return np.ascontiguousarray(a)


def matmul(a, b):
    """Matrix product a @ b with an explicit shape check."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dims differ, {a.shape} x {b.shape}")
    return a @ b


def column_mean(a):
    """Arithmetic mean of each column."""
    a = as_matrix(a)
    if a.shape[0] == 0:
        raise EmptyInputError("column_mean of an empty matrix")
    return a.mean(axis=0)


def column_variance(a):
    """Population variance (divide by N) of each column.

    The divide-by-N convention matches the expectation form
    Var(X) = E[X^2] - E[X]^2 used by the loss-bound checks.
    """
    a = as_matrix(a)
    if a.shape[0] == 0:
        raise EmptyInputError("column_variance of an empty matrix")
    return a.var(axis=0)


def _pairwise_sq_numpy(a, b):
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    sq = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(sq, 0.0, out=sq)
    return sq


@njit(cache=True)
def _pairwise_sq_numba(a, b):  # pragma: no cover - jit-compiled
    n, m = a.shape[0], b.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for k in range(m):
            s = 0.0
            for j in range(a.shape[1]):
                d = a[i, j] - b[k, j]
                s += d * d
            out[i, k] = s
    return out


def pairwise_euclidean(a, b):
    """L2 distances between every row of `a` and every row of `b`."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"pairwise_euclidean: widths differ, {a.shape} vs {b.shape}")
    if NUMBA_ENABLED:
        sq = _pairwise_sq_numba(a, b)
    else:
        sq = _pairwise_sq_numpy(a, b)
    return np.sqrt(sq)


def top_k_smallest(values, k):
    """Indices of the k smallest values, ascending, ties broken by lower index."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ShapeError("top_k_smallest expects a 1-D vector")
    if k > values.shape[0]:
        raise ShapeError(f"k={k} exceeds vector length {values.shape[0]}")
    return np.argsort(values, kind="stable")[:k]


def _joint_hist_numpy(x, y, bins, lo, hi):
    scale = bins / (hi - lo)
    ix = np.clip(((x - lo) * scale).astype(np.int64), 0, bins - 1)
    iy = np.clip(((y - lo) * scale).astype(np.int64), 0, bins - 1)
    flat = np.bincount(ix * bins + iy, minlength=bins * bins)
    return flat.reshape(bins, bins)


@njit(cache=True)
def _joint_hist_numba(x, y, bins, lo, hi):  # pragma: no cover - jit-compiled
    scale = bins / (hi - lo)
    out = np.zeros((bins, bins), dtype=np.int64)
    for i in range(x.shape[0]):
        ix = int((x[i] - lo) * scale)
        if ix < 0:
            ix = 0
        elif ix >= bins:
            ix = bins - 1
        iy = int((y[i] - lo) * scale)
        if iy < 0:
            iy = 0
        elif iy >= bins:
            iy = bins - 1
        out[ix, iy] += 1
    return out


def joint_histogram(x, y, bins, lo, hi):
    """Joint counts of paired values over `bins` x `bins` equal-width cells.

    Both axes share the [lo, hi) range so that joint_histogram(x, x, ...) is
    diagonal. Values outside the range land in the edge bins.
    """
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    y = np.ascontiguousarray(y, dtype=np.float64).ravel()
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"joint_histogram: lengths differ, {x.shape[0]} vs {y.shape[0]}")
    if bins < 2:
        raise ShapeError(f"joint_histogram: need >= 2 bins, got {bins}")
    if not hi > lo:
        raise ShapeError(f"joint_histogram: need hi > lo, got [{lo}, {hi}]")
    if NUMBA_ENABLED:
        return _joint_hist_numba(x, y, bins, lo, hi)
    return _joint_hist_numpy(x, y, bins, lo, hi)
