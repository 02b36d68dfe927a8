"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba versions are used when numba imports and ``IRREV_NUMBA`` is not
set to ``0``. Both flavours are always importable as ``<name>_numpy`` /
``<name>_numba`` so they can be compared directly (see
``benchmarks/bench_kernels.py``). All kernels are sequential with a fixed
reduction order, hence deterministic.
"""

import os

import numpy as np
from scipy import signal

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("IRREV_NUMBA", "1") not in ("0", "false", "no", "off")


def linear_recursion_numpy(A, E, x0):
    """``X[0] = x0``, ``X[k+1] = A X[k] + E[k]``; ``E`` has shape ``(steps - 1, n)``."""
    steps = E.shape[0] + 1
    n = x0.shape[0]
    X = np.empty((steps, n))
    X[0] = x0
    if n == 1:
        # first-order IIR filter, same arithmetic as the loop
        zi = np.array([A[0, 0] * x0[0]])
        X[1:, 0], _ = signal.lfilter([1.0], [1.0, -A[0, 0]], E[:, 0], zi=zi)
        return X
    At = np.ascontiguousarray(A.T)
    for k in range(steps - 1):
        X[k + 1] = X[k] @ At + E[k]
    return X


def lagged_products_numpy(Y, max_lag):
    """``C[k] = sum_t Y[t+k] Y[t]^T`` for ``k = 0..max_lag`` (unnormalized)."""
    N, m = Y.shape
    C = np.empty((max_lag + 1, m, m))
    for k in range(max_lag + 1):
        C[k] = Y[k:].T @ Y[: N - k]
    return C


def mean_sq_increments_numpy(y, lags):
    out = np.empty(len(lags))
    for i, L in enumerate(lags):
        d = y[L:] - y[:-L]
        out[i] = np.mean(d * d)
    return out


def rotated_readout_numpy(q, p, c, angles):
    """``<c, p cos(theta_k) - q sin(theta_k)>`` for each row ``k``, the momentum readout after unit-frequency rotation."""
    return np.cos(angles) * (p @ c) - np.sin(angles) * (q @ c)


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def linear_recursion_numba(A, E, x0):
        steps = E.shape[0] + 1
        n = x0.shape[0]
        X = np.empty((steps, n))
        X[0] = x0
        for k in range(steps - 1):
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += A[i, j] * X[k, j]
                X[k + 1, i] = acc + E[k, i]
        return X

    @numba.njit(cache=True, nogil=True)
    def lagged_products_numba(Y, max_lag):
        N, m = Y.shape
        C = np.zeros((max_lag + 1, m, m))
        for k in range(max_lag + 1):
            for a in range(m):
                for b in range(m):
                    acc = 0.0
                    for t in range(N - k):
                        acc += Y[t + k, a] * Y[t, b]
                    C[k, a, b] = acc
        return C

    @numba.njit(cache=True, nogil=True)
    def mean_sq_increments_numba(y, lags):
        out = np.empty(lags.shape[0])
        N = y.shape[0]
        for i in range(lags.shape[0]):
            L = lags[i]
            acc = 0.0
            for t in range(N - L):
                d = y[t + L] - y[t]
                acc += d * d
            out[i] = acc / (N - L)
        return out

    @numba.njit(cache=True, nogil=True)
    def rotated_readout_numba(q, p, c, angles):
        steps, N = p.shape
        out = np.empty(steps)
        for k in range(steps):
            pc = 0.0
            qc = 0.0
            for i in range(N):
                pc += p[k, i] * c[i]
                qc += q[k, i] * c[i]
            out[k] = np.cos(angles[k]) * pc - np.sin(angles[k]) * qc
        return out

else:  # pragma: no cover
    linear_recursion_numba = linear_recursion_numpy
    lagged_products_numba = lagged_products_numpy
    mean_sq_increments_numba = mean_sq_increments_numpy
    rotated_readout_numba = rotated_readout_numpy


def _pick(name):
    return globals()[f"{name}_numba" if USE_NUMBA else f"{name}_numpy"]


def linear_recursion(A, E, x0):
    A = np.ascontiguousarray(A, dtype=float)
    E = np.ascontiguousarray(E, dtype=float)
    x0 = np.ascontiguousarray(x0, dtype=float)
    return _pick("linear_recursion")(A, E, x0)


def lagged_products(Y, max_lag):
    return _pick("lagged_products")(np.ascontiguousarray(Y, dtype=float), int(max_lag))


def mean_sq_increments(y, lags):
    return _pick("mean_sq_increments")(np.ascontiguousarray(y, dtype=float), np.asarray(lags, dtype=np.int64))


def rotated_readout(q, p, c, angles):
    return _pick("rotated_readout")(
        np.ascontiguousarray(q, dtype=float),
        np.ascontiguousarray(p, dtype=float),
        np.ascontiguousarray(c, dtype=float),
        np.ascontiguousarray(angles, dtype=float),
    )


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
