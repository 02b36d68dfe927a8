"""Statistical instruments used to check simulated paths against the analytic models.

PSD convention throughout: ``var = (1/2pi) int Phi(lam) d lam`` over angular
frequency, two-sided. A white sequence of variance ``v`` sampled every ``dt``
therefore has flat level ``v * dt``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, signal

from . import _kernels
from .errors import PathTooShort, TooFewSamples

DEFAULT_SEGMENT = 1 << 14
WHITENESS_REQUIRED = 0.99
LINEAR_R2 = 0.999


def _values(path):
    v = path.values if hasattr(path, "values") else np.asarray(path, dtype=float)
    return v[:, None] if v.ndim == 1 else v


@dataclass
class SpectralEstimate:
    freqs: np.ndarray
    values: np.ndarray
    segment_count: int
    segment_length: int
    overlap: float
    window: str = "hann"

    def scalar(self) -> np.ndarray:
        v = self.values
        return v.real if v.ndim == 1 else v[:, 0, 0].real

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "segment_length": int(self.segment_length),
            "overlap": float(self.overlap),
            "segments": int(self.segment_count),
            "bins": int(self.freqs.size),
        }


def welch_psd(path, segment_length=DEFAULT_SEGMENT, overlap=0.5, window="hann", dt=None) -> SpectralEstimate:
    """Averaged modified periodogram (scipy ``welch``/``csd``).

    The path mean is removed once, globally; segments are not detrended, since
    per-segment mean removal biases the first bins low under a Hann window.

    Values are at ``lam = 2 pi f`` strictly between 0 and the Nyquist
    frequency; scalar paths give a 1-d array, vector paths ``(bins, m, m)``.
    """
    if window != "hann":
        raise ValueError("only the hann window is supported")
    Y = _values(path)
    Y = Y - Y.mean(axis=0)
    dt = path.dt if dt is None else dt
    L = int(segment_length)
    if Y.shape[0] < 2 * L:
        raise PathTooShort(f"path of {Y.shape[0]} samples is shorter than two segments of {L}")
    noverlap = int(round(overlap * L))
    fs = 1.0 / dt
    kw = dict(fs=fs, window="hann", nperseg=L, noverlap=noverlap, detrend=False, return_onesided=True, scaling="density")
    m = Y.shape[1]
    if m == 1:
        f, S = signal.welch(Y[:, 0], **kw)
        vals = 0.5 * S
    else:
        f = None
        vals = None
        for a in range(m):
            for b in range(m):
                f, S = signal.csd(Y[:, a], Y[:, b], **kw)
                if vals is None:
                    vals = np.empty((f.size, m, m), dtype=complex)
                # scipy's csd(x, y) is E[conj(X) Y]; store E[X_a conj(X_b)]
                vals[:, a, b] = 0.5 * np.conj(S)
    keep = (f > 0) & (f < 0.5 * fs)
    step = L - noverlap
    segs = (Y.shape[0] - noverlap) // step
    return SpectralEstimate(2 * np.pi * f[keep], vals[keep], segs, L, overlap, window)


def relative_l1_error(est: SpectralEstimate, reference, band) -> float:
    """``sum |est - ref| / sum |ref|`` over the estimate's bins inside ``band``.

    The bins are uniformly spaced, so this is the ratio of the L1 integrals.
    """
    lo, hi = band
    sel = (est.freqs >= lo) & (est.freqs <= hi)
    if not np.any(sel):
        raise ValueError("no frequency bins inside the band")
    ref = np.asarray(reference(est.freqs[sel]), dtype=float)
    return float(np.sum(np.abs(est.scalar()[sel] - ref)) / np.sum(np.abs(ref)))


def empirical_covariance(path, max_lag) -> np.ndarray:
    """Biased lag covariances ``C[k] = (1/N) sum_t y_{t+k} y_t^T`` after mean removal."""
    Y = _values(path)
    N = Y.shape[0]
    if max_lag < 0 or 4 * max_lag >= N:
        raise PathTooShort(f"max_lag must be below length/4 = {N / 4:g}")
    Y = Y - Y.mean(axis=0)
    return _kernels.lagged_products(Y, max_lag) / N


def bartlett_std(acov, k, N) -> float:
    """Large-sample std of the biased lag-``k`` autocovariance of a scalar series.

    ``acov`` holds the true autocovariance at lags ``0..J`` (zero beyond).
    """
    c = np.asarray(acov, dtype=float)
    J = c.size - 1
    full = np.concatenate([c[::-1], c[1:]])  # lags -J..J

    def at(j):
        return full[j + J] if -J <= j <= J else 0.0

    var = sum(at(j) ** 2 + at(j + k) * at(j - k) for j in range(-J - k, J + k + 1)) / N
    return float(np.sqrt(var))


@dataclass
class WhitenessReport:
    lags: np.ndarray
    correlations: np.ndarray
    band: float
    pass_fraction: float
    required: float = WHITENESS_REQUIRED

    @property
    def passed(self) -> bool:
        return self.pass_fraction >= self.required

    def to_dict(self) -> dict:
        return {
            "lags": np.asarray(self.lags).tolist(),
            "correlations": np.asarray(self.correlations).tolist(),
            "band": self.band,
            "pass_fraction": self.pass_fraction,
            "passed": self.passed,
        }


def whiteness_test(sequence, max_lag=20) -> WhitenessReport:
    """Normalized autocorrelations at lags ``1..max_lag`` against ``+-3/sqrt(count)``."""
    x = np.asarray(sequence, dtype=float).ravel()
    count = x.size
    if count < 1000:
        raise TooFewSamples(f"need at least 1000 samples, got {count}")
    x = x - x.mean()
    c = _kernels.lagged_products(x[:, None], max_lag)[:, 0, 0]
    if c[0] == 0:
        rho = np.zeros(max_lag)
    else:
        rho = c[1:] / c[0]
    band = 3.0 / np.sqrt(count)
    frac = float(np.mean(np.abs(rho) <= band))
    return WhitenessReport(np.arange(1, max_lag + 1), rho, band, frac)


@dataclass
class IncrementFit:
    slope: float
    intercept: float
    r2: float
    lags: np.ndarray = field(repr=False, default=None)
    msi: np.ndarray = field(repr=False, default=None)

    @property
    def linear(self) -> bool:
        return self.r2 >= LINEAR_R2

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "linear": self.linear}


def increment_variance_fit(path, lags, dt=None) -> IncrementFit:
    """Least-squares line through ``E|y(t + L dt) - y(t)|^2`` against ``L dt``."""
    Y = _values(path)
    dt = path.dt if dt is None else dt
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size < 2 or lags.min() < 1 or lags.max() >= Y.shape[0]:
        raise PathTooShort("lags must be positive and shorter than the path")
    msi = sum(_kernels.mean_sq_increments(Y[:, j], lags) for j in range(Y.shape[1]))
    x = lags * dt
    A = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, msi, rcond=None)
    resid = msi - A @ np.array([slope, icpt])
    ss_tot = float(np.sum((msi - msi.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return IncrementFit(float(slope), float(icpt), r2, lags, msi)


@dataclass(frozen=True)
class PNDReport:
    is_pnd: bool
    paley_wiener_value: float

    def to_dict(self) -> dict:
        return {"is_pnd": self.is_pnd, "paley_wiener_value": self.paley_wiener_value}


def pnd_check(phi) -> PNDReport:
    """Evaluate ``int log Phi(j lam) / (1 + lam^2) d lam``; finite means p.n.d."""
    if phi.num.is_zero():
        return PNDReport(False, float("-inf"))

    # lam = tan(u) turns the weight d lam / (1 + lam^2) into du on (-pi/2, pi/2);
    # the floor only touches isolated axis zeros, whose log singularity is integrable
    def g(u):
        return np.log(max(float(phi(np.tan(u))), 1e-300))

    val, _ = integrate.quad(g, -np.pi / 2, np.pi / 2, limit=400)
    return PNDReport(bool(np.isfinite(val)), float(val))


@dataclass
class EntropyTrajectory:
    times: np.ndarray
    values: np.ndarray
    terminal: float

    def increments(self) -> np.ndarray:
        v = self.values
        fin = np.isfinite(v)
        return np.diff(v[fin])

    def is_nondecreasing(self, slack=1e-10) -> bool:
        v = self.values
        fin = np.isfinite(v)
        # -inf is only allowed before the first finite value
        if fin.any() and not fin[np.argmax(fin) :].all():
            return False
        return bool(np.all(self.increments() >= -slack))

    def to_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "values": [float(v) if np.isfinite(v) else None for v in self.values],
            "terminal": self.terminal,
        }


def gaussian_entropy(P) -> float:
    n = P.shape[0]
    sign, logdet = np.linalg.slogdet(P)
    if sign <= 0:
        return float("-inf")
    return 0.5 * (n * np.log(2 * np.pi * np.e) + logdet)


def entropy_trajectory(pair, P0, times) -> EntropyTrajectory:
    """``S(t)`` of the Gaussian law with ``P(t) = e^{Ft}(P0 - P)e^{F^T t} + P``."""
    F, P = pair.F, pair.P
    P0 = np.atleast_2d(np.asarray(P0, dtype=float))
    times = np.asarray(times, dtype=float)
    D = P0 - P
    vals = np.empty(times.size)
    for i, t in enumerate(times):
        E = linalg.expm(F * t)
        Pt = E @ D @ E.T + P
        vals[i] = gaussian_entropy(0.5 * (Pt + Pt.T))
    return EntropyTrajectory(times, vals, gaussian_entropy(P))
