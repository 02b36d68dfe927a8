"""Path generation: the forward and backward diffusions, the line-bath junction, the Wiener observable.

Every linear model is discretized exactly. For ``dx = F x dt + G dw`` the step
map is ``A_d = exp(F dt)`` and the step noise has covariance
``Q_d = P - A_d P A_d^T``; the Van Loan integral is computed alongside as an
independent check. All randomness comes from :func:`irrev.rng.normal_stream`,
so a path is a pure function of its configuration and seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import _kernels
from .errors import AlgebraicLoop, NonPositiveDt, NotLossless, UnstableClosedLoop, ZeroDirection
from .lossless import storage_matrix
from .polyrat import Polynomial, RationalFunction
from .realization import ForwardBackwardPair, StateSpaceModel, solve_lyapunov, ss_to_tf
from .rng import default_seed, normal_stream

DISCRETIZATION_TOL = 1e-9
AXIS_TOL = 1e-8


def model_hash(obj) -> str:
    """sha256 of the canonical JSON form of ``obj.to_dict()`` (or of ``obj``)."""
    d = obj.to_dict() if hasattr(obj, "to_dict") else obj
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class SamplePath:
    dt: float
    values: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)
    states: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.dt <= 0:
            raise NonPositiveDt("dt must be positive")
        if self.values.shape[0] < 1:
            raise ValueError("a path has at least one sample")

    def __len__(self):
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self))

    def scalar(self) -> np.ndarray:
        return self.values[:, 0]


def _check_dt(dt):
    if not dt > 0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")


def _cov_sqrt(Q):
    """A square root ``L`` with ``L L^T = Q`` for a PSD ``Q``."""
    Q = 0.5 * (Q + Q.T)
    try:
        return np.linalg.cholesky(Q)
    except np.linalg.LinAlgError:
        w, U = np.linalg.eigh(Q)
        return U * np.sqrt(np.clip(w, 0.0, None))


def van_loan(F, G, dt):
    """``(A_d, Q_d)`` with ``Q_d = int_0^dt e^{F t} G G^T e^{F^T t} dt``."""
    n = F.shape[0]
    M = np.block([[-F, G @ G.T], [np.zeros((n, n)), F.T]]) * dt
    E = linalg.expm(M)
    Ad = E[n:, n:].T
    Qd = Ad @ E[:n, n:]
    return Ad, 0.5 * (Qd + Qd.T)


@dataclass(frozen=True)
class Discretization:
    Ad: np.ndarray
    Qd: np.ndarray
    Qd_vanloan: np.ndarray

    @property
    def mismatch(self) -> float:
        return float(np.max(np.abs(self.Qd - self.Qd_vanloan), initial=0.0))


def discretize(F, G, P, dt) -> Discretization:
    """Exact step map and noise covariance; both routes to ``Q_d`` are kept."""
    _check_dt(dt)
    Ad = linalg.expm(F * dt)
    Qd = P - Ad @ P @ Ad.T
    _, Qv = van_loan(F, G, dt)
    return Discretization(Ad, 0.5 * (Qd + Qd.T), Qv)


def _resolve_start(x0, P, z, n):
    if isinstance(x0, str):
        if x0 == "stationary":
            return _cov_sqrt(P) @ z
        if x0 == "zero":
            return np.zeros(n)
        raise ValueError(f"unknown start {x0!r}")
    x0 = np.asarray(x0, dtype=float).reshape(n)
    return x0


def _model_and_P(model):
    if isinstance(model, ForwardBackwardPair):
        return model.fwd, model.P
    P = solve_lyapunov(model.F, model.G @ model.G.T)
    return model, P


def _run(F, G, H, P, dt, steps, seed, x0, workers, label, stream=0):
    _check_dt(dt)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = F.shape[0]
    disc = discretize(F, G, P, dt)
    scale = max(1.0, float(np.max(np.abs(P), initial=0.0)))
    if disc.mismatch > DISCRETIZATION_TOL * scale:
        raise ArithmeticError(f"discretization routes disagree by {disc.mismatch:.3e}")
    Z = normal_stream(seed, steps, n, stream=stream, workers=workers)
    start = _resolve_start(x0, P, Z[0], n)
    E = Z[1:] @ _cov_sqrt(disc.Qd).T
    X = _kernels.linear_recursion(disc.Ad, E, start)
    Y = X @ H.T
    meta = {"kind": label, "discretization_mismatch": disc.mismatch, "backend": _kernels.backend()}
    return X, Y, meta


def simulate_forward(pair, dt, steps, seed=None, x0="stationary", workers=1) -> SamplePath:
    """Sample ``x_{k+1} = A_d x_k + eps_k``, ``y_k = H x_k``.

    ``pair`` may be a :class:`ForwardBackwardPair` or a bare forward
    :class:`StateSpaceModel` (e.g. with ``G = 0``). ``x0`` is ``"stationary"``,
    ``"zero"`` or a state vector.
    """
    seed = default_seed() if seed is None else int(seed)
    fwd, P = _model_and_P(pair)
    X, Y, meta = _run(fwd.F, fwd.G, fwd.H, P, dt, steps, seed, x0, workers, "forward")
    meta["model"] = model_hash(fwd)
    return SamplePath(dt, Y, seed, meta, X)


def simulate_backward(pair, dt, steps, seed=None, terminal="stationary", workers=1) -> SamplePath:
    """Sample the backward model from its terminal state toward earlier times.

    In reversed time ``s = T - t`` the backward diffusion reads
    ``dx = -Fbar x ds + G dw``, and ``-Fbar`` is stable. That recursion is run
    from ``terminal`` and the result is emitted in increasing time.
    ``pair`` may also be a bare backward :class:`StateSpaceModel` whose ``F``
    is the anti-stable ``Fbar``.
    """
    seed = default_seed() if seed is None else int(seed)
    if isinstance(pair, ForwardBackwardPair):
        bwd, P = pair.bwd, pair.P
    else:
        bwd = pair
        P = solve_lyapunov(-bwd.F, bwd.G @ bwd.G.T)
    X, Y, meta = _run(-bwd.F, bwd.G, bwd.H, P, dt, steps, seed, terminal, workers, "backward", stream=1)
    meta["model"] = model_hash(bwd)
    return SamplePath(dt, Y[::-1].copy(), seed, meta, X[::-1].copy())


@dataclass(frozen=True)
class LineBathConfig:
    """Lossless load on a semi-infinite line at temperature ``beta``.

    ``readout`` is an optional row ``C`` so that the recorded signal is
    ``C x`` instead of the junction output ``y = H0 x``.
    """

    load: StateSpaceModel
    beta: float = 1.0
    dt: float = 0.01
    steps: int = 1000
    seed: int = None
    readout: np.ndarray = None
    x0: str = "stationary"

    def __post_init__(self):
        _check_dt(self.dt)
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.seed is None:
            object.__setattr__(self, "seed", default_seed())
        F0 = self.load.F
        if F0.size and np.max(np.abs(linalg.eigvals(F0).real)) > AXIS_TOL:
            raise NotLossless("load state matrix has eigenvalues off the imaginary axis")

    def to_dict(self) -> dict:
        d = {
            "load": self.load.to_dict(),
            "beta": self.beta,
            "dt": self.dt,
            "steps": int(self.steps),
            "seed": int(self.seed),
            "x0": self.x0,
        }
        if self.readout is not None:
            d["readout"] = np.asarray(self.readout, dtype=float).ravel().tolist()
        return d


@dataclass
class LineBathReport:
    closed_loop_eigs: np.ndarray
    closed_loop: RationalFunction
    beta: float
    incident: np.ndarray
    reflected: np.ndarray
    energy_error: float
    energy_scale: float

    def predicted_psd(self, lam):
        """``beta/2 |T(j lam)|^2`` for the recorded signal."""
        lam = np.asarray(lam, dtype=float)
        return 0.5 * self.beta * np.abs(self.closed_loop(1j * lam)) ** 2

    @property
    def energy_rel_error(self) -> float:
        return self.energy_error / self.energy_scale if self.energy_scale > 0 else self.energy_error

    def to_dict(self) -> dict:
        return {
            "closed_loop_eigs": [[z.real, z.imag] for z in self.closed_loop_eigs],
            "closed_loop": self.closed_loop.to_dict(),
            "beta": self.beta,
            "energy_rel_error": self.energy_rel_error,
        }


def readout_for_numerator(N: Polynomial, n: int, beta: float, gain: float = 1.0) -> np.ndarray:
    """Row ``C`` making ``C x`` of a companion-form junction have density ``|gain N/chi|^2``.

    The closed loop maps the incident wave to ``2 [1, s, .., s^{n-1}] / chi``,
    and the incident intensity is ``beta/2``.
    """
    if N.degree >= n:
        raise ValueError("numerator degree must be below the state dimension")
    C = np.zeros(n)
    C[: len(N)] = N.coeffs
    return gain * C / np.sqrt(2.0 * beta)


def _energy_quadratic(Acl, B, H0, dt):
    """Van Loan integral of ``2 a y - y^2`` over one step, as a form on ``z = [x; a]``."""
    n = Acl.shape[0]
    At = np.zeros((n + 1, n + 1))
    At[:n, :n] = Acl
    At[:n, n:] = B
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = -H0.T @ H0
    M[:n, n:] = H0.T
    M[n:, :n] = H0
    big = np.block([[-At.T, M], [np.zeros_like(At), At]]) * dt
    E = linalg.expm(big)
    W = E[n + 1 :, n + 1 :].T @ E[: n + 1, n + 1 :]
    return 0.5 * (W + W.T), E[n + 1 :, n + 1 :]


def simulate_line_bath(cfg: LineBathConfig, workers=1, check_energy=True):
    """Drive the load through the scattering junction with thermal incident waves.

    Incident samples ``a_k`` are i.i.d. ``N(0, beta/(2 dt))`` and held for one
    step. The load sees ``u = 2 a - y``, so its state obeys
    ``x' = (F0 - G0 H0) x + 2 G0 a``; the reflected wave is ``b = a - y``.
    Returns ``(SamplePath, LineBathReport)``.
    """
    load = cfg.load
    if load.D is not None and np.any(load.D):
        raise AlgebraicLoop("the load has direct feedthrough")
    F0, G0, H0 = load.F, load.G, load.H
    n = load.n
    Acl = F0 - G0 @ H0
    eigs = linalg.eigvals(Acl) if n else np.zeros(0, dtype=complex)
    if n and np.max(eigs.real) >= 0:
        raise UnstableClosedLoop("junction closed loop is not stable")
    B = 2.0 * G0
    C = H0 if cfg.readout is None else np.atleast_2d(np.asarray(cfg.readout, dtype=float))

    dt, steps = cfg.dt, int(cfg.steps)
    Z = normal_stream(cfg.seed, steps, 1, stream=2, workers=workers)
    a = np.sqrt(cfg.beta / (2.0 * dt)) * Z[:, 0]

    if n == 0:
        y = np.zeros(steps)
        meta = {"kind": "line_bath", "backend": _kernels.backend()}
        rep = LineBathReport(eigs, RationalFunction(Polynomial()), cfg.beta, a, a.copy(), 0.0, 0.0)
        return SamplePath(dt, np.zeros((steps, C.shape[0])), cfg.seed, meta, np.zeros((steps, 0))), rep

    Wq, Phi = _energy_quadratic(Acl, B, H0, dt)
    Ad = Phi[:n, :n]
    Bd = Phi[:n, n]
    # stationary closed-loop state: Acl X + X Acl^T + (beta/2) B B^T = 0
    Xcov = solve_lyapunov(Acl, 0.5 * cfg.beta * B @ B.T) if cfg.beta > 0 else np.zeros((n, n))
    x0n = normal_stream(cfg.seed, 1, n, stream=3)[0]
    x0 = _resolve_start(cfg.x0, Xcov, x0n, n)
    E = a[:-1, None] * Bd[None, :]
    X = _kernels.linear_recursion(Ad, E, x0)
    y = X @ H0[0]
    b = a - y
    out = X @ C.T

    err, scale = 0.0, 0.0
    if check_energy:
        Q = storage_matrix(load)
        e = 0.5 * np.einsum("ki,ij,kj->k", X, Q, X)
        dE = np.diff(e)
        Zs = np.hstack([X[:-1], a[:-1, None]])
        supplied = np.einsum("ki,ij,kj->k", Zs, Wq, Zs)
        err = float(np.max(np.abs(supplied - dE), initial=0.0))
        scale = float(np.max(np.abs(dE), initial=0.0))

    T = ss_to_tf(Acl, B, C, 0.0)
    rep = LineBathReport(eigs, T, cfg.beta, a, b, err, scale)
    meta = {"kind": "line_bath", "backend": _kernels.backend(), "model": model_hash(cfg)}
    return SamplePath(dt, out, cfg.seed, meta, X), rep


def simulate_wiener_observable(N, beta, c, dt, steps, seed=None, workers=1) -> SamplePath:
    """Integrated momentum readout of a non-interacting bath (``V^2 = I``).

    Each step consumes a fresh slice of ``N`` independent oscillators drawn
    from the invariant law, carried along the unit-frequency rotation to the
    current time. The increment is ``<c, p(t_k)> sqrt(dt)``, and the path is
    the running sum, started at 0.
    """
    _check_dt(dt)
    seed = default_seed() if seed is None else int(seed)
    c = np.asarray(c, dtype=float).reshape(N)
    if not np.linalg.norm(c) > 0:
        raise ZeroDirection("direction c must be nonzero")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    Z = normal_stream(seed, steps - 1, 2 * N, stream=4, workers=workers) * np.sqrt(beta)
    angles = dt * np.arange(steps - 1)
    inc = _kernels.rotated_readout(Z[:, :N], Z[:, N:], c, angles) * np.sqrt(dt)
    y = np.concatenate([[0.0], np.cumsum(inc)])
    meta = {"kind": "wiener_observable", "N": int(N), "beta": float(beta), "c": c.tolist()}
    return SamplePath(dt, y, seed, meta)


def simulate_ensemble(fn, count, seed=None, workers=1):
    """``count`` independent paths ``fn(path_seed)``; see :func:`irrev.rng.ensemble`."""
    from .rng import ensemble

    seed = default_seed() if seed is None else int(seed)
    return ensemble(lambda s, i: fn(s), count, seed, workers)
