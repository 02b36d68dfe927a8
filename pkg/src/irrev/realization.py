"""State-space realizations and the forward/backward Markovian pair.

The backward model shares the forward state (``Hbar = H``, ``Gbar = G``), so
``Fbar = -P F^T P^{-1}`` and the two models describe one stationary process in
opposite time orientations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import (
    DegenerateOutput,
    NegativeLag,
    NotCoprime,
    NotHurwitz,
    NotStrictlyProper,
    PSingular,
)
from .grid import axis_points
from .polyrat import Polynomial, RationalFunction, coprime_reduce, roots

RANK_TOL = 1e-8


@dataclass(frozen=True)
class StateSpaceModel:
    """``x' = F x + G w``, ``y = H x + D w``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    D: np.ndarray = None

    def __post_init__(self):
        F = np.asarray(self.F, dtype=float)
        n = int(round(np.sqrt(F.size)))
        F = F.reshape(n, n)
        G = np.asarray(self.G, dtype=float)
        H = np.asarray(self.H, dtype=float)
        if G.ndim != 2:
            G = G.reshape(n, -1) if n else np.zeros((0, 1))
        if H.ndim != 2:
            H = H.reshape(-1, n) if n else np.zeros((1, 0))
        D = np.zeros((H.shape[0], G.shape[1])) if self.D is None else np.asarray(self.D, dtype=float)
        D = D.reshape(H.shape[0], G.shape[1])
        for name, val in (("F", F), ("G", G), ("H", H), ("D", D)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def r(self) -> int:
        return self.G.shape[1]

    def transfer(self, s):
        """Evaluate ``H (sI - F)^{-1} G + D`` at one or many complex points; shape ``(..., m, r)``."""
        s = np.asarray(s, dtype=complex)
        flat = s.ravel()
        out = np.broadcast_to(self.D, (flat.size, self.m, self.r)).astype(complex)
        if self.n:
            M = flat[:, None, None] * np.eye(self.n) - self.F
            B = np.broadcast_to(self.G, (flat.size, self.n, self.r))
            X = np.linalg.solve(M, B)
            # Far from the poles the entries of X span many decades (s**k / chi(s)
            # for a companion F) and partial pivoting loses the small ones; a
            # second solve, columns scaled by |X| and rows equilibrated, keeps
            # them to working precision.
            d = np.max(np.abs(X), axis=2)
            d = np.where(d > 0, d, 1.0)
            A = M * d[:, None, :]
            rs = np.max(np.abs(A), axis=2)
            rs = np.where(rs > 0, rs, 1.0)
            X = np.linalg.solve(A / rs[:, :, None], B / rs[:, :, None]) * d[:, :, None]
            out = out + self.H @ X
        return out.reshape(s.shape + (self.m, self.r))

    def controllability_matrix(self):
        blocks, b = [], self.G
        for _ in range(self.n):
            blocks.append(b)
            b = self.F @ b
        return np.hstack(blocks) if blocks else np.zeros((0, 0))

    def observability_matrix(self):
        blocks, c = [], self.H
        for _ in range(self.n):
            blocks.append(c)
            c = c @ self.F
        return np.vstack(blocks) if blocks else np.zeros((0, 0))

    def is_controllable(self, tol=RANK_TOL) -> bool:
        return _numerical_rank(self.controllability_matrix(), tol) == self.n

    def is_observable(self, tol=RANK_TOL) -> bool:
        return _numerical_rank(self.observability_matrix(), tol) == self.n

    def is_minimal(self, tol=RANK_TOL) -> bool:
        return self.is_controllable(tol) and self.is_observable(tol)

    def is_hurwitz(self, tol=0.0) -> bool:
        return self.n == 0 or bool(np.all(linalg.eigvals(self.F).real < -tol))

    def char_poly(self) -> Polynomial:
        """Monic characteristic polynomial of ``F``."""
        if self.n == 0:
            return Polynomial([1.0])
        return Polynomial.from_roots(roots_of_matrix(self.F))

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {k: matrix_to_json(getattr(self, k)) for k in ("F", "G", "H", "D")}


def _numerical_rank(A, tol):
    if A.size == 0:
        return 0
    sv = linalg.svdvals(A)
    return int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0


def roots_of_matrix(F):
    """Eigenvalues of a real matrix with conjugate pairs made exact."""
    from .polyrat import _pair_conjugates

    return _pair_conjugates(linalg.eigvals(F))


def minimal_realization(W: RationalFunction) -> StateSpaceModel:
    """Controller-canonical realization of a coprime, strictly proper scalar ``W``."""
    if not W.is_strictly_proper():
        raise NotStrictlyProper(f"deg num {W.num.degree} >= deg den {W.den.degree}")
    if W.num.is_zero():
        raise NotCoprime("zero numerator reduces to the zero function")
    red = coprime_reduce(W)
    if red.den.degree < W.den.degree:
        raise NotCoprime(f"common factor of degree {W.den.degree - red.den.degree}")
    W = W.normalized()
    return companion_realization(W.num, W.den)


def companion_realization(num: Polynomial, den: Polynomial) -> StateSpaceModel:
    """Controller-canonical form for ``num/den`` with monic ``den`` and ``deg num < deg den``."""
    n = den.degree
    a = den.coeffs / den.lead
    F = np.zeros((n, n))
    if n:
        F[:-1, 1:] = np.eye(n - 1)
        F[-1, :] = -a[:n]
    G = np.zeros((n, 1))
    if n:
        G[-1, 0] = 1.0
    H = np.zeros((1, n))
    b = num.coeffs / den.lead
    H[0, : b.size] = b
    return StateSpaceModel(F, G, H)


def solve_lyapunov(F, Q):
    """Solve ``F P + P F^T + Q = 0`` for Hurwitz ``F`` (Bartels-Stewart)."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if F.size and np.any(linalg.eigvals(F).real >= 0):
        raise NotHurwitz("Lyapunov solve needs a Hurwitz matrix")
    if not np.any(Q):
        return np.zeros_like(Q)
    P = linalg.solve_continuous_lyapunov(F, -Q)
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class ForwardBackwardPair:
    fwd: StateSpaceModel
    P: np.ndarray
    bwd: StateSpaceModel

    @property
    def F(self):
        return self.fwd.F

    @property
    def G(self):
        return self.fwd.G

    @property
    def H(self):
        return self.fwd.H

    @property
    def Fbar(self):
        return self.bwd.F

    @property
    def n(self):
        return self.fwd.n

    def residuals(self, taus=(0.1, 1.0, 3.0)) -> dict:
        """Measured violations of the pair invariants."""
        F, G, P, Fb = self.F, self.G, self.P, self.Fbar
        GG = G @ G.T
        scale = max(np.linalg.norm(GG), np.finfo(float).tiny)
        lyap = np.linalg.norm(F @ P + P @ F.T + GG) / scale
        mirror = eigen_mirror_distance(F, Fb)
        flow = max(
            np.linalg.norm(linalg.expm(F * t) @ P - P @ linalg.expm(-Fb.T * t)) for t in taus
        )
        return {
            "lyapunov_rel": float(lyap),
            "mirror": float(mirror),
            "exp_identity": float(flow),
            "gbar": float(np.linalg.norm(self.bwd.G @ self.bwd.G.T - GG)),
            "hbar": float(np.linalg.norm(self.bwd.H - self.H)),
        }

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {
            "F": matrix_to_json(self.F),
            "G": matrix_to_json(self.G),
            "H": matrix_to_json(self.H),
            "P": matrix_to_json(self.P),
            "Fbar": matrix_to_json(self.Fbar),
            "Gbar": matrix_to_json(self.bwd.G),
            "Hbar": matrix_to_json(self.bwd.H),
        }


def eigen_mirror_distance(F, Fbar):
    """Greedy matching distance between eig(Fbar) and -eig(F)."""
    a = list(-linalg.eigvals(F))
    worst = 0.0
    for z in linalg.eigvals(Fbar):
        d = np.abs(np.asarray(a) - z)
        k = int(np.argmin(d))
        worst = max(worst, float(d[k]))
        a.pop(k)
    return worst


def build_pair(fwd: StateSpaceModel) -> ForwardBackwardPair:
    F, G = fwd.F, fwd.G
    if not fwd.is_hurwitz():
        raise NotHurwitz("forward model must have a Hurwitz F")
    P = solve_lyapunov(F, G @ G.T)
    ev = np.linalg.eigvalsh(P) if P.size else np.ones(1)
    if ev[0] <= 1e-12 * max(ev[-1], 1e-300):
        raise PSingular("state covariance is singular; reduce the uncontrollable part first")
    # Fbar = -P F^T P^{-1}  ==  -(P^{-1} F P)^T
    Fbar = -linalg.solve(P, F @ P, assume_a="pos").T
    bwd = StateSpaceModel(Fbar, G, fwd.H, fwd.D)
    return ForwardBackwardPair(fwd, P, bwd)


@dataclass(frozen=True)
class InnerFunction:
    """``K(s) = sign * chi(-s) / chi(s)`` with ``chi`` Hurwitz and monic."""

    chi: Polynomial
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "chi", self.chi.monic())

    @property
    def num(self) -> Polynomial:
        return self.sign * self.chi.mirror()

    @property
    def den(self) -> Polynomial:
        return self.chi

    @property
    def rational(self) -> RationalFunction:
        return RationalFunction(self.num, self.den)

    def __call__(self, s):
        return self.rational(s)

    def unimodularity_error(self, points=None) -> float:
        s = axis_points() if points is None else points
        return float(np.max(np.abs(np.abs(self(s)) - 1.0)))

    def to_dict(self) -> dict:
        return {**self.rational.to_dict(), "sign": self.sign, "chi": self.chi.to_list()}


def structural_function(pair: ForwardBackwardPair) -> InnerFunction:
    """Scalar structural function from the characteristic polynomial of ``F``.

    The sign is ``(-1)**n``, the choice that makes ``(1 - K)/(1 + K)`` strictly
    proper; it coincides with the noise map ``I - G^T P^{-1} (sI - F)^{-1} G``
    of the same-state backward model.
    """
    chi = pair.fwd.char_poly()
    return InnerFunction(chi, (-1) ** chi.degree)


def structural_state_space(pair: ForwardBackwardPair) -> StateSpaceModel:
    """Matrix structural function ``K(s) = I - G^T P^{-1} (sI - F)^{-1} G``."""
    G, P = pair.G, pair.P
    C = -linalg.solve(P, G, assume_a="pos").T
    return StateSpaceModel(pair.F, G, C, np.eye(G.shape[1]))


def structural_deviation(pair: ForwardBackwardPair, K: InnerFunction, points=None, measure="pointwise"):
    """Compare ``Wbar^{-1} W`` with ``K`` on the grid (scalar models).

    Returns ``(c, dev)``: the fitted unimodular constant and the deviation.
    ``measure="pointwise"`` is the largest ``|W / (Wbar K) - c|``;
    ``measure="normwise"`` is ``max |W - c K Wbar| / max |W|``, which stays
    meaningful where ``|W|`` has decayed below the rounding level of the
    dense backward realization.
    """
    s = axis_points() if points is None else points
    W = pair.fwd.transfer(s)[..., 0, 0]
    Wb = pair.bwd.transfer(s)[..., 0, 0]
    Ks = K(s)
    ratio = W / (Wb * Ks)
    weights = np.abs(W)
    c = np.sum(ratio * weights) / np.sum(weights)
    c = c / abs(c)
    if measure == "pointwise":
        return complex(c), float(np.max(np.abs(ratio - c)))
    if measure == "normwise":
        return complex(c), float(np.max(np.abs(W - c * Ks * Wb)) / np.max(np.abs(W)))
    raise ValueError(f"unknown measure {measure!r}")


def ss_to_tf(F, G, C, D=0.0) -> RationalFunction:
    """Scalar transfer ``C (sI - F)^{-1} G + D`` as a rational function.

    Uses ``C adj(sI - F) G = det(sI - F + G C) - det(sI - F)``.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    G = np.asarray(G, dtype=float).reshape(-1, 1)
    C = np.asarray(C, dtype=float).reshape(1, -1)
    D = float(np.asarray(D).ravel()[0]) if np.size(D) else 0.0
    chi = Polynomial.from_roots(roots_of_matrix(F))
    shifted = Polynomial.from_roots(roots_of_matrix(F - G @ C))
    num = (shifted - chi) + D * chi
    return RationalFunction(num.trim(1e-13), chi)


@dataclass
class InvarianceReport:
    tbar: RationalFunction
    min_pole_real: float
    modulus_deviation: float
    coanalytic: bool = field(init=False)
    passed: bool = field(init=False)
    pole_tol: float = 1e-6
    modulus_tol: float = 1e-7

    def __post_init__(self):
        self.coanalytic = self.min_pole_real >= -self.pole_tol
        self.passed = self.coanalytic and self.modulus_deviation <= self.modulus_tol


def invariance_check(pair: ForwardBackwardPair, C, D, K: InnerFunction = None, tol=1e-8):
    """Check that ``T K^{-1}`` is co-analytic for the output ``C x + D w``."""
    K = structural_function(pair) if K is None else K
    T = ss_to_tf(pair.F, pair.G, C, D)
    if T.num.is_zero() or np.max(np.abs(T.num.coeffs)) <= 1e-14 * max(1.0, np.max(np.abs(T.den.coeffs))):
        raise DegenerateOutput("output functional has identically zero transfer")
    Kinv = RationalFunction(K.den, K.num)
    tbar = coprime_reduce(T * Kinv, tol)
    poles = roots(tbar.den) if tbar.den.degree >= 1 else np.zeros(0)
    min_re = float(np.min(poles.real)) if poles.size else np.inf
    s = axis_points()
    dev = float(np.max(np.abs(np.abs(tbar(s)) - np.abs(T(s)))))
    return InvarianceReport(tbar, min_re, dev)


def covariance_function(pair: ForwardBackwardPair, tau):
    """``Lambda(tau) = H e^{F tau} P H^T`` for ``tau >= 0``."""
    if tau < 0:
        raise NegativeLag("negative lag: use Lambda(-tau) = Lambda(tau)^T")
    return pair.H @ linalg.expm(pair.F * tau) @ pair.P @ pair.H.T


def covariance_function_backward(pair: ForwardBackwardPair, tau):
    """The same covariance from the backward model, ``H P e^{-Fbar^T tau} H^T``."""
    if tau < 0:
        raise NegativeLag("negative lag: use Lambda(-tau) = Lambda(tau)^T")
    return pair.H @ pair.P @ linalg.expm(-pair.Fbar.T * tau) @ pair.H.T
