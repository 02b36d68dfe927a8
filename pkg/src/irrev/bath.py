"""Finite-N truncation of the linear Hamiltonian heat bath.

Phase coordinates are stacked as ``(q, p)``. The canonical equations are
``q' = p``, ``p' = -V^2 q``; the conserved energy is
``H = (|p|^2 + q^T V^2 q) / 2`` and the invariant Gaussian law at temperature
``beta`` has covariance ``blkdiag(beta V^{-2}, beta I)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import TooFewSamples
from .estimate import WhitenessReport
from .rng import normal_stream


@dataclass(frozen=True)
class FiniteBath:
    Vsq: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        V = np.atleast_2d(np.asarray(self.Vsq, dtype=float))
        if V.shape[0] != V.shape[1]:
            raise ValueError("Vsq must be square")
        if np.max(np.abs(V - V.T), initial=0.0) > 1e-12 * max(1.0, np.abs(V).max()):
            raise ValueError("Vsq must be symmetric")
        V = 0.5 * (V + V.T)
        if np.linalg.eigvalsh(V)[0] <= 0:
            raise ValueError("Vsq must be positive definite")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        V.setflags(write=False)
        object.__setattr__(self, "Vsq", V)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def N(self) -> int:
        return self.Vsq.shape[0]

    def generator(self) -> np.ndarray:
        """``A_N = [[0, I], [-V^2, 0]]`` acting on ``(q, p)``."""
        N = self.N
        return np.block([[np.zeros((N, N)), np.eye(N)], [-self.Vsq, np.zeros((N, N))]])

    def energy(self, x):
        """Hamiltonian of stacked ``(q, p)`` rows."""
        x = np.atleast_2d(x)
        q, p = x[:, : self.N], x[:, self.N :]
        e = 0.5 * (np.sum(p * p, axis=1) + np.einsum("ij,jk,ik->i", q, self.Vsq, q))
        return e if e.size > 1 else float(e[0])

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {"Vsq": matrix_to_json(self.Vsq), "beta": self.beta}


def symplectic_form(N) -> np.ndarray:
    return np.block([[np.zeros((N, N)), np.eye(N)], [-np.eye(N), np.zeros((N, N))]])


def canonical_flow(bath: FiniteBath, t: float) -> np.ndarray:
    """``exp(t A_N)`` by scaling-and-squaring Pade (scipy ``expm``)."""
    return linalg.expm(t * bath.generator())


def canonical_flow_modal(bath: FiniteBath, t: float) -> np.ndarray:
    """Closed-form flow from the eigen-decomposition of ``V^2``.

    ``q(t) = cos(Vt) q + V^{-1} sin(Vt) p``, ``p(t) = -V sin(Vt) q + cos(Vt) p``.
    Independent of :func:`canonical_flow`; used to cross-check it.
    """
    w2, U = np.linalg.eigh(bath.Vsq)
    w = np.sqrt(w2)
    c, s = np.cos(w * t), np.sin(w * t)
    blk = lambda d: (U * d) @ U.T  # noqa: E731
    return np.block([[blk(c), blk(s / w)], [blk(-w * s), blk(c)]])


def invariant_covariance(bath: FiniteBath) -> np.ndarray:
    N = bath.N
    Vinv = linalg.inv(bath.Vsq)
    Vinv = 0.5 * (Vinv + Vinv.T)
    return np.block([[bath.beta * Vinv, np.zeros((N, N))], [np.zeros((N, N)), bath.beta * np.eye(N)]])


@dataclass(frozen=True)
class PhaseSample:
    p: np.ndarray
    q: np.ndarray


class PhaseSamples:
    """A batch of phase points; rows of ``q`` and ``p`` are individual samples."""

    def __init__(self, q, p):
        self.q = q
        self.p = p

    def __len__(self):
        return self.q.shape[0]

    def __getitem__(self, i) -> PhaseSample:
        return PhaseSample(self.p[i], self.q[i])

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def stacked(self) -> np.ndarray:
        """Rows ``(q, p)``."""
        return np.hstack([self.q, self.p])


def sample_phase(bath: FiniteBath, count: int, seed: int = 0, workers: int = 1) -> PhaseSamples:
    """I.i.d. draws from the invariant law; independent of ``workers``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    N = bath.N
    Lq = np.linalg.cholesky(invariant_covariance(bath)[:N, :N])
    z = normal_stream(seed, count, 2 * N, stream=1, workers=workers)
    return PhaseSamples(z[:, :N] @ Lq.T, np.sqrt(bath.beta) * z[:, N:])


def flow_samples(bath: FiniteBath, samples: PhaseSamples, t: float) -> PhaseSamples:
    Phi = canonical_flow(bath, t)
    x = samples.stacked() @ Phi.T
    N = bath.N
    return PhaseSamples(x[:, :N], x[:, N:])


def characteristic_functional(bath: FiniteBath, pi, xi) -> float:
    """``E exp(j(<pi, p> + <xi, q>))`` under the invariant law."""
    pi = np.asarray(pi, dtype=float)
    xi = np.asarray(xi, dtype=float)
    quad = pi @ pi + xi @ linalg.solve(bath.Vsq, xi, assume_a="pos")
    return float(np.exp(-0.5 * bath.beta * quad))


def characteristic_estimate(samples: PhaseSamples, pi, xi):
    """Monte-Carlo estimate and standard error of the characteristic function (real part)."""
    phase = samples.p @ np.asarray(pi, dtype=float) + samples.q @ np.asarray(xi, dtype=float)
    c = np.cos(phase)
    return float(c.mean()), float(c.std(ddof=1) / np.sqrt(c.size))


def characteristic_convergence(Ns=(4, 8, 16, 32, 64, 128), beta=1.0, coupling=0.5):
    """``C_N`` along a square-summable test direction for nested truncations.

    The infinite operator is ``V^2 = diag(1 + k^2) + coupling * (shift + shift^T)``,
    the direction ``pi_k = 1/k``, ``xi_k = 1/k``. Returns rows
    ``(N, C_N, |C_N - C_{previous N}|)``.
    """
    rows, prev = [], None
    for N in Ns:
        k = np.arange(1, N + 1, dtype=float)
        V = np.diag(1.0 + k**2) + coupling * (np.eye(N, k=1) + np.eye(N, k=-1))
        b = FiniteBath(V, beta)
        C = characteristic_functional(b, 1.0 / k, 1.0 / k)
        rows.append((N, C, np.nan if prev is None else abs(C - prev)))
        prev = C
    return rows


def momentum_whiteness(bath: FiniteBath, samples: PhaseSamples) -> WhitenessReport:
    """Cross-correlations of momentum coordinates and of momentum against position.

    Every off-diagonal p-p pair and every p-q pair is compared with the
    ``3/sqrt(count)`` band; at least 99% must fall inside.
    """
    count = len(samples)
    if count < 1000:
        raise TooFewSamples(f"need at least 1000 samples, got {count}")
    p = samples.p - samples.p.mean(axis=0)
    q = samples.q - samples.q.mean(axis=0)
    sp = p.std(axis=0)
    sq = q.std(axis=0)
    Cpp = (p.T @ p) / count / np.outer(sp, sp)
    Cpq = (p.T @ q) / count / np.outer(sp, sq)
    iu = np.triu_indices(bath.N, 1)
    corr = np.concatenate([Cpp[iu], Cpq.ravel()])
    band = 3.0 / np.sqrt(count)
    frac = float(np.mean(np.abs(corr) <= band)) if corr.size else 1.0
    labels = [f"p{i}-p{j}" for i, j in zip(*iu)] + [f"p{i}-q{j}" for i in range(bath.N) for j in range(bath.N)]
    return WhitenessReport(np.array(labels), corr, band, frac)
