"""Seeded random models for property tests, the acceptance suite and benchmarks."""

import numpy as np

from .polyrat import Polynomial
from .realization import StateSpaceModel, build_pair
from .spectral import ScalarSpectralDensity


def random_hurwitz_roots(rng, degree, re_range=(0.2, 3.0), im_max=3.0):
    """``degree`` roots in the open left half-plane, closed under conjugation."""
    out = []
    while len(out) < degree:
        if degree - len(out) >= 2 and rng.random() < 0.6:
            z = complex(-rng.uniform(*re_range), rng.uniform(0.1, im_max))
            out += [z, z.conjugate()]
        else:
            out.append(complex(-rng.uniform(*re_range), 0.0))
    return np.array(out)


def random_hurwitz(rng, degree, **kw) -> Polynomial:
    return Polynomial.from_roots(random_hurwitz_roots(rng, degree, **kw))


def random_factor_pair(rng, max_degree=8, strictly_proper=True):
    """``(N, chi)`` both Hurwitz, ``chi`` monic, ``deg N < deg chi`` (``<=`` if not strict)."""
    d = int(rng.integers(1, max_degree + 1))
    top = d - 1 if strictly_proper else d
    dn = int(rng.integers(0, top + 1))
    N = Polynomial.from_roots(random_hurwitz_roots(rng, dn), rng.uniform(0.5, 2.0))
    return N, random_hurwitz(rng, d)


def random_density(rng, max_degree=8, strictly_proper=True) -> ScalarSpectralDensity:
    N, chi = random_factor_pair(rng, max_degree, strictly_proper)
    return ScalarSpectralDensity.from_factor(N, chi)


def random_stable_matrix(rng, n):
    """``-(I/2 + B B^T / n)`` plus a skew part: Hurwitz with spread-out spectrum."""
    B = rng.standard_normal((n, n))
    S = rng.standard_normal((n, n))
    return -(0.5 * np.eye(n) + B @ B.T / n) + 0.8 * (S - S.T)


def random_model(rng, n, r=None, m=1) -> StateSpaceModel:
    r = n if r is None else r
    F = random_stable_matrix(rng, n)
    G = rng.standard_normal((n, r))
    H = rng.standard_normal((m, n))
    return StateSpaceModel(F, G, H)


def random_pair(rng, n, r=None, m=1):
    return build_pair(random_model(rng, n, r, m))


def random_bath_matrix(rng, N):
    """Symmetric positive definite ``V^2`` with eigenvalues in roughly ``[0.5, 4]``."""
    A = rng.standard_normal((N, N))
    Q, _ = np.linalg.qr(A)
    w = rng.uniform(0.5, 4.0, N)
    V = (Q * w) @ Q.T
    return 0.5 * (V + V.T)
