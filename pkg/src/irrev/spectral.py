"""Rational spectral densities and their spectral factors.

A scalar density is stored as a rational function of ``s`` whose restriction
to ``s = j*lambda`` is the density. Factors use the convention
``Phi(j lambda) = |W(j lambda)|**2`` and ``Var y = (1/2pi) * integral of Phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg

from .errors import (
    AxisPole,
    InvalidDensity,
    NoStabilizingSolution,
    NotNonnegative,
    RSingular,
)
from .grid import axis_points, validation_grid
from .polyrat import Polynomial, RationalFunction, coprime_reduce, polyval, roots
from .realization import StateSpaceModel, solve_lyapunov

PARITY_TOL = 1e-12
NONNEG_TOL = 1e-12
AXIS_TOL = 1e-9
# Imaginary-axis zeros of an even numerator are double; computed roots of a
# double root scatter by ~sqrt(eps), so they are recognized more loosely.
AXIS_ZERO_TOL = 1e-6


class ScalarSpectralDensity:
    """``Phi(s) = num(s)/den(s)`` with ``Phi(j lambda)`` the spectral density."""

    def __init__(self, num, den=(1.0,)):
        if isinstance(num, RationalFunction):
            self.rational = num
        else:
            self.rational = RationalFunction(num, den)

    @classmethod
    def from_factor(cls, N, chi, gain=1.0) -> "ScalarSpectralDensity":
        """``gain**2 * N(s) N(-s) / (chi(s) chi(-s))``."""
        N = N if isinstance(N, Polynomial) else Polynomial(N)
        chi = chi if isinstance(chi, Polynomial) else Polynomial(chi)
        return cls(gain**2 * (N * N.mirror()), chi * chi.mirror())

    @property
    def num(self) -> Polynomial:
        return self.rational.num

    @property
    def den(self) -> Polynomial:
        return self.rational.den

    def __call__(self, lam):
        """Density value at real angular frequency ``lam`` (real part)."""
        return np.real(self.rational(1j * np.asarray(lam, dtype=float)))

    def to_dict(self) -> dict:
        return self.rational.to_dict()

    def __repr__(self):
        return f"ScalarSpectralDensity(num={self.num.to_list()}, den={self.den.to_list()})"


@dataclass
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class DiagnosticsReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "margin": c.margin, "detail": c.detail}
                for c in self.checks
            ],
        }


def _odd_part_ratio(p: Polynomial) -> float:
    c = p.coeffs
    if c.size == 0:
        return 0.0
    return float(np.max(np.abs(c[1::2]), initial=0.0) / np.max(np.abs(c)))


def validate_density(phi: ScalarSpectralDensity, grid_points=512) -> DiagnosticsReport:
    rep = DiagnosticsReport()
    odd = max(_odd_part_ratio(phi.num), _odd_part_ratio(phi.den))
    rep.checks.append(Check("parity", odd <= PARITY_TOL, odd, "largest odd-power coefficient (relative)"))

    rep.checks.append(Check("nonzero", not phi.num.is_zero(), float(np.max(np.abs(phi.num.coeffs), initial=0.0))))

    if phi.den.degree >= 1:
        rd = roots(phi.den)
        axis = float(np.min(np.abs(rd.real) / np.maximum(1.0, np.abs(rd))))
    else:
        axis = np.inf
    rep.checks.append(Check("no_axis_poles", axis > AXIS_TOL, axis, "min |Re| of denominator roots"))

    deg_gap = phi.den.degree - phi.num.degree
    rep.checks.append(Check("proper", deg_gap >= 0, float(deg_gap), "deg den - deg num"))

    s = axis_points(grid_points)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = phi.rational(s)
    finite = np.isfinite(vals)
    imag = float(np.max(np.abs(vals[finite].imag) / np.maximum(1.0, np.abs(vals[finite])), initial=0.0))
    rep.checks.append(Check("real", imag <= 1e-10, imag, "max |Im Phi(j lambda)| (relative)"))
    vmin = float(np.min(vals[finite].real)) if finite.any() else -np.inf
    rep.checks.append(Check("nonnegative", vmin >= -NONNEG_TOL, vmin, "min Phi(j lambda) on grid"))
    return rep


@dataclass(frozen=True)
class SpectralFactor:
    tf: RationalFunction
    orientation: str = "analytic"

    def __call__(self, s):
        return self.tf(s)

    @property
    def num(self):
        return self.tf.num

    @property
    def den(self):
        return self.tf.den

    def to_dict(self) -> dict:
        return {**self.tf.to_dict(), "orientation": self.orientation}


def _raise_for(rep: DiagnosticsReport):
    failed = rep.failed()
    if "no_axis_poles" in failed:
        raise AxisPole("density has a pole on the imaginary axis")
    if "nonnegative" in failed or "nonzero" in failed:
        raise NotNonnegative(f"density is not nonnegative / nonzero: {failed}")
    if failed:
        raise InvalidDensity(f"invalid spectral density: {failed}")


def _half_roots(q: Polynomial, axis_tol, kind):
    """Left-half-plane square roots of the roots of ``q(x)``, where ``p(s) = q(s**2)``.

    Each root ``z`` of ``q`` gives the pair ``s = +-sqrt(z)``; the factor keeps
    ``-sqrt(z)``. Roots on the negative real ``x`` axis correspond to
    imaginary-axis roots of ``p`` and are taken one per multiplicity pair.
    """
    if q.degree < 1:
        return np.zeros(0, dtype=complex)
    z = roots(q)
    sq = np.sqrt(z.astype(complex))  # principal branch: Re >= 0
    on_axis = np.abs(sq.real) <= axis_tol * np.maximum(1.0, np.abs(sq))
    on_axis &= np.abs(z) > 0
    out = list(-sq[~on_axis])
    ax = np.sort(np.abs(sq[on_axis]))
    if ax.size:
        if kind == "den":
            raise AxisPole("density has a pole on the imaginary axis")
        if ax.size % 2:
            raise NotNonnegative("odd-multiplicity zero on the imaginary axis")
        for w in 0.5 * (ax[0::2] + ax[1::2]):
            out.extend([1j * w, -1j * w])
    return np.array(out, dtype=complex)


def _even_to_q(p: Polynomial) -> Polynomial:
    return Polynomial(p.coeffs[0::2])


def spectral_factor_scalar(phi: ScalarSpectralDensity) -> SpectralFactor:
    """Minimum-phase analytic factor ``W`` with ``|W(j lambda)|**2 = Phi(j lambda)``."""
    rep = validate_density(phi)
    _raise_for(rep)
    red = coprime_reduce(phi.rational)
    num = red.num
    den = red.den
    # coprime_reduce may leave tiny odd coefficients after a cancellation
    num = Polynomial(np.where(np.arange(len(num)) % 2 == 0, num.coeffs, 0.0))
    den = Polynomial(np.where(np.arange(len(den)) % 2 == 0, den.coeffs, 0.0))
    qn, qd = _even_to_q(num), _even_to_q(den)
    zn = _half_roots(qn, AXIS_ZERO_TOL, "num")
    zd = _half_roots(qd, AXIS_TOL, "den")
    cn = qn.lead * (-1.0) ** qn.degree
    cd = qd.lead * (-1.0) ** qd.degree
    ratio = cn / cd
    if ratio <= 0:
        raise NotNonnegative("leading-coefficient ratio is negative")
    Nw = Polynomial.from_roots(zn, np.sqrt(ratio))
    Dw = Polynomial.from_roots(zd)
    return SpectralFactor(RationalFunction(Nw, Dw), "analytic")


def coanalytic_factor(W: SpectralFactor) -> SpectralFactor:
    """``Wbar = N(s) / chi(-s)`` with the mirrored denominator made monic."""
    den = W.den.mirror()
    num = W.num / den.lead
    den = den.monic()
    if num.lead < 0:
        num = -num
    return SpectralFactor(RationalFunction(num, den), "coanalytic")


def factor_error(W, phi: ScalarSpectralDensity, points=512) -> float:
    """Max relative grid error of ``|W(j lambda)|**2`` against ``Phi(j lambda)``."""
    lam = validation_grid(points)
    target = phi(lam)
    got = np.abs(W(1j * lam)) ** 2
    return float(np.max(np.abs(got - target) / np.maximum(np.abs(target), 1e-300)))


@dataclass(frozen=True)
class MatrixSpectralModel:
    """Positive-real summand ``Z(s) = J + H (sI - F)^{-1} G`` of ``Phi = Z(s) + Z(-s)^T``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        for k in ("F", "G", "H", "J"):
            object.__setattr__(self, k, np.atleast_2d(np.asarray(getattr(self, k), dtype=float)))

    def density(self, lam):
        """``Phi(j lambda) = Z(j lambda) + Z(j lambda)^*`` as an array of m x m matrices."""
        Z = StateSpaceModel(self.F, self.G, self.H, self.J).transfer(1j * np.asarray(lam, dtype=float))
        return Z + np.conj(np.swapaxes(Z, -1, -2))

    def validate(self, grid_points=512) -> DiagnosticsReport:
        rep = DiagnosticsReport()
        ev = linalg.eigvals(self.F)
        rep.checks.append(Check("F_hurwitz", bool(np.all(ev.real < 0)), float(np.max(ev.real))))
        R = self.J + self.J.T
        try:
            np.linalg.cholesky(R)
            ok = True
        except np.linalg.LinAlgError:
            ok = False
        rep.checks.append(Check("R_posdef", ok, float(np.min(np.linalg.eigvalsh(R)))))
        Phi = self.density(validation_grid(grid_points))
        herm = float(np.max(np.abs(Phi - np.conj(np.swapaxes(Phi, -1, -2)))))
        rep.checks.append(Check("hermitian", herm <= 1e-10, herm))
        emin = float(np.min(np.linalg.eigvalsh(0.5 * (Phi + np.conj(np.swapaxes(Phi, -1, -2))))))
        rep.checks.append(Check("psd", emin >= -1e-10, emin))
        return rep

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {k: matrix_to_json(getattr(self, k)) for k in ("F", "G", "H", "J")}


@dataclass(frozen=True)
class MatrixSpectralFactor:
    """``W(s) = D + H (sI - F)^{-1} B`` with ``W W^* = Phi`` on the axis."""

    F: np.ndarray
    B: np.ndarray
    H: np.ndarray
    D: np.ndarray
    P: np.ndarray

    @property
    def model(self) -> StateSpaceModel:
        return StateSpaceModel(self.F, self.B, self.H, self.D)

    def __call__(self, s):
        return self.model.transfer(s)


def _hamiltonian_are(A, M, Q):
    """Stabilizing solution of ``A X + X A^T + X M X + Q = 0`` (``A + X M`` Hurwitz).

    Ordered real Schur form of the Hamiltonian ``[[A^T, M], [-Q, -A]]``,
    followed by Newton refinement.
    """
    n = A.shape[0]
    Ham = np.block([[A.T, M], [-Q, -A]])
    ev = linalg.eigvals(Ham)
    if np.min(np.abs(ev.real)) <= 1e-10 * max(1.0, np.max(np.abs(ev))):
        raise NoStabilizingSolution("Hamiltonian matrix has eigenvalues on the imaginary axis")
    T, Z, sdim = linalg.schur(Ham, output="real", sort="lhp")
    if sdim != n:
        raise NoStabilizingSolution(f"stable subspace has dimension {sdim}, expected {n}")
    U1, U2 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(U1) > 1e12:
        raise NoStabilizingSolution("stable invariant subspace is not a graph")
    X = linalg.solve(U1.T, U2.T).T
    X = 0.5 * (X + X.T)
    for _ in range(3):
        Ac = A + X @ M
        Res = A @ X + X @ A.T + X @ M @ X + Q
        if np.linalg.norm(Res) <= 1e-15 * (1 + np.linalg.norm(X)):
            break
        if np.any(linalg.eigvals(Ac).real >= 0):
            break
        dX = linalg.solve_continuous_lyapunov(Ac, -Res)
        Xn = X + 0.5 * (dX + dX.T)
        Resn = A @ Xn + Xn @ A.T + Xn @ M @ Xn + Q
        if np.linalg.norm(Resn) >= np.linalg.norm(Res):
            break
        X = Xn
    if np.any(linalg.eigvals(A + X @ M).real >= 0):
        raise NoStabilizingSolution("closed loop is not Hurwitz")
    return X


def solve_are(F, G, H, R):
    """Stabilizing ``P`` of ``F P + P F^T + (G - P H^T) R^{-1} (G - P H^T)^T = 0``.

    Stabilizing means ``F - (G - P H^T) R^{-1} H`` is Hurwitz.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    G = np.atleast_2d(np.asarray(G, dtype=float)).reshape(F.shape[0], -1)
    H = np.atleast_2d(np.asarray(H, dtype=float)).reshape(-1, F.shape[0])
    R = np.atleast_2d(np.asarray(R, dtype=float))
    Ri = linalg.inv(R)
    A = F - G @ Ri @ H
    M = H.T @ Ri @ H
    Q = G @ Ri @ G.T
    return _hamiltonian_are(A, M, Q)


def are_residual(F, G, H, R, P) -> float:
    F, G, H, R = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (F, G, H, R))
    G = G.reshape(F.shape[0], -1)
    H = H.reshape(-1, F.shape[0])
    B = G - P @ H.T
    return float(np.linalg.norm(F @ P + P @ F.T + B @ linalg.solve(R, B.T)))


def spectral_factor_matrix(M: MatrixSpectralModel) -> MatrixSpectralFactor:
    """Minimum-phase state-space factor of ``Z(s) + Z(-s)^T`` via the positive-real Riccati equation."""
    R = M.J + M.J.T
    ev = np.linalg.eigvalsh(0.5 * (R + R.T))
    if ev[0] <= 1e-12 * max(1.0, abs(ev[-1])):
        raise RSingular("J + J^T must be positive definite")
    P = solve_are(M.F, M.G, M.H, R)
    Dw = linalg.sqrtm(R).real
    Dw = 0.5 * (Dw + Dw.T)
    B = linalg.solve(Dw.T, (M.G - P @ M.H.T).T).T
    return MatrixSpectralFactor(M.F, B, M.H, Dw, P)


def spectral_distribution(phi: ScalarSpectralDensity, lam) -> float:
    """``F(lam) = integral_{-inf}^{lam} Phi(j mu) d mu``; infinite for non-integrable densities."""
    if lam == -np.inf:
        return 0.0
    if phi.den.degree - phi.num.degree < 2:
        return np.inf
    f = lambda mu: float(phi(mu))  # noqa: E731
    if lam <= 0:
        val, _ = integrate.quad(f, -np.inf, lam, epsabs=1e-10, epsrel=1e-12, limit=400)
        return val
    left, _ = integrate.quad(f, -np.inf, 0.0, epsabs=1e-10, epsrel=1e-12, limit=400)
    if lam == np.inf:
        right, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-10, epsrel=1e-12, limit=400)
    else:
        right, _ = integrate.quad(f, 0.0, lam, epsabs=1e-10, epsrel=1e-12, limit=400)
    return left + right


__all__ = [
    "ScalarSpectralDensity",
    "SpectralFactor",
    "MatrixSpectralModel",
    "MatrixSpectralFactor",
    "DiagnosticsReport",
    "Check",
    "validate_density",
    "spectral_factor_scalar",
    "coanalytic_factor",
    "spectral_factor_matrix",
    "solve_are",
    "are_residual",
    "spectral_distribution",
    "factor_error",
]
