"""Cayley-type map between inner functions and lossless impedances, Foster forms.

``K = (1 - Z0) / (1 + Z0)``. For ``K = sign * chi(-s)/chi(s)`` the impedance
is a ratio of the odd and even parts of ``chi``: ``chi_o/chi_e`` for
``sign = +1`` and ``chi_e/chi_o`` for ``sign = -1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import KIsMinusOne, NotLossless, NotStrictlyProper, Z0IsMinusOne
from .grid import axis_points
from .polyrat import Polynomial, RationalFunction, coprime_reduce, even_odd_split, polyval, roots
from .realization import InnerFunction, StateSpaceModel, companion_realization

AXIS_TOL = 1e-9
INTERLACE_TOL = 1e-9


@dataclass(frozen=True)
class LosslessImpedance:
    rational: RationalFunction

    @property
    def num(self) -> Polynomial:
        return self.rational.num

    @property
    def den(self) -> Polynomial:
        return self.rational.den

    def __call__(self, s):
        return self.rational(s)

    def is_zero(self) -> bool:
        return self.rational.is_zero()

    def to_dict(self) -> dict:
        return self.rational.to_dict()


def _parity(p: Polynomial):
    """'even', 'odd', 'zero' or None (mixed)."""
    if p.is_zero():
        return "zero"
    e, o = even_odd_split(p)
    if o.is_zero():
        return "even"
    if e.is_zero():
        return "odd"
    return None


def k_to_z0(K) -> LosslessImpedance:
    """``Z0 = (1 - K)/(1 + K)``, coprime with monic denominator."""
    Kr = K.rational if isinstance(K, InnerFunction) else K
    a, b = Kr.num, Kr.den
    top, bot = b - a, b + a
    if bot.is_zero() or np.max(np.abs(bot.coeffs)) <= 1e-14 * np.max(np.abs(b.coeffs)):
        raise KIsMinusOne("K is identically -1; the impedance is unbounded")
    if top.is_zero():
        return LosslessImpedance(RationalFunction(Polynomial(), [1.0]))
    return LosslessImpedance(coprime_reduce(RationalFunction(top, bot)))


def z0_to_k(Z0) -> InnerFunction:
    """Inverse map ``K = (1 - Z0)/(1 + Z0)`` returned in ``sign * chi(-s)/chi(s)`` form."""
    Zr = Z0.rational if isinstance(Z0, LosslessImpedance) else Z0
    N, D = Zr.num, Zr.den
    top, bot = D - N, D + N
    if bot.is_zero():
        raise Z0IsMinusOne("Z0 is identically -1")
    chi = bot.monic()
    # top = sign * lead * chi(-s) for a lossless Z0
    mir = chi.mirror() * bot.lead
    n = max(len(top), len(mir))
    tc = np.zeros(n)
    tc[: len(top)] = top.coeffs
    mc = np.zeros(n)
    mc[: len(mir)] = mir.coeffs
    if np.allclose(tc, mc, rtol=1e-9, atol=1e-12 * np.abs(mc).max()):
        sign = 1
    elif np.allclose(tc, -mc, rtol=1e-9, atol=1e-12 * np.abs(mc).max()):
        sign = -1
    else:
        raise NotLossless("(1 - Z0)/(1 + Z0) is not of the form +-chi(-s)/chi(s)")
    return InnerFunction(chi, sign)


@dataclass
class FosterReport:
    parity_ok: bool
    axis_real_part: float
    residues: list
    poles_on_axis: bool
    poles_simple: bool
    residues_positive: bool
    interlacing_ok: bool
    k_inf: float = 0.0
    ok: bool = field(init=False)

    def __post_init__(self):
        self.ok = (
            self.parity_ok
            and self.axis_real_part <= 1e-9
            and self.poles_on_axis
            and self.poles_simple
            and self.residues_positive
            and self.interlacing_ok
            and self.k_inf >= 0.0
        )

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "parity_ok": self.parity_ok,
            "axis_real_part": self.axis_real_part,
            "poles_on_axis": self.poles_on_axis,
            "poles_simple": self.poles_simple,
            "residues_positive": self.residues_positive,
            "interlacing_ok": self.interlacing_ok,
            "k_inf": self.k_inf,
            "residues": [
                {"pole": [p.real, p.imag], "residue": [r.real, r.imag]} for p, r in self.residues
            ],
        }


def _axis_roots(p: Polynomial):
    """Roots of an even/odd polynomial, snapped onto the imaginary axis when close."""
    if p.degree < 1:
        return np.zeros(0, dtype=complex)
    r = roots(p)
    near = np.abs(r.real) <= 1e-7 * np.maximum(1.0, np.abs(r))
    r = np.where(near, 1j * r.imag, r)
    return r


def _residue(N: Polynomial, D: Polynomial, p):
    return polyval(N, p) / polyval(D.derivative(), p)


def verify_foster(Z0) -> FosterReport:
    """Foster (lossless positive-real) diagnostics for a rational ``Z0``."""
    Zr = Z0.rational if isinstance(Z0, LosslessImpedance) else Z0
    N, D = Zr.num, Zr.den
    pn, pd = _parity(N), _parity(D)
    parity_ok = pn == "zero" or (pn is not None and pd is not None and pn != pd)

    s = axis_points()
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = Zr(s)
    finite = np.isfinite(vals)
    axis_re = float(np.max(np.abs(vals[finite].real), initial=0.0))

    if N.is_zero():
        return FosterReport(parity_ok, axis_re, [], True, True, True, True, 0.0)

    poles = _axis_roots(D)
    zeros = _axis_roots(N)
    on_axis = bool(np.all(np.abs(poles.real) == 0.0))
    ords = np.sort(poles.imag)
    simple = bool(np.all(np.diff(ords) > INTERLACE_TOL)) if ords.size > 1 else True
    residues = [(p, complex(_residue(N, D, p))) for p in poles]
    res_pos = all(r.real > 0 and abs(r.imag) <= 1e-8 * max(1.0, abs(r)) for _, r in residues)

    k_inf = 0.0
    if N.degree == D.degree + 1:
        k_inf = N.lead / D.lead
    elif N.degree > D.degree + 1:
        res_pos = False

    # critical frequencies on the closed positive imaginary axis must alternate
    zo = zeros.imag[(np.abs(zeros.real) == 0) & (zeros.imag >= -INTERLACE_TOL)]
    po = poles.imag[(np.abs(poles.real) == 0) & (poles.imag >= -INTERLACE_TOL)]
    crit = sorted([(abs(w), 0) for w in zo] + [(abs(w), 1) for w in po])
    interlacing = bool(np.all(zeros.real == 0)) and all(
        crit[i][1] != crit[i + 1][1] and crit[i + 1][0] - crit[i][0] > INTERLACE_TOL for i in range(len(crit) - 1)
    )
    return FosterReport(parity_ok, axis_re, residues, on_axis, simple, res_pos, interlacing, float(k_inf))


@dataclass(frozen=True)
class FosterForm:
    """``k_inf s + k_0 / s + sum 2 k_i s / (s**2 + w_i**2)``."""

    k_inf: float = 0.0
    k_0: float = 0.0
    pairs: tuple = ()

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        out = self.k_inf * s
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.k_0:
                out = out + self.k_0 / s
            for k, w in self.pairs:
                out = out + 2 * k * s / (s**2 + w**2)
        return out

    def to_rational(self) -> RationalFunction:
        r = RationalFunction(Polynomial([0.0, self.k_inf]))
        if self.k_0:
            r = r + RationalFunction([self.k_0], [0.0, 1.0])
        for k, w in self.pairs:
            r = r + RationalFunction([0.0, 2 * k], [w**2, 0.0, 1.0])
        return r

    def to_dict(self) -> dict:
        return {"k_inf": self.k_inf, "k_0": self.k_0, "pairs": [[k, w] for k, w in self.pairs]}

    @classmethod
    def from_dict(cls, d) -> "FosterForm":
        return cls(float(d["k_inf"]), float(d["k_0"]), tuple((float(k), float(w)) for k, w in d["pairs"]))


def foster_synthesis(Z0) -> FosterForm:
    rep = verify_foster(Z0)
    if not rep.ok:
        raise NotLossless(f"impedance fails the Foster test: {rep.to_dict()}")
    Zr = Z0.rational if isinstance(Z0, LosslessImpedance) else Z0
    N, D = Zr.num, Zr.den
    if N.is_zero():
        return FosterForm()
    k_0 = 0.0
    pairs = []
    for p, r in rep.residues:
        w = p.imag
        if abs(w) <= INTERLACE_TOL:
            k_0 = r.real
        elif w > 0:
            pairs.append((float(r.real), float(w)))
    pairs.sort(key=lambda kw: kw[1])
    return FosterForm(float(rep.k_inf), float(k_0), tuple(pairs))


def load_state_space(Z0) -> StateSpaceModel:
    """Controller-canonical realization ``(F0, G0, H0)`` of a strictly proper ``Z0``."""
    Zr = Z0.rational if isinstance(Z0, LosslessImpedance) else Z0
    if Zr.is_zero():
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)))
    if not Zr.is_strictly_proper():
        raise NotStrictlyProper("the load must have no direct feedthrough")
    Zr = Zr.normalized()
    return companion_realization(Zr.num, Zr.den)


def storage_matrix(load: StateSpaceModel) -> np.ndarray:
    """Energy form ``Q`` with ``Q F0 + F0^T Q = 0`` and ``Q G0 = H0^T``.

    The stored energy ``x^T Q x / 2`` then satisfies ``d/dt = u * y``.
    """
    n = load.n
    if n == 0:
        return np.zeros((0, 0))
    F0, G0, H0 = load.F, load.G, load.H
    # unknowns vec(Q); symmetric part enforced by extra equations
    I = np.eye(n)
    A1 = np.kron(I, F0.T) + np.kron(F0.T, I)
    A2 = np.kron(I, G0.T)
    rows = [A1, A2]
    rhs = [np.zeros(n * n), H0.ravel()]
    S = np.zeros((n * (n - 1) // 2, n * n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            S[k, i * n + j] = 1.0
            S[k, j * n + i] = -1.0
            k += 1
    rows.append(S)
    rhs.append(np.zeros(S.shape[0]))
    q, *_ = np.linalg.lstsq(np.vstack(rows), np.concatenate(rhs), rcond=None)
    Q = q.reshape(n, n)
    return 0.5 * (Q + Q.T)
