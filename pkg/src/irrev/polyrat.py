"""Real polynomial and rational-function arithmetic.

Coefficients are stored in **ascending** powers everywhere, including the JSON
forms: ``[c0, c1, ..., cn]`` means ``c0 + c1*s + ... + cn*s**n``.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from .errors import ZeroDenominator, ZeroPolynomial

TOL_HURWITZ = 1e-9
TOL_COPRIME = 1e-8


def _as_coeffs(coeffs) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs))
    if np.iscomplexobj(c):
        if np.any(np.abs(c.imag) > 1e-12 * max(1.0, np.abs(c).max(initial=0.0))):
            raise ValueError("polynomial coefficients must be real")
        c = c.real
    c = np.array(c, dtype=float).ravel()
    if not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be finite")
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1] if nz.size else c[:0]
    c.setflags(write=False)
    return c


class Polynomial:
    """Immutable real polynomial, ascending coefficients.

    The zero polynomial has an empty coefficient vector and degree -1.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=()):
        object.__setattr__(self, "_c", _as_coeffs(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def from_roots(cls, roots, lead=1.0) -> "Polynomial":
        roots = np.asarray(roots, dtype=complex).ravel()
        c = np.array([1.0 + 0j])
        for r in roots:
            c = np.concatenate([[0.0], c]) - r * np.concatenate([c, [0.0]])
        return cls(lead * _realify(c))

    @classmethod
    def monomial(cls, k, coef=1.0) -> "Polynomial":
        c = np.zeros(k + 1)
        c[k] = coef
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        return self._c.size - 1

    @property
    def lead(self) -> float:
        return float(self._c[-1]) if self._c.size else 0.0

    def is_zero(self) -> bool:
        return self._c.size == 0

    def __call__(self, s):
        return polyval(self, s)

    def __len__(self):
        return self._c.size

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"Polynomial({self._c.tolist()})"

    def __neg__(self):
        return Polynomial(-self._c)

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        n = max(self._c.size, other._c.size)
        return Polynomial(_pad(self._c, n) + _pad(other._c, n))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return Polynomial()
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, Polynomial):
            return NotImplemented
        return Polynomial(self._c / float(scalar))

    def mirror(self) -> "Polynomial":
        """``p(-s)``."""
        sign = (-1.0) ** np.arange(self._c.size)
        return Polynomial(self._c * sign)

    def monic(self) -> "Polynomial":
        if self.is_zero():
            raise ZeroPolynomial("cannot normalize the zero polynomial")
        return Polynomial(self._c / self._c[-1])

    def derivative(self) -> "Polynomial":
        if self._c.size <= 1:
            return Polynomial()
        return Polynomial(self._c[1:] * np.arange(1, self._c.size))

    def trim(self, tol=1e-14) -> "Polynomial":
        """Drop high-order coefficients below ``tol`` times the largest magnitude."""
        if self.is_zero():
            return self
        scale = np.abs(self._c).max()
        c = np.where(np.abs(self._c) <= tol * scale, 0.0, self._c)
        return Polynomial(c)

    def roots(self) -> np.ndarray:
        return roots(self)

    def to_list(self) -> list:
        return [float(x) for x in self._c]


def _coerce(x):
    if isinstance(x, Polynomial):
        return x
    if np.isscalar(x) and np.isreal(x):
        return Polynomial([float(np.real(x))])
    return None


def _pad(c, n):
    out = np.zeros(n)
    out[: c.size] = c
    return out


def _realify(c):
    c = np.asarray(c, dtype=complex)
    return c.real


def polyval(p: Polynomial, s):
    """Horner evaluation; ``s`` may be a scalar or an array of complex points."""
    c = p.coeffs
    s = np.asarray(s)
    if c.size == 0:
        return np.zeros_like(s, dtype=np.result_type(s, float))
    out = np.full(s.shape, c[-1], dtype=np.result_type(s, float))
    for a in c[-2::-1]:
        out = out * s + a
    return out[()] if out.ndim == 0 else out


# module-level name matching the operation table
eval = polyval  # noqa: A001


def _pair_conjugates(r, tol=1e-9):
    """Snap near-real roots to the real line and average conjugate partners."""
    r = np.asarray(r, dtype=complex)
    mag = np.maximum(1.0, np.abs(r))
    real_mask = np.abs(r.imag) <= tol * mag
    out = list(r[real_mask].real.astype(complex))
    upper = sorted(r[(~real_mask) & (r.imag > 0)], key=lambda z: (z.real, z.imag))
    lower = list(r[(~real_mask) & (r.imag < 0)])
    for z in upper:
        if lower:
            k = int(np.argmin([abs(np.conj(w) - z) for w in lower]))
            w = lower.pop(k)
            zz = 0.5 * (z + np.conj(w))
        else:
            zz = z
        out.extend([zz, np.conj(zz)])
    out.extend(lower)
    return np.array(out, dtype=complex)


def _polish(c, r, iters=2):
    """A couple of Newton steps on each root; a step is kept only if it lowers |p|."""
    p = Polynomial(c)
    dp = p.derivative()
    r = r.copy()
    for _ in range(iters):
        val = polyval(p, r)
        der = polyval(dp, r)
        ok = np.abs(der) > 0
        step = np.zeros_like(r)
        step[ok] = val[ok] / der[ok]
        cand = r - step
        better = np.abs(polyval(p, cand)) < np.abs(val)
        r = np.where(better, cand, r)
    return r


def roots(p: Polynomial) -> np.ndarray:
    """Roots via eigenvalues of the (balanced) companion matrix.

    Exact zero roots are split off first; complex roots are returned in
    conjugate pairs.
    """
    if p.is_zero():
        raise ZeroPolynomial("roots of the zero polynomial are undefined")
    c = p.coeffs
    nzero = int(np.flatnonzero(c)[0])
    c_red = c[nzero:]
    n = c_red.size - 1
    out = [np.zeros(nzero, dtype=complex)]
    if n >= 1:
        a = c_red[:-1] / c_red[-1]
        comp = np.zeros((n, n))
        comp[1:, :-1] = np.eye(n - 1)
        comp[:, -1] = -a
        ev = linalg.eigvals(comp)
        ev = _polish(c_red, ev)
        out.append(_pair_conjugates(ev))
    return np.concatenate(out)


def is_hurwitz(p: Polynomial, tol=TOL_HURWITZ) -> bool:
    """True iff every root has real part below ``-tol`` (constants are Hurwitz)."""
    if p.is_zero():
        return False
    if p.degree == 0:
        return True
    return bool(np.all(roots(p).real < -tol))


def even_odd_split(p: Polynomial):
    """Return ``(even, odd)`` with ``even + odd == p`` coefficient-wise."""
    c = p.coeffs
    idx = np.arange(c.size)
    return Polynomial(np.where(idx % 2 == 0, c, 0.0)), Polynomial(np.where(idx % 2 == 1, c, 0.0))


class RationalFunction:
    """``num(s) / den(s)`` with real polynomial numerator and denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,)):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero():
            raise ZeroDenominator("rational function with zero denominator")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    def __call__(self, s):
        return polyval(self.num, s) / polyval(self.den, s)

    def __repr__(self):
        return f"RationalFunction(num={self.num.to_list()}, den={self.den.to_list()})"

    def __eq__(self, other):
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    @property
    def relative_degree(self) -> int:
        return self.den.degree - self.num.degree

    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    def is_strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def poles(self):
        return roots(self.den)

    def zeros(self):
        return roots(self.num) if self.num.degree >= 1 else np.zeros(0, dtype=complex)

    def normalized(self) -> "RationalFunction":
        """Same function with a monic denominator."""
        lead = self.den.lead
        return RationalFunction(self.num / lead, self.den / lead)

    def reduced(self, tol=TOL_COPRIME) -> "RationalFunction":
        return coprime_reduce(self, tol)

    def mirror(self) -> "RationalFunction":
        return RationalFunction(self.num.mirror(), self.den.mirror())

    def _other(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other)
        if np.isscalar(other):
            return RationalFunction([float(other)])
        return None

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise ZeroDenominator("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._other(other)
        return o / self

    def to_dict(self) -> dict:
        return {"num": self.num.to_list(), "den": self.den.to_list()}

    @classmethod
    def from_dict(cls, d) -> "RationalFunction":
        return cls(d["num"], d["den"])


def _match_common(rn, rd, tol):
    """Greedy nearest-neighbour pairing of numerator and denominator roots."""
    rn = list(rn)
    common, keep_d = [], []
    for z in rd:
        if rn:
            dist = np.abs(np.asarray(rn) - z)
            k = int(np.argmin(dist))
            if dist[k] <= tol * max(1.0, abs(z)):
                common.append(0.5 * (z + rn.pop(k)))
                continue
        keep_d.append(z)
    return np.array(rn, dtype=complex), np.array(keep_d, dtype=complex), np.array(common, dtype=complex)


def coprime_reduce(r: RationalFunction, tol=TOL_COPRIME) -> RationalFunction:
    """Cancel common roots of numerator and denominator, return with monic denominator.

    Roots pair when they lie within ``tol * max(1, |root|)`` of each other.
    When nothing cancels the coefficients are only rescaled, so the call is
    exact (and idempotent).
    """
    if r.den.is_zero():
        raise ZeroDenominator("rational function with zero denominator")
    if r.num.is_zero():
        return RationalFunction(Polynomial(), [1.0])
    if r.num.degree == 0 or r.den.degree == 0:
        return r.normalized()
    rn, rd = roots(r.num), roots(r.den)
    keep_n, keep_d, common = _match_common(rn, rd, tol)
    if common.size == 0:
        return r.normalized()
    num = Polynomial.from_roots(_pair_conjugates(keep_n), r.num.lead)
    den = Polynomial.from_roots(_pair_conjugates(keep_d), r.den.lead)
    return RationalFunction(num, den).normalized()
