import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irrev.errors import ZeroDenominator, ZeroPolynomial
from irrev.polyrat import (
    Polynomial,
    RationalFunction,
    coprime_reduce,
    even_odd_split,
    is_hurwitz,
    polyval,
    roots,
)
from irrev.testing import random_hurwitz_roots


def _sorted(z):
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((z.imag, z.real))]


def test_eval_examples():
    assert abs(polyval(Polynomial([1, 0, 1]), 1j)) == 0
    assert polyval(Polynomial([1, 1]), 0) == 1
    assert polyval(Polynomial([1, 1, 1]), 1j) == pytest.approx(1j)


def test_eval_zero_polynomial():
    assert polyval(Polynomial(), 3.0) == 0


def test_roots_examples():
    np.testing.assert_allclose(_sorted(roots(Polynomial([1, 0, 1]))), [-1j, 1j], atol=1e-14)
    want = _sorted([-0.5 - 1j * np.sqrt(3) / 2, -0.5 + 1j * np.sqrt(3) / 2])
    np.testing.assert_allclose(_sorted(roots(Polynomial([1, 1, 1]))), want, atol=1e-14)
    np.testing.assert_allclose(_sorted(roots(Polynomial([2, 3, 1]))), [-2, -1], atol=1e-14)


def test_roots_come_in_exact_conjugate_pairs(rng):
    r = roots(Polynomial(rng.standard_normal(9)))
    upper = _sorted(r[r.imag > 0])
    lower = _sorted(np.conj(r[r.imag < 0]))
    assert np.array_equal(upper, lower)


def test_roots_of_zero_polynomial():
    with pytest.raises(ZeroPolynomial):
        roots(Polynomial([0.0, 0.0]))


def test_zero_root_split_off():
    r = roots(Polynomial([0, 0, 2, 2]))
    assert np.sum(r == 0) == 2
    assert np.any(np.isclose(r, -1))


def test_is_hurwitz_examples():
    assert is_hurwitz(Polynomial([1, 1]))
    assert not is_hurwitz(Polynomial([-1, 1]))
    assert is_hurwitz(Polynomial([1, 1, 1]))
    assert not is_hurwitz(Polynomial([1, 0, 1]))


def test_even_odd_examples():
    e, o = even_odd_split(Polynomial([1, 1, 1]))
    assert e == Polynomial([1, 0, 1]) and o == Polynomial([0, 1])
    e, o = even_odd_split(Polynomial([2.5, 1]))
    assert e == Polynomial([2.5]) and o == Polynomial([0, 1])
    e, o = even_odd_split(Polynomial([1, 2, 2, 1]))
    assert e == Polynomial([1, 0, 2]) and o == Polynomial([0, 2, 0, 1])


def test_coprime_reduce_examples():
    r = coprime_reduce(RationalFunction([2, 3, 1], [3, 4, 1]))
    np.testing.assert_allclose(r.num.coeffs, [2, 1], atol=1e-12)
    np.testing.assert_allclose(r.den.coeffs, [3, 1], atol=1e-12)

    r = coprime_reduce(RationalFunction([0, 2], [2]))
    assert r.num == Polynomial([0, 1]) and r.den == Polynomial([1])

    r = coprime_reduce(RationalFunction([-1, 0, 1], [-1, 1]))
    np.testing.assert_allclose(r.num.coeffs, [1, 1], atol=1e-12)
    assert r.den == Polynomial([1])


def test_coprime_reduce_zero_numerator_and_denominator():
    r = coprime_reduce(RationalFunction([0.0], [1, 1]))
    assert r.is_zero() and r.den == Polynomial([1])
    with pytest.raises(ZeroDenominator):
        RationalFunction([1.0], [0.0])


def test_arithmetic():
    p, q = Polynomial([1, 1]), Polynomial([-1, 1])
    assert p * q == Polynomial([-1, 0, 1])
    assert p + q == Polynomial([0, 2])
    assert p - p == Polynomial()
    assert p.mirror() == Polynomial([1, -1])
    assert Polynomial([1, 2, 3]).derivative() == Polynomial([2, 6])
    r = RationalFunction([1], [1, 1]) + RationalFunction([1], [1, 1])
    assert r(0.0) == pytest.approx(2.0)


def test_immutable():
    p = Polynomial([1, 2])
    with pytest.raises(AttributeError):
        p.foo = 1
    with pytest.raises(ValueError):
        p.coeffs[0] = 3.0


coeff = st.floats(-5, 5, allow_nan=False).filter(lambda x: abs(x) > 1e-3)


@given(st.lists(coeff, min_size=2, max_size=13))
def test_roots_reconstruct_polynomial(c):
    p = Polynomial(c)
    back = Polynomial.from_roots(roots(p), p.lead)
    scale = np.max(np.abs(p.coeffs))
    assert np.max(np.abs(back.coeffs - p.coeffs)) <= 1e-8 * scale


@given(st.lists(coeff, min_size=1, max_size=13))
def test_even_odd_reassemble(c):
    p = Polynomial(c)
    e, o = even_odd_split(p)
    assert e + o == p
    assert e == e.mirror()
    assert o == -o.mirror()


@given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.integers(1, 6))
def test_coprime_reduce_idempotent(seed, dn, dd):
    rng = np.random.default_rng(seed)
    r = RationalFunction(
        Polynomial.from_roots(random_hurwitz_roots(rng, dn), 1.5),
        Polynomial.from_roots(random_hurwitz_roots(rng, dd), 0.5),
    )
    once = coprime_reduce(r)
    twice = coprime_reduce(once)
    assert once == twice
    s = 1j * np.linspace(-3, 3, 7)
    np.testing.assert_allclose(once(s), r(s), rtol=1e-6)


@given(st.integers(0, 2**31 - 1), st.integers(1, 8), st.floats(0.05, 3.0))
def test_hurwitz_agrees_with_root_signs(seed, d, a):
    rng = np.random.default_rng(seed)
    p = Polynomial.from_roots(random_hurwitz_roots(rng, d))
    assert is_hurwitz(p)
    assert not is_hurwitz(p * Polynomial([-a, 1]))
