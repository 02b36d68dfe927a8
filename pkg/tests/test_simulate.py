import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from irrev.errors import AlgebraicLoop, NonPositiveDt, NotLossless, UnstableClosedLoop, ZeroDirection
from irrev.estimate import bartlett_std, empirical_covariance, increment_variance_fit, whiteness_test
from irrev.lossless import LosslessImpedance, k_to_z0, load_state_space
from irrev.polyrat import Polynomial, RationalFunction
from irrev.realization import StateSpaceModel, build_pair, covariance_function, minimal_realization, structural_function
from irrev.simulate import (
    LineBathConfig,
    discretize,
    readout_for_numerator,
    simulate_backward,
    simulate_forward,
    simulate_line_bath,
    simulate_wiener_observable,
    van_loan,
)
from irrev.testing import random_pair


def _acov(pair, dt, lags):
    return np.array([covariance_function(pair, k * dt)[0, 0] for k in lags])


def _within_bands(path, pair, dt, max_lag, sigmas=3.0):
    """Sample lag covariances of ``path`` against the model, with Bartlett bands."""
    N = len(path)
    got = empirical_covariance(path, max_lag)[:, 0, 0]
    # true autocovariance out to where it has decayed away, for the band formula
    tail = int(np.ceil(12.0 / dt))
    true = _acov(pair, dt, range(tail + max_lag + 1))
    std = np.array([bartlett_std(true, k, N) for k in range(max_lag + 1)])
    return np.abs(got - true[: max_lag + 1]) / std <= sigmas


def test_noiseless_decay():
    F = np.array([[-1.0, 2.0], [-2.0, -1.0]])
    m = StateSpaceModel(F, np.zeros((2, 1)), [[1.0, 0.0]])
    x0 = np.array([1.0, -0.5])
    path = simulate_forward(m, 0.1, 50, seed=1, x0=x0)
    for k in (0, 1, 17, 49):
        np.testing.assert_allclose(path.states[k], linalg.expm(F * 0.1 * k) @ x0, atol=1e-13)
    assert np.array_equal(path.states, simulate_forward(m, 0.1, 50, seed=2, x0=x0).states)


def test_nonpositive_dt(ou_pair):
    for dt in (0.0, -0.1):
        with pytest.raises(NonPositiveDt):
            simulate_forward(ou_pair, dt, 10)
        with pytest.raises(NonPositiveDt):
            simulate_backward(ou_pair, dt, 10)


def test_ou_forward_moments(ou_pair):
    dt = 0.05
    path = simulate_forward(ou_pair, dt, 200_000, seed=3)
    y = path.scalar()
    # var of the sample variance of a unit OU over T = steps * dt is about 2/T
    assert abs(y.var() - 1.0) <= 3 * np.sqrt(2.0 / (len(y) * dt))
    assert np.all(_within_bands(path, ou_pair, dt, 20))
    rho = np.corrcoef(y[1:], y[:-1])[0, 1]
    assert abs(rho - np.exp(-dt)) <= 3 * bartlett_std(_acov(ou_pair, dt, range(400)), 1, len(y))


def test_ou_backward_moments(ou_pair):
    dt = 0.05
    path = simulate_backward(ou_pair, dt, 200_000, seed=4)
    assert abs(path.scalar().var() - 1.0) <= 3 * np.sqrt(2.0 / (len(path) * dt))
    assert np.all(_within_bands(path, ou_pair, dt, 20))


def test_backward_noiseless_is_reversed_decay():
    bwd = StateSpaceModel([[1.0]], [[0.0]], [[1.0]])
    path = simulate_backward(bwd, 0.1, 30, seed=0, terminal=[2.0])
    k = np.arange(30)
    np.testing.assert_allclose(path.scalar(), 2.0 * np.exp(-0.1 * (29 - k)), rtol=1e-13)


def test_forward_backward_equivalence():
    pair = random_pair(np.random.default_rng(7), 3)
    dt = 0.05
    f = simulate_forward(pair, dt, 200_000, seed=5)
    b = simulate_backward(pair, dt, 200_000, seed=6)
    assert np.all(_within_bands(f, pair, dt, 20))
    assert np.all(_within_bands(b, pair, dt, 20))


@settings(max_examples=30)
@given(st.integers(0, 2**31 - 1), st.integers(1, 8), st.sampled_from([1e-3, 1e-1]))
def test_van_loan_agrees_with_stationary_difference(seed, n, dt):
    pair = random_pair(np.random.default_rng(seed), n)
    disc = discretize(pair.F, pair.G, pair.P, dt)
    assert disc.mismatch <= 1e-9 * max(1.0, np.abs(pair.P).max())
    Ad, _ = van_loan(pair.F, pair.G, dt)
    np.testing.assert_allclose(Ad, disc.Ad, atol=1e-12)


def test_seed_determinism(ou_pair):
    a = simulate_forward(ou_pair, 0.01, 200_000, seed=8, workers=1)
    b = simulate_forward(ou_pair, 0.01, 200_000, seed=8, workers=6)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, simulate_forward(ou_pair, 0.01, 200_000, seed=9).values)
    c = simulate_backward(ou_pair, 0.01, 100_000, seed=8, workers=3)
    assert np.array_equal(c.values, simulate_backward(ou_pair, 0.01, 100_000, seed=8).values)


def _z0(num, den):
    return LosslessImpedance(RationalFunction(num, den))


def test_line_bath_ou():
    load = load_state_space(_z0([1.0], [0.0, 1.0]))
    path, rep = simulate_line_bath(LineBathConfig(load, 1.0, 0.05, 200_000, seed=10))
    np.testing.assert_allclose(rep.closed_loop_eigs, [-1.0])
    lam = np.linspace(0, 10, 11)
    np.testing.assert_allclose(rep.predicted_psd(lam), 2 / (1 + lam**2), rtol=1e-12)
    assert rep.energy_rel_error <= 1e-9
    np.testing.assert_allclose(rep.reflected, rep.incident - path.scalar(), atol=0)
    ou = build_pair(StateSpaceModel([[-1.0]], [[np.sqrt(2)]], [[1.0]]))
    assert np.all(_within_bands(path, ou, 0.05, 20))


def test_line_bath_closed_loop_polynomial():
    load = load_state_space(_z0([0.0, 1.0], [1.0, 0.0, 1.0]))
    _, rep = simulate_line_bath(LineBathConfig(load, 1.0, 0.01, 10, seed=0))
    chi = Polynomial.from_roots(rep.closed_loop_eigs)
    np.testing.assert_allclose(chi.coeffs, [1, 1, 1], atol=1e-12)


def test_line_bath_cold_line_is_silent():
    load = load_state_space(_z0([0.0, 1.0], [1.0, 0.0, 1.0]))
    path, _ = simulate_line_bath(LineBathConfig(load, 0.0, 0.01, 1000, seed=0))
    assert not np.any(path.values)


def test_line_bath_matches_pair():
    pair = build_pair(minimal_realization(RationalFunction([0.5, 1.0], [1.0, 1.0, 1.0])))
    load = load_state_space(k_to_z0(structural_function(pair)))
    C = readout_for_numerator(Polynomial([0.5, 1.0]), 2, 1.0)
    dt = 0.05
    path, rep = simulate_line_bath(LineBathConfig(load, 1.0, dt, 200_000, seed=11, readout=C))
    lam = np.linspace(0.1, 10, 50)
    want = np.abs(np.polyval([1.0, 0.5], 1j * lam) / np.polyval([1, 1, 1], 1j * lam)) ** 2
    np.testing.assert_allclose(rep.predicted_psd(lam), want, rtol=1e-10)
    assert np.all(_within_bands(path, pair, dt, 20))


def test_line_bath_errors():
    with pytest.raises(NotLossless):
        LineBathConfig(StateSpaceModel([[-1.0]], [[1.0]], [[1.0]]))
    with pytest.raises(AlgebraicLoop):
        simulate_line_bath(LineBathConfig(StateSpaceModel([[0.0]], [[1.0]], [[1.0]], [[1.0]]), steps=5))
    with pytest.raises(UnstableClosedLoop):
        simulate_line_bath(LineBathConfig(StateSpaceModel([[0.0]], [[1.0]], [[-1.0]]), steps=5))
    with pytest.raises(NonPositiveDt):
        LineBathConfig(StateSpaceModel([[0.0]], [[1.0]], [[1.0]]), dt=0.0)


def test_line_bath_zero_load():
    path, rep = simulate_line_bath(LineBathConfig(load_state_space(_z0([0.0], [1.0])), 1.0, 0.01, 100, seed=1))
    assert path.values.shape == (100, 1) and not np.any(path.values)
    np.testing.assert_array_equal(rep.reflected, rep.incident)


def test_line_bath_determinism():
    load = load_state_space(_z0([0.0, 1.0], [1.0, 0.0, 1.0]))
    cfg = LineBathConfig(load, 1.0, 0.01, 150_000, seed=12)
    a, _ = simulate_line_bath(cfg, workers=1)
    b, _ = simulate_line_bath(cfg, workers=5)
    assert np.array_equal(a.values, b.values)


def test_wiener_slope_and_scaling():
    c = np.array([1.0, -0.5, 0.25])
    beta, dt = 1.5, 0.01
    lags = np.arange(1, 51)
    p1 = simulate_wiener_observable(3, beta, c, dt, 400_000, seed=13)
    fit1 = increment_variance_fit(p1, lags)
    assert abs(fit1.slope / (beta * c @ c) - 1) <= 0.05
    assert fit1.linear
    p2 = simulate_wiener_observable(3, beta, 2 * c, dt, 400_000, seed=13)
    fit2 = increment_variance_fit(p2, lags)
    assert fit2.slope / fit1.slope == pytest.approx(4.0, rel=1e-9)
    assert whiteness_test(np.diff(p1.scalar())).passed
    assert p1.scalar()[0] == 0.0


def test_wiener_errors():
    with pytest.raises(ZeroDirection):
        simulate_wiener_observable(2, 1.0, [0.0, 0.0], 0.01, 100)
    with pytest.raises(NonPositiveDt):
        simulate_wiener_observable(2, 1.0, [1.0, 0.0], -0.01, 100)
