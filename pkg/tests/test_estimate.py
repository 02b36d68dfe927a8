import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irrev.errors import PathTooShort, TooFewSamples
from irrev.estimate import (
    empirical_covariance,
    entropy_trajectory,
    gaussian_entropy,
    increment_variance_fit,
    pnd_check,
    relative_l1_error,
    welch_psd,
    whiteness_test,
)
from irrev.rng import normal_stream
from irrev.simulate import SamplePath, simulate_forward, simulate_wiener_observable
from irrev.spectral import ScalarSpectralDensity, validate_density
from irrev.testing import random_density, random_pair


def test_white_noise_level():
    x = normal_stream(1, 1 << 20, 1)[:, 0]
    est = welch_psd(SamplePath(1.0, x, 1), segment_length=2048)
    assert relative_l1_error(est, lambda lam: np.ones_like(lam), (0.0, np.pi)) <= 0.05
    assert est.window == "hann" and est.overlap == 0.5
    assert est.segment_count == (len(x) - 1024) // 1024


def test_white_noise_level_scales_with_dt():
    x = normal_stream(2, 1 << 18, 1)[:, 0]
    est = welch_psd(SamplePath(0.1, x, 2), segment_length=1024)
    assert np.mean(est.scalar()) == pytest.approx(0.1, rel=0.02)


def test_cosine_peak():
    dt, w = 0.01, 3.0
    t = dt * np.arange(1 << 16)
    est = welch_psd(SamplePath(dt, np.cos(w * t), 0), segment_length=4096)
    assert abs(est.freqs[np.argmax(est.scalar())] - w) <= 2 * np.pi / (4096 * dt)


def test_welch_rejects_short_and_other_windows():
    p = SamplePath(1.0, np.zeros(100), 0)
    with pytest.raises(PathTooShort):
        welch_psd(p, segment_length=64)
    with pytest.raises(ValueError):
        welch_psd(SamplePath(1.0, np.zeros(1000), 0), segment_length=64, window="boxcar")


def test_vector_psd_is_hermitian():
    z = normal_stream(3, 1 << 15, 2)
    y = np.column_stack([z[:, 0], z[:, 0] + z[:, 1]])
    est = welch_psd(SamplePath(1.0, y, 3), segment_length=512)
    S = est.values
    assert S.shape[1:] == (2, 2)
    np.testing.assert_allclose(S, np.conj(np.swapaxes(S, 1, 2)), atol=1e-12)
    assert np.mean(S[:, 1, 1].real) == pytest.approx(2.0, rel=0.05)
    assert np.mean(S[:, 0, 1].real) == pytest.approx(1.0, rel=0.05)


def test_welch_error_halves_when_samples_quadruple(ou_pair):
    phi = ScalarSpectralDensity([2.0], [1.0, 0.0, -1.0])
    band = (0.5, 5.0)
    errs = []
    # the error of a single estimate is itself noisy, so average a few seeds
    for steps in (1 << 16, 1 << 18):
        e = [relative_l1_error(welch_psd(simulate_forward(ou_pair, 0.01, steps, seed=s), 2048), phi, band)
             for s in range(40, 48)]
        errs.append(np.mean(e))
    assert 0.35 <= errs[1] / errs[0] <= 0.65


def test_empirical_covariance():
    c = empirical_covariance(SamplePath(1.0, np.full(1000, 3.0), 0), 5)
    assert c.shape == (6, 1, 1) and not np.any(c)
    with pytest.raises(PathTooShort):
        empirical_covariance(SamplePath(1.0, np.zeros(40), 0), 10)
    x = normal_stream(4, 100_000, 1)
    c = empirical_covariance(SamplePath(1.0, x, 4), 10)[:, 0, 0]
    assert abs(c[0] - 1) <= 3 * np.sqrt(2 / 1e5)
    assert np.all(np.abs(c[1:]) <= 3 / np.sqrt(1e5))


def test_whiteness_examples():
    assert whiteness_test(normal_stream(5, 100_000, 1)[:, 0]).passed
    e = normal_stream(6, 100_000, 1)[:, 0]
    ar = np.empty_like(e)
    ar[0] = e[0]
    for k in range(1, e.size):
        ar[k] = 0.5 * ar[k - 1] + e[k]
    rep = whiteness_test(ar)
    assert not rep.passed
    assert rep.correlations[0] == pytest.approx(0.5, abs=0.02)
    with pytest.raises(TooFewSamples):
        whiteness_test(np.zeros(100))


def test_increment_fit_examples(ou_pair):
    w = simulate_wiener_observable(1, 1.0, [1.0], 0.01, 400_000, seed=15)
    fit = increment_variance_fit(w, np.arange(1, 51))
    assert abs(fit.slope - 1) <= 0.05 and fit.r2 >= 0.999

    ou = simulate_forward(ou_pair, 0.01, 400_000, seed=16)
    fit = increment_variance_fit(ou, np.unique(np.logspace(0, 3, 40).astype(int)))
    assert not fit.linear
    # saturates at 2P = 2
    assert fit.msi[-1] == pytest.approx(2.0, rel=0.1)

    fit = increment_variance_fit(SamplePath(0.1, np.zeros(100), 0), [1, 2, 3])
    assert fit.slope == 0.0

    with pytest.raises(PathTooShort):
        increment_variance_fit(SamplePath(0.1, np.zeros(10), 0), [1, 20])


@given(st.integers(0, 2**31 - 1))
def test_pnd_finite_for_valid_densities(seed):
    phi = random_density(np.random.default_rng(seed), max_degree=6)
    assert validate_density(phi).passed
    assert np.isfinite(pnd_check(phi).paley_wiener_value)


def test_entropy_examples(ou_pair):
    t = np.linspace(0, 5, 51)
    tr = entropy_trajectory(ou_pair, ou_pair.P, t)
    np.testing.assert_allclose(tr.values, tr.terminal, atol=1e-13)

    tr = entropy_trajectory(ou_pair, [[0.0]], t)
    assert tr.values[0] == -np.inf
    want = 0.5 * np.log(2 * np.pi * np.e * (1 - np.exp(-2 * t[1:])))
    np.testing.assert_allclose(tr.values[1:], want, rtol=1e-12)
    assert tr.is_nondecreasing()

    tr = entropy_trajectory(ou_pair, [[0.0]], [0.0, 1.0, 10.0])
    assert abs(tr.values[-1] - 0.5 * np.log(2 * np.pi * np.e)) <= 1e-6
    assert tr.terminal == pytest.approx(gaussian_entropy(ou_pair.P))


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_h_theorem_from_point_mass(seed, n):
    pair = random_pair(np.random.default_rng(seed), n)
    tr = entropy_trajectory(pair, np.zeros((n, n)), np.linspace(0.0, 8.0, 81))
    assert tr.is_nondecreasing(slack=1e-10)
