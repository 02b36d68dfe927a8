import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irrev import _kernels

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


@given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.integers(2, 300))
def test_linear_recursion_flavours_agree(seed, n, steps):
    rng = np.random.default_rng(seed)
    A = 0.5 * rng.standard_normal((n, n)) / np.sqrt(n)
    E = rng.standard_normal((steps - 1, n))
    x0 = rng.standard_normal(n)
    a = _kernels.linear_recursion_numba(A, E, x0)
    b = _kernels.linear_recursion_numpy(A, E, x0)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_linear_recursion_scalar_matches_loop():
    rng = np.random.default_rng(1)
    A = np.array([[0.97]])
    E = rng.standard_normal((1000, 1))
    x = np.empty(1001)
    x[0] = 0.3
    for k in range(1000):
        x[k + 1] = 0.97 * x[k] + E[k, 0]
    np.testing.assert_allclose(_kernels.linear_recursion_numpy(A, E, np.array([0.3]))[:, 0], x, rtol=1e-13)
    np.testing.assert_allclose(_kernels.linear_recursion_numba(A, E, np.array([0.3]))[:, 0], x, rtol=1e-13)


@given(st.integers(0, 2**31 - 1), st.integers(1, 3), st.integers(0, 20))
def test_lagged_products_flavours_agree(seed, m, lag):
    Y = np.random.default_rng(seed).standard_normal((200, m))
    np.testing.assert_allclose(
        _kernels.lagged_products_numba(Y, lag), _kernels.lagged_products_numpy(Y, lag), rtol=1e-11, atol=1e-11
    )


def test_increments_and_readout_flavours_agree(rng):
    y = np.cumsum(rng.standard_normal(5000))
    lags = np.array([1, 2, 5, 40, 999], dtype=np.int64)
    np.testing.assert_allclose(
        _kernels.mean_sq_increments_numba(y, lags), _kernels.mean_sq_increments_numpy(y, lags), rtol=1e-12
    )
    q, p = rng.standard_normal((300, 4)), rng.standard_normal((300, 4))
    c, ang = rng.standard_normal(4), np.linspace(0, 3, 300)
    np.testing.assert_allclose(
        _kernels.rotated_readout_numba(q, p, c, ang), _kernels.rotated_readout_numpy(q, p, c, ang), rtol=1e-12, atol=1e-13
    )


def _run_with_flag(value, out):
    code = (
        "import sys\n"
        "import numpy as np\n"
        "from irrev import _kernels\n"
        "from irrev.acceptance import ou_pair\n"
        "from irrev.simulate import simulate_forward\n"
        "p = simulate_forward(ou_pair()[0], 0.01, 20000, seed=3)\n"
        "np.save(sys.argv[1], p.values)\n"
        "print(_kernels.backend())\n"
    )
    env = {**os.environ, "IRREV_NUMBA": value}
    res = subprocess.run([sys.executable, "-c", code, str(out)], env=env, capture_output=True, text=True, check=True)
    return res.stdout.strip(), np.load(out)


def test_env_flag_selects_backend(tmp_path):
    name0, y0 = _run_with_flag("0", tmp_path / "numpy.npy")
    name1, y1 = _run_with_flag("1", tmp_path / "numba.npy")
    assert (name0, name1) == ("numpy", "numba")
    np.testing.assert_allclose(y0, y1, rtol=1e-12, atol=1e-12)
