import json

import numpy as np

from irrev import io
from irrev.bath import FiniteBath, sample_phase
from irrev.lossless import FosterForm
from irrev.testing import random_pair
from irrev.simulate import simulate_forward


def test_matrix_roundtrip(rng):
    A = rng.standard_normal((3, 4))
    d = json.loads(io.dumps(io.matrix_to_json(A)))
    assert d["rows"] == 3 and d["cols"] == 4
    assert np.array_equal(io.matrix_from_json(d), A)


def test_pair_roundtrip_is_exact(rng):
    pair = random_pair(rng, 4)
    doc = json.loads(io.dumps(pair.to_dict()))
    assert set(doc) == {"F", "G", "H", "P", "Fbar", "Gbar", "Hbar"}
    back = io.pair_from_json(doc)
    for name in ("F", "G", "H", "P", "Fbar"):
        assert np.array_equal(getattr(back, name), getattr(pair, name))


def test_foster_roundtrip_is_exact():
    f = FosterForm(1 / 3, 2 / 7, ((0.1, np.pi), (1e-17, 12345.678901234567)))
    assert FosterForm.from_dict(json.loads(io.dumps(f.to_dict()))) == f


def test_bath_roundtrip():
    b = FiniteBath([[2.0, 0.1], [0.1, 1.0]], 0.3)
    back = io.bath_from_json(json.loads(io.dumps(b.to_dict())))
    assert np.array_equal(back.Vsq, b.Vsq) and back.beta == b.beta


def test_path_csv_roundtrip(tmp_path, ou_pair):
    p = simulate_forward(ou_pair, 0.01, 500, seed=1)
    io.write_path_csv(tmp_path / "p.csv", p)
    header, data = io.read_path_csv(tmp_path / "p.csv")
    assert header == ["t", "y_1", "x_1"]
    assert np.array_equal(data[:, 1], p.scalar())
    assert np.array_equal(data[:, 0], p.times)


def test_samples_csv(tmp_path):
    b = FiniteBath(np.eye(2))
    s = sample_phase(b, 10, seed=2)
    io.write_samples_csv(tmp_path / "s.csv", s)
    header, data = io._read_table(tmp_path / "s.csv")
    assert header == ["q_1", "q_2", "p_1", "p_2"]
    assert np.array_equal(data, s.stacked())
