import json

import numpy as np
import pytest

from irrev.cli import EXIT_DOMAIN, EXIT_IO, EXIT_OK, main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _read(path):
    return json.loads(path.read_text())


@pytest.fixture
def ou_density(tmp_path):
    return _write(tmp_path / "ou.json", {"num": [2.0], "den": [1.0, 0.0, -1.0]})


def test_factorize_ou(tmp_path, ou_density):
    out = tmp_path / "out"
    assert main(["factorize", "--input", ou_density, "--out-dir", str(out)]) == EXIT_OK
    f = _read(out / "factors.json")
    np.testing.assert_allclose(f["analytic"]["num"], [np.sqrt(2)], rtol=1e-14)
    np.testing.assert_allclose(f["analytic"]["den"], [1.0, 1.0])
    assert f["validation"]["passed"]
    man = _read(out / "manifest.json")
    assert man["subcommand"] == "factorize" and "factors.json" in man["outputs"]
    assert man["config"]["grid_points"] == 512


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["factorize", "--input", str(bad), "--out-dir", str(tmp_path / "a")]) == EXIT_IO
    assert "malformed" in capsys.readouterr().err

    neg = _write(tmp_path / "neg.json", {"num": [-1.0], "den": [1.0, 0.0, -1.0]})
    assert main(["factorize", "--input", neg, "--out-dir", str(tmp_path / "b")]) == EXIT_DOMAIN
    rep = _read(tmp_path / "b" / "factors.report.json")
    assert "nonnegative" in [c["name"] for c in rep["validation"]["checks"] if not c["passed"]]

    assert main(["realize", "--input", str(tmp_path / "missing.json"), "--out-dir", str(tmp_path / "c")]) == EXIT_IO
    assert main(["nosuchcommand"]) == EXIT_IO


def test_chained_stages_match_pipeline(tmp_path, ou_density):
    out = tmp_path / "chain"
    src = ou_density
    for stage, name in [("factorize", "factors"), ("realize", "model"), ("backward", "pair"),
                        ("structural", "structural"), ("lossless", "lossless"), ("foster", "foster")]:
        assert main([stage, "--input", src, "--out-dir", str(out)]) == EXIT_OK
        src = str(out / f"{name}.json")
    pipe = tmp_path / "pipe"
    assert main(["pipeline", "--input", ou_density, "--out-dir", str(pipe)]) == EXIT_OK
    for name in ("factors", "model", "pair", "structural", "lossless", "foster"):
        assert (out / f"{name}.json").read_bytes() == (pipe / f"{name}.json").read_bytes()

    k = _read(pipe / "structural.json")["structural"]
    assert k["sign"] == -1 and k["chi"] == [1.0, 1.0]
    z = _read(pipe / "lossless.json")["impedance"]
    np.testing.assert_allclose(z["num"], [1.0])
    np.testing.assert_allclose(z["den"], [0.0, 1.0])
    f = _read(pipe / "foster.json")["foster"]
    assert f["k_0"] == pytest.approx(1.0) and f["pairs"] == [] and f["k_inf"] == 0.0


def test_pipeline_second_order(tmp_path):
    # |1/(s^2+s+1)|^2 has denominator chi(s) chi(-s) = 1 + s^2 + s^4
    src = _write(tmp_path / "d.json", {"num": [1.0], "den": [1.0, 0.0, 1.0, 0.0, 1.0]})
    assert main(["pipeline", "--input", src, "--out-dir", str(tmp_path)]) == EXIT_OK
    z = _read(tmp_path / "lossless.json")["impedance"]
    np.testing.assert_allclose(z["num"], [0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(z["den"], [1.0, 0.0, 1.0], atol=1e-12)
    pairs = _read(tmp_path / "foster.json")["foster"]["pairs"]
    np.testing.assert_allclose(pairs, [[0.5, 1.0]], atol=1e-12)


def test_simulate_is_byte_identical(tmp_path, ou_density):
    main(["pipeline", "--input", ou_density, "--out-dir", str(tmp_path)])
    pair = str(tmp_path / "pair.json")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--input", pair, "--seed", "7", "--steps", "5000", "--out-dir", str(a)]) == EXIT_OK
    assert main(["simulate", "--input", pair, "--seed", "7", "--steps", "5000", "--workers", "4",
                 "--out-dir", str(b)]) == EXIT_OK
    assert (a / "path.csv").read_bytes() == (b / "path.csv").read_bytes()
    header = (a / "path.csv").read_text().splitlines()[0]
    assert header == "t,y_1,x_1"


def test_default_seed_env(tmp_path, ou_density, monkeypatch):
    main(["pipeline", "--input", ou_density, "--out-dir", str(tmp_path)])
    monkeypatch.setenv("IRREV_SEED", "99")
    assert main(["simulate", "--input", str(tmp_path / "pair.json"), "--steps", "100",
                 "--out-dir", str(tmp_path / "s")]) == EXIT_OK
    assert _read(tmp_path / "s" / "path.json")["seed"] == 99


def test_rerun_reproduces_outputs(tmp_path, ou_density, capsys):
    main(["pipeline", "--input", ou_density, "--out-dir", str(tmp_path)])
    first = tmp_path / "first"
    assert main(["bathsim", "--input", str(tmp_path / "pair.json"), "--steps", "20000",
                 "--out-dir", str(first)]) == EXIT_OK
    assert main(["rerun", "--input", str(first / "manifest.json"), "--out-dir", str(tmp_path / "again")]) == EXIT_OK
    assert "reproduced" in capsys.readouterr().out


def test_bathsim_reports_closed_loop(tmp_path, ou_density):
    main(["pipeline", "--input", ou_density, "--out-dir", str(tmp_path)])
    out = tmp_path / "bs"
    assert main(["bathsim", "--input", str(tmp_path / "pair.json"), "--steps", "50000", "--out-dir", str(out)]) == EXIT_OK
    rep = _read(out / "bath_path.json")
    eig = rep["report"]["closed_loop_eigs"]
    np.testing.assert_allclose(eig, [[-1.0, 0.0]], atol=1e-12)
    assert (out / "bath_psd.csv").read_text().startswith("lambda,value")


def test_estimate_against_reference(tmp_path, ou_density):
    main(["pipeline", "--input", ou_density, "--out-dir", str(tmp_path)])
    main(["simulate", "--input", str(tmp_path / "pair.json"), "--steps", "200000", "--out-dir", str(tmp_path)])
    assert main(["estimate", "--input", str(tmp_path / "path.csv"), "--segment", "2048",
                 "--reference", ou_density, "--out-dir", str(tmp_path / "e")]) == EXIT_OK
    meta = _read(tmp_path / "e" / "psd.json")
    assert meta["l1_error_vs_reference"] < 0.15
    assert meta["covariance"][0][0][0] == pytest.approx(1.0, abs=0.1)


def test_bath_samples(tmp_path):
    src = _write(tmp_path / "b.json", {"Vsq": {"rows": 2, "cols": 2, "data": [2.0, 0.0, 0.0, 1.0]}, "beta": 1.0})
    assert main(["bath", "--input", src, "--count", "2000", "--seed", "3", "--out-dir", str(tmp_path)]) == EXIT_OK
    rep = _read(tmp_path / "samples.json")
    assert rep["whiteness"]["passed"]
    assert (tmp_path / "samples.csv").read_text().splitlines()[0] == "q_1,q_2,p_1,p_2"


@pytest.mark.slow
def test_verify_quick(tmp_path, capsys):
    import time

    t0 = time.perf_counter()
    assert main(["verify", "--quick", "--workers", "4", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert time.perf_counter() - t0 < 60
    out = capsys.readouterr().out
    assert out.count("[PASS] criterion") == 11 and "[FAIL]" not in out
    rep = _read(tmp_path / "verify.json")
    assert all(r["passed"] for r in rep["results"] + rep["invariants"])
