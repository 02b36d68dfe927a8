"""Command-line front end.

Each pipeline stage reads one JSON artifact and writes the next, so the
chain ``factorize -> realize -> backward -> structural -> lossless -> foster``
can be inspected stage by stage, or run at once with ``pipeline``.

Exit codes: 0 success, 1 I/O or malformed input, 2 domain error,
3 verification failure. Every run writes ``manifest.json`` in the output
directory with the resolved configuration and a sha256 of each output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, io
from .errors import InvalidDensity, IrrevError
from .rng import default_seed

EXIT_OK, EXIT_IO, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    pass


class VerificationFailed(Exception):
    pass


class DensityRejected(InvalidDensity):
    """Validation failure carrying the diagnostics report."""

    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


def _load(path):
    if path is None:
        raise InputError("--input is required")
    try:
        return io.read_json(path)
    except FileNotFoundError:
        raise InputError(f"input file not found: {path}")
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"malformed JSON in {path}: {exc}")


def _field(d, *keys):
    for k in keys:
        if not isinstance(d, dict) or k not in d:
            raise InputError(f"missing field {'.'.join(keys)!r}")
        d = d[k]
    return d


class Run:
    """Output directory plus the list of files written, for the manifest."""

    def __init__(self, out_dir):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []

    def json(self, name, obj):
        io.write_json(self.out / name, obj)
        self.files.append(name)

    def track(self, name):
        self.files.append(name)
        return self.out / name

    def manifest(self, args, argv):
        config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
        outputs = {}
        for name in self.files:
            outputs[name] = hashlib.sha256((self.out / name).read_bytes()).hexdigest()
        io.write_json(self.out / "manifest.json", {
            "version": __version__,
            "subcommand": args.command,
            "argv": list(argv),
            "config": config,
            "outputs": outputs,
        })


# ---- pipeline stages -------------------------------------------------------


def stage_factorize(doc, grid_points):
    from .spectral import ScalarSpectralDensity, coanalytic_factor, factor_error, spectral_factor_scalar, validate_density

    try:
        phi = ScalarSpectralDensity(_field(doc, "num"), _field(doc, "den"))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, IrrevError):
            raise
        raise InputError(f"bad density coefficients: {exc}")
    rep = validate_density(phi, grid_points)
    if not rep.passed:
        raise DensityRejected(f"density fails: {', '.join(rep.failed())}", {"validation": rep.to_dict()})
    W = spectral_factor_scalar(phi)
    Wb = coanalytic_factor(W)
    return {
        "density": phi.to_dict(),
        "analytic": W.to_dict(),
        "coanalytic": Wb.to_dict(),
        "validation": rep.to_dict(),
        "verification": {"factor_rel_error": factor_error(W, phi, grid_points)},
    }


def stage_realize(doc, grid_points):
    from .grid import axis_points
    from .polyrat import RationalFunction
    from .realization import minimal_realization

    W = RationalFunction.from_dict(_field(doc, "analytic"))
    model = minimal_realization(W)
    s = axis_points(grid_points)
    got = model.transfer(s)[..., 0, 0]
    want = W(s)
    err = float(np.max(np.abs(got - want) / np.abs(want)))
    return {
        "model": model.to_dict(),
        "verification": {"transfer_rel_error": err, "minimal": model.is_minimal()},
    }


def stage_backward(doc, grid_points):
    from .realization import build_pair

    model = io.state_space_from_json(_field(doc, "model"))
    pair = build_pair(model)
    return {"pair": pair.to_dict(), "verification": pair.residuals()}


def stage_structural(doc, grid_points):
    from .grid import axis_points
    from .realization import structural_deviation, structural_function

    pair = io.pair_from_json(_field(doc, "pair"))
    K = structural_function(pair)
    s = axis_points(grid_points)
    c, dev = structural_deviation(pair, K, s, measure="normwise")
    return {
        "structural": K.to_dict(),
        "verification": {
            "unimodularity_error": K.unimodularity_error(s),
            "unimodular_constant": [c.real, c.imag],
            "wbar_inv_w_deviation": dev,
        },
    }


def stage_lossless(doc, grid_points):
    from .grid import axis_points
    from .lossless import k_to_z0, z0_to_k
    from .polyrat import Polynomial
    from .realization import InnerFunction

    k = _field(doc, "structural")
    K = InnerFunction(Polynomial(_field(k, "chi")), int(_field(k, "sign")))
    Z0 = k_to_z0(K)
    s = axis_points(grid_points)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = Z0(s)
    re = float(np.max(np.abs(vals[np.isfinite(vals)].real), initial=0.0))
    rt = float(np.max(np.abs(z0_to_k(Z0)(s) - K(s))))
    return {"impedance": Z0.to_dict(), "verification": {"cayley_roundtrip": rt, "max_axis_real_part": re}}


def stage_foster(doc, grid_points):
    from .lossless import foster_synthesis, verify_foster
    from .polyrat import RationalFunction

    Z0 = RationalFunction.from_dict(_field(doc, "impedance"))
    rep = verify_foster(Z0)
    form = foster_synthesis(Z0)
    return {"foster": form.to_dict(), "verification": rep.to_dict()}


STAGES = [
    ("factorize", stage_factorize, "factors.json"),
    ("realize", stage_realize, "model.json"),
    ("backward", stage_backward, "pair.json"),
    ("structural", stage_structural, "structural.json"),
    ("lossless", stage_lossless, "lossless.json"),
    ("foster", stage_foster, "foster.json"),
]


def _stage_cmd(name):
    fn, out_name = next((f, o) for n, f, o in STAGES if n == name)

    def cmd(args, run):
        doc = _load(args.input)
        try:
            res = fn(doc, args.grid_points)
        except DensityRejected as exc:
            run.json(out_name.replace(".json", ".report.json"), exc.report)
            raise
        run.json(out_name, res)
        return res

    return cmd


def cmd_pipeline(args, run):
    doc = _load(args.input)
    results = {}
    for name, fn, out_name in STAGES:
        doc = fn(doc, args.grid_points)
        run.json(out_name, doc)
        results[name] = doc
    return results


# ---- simulation and estimation ---------------------------------------------


def _pair_input(path):
    doc = _load(path)
    if "pair" in doc:
        return io.pair_from_json(doc["pair"])
    if "model" in doc:
        from .realization import build_pair

        return build_pair(io.state_space_from_json(doc["model"]))
    raise InputError("expected a pair.json or model.json artifact")


def _sidecar(run, name, path, extra):
    run.json(name, {"dt": path.dt, "seed": path.seed, "steps": len(path), "meta": path.meta, **extra})


def cmd_simulate(args, run):
    from .simulate import simulate_backward, simulate_forward

    pair = _pair_input(args.input)
    sim = simulate_backward if args.backward else simulate_forward
    path = sim(pair, args.dt, args.steps, args.seed, workers=args.workers)
    io.write_path_csv(run.track("path.csv"), path)
    _sidecar(run, "path.json", path, {"config": {"dt": args.dt, "steps": args.steps, "backward": args.backward}})
    return path


def cmd_bathsim(args, run):
    from .estimate import relative_l1_error, welch_psd
    from .lossless import k_to_z0, load_state_space
    from .realization import structural_function
    from .simulate import LineBathConfig, simulate_line_bath

    pair = _pair_input(args.input)
    load = load_state_space(k_to_z0(structural_function(pair)))
    cfg = LineBathConfig(load, args.beta, args.dt, args.steps, args.seed)
    path, rep = simulate_line_bath(cfg, workers=args.workers)
    io.write_path_csv(run.track("bath_path.csv"), path)
    out = {"config": cfg.to_dict(), "report": rep.to_dict(),
           "pair_eigs": [[z.real, z.imag] for z in np.linalg.eigvals(pair.F)]}
    if len(path) >= 2 * args.segment:
        est = welch_psd(path, args.segment)
        io.write_psd_csv(run.track("bath_psd.csv"), est.freqs, est.scalar())
        band = (0.05, min(5.0, est.freqs[-1]))
        out["psd"] = {**est.to_dict(), "band": list(band), "l1_error_vs_closed_loop": relative_l1_error(est, rep.predicted_psd, band)}
    _sidecar(run, "bath_path.json", path, out)
    return rep


def cmd_estimate(args, run):
    from .estimate import empirical_covariance, relative_l1_error, welch_psd
    from .simulate import SamplePath

    try:
        header, data = io.read_path_csv(args.input)
    except (FileNotFoundError, StopIteration, ValueError) as exc:
        raise InputError(f"cannot read path CSV {args.input}: {exc}")
    ycols = [i for i, h in enumerate(header) if h.startswith("y_")]
    if not ycols or data.shape[0] < 2:
        raise InputError("path CSV needs a t column and at least one y_ column")
    dt = float(data[1, 0] - data[0, 0])
    path = SamplePath(dt, data[:, ycols], seed=0)
    est = welch_psd(path, args.segment)
    io.write_psd_csv(run.track("psd.csv"), est.freqs, est.scalar())
    meta = {**est.to_dict(), "dt": dt, "samples": len(path)}
    lag = min(args.max_lag, len(path) // 4 - 1)
    meta["covariance"] = [c.tolist() for c in empirical_covariance(path, lag)]
    if args.reference:
        from .spectral import ScalarSpectralDensity

        ref = _load(args.reference)
        ref = ref.get("density", ref)
        phi = ScalarSpectralDensity(_field(ref, "num"), _field(ref, "den"))
        band = (args.band_lo, args.band_hi)
        meta["band"] = list(band)
        meta["l1_error_vs_reference"] = relative_l1_error(est, phi, band)
    run.json("psd.json", meta)
    return meta


def cmd_bath(args, run):
    from .bath import momentum_whiteness, sample_phase

    b = io.bath_from_json(_load(args.input))
    samples = sample_phase(b, args.count, args.seed, workers=args.workers)
    io.write_samples_csv(run.track("samples.csv"), samples)
    report = {"N": b.N, "beta": b.beta, "count": args.count, "seed": args.seed}
    if args.count >= 1000:
        report["whiteness"] = momentum_whiteness(b, samples).to_dict()
    run.json("samples.json", report)
    return report


def cmd_verify(args, run):
    from .acceptance import run_all, run_invariants

    invariants = run_invariants(quick=args.quick, workers=args.workers, echo=print)
    results = run_all(quick=args.quick, workers=args.workers, echo=print)
    everything = invariants + results
    passed = sum(r.passed for r in everything)
    print(f"{sum(r.passed for r in invariants)}/{len(invariants)} module invariants passed, "
          f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    run.json("verify.json", {
        "quick": args.quick,
        "invariants": [r.to_dict() for r in invariants],
        "results": [r.to_dict() for r in results],
    })
    if passed != len(everything):
        raise VerificationFailed(f"{len(everything) - passed} checks failed")
    return results


def cmd_rerun(args, run):
    """Re-execute a manifest's command into ``--out-dir`` and compare output hashes."""
    man = _load(args.input)
    argv = list(_field(man, "argv"))
    # swap the recorded output directory for the new one
    if "--out-dir" in argv:
        i = argv.index("--out-dir")
        argv[i + 1] = str(run.out)
    else:
        argv += ["--out-dir", str(run.out)]
    code = main(argv)
    if code != EXIT_OK:
        return code
    fresh = _load(run.out / "manifest.json")["outputs"]
    diff = sorted(k for k, v in _field(man, "outputs").items() if fresh.get(k) != v)
    if diff:
        raise VerificationFailed(f"outputs differ from manifest: {', '.join(diff)}")
    print("rerun reproduced all outputs")
    return EXIT_OK


# ---- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="input artifact (JSON, or CSV for estimate)")
    common.add_argument("--out-dir", default=".", help="directory for outputs and manifest.json")
    common.add_argument("--grid-points", type=int, default=512, help="points per half of the validation grid")
    common.add_argument("--workers", type=int, default=1, help="threads for noise generation")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--dt", type=float, default=0.01)
    sim.add_argument("--steps", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=None, help="defaults to IRREV_SEED or a fixed constant")

    p = argparse.ArgumentParser(prog="irrev", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    for name, _, out in STAGES:
        sp = sub.add_parser(name, parents=[common], help=f"pipeline stage, writes {out}")
        sp.set_defaults(func=_stage_cmd(name))
    sub.add_parser("pipeline", parents=[common], help="run every stage from a density file").set_defaults(func=cmd_pipeline)

    sp = sub.add_parser("simulate", parents=[common, sim], help="sample the forward (or backward) diffusion")
    sp.add_argument("--backward", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bathsim", parents=[common, sim], help="line-bath junction for a pair's structural function")
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--segment", type=int, default=1 << 11, help="Welch segment length")
    sp.set_defaults(func=cmd_bathsim)

    sp = sub.add_parser("estimate", parents=[common], help="Welch PSD and covariances of a path CSV")
    sp.add_argument("--segment", type=int, default=1 << 14)
    sp.add_argument("--max-lag", type=int, default=50)
    sp.add_argument("--reference", help="density JSON to compare against")
    sp.add_argument("--band-lo", type=float, default=0.01)
    sp.add_argument("--band-hi", type=float, default=10.0)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("bath", parents=[common], help="sample a finite bath's invariant law")
    sp.add_argument("--count", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_bath)

    sp = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    sp.add_argument("--quick", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sub.add_parser("rerun", parents=[common], help="re-run a manifest and compare outputs").set_defaults(func=cmd_rerun)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    if getattr(args, "seed", "absent") is None:
        args.seed = default_seed()
    run = Run(args.out_dir)
    try:
        result = args.func(args, run)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IrrevError as exc:
        print(f"domain error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        run.manifest(args, argv)
        return EXIT_VERIFY
    if args.command != "rerun":
        run.manifest(args, argv)
    return result if isinstance(result, int) else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
