"""The acceptance criteria as runnable checks.

Each ``criterion_*`` function returns a :class:`CriterionResult`. ``quick``
trims the number of random models in the algebraic checks; the Monte-Carlo
sizes are never reduced, since the tolerances are stated at those sizes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import bath as bath_mod
from scipy import signal

from .estimate import (
    bartlett_std,
    empirical_covariance,
    entropy_trajectory,
    increment_variance_fit,
    pnd_check,
    relative_l1_error,
    welch_psd,
    whiteness_test,
)
from .grid import axis_points
from .lossless import k_to_z0, load_state_space, verify_foster, z0_to_k
from .polyrat import Polynomial, RationalFunction, even_odd_split
from .realization import (
    InnerFunction,
    build_pair,
    covariance_function,
    covariance_function_backward,
    eigen_mirror_distance,
    invariance_check,
    minimal_realization,
    roots_of_matrix,
    structural_deviation,
    structural_function,
)
from .simulate import LineBathConfig, discretize, simulate_backward, simulate_forward, simulate_line_bath, simulate_wiener_observable
from .spectral import (
    ScalarSpectralDensity,
    are_residual,
    coanalytic_factor,
    factor_error,
    solve_are,
    spectral_factor_scalar,
)
from .testing import random_bath_matrix, random_factor_pair, random_hurwitz, random_pair, random_stable_matrix

# Welch segment used by the Monte-Carlo PSD criteria, see the README
ACCEPTANCE_SEGMENT = 1 << 11
SEED = 20240611


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    elapsed: float = 0.0
    kind: str = "criterion"

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_short(v)}" for k, v in self.detail.items())
        label = f"criterion {self.id:2d}" if self.kind == "criterion" else f"invariant {self.id}"
        return f"[{tag}] {label} {self.name} ({self.elapsed:.2f}s): {info}"

    def to_dict(self) -> dict:
        return {"id": self.id, "kind": self.kind, "name": self.name, "passed": self.passed,
                "elapsed": self.elapsed, "detail": self.detail}


def _short(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    return str(v)


def _timed(fn):
    def run(quick=False, workers=1):
        t0 = time.perf_counter()
        res = fn(quick=quick, workers=workers)
        res.elapsed = time.perf_counter() - t0
        return res

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def ou_pair():
    """The Ornstein-Uhlenbeck pair obtained by running the pipeline on ``2/(1 + lam^2)``."""
    phi = ScalarSpectralDensity([2.0], [1.0, 0.0, -1.0])
    W = spectral_factor_scalar(phi)
    return build_pair(minimal_realization(W.tf)), phi


@_timed
def criterion_1(quick=False, workers=1):
    """Factorization round trip on random densities."""
    rng = np.random.default_rng(SEED + 1)
    count = 200
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(count):
        N, chi = random_factor_pair(rng, 8, strictly_proper=False)
        phi = ScalarSpectralDensity.from_factor(N, chi)
        W = spectral_factor_scalar(phi)
        worst = max(worst, factor_error(W, phi))
    runtime = time.perf_counter() - t0
    return CriterionResult(1, "factorization round trip", worst <= 1e-8 and runtime < 5.0,
                           {"densities": count, "max_rel_error": worst, "runtime_s": runtime})


@_timed
def criterion_2(quick=False, workers=1):
    """Mirror spectrum of the backward generator and the flow identity."""
    rng = np.random.default_rng(SEED + 2)
    count = 30 if quick else 100
    mirror, flow = 0.0, 0.0
    for _ in range(count):
        pair = random_pair(rng, int(rng.integers(1, 11)))
        res = pair.residuals(taus=(0.1, 1.0, 3.0))
        mirror = max(mirror, eigen_mirror_distance(pair.F, pair.Fbar))
        flow = max(flow, res["exp_identity"])
    return CriterionResult(2, "mirror spectrum", mirror <= 1e-8 and flow <= 1e-9,
                           {"pairs": count, "max_eig_mismatch": mirror, "max_flow_residual": flow})


def _scalar_pair(rng, max_degree):
    N, chi = random_factor_pair(rng, max_degree)
    phi = ScalarSpectralDensity.from_factor(N, chi)
    W = spectral_factor_scalar(phi)
    return build_pair(minimal_realization(W.tf)), W


@_timed
def criterion_3(quick=False, workers=1):
    """Unimodular structural function, checked against both factor routes."""
    rng = np.random.default_rng(SEED + 3)
    count = 20 if quick else 60
    s = axis_points()
    uni, dev_ss, dev_sf, dev_ss_point = 0.0, 0.0, 0.0, 0.0
    for _ in range(count):
        pair, W = _scalar_pair(rng, 6)
        K = structural_function(pair)
        uni = max(uni, K.unimodularity_error())
        # route 1: backward model transfer function
        _, d1 = structural_deviation(pair, K, measure="normwise")
        _, d1p = structural_deviation(pair, K)
        dev_ss_point = max(dev_ss_point, d1p)
        # route 2: co-analytic factor from the density
        Wb = coanalytic_factor(W)
        ratio = W(s) / (Wb(s) * K(s))
        c = np.mean(ratio)
        d2 = float(np.max(np.abs(ratio - c / abs(c))))
        dev_ss, dev_sf = max(dev_ss, d1), max(dev_sf, d2)
    ok = uni <= 1e-9 and dev_ss <= 1e-7 and dev_sf <= 1e-7
    return CriterionResult(3, "structural function", ok,
                           {"models": count, "max_unimodularity": uni, "dev_factor": dev_sf, "dev_state_space": dev_ss,
                            "dev_state_space_pointwise": dev_ss_point})


@_timed
def criterion_4(quick=False, workers=1):
    """Co-analyticity of ``T K^{-1}`` for random output functionals."""
    rng = np.random.default_rng(SEED + 4)
    models = 4 if quick else 10
    worst_pole, worst_mod, total, fails = np.inf, 0.0, 0, 0
    for _ in range(models):
        pair, _ = _scalar_pair(rng, 5)
        K = structural_function(pair)
        for _ in range(20):
            C = rng.standard_normal((1, pair.n))
            D = rng.standard_normal()
            rep = invariance_check(pair, C, D, K)
            worst_pole = min(worst_pole, rep.min_pole_real)
            worst_mod = max(worst_mod, rep.modulus_deviation)
            fails += not rep.passed
            total += 1
    return CriterionResult(4, "invariance of K", fails == 0,
                           {"functionals": total, "min_pole_real": float(worst_pole), "max_modulus_dev": worst_mod})


@_timed
def criterion_5(quick=False, workers=1):
    """Cayley round trip, losslessness, Foster residues, even/odd identity."""
    rng = np.random.default_rng(SEED + 5)
    count = 20 if quick else 60
    s = axis_points()
    rt, re_part, coef, min_res = 0.0, 0.0, 0.0, np.inf
    for _ in range(count):
        chi = random_hurwitz(rng, int(rng.integers(1, 9)))
        K = InnerFunction(chi, (-1) ** chi.degree)
        Z0 = k_to_z0(K)
        rt = max(rt, float(np.max(np.abs(z0_to_k(Z0)(s) - K(s)))))
        rep = verify_foster(Z0)
        re_part = max(re_part, rep.axis_real_part)
        min_res = min(min_res, min(r.real for _, r in rep.residues))
        # numerator + denominator of Z0 rebuild chi
        tot = Z0.num + Z0.den
        rebuilt = (tot / tot.lead).coeffs
        e, o = even_odd_split(chi)
        direct = (e + o).coeffs
        scale = np.max(np.abs(chi.coeffs))
        coef = max(coef, float(np.max(np.abs(rebuilt - chi.coeffs)) / scale),
                   float(np.max(np.abs(direct - chi.coeffs)) / scale))
    ok = rt <= 1e-9 and re_part <= 1e-9 and min_res > 0 and coef <= 1e-12
    return CriterionResult(5, "lossless extraction", ok,
                           {"polynomials": count, "cayley_roundtrip": rt, "max_axis_real": re_part,
                            "min_residue": float(min_res), "coef_identity": coef})


def _eig_gap(a, b):
    a, b = np.sort_complex(np.asarray(a)), list(np.asarray(b))
    worst = 0.0
    for z in a:
        d = np.abs(np.asarray(b) - z)
        k = int(np.argmin(d))
        worst = max(worst, float(d[k]))
        b.pop(k)
    return worst


def line_bath_for(pair, beta=1.0, dt=0.01, steps=10**6, seed=SEED):
    load = load_state_space(k_to_z0(structural_function(pair)))
    return LineBathConfig(load, beta, dt, steps, seed)


@_timed
def criterion_6(quick=False, workers=1):
    """Line-bath junction: closed-loop spectrum and output PSD."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 6)
    eig = 0.0
    for _ in range(10 if quick else 30):
        pair, _ = _scalar_pair(rng, 6)
        cfg = line_bath_for(pair, steps=2)
        Acl = cfg.load.F - cfg.load.G @ cfg.load.H
        eig = max(eig, _eig_gap(roots_of_matrix(Acl), roots_of_matrix(pair.F)))
    pair, _ = ou_pair()
    cfg = line_bath_for(pair, 1.0, 0.01, 10**6, SEED + 60)
    eig = max(eig, _eig_gap(roots_of_matrix(cfg.load.F - cfg.load.G @ cfg.load.H), roots_of_matrix(pair.F)))
    path, rep = simulate_line_bath(cfg, workers=workers)
    est = welch_psd(path, ACCEPTANCE_SEGMENT)
    l1 = relative_l1_error(est, rep.predicted_psd, (0.05, 5.0))
    runtime = time.perf_counter() - t0
    ok = eig <= 1e-7 and l1 <= 0.10 and runtime < 30.0
    return CriterionResult(6, "line-bath reconstruction", ok,
                           {"max_eig_gap": eig, "psd_l1": l1, "energy_rel": rep.energy_rel_error, "runtime_s": runtime})


@_timed
def criterion_7(quick=False, workers=1):
    """OU Monte Carlo: stationary variance and Welch PSD."""
    pair, phi = ou_pair()
    dt, steps = 0.01, 10**6
    path = simulate_forward(pair, dt, steps, SEED + 70, workers=workers)
    y = path.scalar()
    var = float(np.mean((y - y.mean()) ** 2))
    acov = np.exp(-dt * np.arange(4000))
    sigma = bartlett_std(acov, 0, steps)
    est = welch_psd(path, ACCEPTANCE_SEGMENT)
    l1 = relative_l1_error(est, phi, (0.01, 10.0))
    P = float(pair.P[0, 0] * pair.H[0, 0] ** 2)
    ok = abs(var - P) <= 3 * sigma and l1 <= 0.05
    return CriterionResult(7, "OU Monte Carlo", ok,
                           {"variance": var, "P": P, "sigma": sigma, "psd_l1": l1})


@_timed
def criterion_8(quick=False, workers=1):
    """Bath invariance: stationarity identity, flowed samples, momentum whiteness."""
    rng = np.random.default_rng(SEED + 8)
    resid = 0.0
    for N in (1, 2, 4, 8, 16, 32):
        b = bath_mod.FiniteBath(random_bath_matrix(rng, N), rng.uniform(0.5, 2.0))
        A, S = b.generator(), bath_mod.invariant_covariance(b)
        resid = max(resid, float(np.max(np.abs(A @ S + S @ A.T))))
    b = bath_mod.FiniteBath(random_bath_matrix(rng, 2), 1.0)
    S = bath_mod.invariant_covariance(b)
    samples = bath_mod.sample_phase(b, 10**5, SEED + 80, workers=workers)
    n = len(samples)
    se = np.sqrt((np.outer(np.diag(S), np.diag(S)) + S**2) / n)
    band_ok = True
    worst = 0.0
    for t in (0.3, 1.7):
        x = bath_mod.flow_samples(b, samples, t).stacked()
        C = x.T @ x / n
        z = np.abs(C - S) / se
        worst = max(worst, float(z.max()))
        band_ok &= bool(np.all(z <= 3.0))
    wb = bath_mod.FiniteBath(random_bath_matrix(rng, 8), 1.0)
    white = bath_mod.momentum_whiteness(wb, bath_mod.sample_phase(wb, 10**5, SEED + 81, workers=workers))
    ok = resid <= 1e-12 and band_ok and white.passed
    return CriterionResult(8, "bath invariance", ok,
                           {"stationarity_residual": resid, "max_cov_z": worst, "whiteness_fraction": white.pass_fraction})


@_timed
def criterion_9(quick=False, workers=1):
    """Wiener observable: increment variance grows like beta |c|^2 |t - s|."""
    beta = 1.3
    c = np.array([1.0, -0.5, 2.0, 0.3])
    path = simulate_wiener_observable(4, beta, c, 0.01, 10**6, SEED + 90, workers=workers)
    lags = np.unique(np.round(np.logspace(0, np.log10(200), 30)).astype(int))
    fit = increment_variance_fit(path, lags)
    target = beta * float(c @ c)
    rel = abs(fit.slope - target) / target
    ok = rel <= 0.05 and fit.r2 >= 0.999
    return CriterionResult(9, "Wiener observable", ok, {"slope": fit.slope, "target": target, "rel_error": rel, "r2": fit.r2})


@_timed
def criterion_10(quick=False, workers=1):
    """Entropy from a point mass is nondecreasing and reaches the stationary value."""
    rng = np.random.default_rng(SEED + 10)
    pairs = [ou_pair()[0]] + [random_pair(rng, n) for n in (2, 3, 5)]
    mono, term = True, 0.0
    for pair in pairs:
        rate = float(np.min(-roots_of_matrix(pair.F).real))
        t = np.linspace(0.0, 30.0 / rate, 100)
        traj = entropy_trajectory(pair, np.zeros((pair.n, pair.n)), t)
        mono &= traj.is_nondecreasing(1e-10)
        term = max(term, abs(traj.values[-1] - traj.terminal))
    return CriterionResult(10, "entropy diagnostic", bool(mono) and term <= 1e-6,
                           {"models": len(pairs), "nondecreasing": bool(mono), "terminal_gap": term})


def _digest(*arrays) -> bytes:
    return b"".join(np.ascontiguousarray(a).tobytes() for a in arrays)


@_timed
def criterion_11(quick=False, workers=1):
    """Byte-identical simulations across 1 and 8 worker threads."""
    pair, _ = ou_pair()
    rng = np.random.default_rng(SEED + 11)
    pair3 = random_pair(rng, 3)
    steps = 200_000
    b = bath_mod.FiniteBath(random_bath_matrix(rng, 5), 1.0)
    cfg = line_bath_for(pair3, steps=steps)
    runs = {
        "forward": lambda w: _digest(*(lambda p: (p.values, p.states))(simulate_forward(pair3, 0.01, steps, 7, workers=w))),
        "backward": lambda w: _digest(*(lambda p: (p.values, p.states))(simulate_backward(pair, 0.01, steps, 7, workers=w))),
        "line_bath": lambda w: _digest(*(lambda r: (r[0].values, r[1].reflected))(simulate_line_bath(cfg, workers=w))),
        "wiener": lambda w: _digest(simulate_wiener_observable(3, 1.0, [1.0, 2.0, 3.0], 0.01, steps, 7, workers=w).values),
        "bath_samples": lambda w: _digest(bath_mod.sample_phase(b, steps, 7, workers=w).stacked()),
        "covariance": lambda w: _digest(empirical_covariance(simulate_forward(pair, 0.01, steps, 9, workers=w), 50)),
    }
    same = {k: fn(1) == fn(8) for k, fn in runs.items()}
    return CriterionResult(11, "determinism", all(same.values()), {k: v for k, v in same.items()})


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11]


# ---- module invariants (run by ``irrev verify`` ahead of the criteria) ------


def _invariant(module, name, ok, **detail):
    return CriterionResult(module, name, bool(ok), detail, kind="invariant")


@_timed
def invariant_polyrat(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 101)
    worst = 0.0
    for _ in range(50):
        p = Polynomial(rng.uniform(-5, 5, int(rng.integers(2, 14))))
        back = Polynomial.from_roots(p.roots(), p.lead)
        worst = max(worst, float(np.max(np.abs(back.coeffs - p.coeffs)) / np.max(np.abs(p.coeffs))))
    return _invariant("polyrat", "root reconstruction", worst <= 1e-8, polynomials=50, max_rel_error=worst)


@_timed
def invariant_spectral(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 102)
    worst = 0.0
    for _ in range(10):
        F = random_stable_matrix(rng, 6)
        H = rng.standard_normal((1, 6))
        G = H.T.copy()
        P = solve_are(F, G, H, np.eye(1))
        worst = max(worst, are_residual(F, G, H, np.eye(1), P))
    return _invariant("spectral", "Riccati residual", worst <= 1e-9, systems=10, max_residual=worst)


@_timed
def invariant_realization(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 103)
    worst, back = 0.0, 0.0
    s = axis_points()
    for _ in range(20 if quick else 50):
        N, chi = random_factor_pair(rng, 8)
        phi = ScalarSpectralDensity.from_factor(N, chi)
        pair = build_pair(minimal_realization(spectral_factor_scalar(phi).tf))
        got = np.abs(pair.fwd.transfer(s)[..., 0, 0]) ** 2
        want = phi(s.imag)
        worst = max(worst, float(np.max(np.abs(got - want) / want)))
        for tau in (0.1, 1.0, 3.0):
            back = max(back, float(np.max(np.abs(covariance_function(pair, tau) - covariance_function_backward(pair, tau)))))
    ok = worst <= 1e-7 and back <= 1e-9
    return _invariant("realization", "factorization consistency", ok, max_rel_error=worst, backward_covariance=back)


@_timed
def invariant_bath(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 104)
    b = bath_mod.FiniteBath(random_bath_matrix(rng, 16), 1.0)
    x = rng.standard_normal((8, 32))
    e0 = b.energy(x)
    drift = max(float(np.max(np.abs(b.energy(x @ bath_mod.canonical_flow(b, t).T) - e0) / e0))
                for t in np.linspace(0.0, 10.0, 21))
    J = bath_mod.symplectic_form(16)
    Phi = bath_mod.canonical_flow(b, 1.7)
    sym = float(np.max(np.abs(Phi.T @ J @ Phi - J)))
    cb = bath_mod.FiniteBath(random_bath_matrix(rng, 4), 0.7)
    samples = bath_mod.sample_phase(cb, 10**5, SEED + 140, workers=workers)
    inside = 0
    for _ in range(20):
        pi, xi = 0.8 * rng.standard_normal(4), 0.8 * rng.standard_normal(4)
        m, se = bath_mod.characteristic_estimate(samples, pi, xi)
        inside += abs(m - bath_mod.characteristic_functional(cb, pi, xi)) <= 3 * se
    ok = drift <= 1e-8 and sym <= 1e-9 and inside == 20
    return _invariant("bath", "flow and characteristic functional", ok,
                      energy_drift=drift, symplectic=sym, cf_within_3se=f"{inside}/20")


@_timed
def invariant_simulate(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 105)
    worst = 0.0
    for n in range(1, 9):
        pair = random_pair(rng, n)
        for dt in (1e-3, 1e-1):
            d = discretize(pair.F, pair.G, pair.P, dt)
            worst = max(worst, d.mismatch / max(1.0, float(np.max(np.abs(pair.P)))))
    return _invariant("simulate", "Van Loan vs stationary difference", worst <= 1e-9, max_mismatch=worst)


@_timed
def invariant_lossless(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 106)
    worst = 0.0
    s = axis_points()
    for _ in range(100):
        K = InnerFunction(random_hurwitz(rng, int(rng.integers(1, 9))), int(rng.choice([-1, 1])))
        worst = max(worst, float(np.max(np.abs(z0_to_k(k_to_z0(K))(s) - K(s)))))
    return _invariant("lossless", "Cayley round trip", worst <= 1e-9, inner_functions=100, max_error=worst)


@_timed
def invariant_estimate(quick=False, workers=1):
    rng = np.random.default_rng(SEED + 107)
    finite = all(np.isfinite(pnd_check(ScalarSpectralDensity.from_factor(*random_factor_pair(rng, 6))).paley_wiener_value)
                 for _ in range(20))
    e = rng.standard_normal(20_000)
    ar = signal.lfilter([1.0], [1.0, -0.5], e)
    white = whiteness_test(e).passed
    control = not whiteness_test(ar).passed
    return _invariant("estimate", "Paley-Wiener and whiteness bands", finite and white and control,
                      pnd_finite=finite, white_passes=white, ar1_fails=control)


INVARIANTS = [invariant_polyrat, invariant_spectral, invariant_realization, invariant_lossless,
              invariant_bath, invariant_simulate, invariant_estimate]


def run_invariants(quick=False, workers=1, echo=None):
    out = []
    for fn in INVARIANTS:
        res = fn(quick=quick, workers=workers)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out


def run_all(quick=False, workers=1, echo=None):
    out = []
    for fn in CRITERIA:
        res = fn(quick=quick, workers=workers)
        if echo is not None:
            echo(res.line())
        out.append(res)
    return out
