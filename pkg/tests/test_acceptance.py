"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line through the ``report`` fixture; the lines
are printed together at the end of the pytest run. Timings are wall-clock on
the machine running the suite.
"""

import csv
import os
import time

import numpy as np
import pytest
from oracles import bootstrap_particle_filter, discrete_kalman_pair

from uqkit import bayes, calibrate, cli, diagnostics, info, lada, prob
from uqkit import dynamics as dy
from uqkit.errors import DivergenceError
from uqkit.experiments import COMMANDS, resolve_params
from uqkit.prob import GammaDist, GaussianDist

SEED = 7


def read_table(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        values = [r[j] for r in body]
        try:
            cols[name] = np.array([float(v) for v in values])
        except ValueError:
            cols[name] = values
    return cols


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """Every CLI command run once with its defaults and seed 7."""
    root = tmp_path_factory.mktemp("first")
    out = {}
    for name in COMMANDS:
        folder = str(root / name)
        manifest = cli.execute(name, resolve_params(name, {}), SEED, folder)
        out[name] = (folder, manifest)
    return out


def test_criterion_01_entropy_oracles(report):
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(20):
        g = GaussianDist(rng.uniform(-5, 5), rng.uniform(0.1, 5) ** 2)
        sd = np.sqrt(g.cov[0, 0])
        n = 4001
        p = prob.tabulate(g, g.mean[0] - 12 * sd, 24 * sd / (n - 1), n)
        worst = max(worst, abs(info.shannon_entropy_grid(p) - info.shannon_entropy_gaussian(g)))
    for _ in range(10):
        g = GammaDist(rng.uniform(1, 20), rng.uniform(0.2, 5))
        n = 20001
        top = g.mean + 12 * np.sqrt(g.variance)
        p = prob.tabulate(g, 0.0, top / (n - 1), n)
        worst = max(worst, abs(info.shannon_entropy_grid(p) - info.shannon_entropy_gamma(g)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 5
    report(1, "entropy oracle equivalence", ok, f"max |grid - exact| = {worst:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_gaussian_kl(report):
    rng = np.random.default_rng(202)
    worst_split, worst_grid = 0.0, 0.0
    for _ in range(20):
        m1, m2 = rng.uniform(-1, 1, 2)
        s1, s2 = rng.uniform(0.6, 1.5, 2)
        p, q = GaussianDist(m1, s1**2), GaussianDist(m2, s2**2)
        kl = info.relative_entropy_gaussian(p, q)
        worst_split = max(worst_split, abs(kl.signal + kl.dispersion - kl.total))
        n = 20001
        dx = 24 * s1 / (n - 1)
        grid_kl = info.relative_entropy_grid(prob.tabulate(p, m1 - 12 * s1, dx, n), prob.tabulate(q, m1 - 12 * s1, dx, n))
        worst_grid = max(worst_grid, abs(grid_kl - kl.total))

    # sampled densities: the raw estimate diverges, the clipped one is finite
    p, q = GaussianDist(0.0, 1.0), GaussianDist(0.5, 1.0)
    sp = prob.estimate_pdf(prob.sample(p, 10_000, seed=21), -10, 0.01, 2001)
    sq = prob.estimate_pdf(prob.sample(q, 10_000, seed=22), -10, 0.01, 2001)
    try:
        info.relative_entropy_grid(sp, sq)
        diverged = False
    except DivergenceError:
        diverged = True
    clipped = info.relative_entropy_grid(prob.clip_normalize(sp), prob.clip_normalize(sq))
    exact = info.relative_entropy_gaussian(p, q).total
    ok = worst_split < 1e-10 and worst_grid < 1e-4 and diverged and abs(clipped - exact) < 0.05
    report(2, "Gaussian KL decomposition and clipping", ok,
           f"split err {worst_split:.1e}, grid err {worst_grid:.1e}, raw diverged={diverged}, "
           f"clipped {clipped:.4f} vs exact {exact:.4f}")
    assert ok


def test_criterion_03_repeated_observations(report, runs):
    start = time.perf_counter()
    v = np.random.default_rng(303).standard_normal(10_000)
    exact_R = all(bayes.repeated_obs_posterior(0.0, v[:L])[1] == 1 / (L + 1) for L in range(10_001))
    L = 10_000
    gap = float(bayes.dispersion_asymptote(L)) - 0.5 * np.log(L + 1)
    folder, manifest = runs["bayes-scan"]
    summ = read_table(os.path.join(folder, "bayes_summary.csv"))
    slope = np.polyfit(np.log(summ["L"] + 1), np.log(summ["mean_abs_error"]), 1)[0]
    elapsed = time.perf_counter() - start + manifest["wall_time_s"]
    ok = exact_R and abs(gap + 0.5) < 1e-3 and abs(slope + 0.5) < 0.05 and elapsed < 30
    report(3, "repeated-observation law", ok,
           f"R_a exact={exact_R}, dispersion - ln(L+1)/2 = {gap:.5f} at L=1e4, "
           f"error slope {slope:.3f} over {len(summ['L'])} L values x 100 replicates, {elapsed:.1f} s")
    assert ok


def test_criterion_04_reynolds_closure(report):
    start = time.perf_counter()
    b, m0, v0 = 0.5, 2.0, 0.09
    cc = dy.quadratic_closure_check(b, GaussianDist(m0, v0), 10_000, 1e-3, seed=404)
    z = abs(cc.fd_slope - cc.closed) / cc.stderr
    z_pop = abs(cc.fd_slope - b * (m0**2 + v0)) / cc.stderr
    z_mean_only = abs(cc.fd_slope - cc.mean_only) / cc.stderr
    elapsed = time.perf_counter() - start
    ok = z < 3 and elapsed < 10
    report(4, "Reynolds closure for dx/dt = b x^2", ok,
           f"|fd - b(<x>^2+var)| = {z:.2e} se (population value {z_pop:.2f} se); "
           f"mean-only closure off by {z_mean_only:.1f} se, {elapsed:.2f} s")
    assert ok


def test_criterion_05_linear_vs_lorenz(report, runs):
    _, lin = runs["linear-ensemble"]
    _, l63 = runs["l63-ensemble"]
    z = lin["summary"]["max_mean_error_in_stderr"]
    spread = l63["summary"]["z_std_at_10"]
    departure = l63["summary"]["max_mean_departure_after_10"]
    elapsed = lin["wall_time_s"] + l63["wall_time_s"]
    ok = z < 5 and spread > 5 and departure > 5 and elapsed < 60
    report(5, "linear ensemble vs Lorenz 63", ok,
           f"linear mean within {z:.2f} se; L63 z-std at t=10 {spread:.2f}, "
           f"mean departure after t=10 {departure:.2f}, {elapsed:.1f} s")
    assert ok


def test_criterion_06_lada_scaling(report, runs):
    folder, manifest = runs["lada-scan"]
    t = read_table(os.path.join(folder, "lada_scan.csv"))
    disp, sig, rmse = t["dispersion"], t["signal"], t["rmse_11"]
    slope = np.polyfit(np.log(t["L"]), disp, 1)[0]
    steps = np.diff(sig)
    disp_up = bool(np.all(np.diff(disp) > 0))
    shrinking = bool(np.all(np.diff(steps) < 0))
    ratio = rmse[-1] / rmse[0]
    elapsed = manifest["wall_time_s"]
    ok = disp_up and slope > 0 and shrinking and ratio < 0.5 and elapsed < 600
    report(6, "tracer DA scaling", ok,
           f"dispersion {np.round(disp, 2).tolist()} (slope vs ln L {slope:.2f}), "
           f"signal steps {np.round(steps, 2).tolist()}, rmse(1,1) L=50/L=2 = {ratio:.2f}, {elapsed:.1f} s")
    assert ok


def test_criterion_07_particle_filter_oracle(report):
    start = time.perf_counter()
    modes = np.array([[1, 1], [-1, -1]])
    d, sigma, sigma_x, dt = 0.5, 0.5, 0.5, 1e-3
    config = dy.FlowModelConfig(modes, d, 0.0, 0.0, sigma, sigma_x)
    grid = dy.TimeGrid.from_horizon(2.0, dt)
    flow = dy.simulate_flow(config, grid, seed=701)
    tracers = lada.simulate_tracers(flow, 1, seed=702)
    filt = lada.run_filter(tracers, config)
    i = config.half[0]
    inc, pos = tracers.increments()[:, 0], tracers.positions[:-1, 0]
    k, r = config.modes[i], config.eigenvectors[i].real
    chunks = np.array([
        bootstrap_particle_filter(inc, pos, k, r, d, sigma, sigma_x, dt, 5000, np.random.default_rng(7000 + j))
        for j in range(20)
    ])
    pf = chunks.mean()
    se_pf = np.array([chunks.real.std(ddof=1), chunks.imag.std(ddof=1)]) / np.sqrt(chunks.size)
    kb = filt.mean[-1, i]
    # time-discretization error of the filter, measured against the exact discrete-time filter
    exact = discrete_kalman_pair(inc, pos, k, r, d, sigma, sigma_x, dt)
    se_kb = np.abs([kb.real - exact.real, kb.imag - exact.imag])
    combined = np.sqrt(se_pf**2 + se_kb**2)
    diff = np.array([kb.real - pf.real, kb.imag - pf.imag])
    z = np.abs(diff) / combined
    elapsed = time.perf_counter() - start
    ok = bool(np.all(z < 3))
    report(7, "filter vs 1e5-particle filter", ok,
           f"filter {kb:.4f}, particles {pf:.4f}, |diff| = {np.round(z, 2).tolist()} combined se, {elapsed:.1f} s")
    assert ok


def test_criterion_08_parameter_table(report, runs):
    _, manifest = runs["param-estimate"]
    table = manifest["summary"]["table"]
    est = np.array([r["a_estimate"] for r in table])
    closed = np.array([r["a_closed_form"] for r in table])
    reported = np.array([r["a_reported"] for r in table])
    kurt = manifest["summary"]["two_point"]["excess_kurtosis"]
    rel = np.abs(est - reported) / reported
    ok = (np.allclose(np.round(est, 3), [1.0, 0.667, 0.4]) and np.allclose(est, closed, rtol=1e-10)
          and rel.max() < 0.015 and kurt > 1 and manifest["wall_time_s"] < 10)
    report(8, "parameter estimation table", ok,
           f"a = {np.round(est, 3).tolist()}, max deviation from reported {100 * rel.max():.2f}%, "
           f"two-point excess kurtosis {kurt:.1f}, {manifest['wall_time_s']:.1f} s")
    assert ok


def test_criterion_09_okubo_weiss(report, runs):
    rotation = float(diagnostics.ow_from_gradients(0.0, -1.0, 1.0, 0.0).ow)
    strain = float(diagnostics.ow_from_gradients(1.0, 0.0, 0.0, -1.0).ow)
    folder, manifest = runs["eddy-ow"]
    s = read_table(os.path.join(folder, "ow_summary.csv"))
    f = read_table(os.path.join(folder, "ow_fields.csv"))
    residual = float(np.max(s["decomposition_residual"]))
    var1, var5 = f["ow_var_L1"], f["ow_var_L5"]
    lower = float(np.mean(var5 < var1))
    ok = (rotation == -4.0 and strain == 4.0 and residual < 1e-10 and var5.mean() < var1.mean()
          and manifest["wall_time_s"] < 300)
    report(9, "Okubo-Weiss identities", ok,
           f"rotation {rotation}, strain {strain}, decomposition residual {residual:.1e}, "
           f"mean cell variance L=1 {var1.mean():.0f} vs L=5 {var5.mean():.0f} "
           f"(lower in {100 * lower:.0f}% of cells), {manifest['wall_time_s']:.1f} s")
    assert ok


def test_criterion_10_calibration(report, runs):
    start = time.perf_counter()
    grid = dy.TimeGrid.from_horizon(5000.0, 0.005)
    x = dy.simulate_ou_real(1.0, 2.0, np.sqrt(2.0), 2.0, grid, seed=1001)
    res = calibrate.calibrate_ou(x, 0.005, max_lag=20.0)
    errs = np.abs([res.a - 1.0, (res.f - 2.0) / 2.0, (res.sigma - np.sqrt(2.0)) / np.sqrt(2.0)])
    folder, manifest = runs["calibrate-regimes"]
    t = read_table(os.path.join(folder, "calibration.csv"))
    kl = dict(zip(t["regime"], t["kl"]))
    modes = dict(zip(t["regime"], zip(t["truth_modes"], t["surrogate_modes"])))
    elapsed = time.perf_counter() - start + manifest["wall_time_s"]
    ok = (errs.max() < 0.1 and kl["nearly_gaussian"] < 0.05 and kl["bimodal"] > 0.5
          and modes["bimodal"][1] == 1 and elapsed < 300)
    report(10, "OU calibration", ok,
           f"(a, f, sigma) = ({res.a:.3f}, {res.f:.3f}, {res.sigma:.3f}), max rel err {errs.max():.3f}; "
           f"KL {', '.join(f'{k} {v:.3f}' for k, v in kl.items())}; bimodal modes truth/surrogate "
           f"{int(modes['bimodal'][0])}/{int(modes['bimodal'][1])}, {elapsed:.1f} s")
    assert ok


def test_criterion_11_determinism(report, runs, tmp_path):
    mismatched = []
    n_files = 0
    for name, (folder, manifest) in runs.items():
        again = str(tmp_path / name)
        second = cli.execute(name, manifest["inputs"], manifest["seed"], again)
        for fname in sorted(manifest["outputs"]):
            if not fname.endswith(".csv"):
                continue
            n_files += 1
            with open(os.path.join(folder, fname), "rb") as a, open(os.path.join(again, fname), "rb") as b:
                if a.read() != b.read():
                    mismatched.append(f"{name}/{fname}")
        if second["outputs"] != manifest["outputs"]:
            mismatched.append(f"{name}/manifest digests")
    ok = not mismatched
    report(11, "byte-identical reruns", ok,
           f"{n_files} CSVs from {len(runs)} commands compared, mismatches: {mismatched or 'none'}")
    assert ok
