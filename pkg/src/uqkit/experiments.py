"""Named experiments behind the command line tool.

Each experiment takes a parameter dict (defaults in :data:`COMMANDS`), a
seed and an output directory, writes plot-ready CSV tables there and returns
a JSON-able summary. Nothing is plotted.
"""

import os
from dataclasses import dataclass

import numpy as np

from uqkit import _rng, bayes, calibrate, diagnostics, dynamics, info, lada, prob
from uqkit.errors import ConfigError, DivergenceError
from uqkit.io import rows_to_columns, sha256_file, sidecar_path, write_csv


@dataclass(frozen=True)
class Command:
    name: str
    run: object
    defaults: dict
    help: str
    validate: object = None


def _csv(out, name, columns, written, description, **meta):
    """Write one table and its JSON sidecar, recording both digests."""
    path = os.path.join(out, name)
    written[name] = write_csv(path, columns, sidecar={"description": description, **meta})
    written[os.path.basename(sidecar_path(path))] = sha256_file(sidecar_path(path))


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _positive(p, *keys):
    for k in keys:
        _require(p[k] > 0, f"{k} must be positive, got {p[k]}")


# ---------------------------------------------------------------------------


def entropy_gallery(p, seed, out):
    _positive(p, "n_grid", "n_samples", "clip_eps")
    gauss = [prob.GaussianDist(m, v) for m, v in zip(p["gaussian_means"], p["gaussian_variances"])]
    gammas = [prob.GammaDist(k, t) for k, t in zip(p["gamma_shapes"], p["gamma_scales"])]
    _require(len(gauss) == len(p["gaussian_means"]) == len(p["gaussian_variances"]), "gaussian lists differ in length")
    _require(len(gammas) == len(p["gamma_shapes"]) == len(p["gamma_scales"]), "gamma lists differ in length")
    n = int(p["n_grid"])
    rows, pdf_cols = [], {}
    for i, g in enumerate(gauss):
        sd = np.sqrt(float(g.cov[0, 0]))
        x0 = float(g.mean[0]) - 12 * sd
        grid = prob.tabulate(g, x0, 24 * sd / (n - 1), n)
        rows.append({"name": f"gaussian_{i}", "family": "gaussian", "p1": float(g.mean[0]), "p2": float(g.cov[0, 0]),
                     "entropy_grid": info.shannon_entropy_grid(grid), "entropy_exact": info.shannon_entropy(g),
                     "skewness": 0.0, "kurtosis": 3.0})
        pdf_cols[f"gaussian_{i}_x"] = grid.x
        pdf_cols[f"gaussian_{i}_pdf"] = grid.values
    for i, g in enumerate(gammas):
        top = g.mean + 12 * np.sqrt(g.variance)
        grid = prob.tabulate(g, 0.0, top / (n - 1), n) if g.k >= 1 else None
        row = {"name": f"gamma_{i}", "family": "gamma", "p1": g.k, "p2": g.theta,
               "entropy_grid": info.shannon_entropy_grid(grid) if grid is not None else float("nan"),
               "entropy_exact": info.shannon_entropy(g), "skewness": g.skewness, "kurtosis": 3 + g.excess_kurtosis}
        rows.append(row)
        if grid is not None:
            pdf_cols[f"gamma_{i}_x"] = grid.x
            pdf_cols[f"gamma_{i}_pdf"] = grid.values
    written = {}
    _csv(out, "entropies.csv", rows_to_columns(rows), written,
         "grid (trapezoid) and closed-form Shannon entropy per density; p1, p2 are mean/variance or shape/scale")
    _csv(out, "pdfs.csv", pdf_cols, written, "tabulated densities, one <name>_x / <name>_pdf column pair each")

    # sampled-KDE relative entropy with and without the clipping remedy
    kl_rows = []
    lo, hi = p["kl_domain"]
    dx = (hi - lo) / (n - 1)
    for j, (a, b) in enumerate(zip(p["kl_p"], p["kl_pm"])):
        dp, dq = prob.GaussianDist(*a), prob.GaussianDist(*b)
        sp = prob.estimate_pdf(prob.sample(dp, int(p["n_samples"]), _rng.derive_seed(seed, j, 0)), lo, dx, n)
        sq = prob.estimate_pdf(prob.sample(dq, int(p["n_samples"]), _rng.derive_seed(seed, j, 1)), lo, dx, n)
        try:
            raw = info.relative_entropy_grid(sp, sq)
        except DivergenceError:
            raw = float("inf")
        eps = p["clip_eps"]
        clipped = info.relative_entropy_grid(prob.clip_normalize(sp, eps), prob.clip_normalize(sq, eps))
        tab = info.relative_entropy_grid(prob.tabulate(dp, lo, dx, n), prob.tabulate(dq, lo, dx, n))
        kl_rows.append({"pair": j, "p_mean": a[0], "p_var": a[1], "pm_mean": b[0], "pm_var": b[1],
                        "kl_exact": info.relative_entropy_gaussian(dp, dq).total, "kl_tabulated": tab,
                        "kl_sampled_raw": raw, "kl_sampled_clipped": clipped})
    _csv(out, "kl_clipping.csv", rows_to_columns(kl_rows), written,
         "relative entropy of sampled KDE pairs before and after clipping (inf = diverged)",
         n_samples=int(p["n_samples"]), clip_eps=p["clip_eps"], domain=[lo, hi])
    return written, {"entropies": rows, "kl": kl_rows}


def linear_ensemble(p, seed, out):
    _positive(p, "a", "horizon", "dt", "n_member", "init_var")
    grid = dynamics.TimeGrid.from_horizon(p["horizon"], p["dt"])
    init = prob.GaussianDist(p["x0"], p["init_var"])
    ens = dynamics.simulate_linear_ensemble(p["a"], p["f"], init, grid, int(p["n_member"]), seed)
    mean, var = dynamics.ensemble_stats(ens)
    t = ens.times
    analytic = dynamics.linear_analytic(p["a"], p["f"], p["x0"], t)
    stderr = np.sqrt(p["init_var"] / p["n_member"]) * np.exp(-p["a"] * t)
    cols = {"t": t, "deterministic": analytic, "ens_mean": mean[:, 0], "ens_var": var[:, 0],
            "var_theory": p["init_var"] * np.exp(-2 * p["a"] * t), "stderr_theory": stderr}
    for i in range(min(int(p["n_show"]), ens.n_member)):
        cols[f"member_{i}"] = ens.members[i, :, 0]
    written = {}
    _csv(out, "linear_ensemble.csv", cols, written,
         "one row per time step: analytic solution, ensemble mean and variance, selected members")

    cc = dynamics.quadratic_closure_check(p["closure_b"], init, int(p["n_member_closure"]), p["dt"] * 0.1,
                                          _rng.derive_seed(seed, 1))
    _csv(out, "quadratic_closure.csv", {"b": [p["closure_b"]], "fd_slope": [cc.fd_slope], "closed": [cc.closed],
                                        "mean_only": [cc.mean_only], "stderr": [cc.stderr]}, written,
         "d<x>/dt at t=0 for dx/dt = b x^2: finite difference, closed form b(<x>^2 + var), mean-only b<x>^2")
    zscore = np.abs(mean[:, 0] - analytic) / np.maximum(stderr, 1e-300)
    return written, {"max_mean_error_in_stderr": float(zscore.max()), "closure": cc.__dict__}


def l63_ensemble(p, seed, out):
    _positive(p, "horizon", "dt", "n_member", "init_var", "stride")
    params = dynamics.L63Params(*p["params"])
    grid = dynamics.TimeGrid.from_horizon(p["horizon"], p["dt"])
    stride = int(p["stride"])
    det = dynamics.simulate_l63(params, p["x0"], grid, stride)
    init = prob.GaussianDist(p["x0"], p["init_var"] * np.eye(3))
    ens = dynamics.simulate_l63_ensemble(params, init, grid, int(p["n_member"]), seed, stride)
    mean, var = dynamics.ensemble_stats(ens)
    cols = {"t": ens.times}
    for j, c in enumerate("xyz"):
        cols[f"det_{c}"] = det[:, j]
    for j, c in enumerate("xyz"):
        cols[f"mean_{c}"] = mean[:, j]
    for j, c in enumerate("xyz"):
        cols[f"std_{c}"] = np.sqrt(var[:, j])
    for i in range(min(int(p["n_show"]), ens.n_member)):
        cols[f"member_{i}_z"] = ens.members[i, :, 2]
    written = {}
    _csv(out, "l63_ensemble.csv", cols, written,
         "one row per stored step: deterministic run, ensemble mean and std, z of selected members",
         stride=stride, dt=p["dt"])
    t = ens.times
    late = t >= 10
    summary = {
        "z_std_at_10": float(np.sqrt(var[np.argmin(np.abs(t - 10)), 2])) if t[-1] >= 10 else None,
        "max_mean_departure_after_10": float(np.abs(mean[late] - det[late]).max()) if late.any() else None,
    }
    return written, summary


def bayes_scan(p, seed, out):
    _require(int(p["n_replicates"]) >= 1, "n_replicates must be at least 1")
    L_values = _bayes_L_values(p)
    rows = bayes.repeated_observation_experiment(L_values, int(p["n_replicates"]), seed, p["mu_f"])
    keys = ["L", "replicate", "mu_a", "R_a", "signal", "dispersion", "truth"]
    written = {}
    _csv(out, "bayes_scan.csv", rows_to_columns(rows, keys), written,
         "posterior mean/variance and relative entropy to the prior per (L, replicate)")
    L_arr = np.array([r["L"] for r in rows])
    err = np.abs(np.array([r["mu_a"] - r["truth"] for r in rows]))
    disp = np.array([r["dispersion"] for r in rows])
    summ = {"L": [], "R_a": [], "mean_abs_error": [], "dispersion": [], "dispersion_asymptote": [],
            "mean_signal": []}
    sig = np.array([r["signal"] for r in rows])
    for L in L_values:
        sel = L_arr == L
        summ["L"].append(int(L))
        summ["R_a"].append(1.0 / (L + 1))
        summ["mean_abs_error"].append(float(err[sel].mean()))
        summ["dispersion"].append(float(disp[sel].mean()))
        summ["dispersion_asymptote"].append(float(0.5 * np.log1p(L) - 0.5))
        summ["mean_signal"].append(float(sig[sel].mean()))
    _csv(out, "bayes_summary.csv", summ, written, "replicate averages per L")
    return written, {"n_rows": len(rows), "L_values": [int(v) for v in L_values]}


def _bayes_L_values(p):
    L_max = int(p["L_max"])
    _require(L_max >= 1, "L_max must be at least 1")
    if p["L_grid"] == "full":
        return list(range(L_max + 1))
    if p["L_grid"] == "log":
        per_decade = int(p["per_decade"])
        _require(per_decade >= 1, "per_decade must be at least 1")
        ups = np.unique(np.round(np.logspace(0, np.log10(L_max), int(per_decade * np.log10(L_max)) + 1)).astype(int))
        return [0] + [int(v) for v in ups]
    raise ConfigError(f"L_grid must be 'log' or 'full', got {p['L_grid']!r}")


def lada_setup(p, seed):
    """Shared flow, tracers and filter settings of the tracer experiments."""
    _positive(p, "horizon", "dt", "d", "sigma", "sigma_x", "stride", "init_scale")
    config = dynamics.FlowModelConfig.square(int(p["kmax"]), p["d"], 0.0, 0.0, p["sigma"], p["sigma_x"])
    grid = dynamics.TimeGrid.from_horizon(p["horizon"], p["dt"])
    flow = dynamics.simulate_flow(config, grid, _rng.derive_seed(seed, 0))
    L_values = [int(v) for v in p["L_values"]]
    _require(min(L_values) >= 1, "L_values must be positive")
    tracers = lada.simulate_tracers(flow, max(L_values), seed=_rng.derive_seed(seed, 1))
    init = prob.GaussianDist(config.equilibrium_mean, np.diag(p["init_scale"] * config.equilibrium_variance))
    return config, flow, tracers, init, L_values


def lada_scan(p, seed, out):
    config, flow, tracers, init, L_values = lada_setup(p, seed)
    stride = int(p["stride"])
    k11 = config.mode_index((1, 1))
    n = int(p["grid_n"])
    truth_u = dynamics.velocity_field(config, flow.coeffs[-1], n)
    pts = dynamics.grid_points(n)
    fields = {"x": pts[:, 0], "y": pts[:, 1], "u_truth": truth_u[0].ravel(), "v_truth": truth_u[1].ravel()}
    rows = []
    series = {"t": flow.grid.times[::stride], "truth_11": flow.coeffs[::stride, k11]}
    for L in L_values:
        filt = lada.run_filter(tracers.subset(L), config, init=init, stride=stride)
        ur = lada.uncertainty_reduction(filt, truth=flow)
        first = int(np.floor(0.5 * (filt.n_times - 1)))
        diff = filt.mean[first:, k11] - flow.coeffs[::stride][first:, k11]
        rec = lada.reconstruct_flow(filt, filt.n_times - 1, n)
        fields[f"u_L{L}"] = rec[0].ravel()
        fields[f"v_L{L}"] = rec[1].ravel()
        rows.append({"L": L, "signal": ur.signal, "dispersion": ur.dispersion, "signal_truth": ur.signal_truth,
                     "rmse_11": float(np.sqrt(np.mean(np.abs(diff) ** 2))),
                     "field_rmse": lada.field_rmse(rec, truth_u), "log_L": float(np.log(L))})
        series[f"mean_11_L{L}"] = filt.mean[:, k11]
        series[f"std_11_L{L}"] = np.sqrt(filt.variance()[:, k11])
    written = {}
    _csv(out, "lada_scan.csv", rows_to_columns(rows), written,
         "time-averaged signal and dispersion over the second half of the run, per L")
    _csv(out, "mode_11.csv", series, written, "truth and posterior mean/std of the (1,1) amplitude per stored step",
         stride=stride, dt=p["dt"])
    _csv(out, "fields.csv", fields, written, "velocity on the final step, row-major grid (y outer, x inner)",
         grid_n=n, step=flow.grid.steps, time=float(flow.grid.times[-1]), domain=[-np.pi, np.pi])
    return written, {"rows": rows}


def param_estimate(p, seed, out):
    r_values = [float(r) for r in p["r_values"]]
    _require(all(r >= 0 for r in r_values), "r_values must be nonnegative")
    rows = []
    for i, r in enumerate(r_values):
        data = diagnostics.RegressionData.oscillator(p["a"], p["b"], r, n=int(p["n_points"]))
        est = diagnostics.estimate_a_uncertain(data)
        y2 = float(np.mean(data.y_mean**2))
        rows.append({"r": r, "a_estimate": est, "a_closed_form": p["a"] * y2 / (y2 + r),
                     "a_reported": p["reported"][i] if i < len(p["reported"]) else float("nan")})
    written = {}
    _csv(out, "param_table.csv", rows_to_columns(rows), written,
         "estimate of a with y uncertainty r, closed form a<y^2>/(<y^2>+r) and reported values")

    two = diagnostics.RegressionData(np.arange(2.0), p["two_point_xdot"], p["two_point_y"],
                                     np.full(2, float(p["two_point_var"])))
    res = diagnostics.sample_a_distribution(two, int(p["n_samples"]), _rng.derive_seed(seed, 0))
    _csv(out, "a_samples.csv", {"sample": np.arange(res.a.size), "a": res.a, "numerator": res.numerator,
                                "denominator": res.denominator}, written,
         "per-draw least-squares estimates of a in the two-point experiment")
    summary = {
        "table": rows,
        "two_point": {
            "a_exact_y": float(diagnostics.estimate_a(np.asarray(p["two_point_xdot"]), np.asarray(p["two_point_y"]))),
            "a_uncertain": diagnostics.estimate_a_uncertain(two),
            "a_sample_mean": res.summary.mean,
            "a_sample_median": float(np.median(res.a)),
            "excess_kurtosis": res.summary.excess_kurtosis,
            "mean_denominator": float(res.denominator.mean()),
        },
    }
    return written, summary


def eddy_ow(p, seed, out):
    config, flow, tracers, init, L_values = lada_setup(p, seed)
    n = int(p["grid_n"])
    _require(n >= 4, "grid_n must be at least 4")
    stride = int(p["stride"])
    u, v = dynamics.velocity_field(config, flow.coeffs[-1], n)
    truth = diagnostics.ow_field(u, v, 2 * np.pi / n)
    pts = dynamics.grid_points(n)
    cols = {"x": pts[:, 0], "y": pts[:, 1], "ow_truth": truth.ow.ravel()}
    rows = []
    for L in L_values:
        filt = lada.run_filter(tracers.subset(L), config, init=init, stride=stride)
        samples = diagnostics.sample_posterior_flows(filt, filt.n_times - 1, int(p["n_samples"]), n,
                                                     _rng.derive_seed(seed, 2, L))
        exp = samples.expected()
        um, vm = lada.reconstruct_flow(filt, filt.n_times - 1, n)
        cols[f"ow_posterior_mean_flow_L{L}"] = diagnostics.ow_field(um, vm, 2 * np.pi / n).ow.ravel()
        cols[f"ow_mean_L{L}"] = exp.mean_ow.ravel()
        cols[f"ow_fluctuation_L{L}"] = exp.fluctuation.ravel()
        cols[f"ow_var_L{L}"] = samples.ow_variance().ravel()
        cols[f"eddy_prob_L{L}"] = samples.eddy_probability(p["threshold"]).ravel()
        rows.append({"L": L, "mean_ow_variance": float(samples.ow_variance().mean()),
                     "decomposition_residual": exp.residual,
                     "eddy_area_truth": float(np.mean(truth.ow < p["threshold"])),
                     "eddy_area_expected": float(np.mean(exp.mean_ow < p["threshold"]))})
    written = {}
    _csv(out, "ow_fields.csv", cols, written, "OW maps on the final step, row-major grid (y outer, x inner)",
         grid_n=n, step=flow.grid.steps, time=float(flow.grid.times[-1]), domain=[-np.pi, np.pi])
    _csv(out, "ow_summary.csv", rows_to_columns(rows), written, "cell-averaged OW sample variance per L")
    return written, {"rows": rows}


def calibrate_regimes(p, seed, out):
    _positive(p, "horizon", "dt", "max_lag", "n_grid")
    grid = dynamics.TimeGrid.from_horizon(p["horizon"], p["dt"])
    names = list(p["regimes"])
    for nm in names:
        _require(nm in dynamics.CUBIC_REGIMES, f"unknown regime {nm!r}; choose from {sorted(dynamics.CUBIC_REGIMES)}")
    rows, pdf_cols, acf_cols = [], {}, {}
    lag_n = int(round(p["acf_lag"] / p["dt"]))
    acf_cols["lag"] = np.arange(lag_n + 1) * p["dt"]
    for i, nm in enumerate(names):
        truth = dynamics.simulate_cubic(dynamics.CUBIC_REGIMES[nm], 0.0, grid, _rng.derive_seed(seed, i, 0))
        res = calibrate.calibrate_ou(truth, p["dt"], p["max_lag"])
        sur_seed = _rng.derive_seed(seed, i, 1)
        rep = calibrate.validate_surrogate(truth, res, p["dt"], sur_seed)
        sur = dynamics.simulate_ou_real(res.a, res.f, res.sigma, res.mu, grid, sur_seed)
        pt, ps = calibrate.pdf_pair(truth, sur, n=int(p["n_grid"]))
        pdf_cols[f"{nm}_x"] = pt.x
        pdf_cols[f"{nm}_truth"] = pt.values
        pdf_cols[f"{nm}_surrogate"] = ps.values
        acf_cols[f"{nm}_truth"] = calibrate.acf(truth, p["dt"], p["acf_lag"])
        acf_cols[f"{nm}_surrogate"] = calibrate.acf(sur, p["dt"], p["acf_lag"])
        rows.append({"regime": nm, "a": res.a, "f": res.f, "sigma": res.sigma, "mu": res.mu, "R": res.R,
                     "tau": res.tau, "tau_truncated": res.truncated, "mean_err": rep.mean_err, "var_err": rep.var_err,
                     "acf_linf": rep.acf_linf, "kl": rep.kl, "kl_reverse": rep.kl_reverse,
                     "truth_skewness": rep.truth_stats.skewness, "truth_kurtosis": rep.truth_stats.kurtosis,
                     "surrogate_skewness": rep.surrogate_stats.skewness,
                     "surrogate_kurtosis": rep.surrogate_stats.kurtosis,
                     "truth_modes": calibrate.count_modes(pt), "surrogate_modes": calibrate.count_modes(ps)})
    written = {}
    _csv(out, "calibration.csv", rows_to_columns(rows), written,
         "fitted surrogate parameters and truth/surrogate comparison per regime; kl is KL(surrogate || truth)")
    _csv(out, "pdfs.csv", pdf_cols, written, "clipped kernel density estimates of truth and surrogate")
    _csv(out, "acf.csv", acf_cols, written, "autocorrelation functions of truth and surrogate")
    return written, {"rows": rows}


_LADA_DEFAULTS = {"kmax": 2, "d": 0.5, "sigma": 0.5, "sigma_x": 0.1, "dt": 1e-3, "stride": 10, "init_scale": 0.01}

COMMANDS = {
    c.name: c
    for c in [
        Command("entropy-gallery", entropy_gallery, {
            "gaussian_means": [0.0, 0.0, 0.0, 2.0], "gaussian_variances": [0.25, 1.0, 4.0, 0.25],
            "gamma_shapes": [9.0, 2.0, 1.0], "gamma_scales": [0.5, 1.0, 2.0], "n_grid": 2001,
            "n_samples": 10000, "clip_eps": prob.DEFAULT_CLIP, "kl_domain": [-10.0, 10.0],
            "kl_p": [[0.0, 1.0], [0.0, 1.0]], "kl_pm": [[0.5, 1.0], [1.0, 2.0]],
        }, "Entropies of Gaussian and Gamma densities; sampled KL with and without clipping"),
        Command("linear-ensemble", linear_ensemble, {
            "a": 1.0, "f": 1.0, "x0": 2.0, "init_var": 0.09, "horizon": 5.0, "dt": 0.01, "n_member": 500,
            "n_show": 20, "closure_b": 0.5, "n_member_closure": 10000,
        }, "Ensemble of the damped linear ODE from an uncertain start; quadratic moment closure check"),
        Command("l63-ensemble", l63_ensemble, {
            "params": [10.0, 28.0, 8.0 / 3.0], "x0": [20.0, -20.0, 25.0], "init_var": 1.0, "horizon": 20.0,
            "dt": 0.005, "stride": 2, "n_member": 100, "n_show": 20,
        }, "Lorenz 63 ensemble from an uncertain start against the deterministic run"),
        Command("bayes-scan", bayes_scan, {
            "L_max": 10000, "L_grid": "log", "per_decade": 10, "n_replicates": 100, "mu_f": 1.0,
        }, "Posterior of a scalar under L repeated unit-noise observations"),
        Command("lada-scan", lada_scan, dict(_LADA_DEFAULTS, horizon=20.0, L_values=[2, 5, 10, 20, 50], grid_n=32),
                "Tracer-based flow recovery and uncertainty reduction as L grows"),
        Command("param-estimate", param_estimate, {
            "a": 2.0, "b": -2.0, "r_values": [0.5, 1.0, 2.0], "reported": [1.000, 0.672, 0.404], "n_points": 20000,
            "two_point_xdot": [1.0, 2.0], "two_point_y": [1.0, 3.0], "two_point_var": 10.0, "n_samples": 100000,
        }, "Regression for a in dx/dt = a y with uncertain y"),
        Command("eddy-ow", eddy_ow, dict(_LADA_DEFAULTS, horizon=5.0, L_values=[1, 5], grid_n=32, n_samples=100,
                                         threshold=0.0),
                "Okubo-Weiss eddy diagnostics on flows sampled from the tracer posterior"),
        Command("calibrate-regimes", calibrate_regimes, {
            "regimes": ["nearly_gaussian", "highly_skewed", "fat_tailed", "bimodal"], "horizon": 5000.0, "dt": 0.005,
            "max_lag": 20.0, "acf_lag": 5.0, "n_grid": 2001,
        }, "Linear stochastic surrogates fitted to four regimes of the cubic model"),
    ]
}


def resolve_params(name, overrides):
    """Defaults of command ``name`` updated by ``overrides``, with types checked."""
    if name not in COMMANDS:
        raise ConfigError(f"unknown command {name!r}; choose from {', '.join(COMMANDS)}")
    defaults = COMMANDS[name].defaults
    params = dict(defaults)
    for key, value in (overrides or {}).items():
        if key not in defaults:
            raise ConfigError(f"{name} has no parameter {key!r}")
        params[key] = coerce(key, value, defaults[key])
    return params


def coerce(key, value, default):
    """Convert ``value`` to the type of ``default``; lists are parsed element-wise."""
    try:
        if isinstance(default, list):
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            if not isinstance(value, (list, tuple)):
                value = [value]
            if default and isinstance(default[0], list):
                return [coerce(key, v, default[0]) for v in value]
            proto = default[0] if default else 0.0
            return [coerce(key, v, proto) for v in value]
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes")
            return bool(value)
        if isinstance(default, int):
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
        if isinstance(default, float):
            v = float(value)
            if not np.isfinite(v):
                raise ValueError
            return v
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r}: cannot interpret {value!r} like {default!r}") from None


def run(name, params, seed, out):
    """Run command ``name`` and return ``(csv digests, summary)``."""
    os.makedirs(out, exist_ok=True)
    return COMMANDS[name].run(params, int(seed), out)
