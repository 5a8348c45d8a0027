import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uqkit import dynamics as dy
from uqkit.errors import BlowUpError, ConfigError, SizeError, SymmetryError
from uqkit.prob import GaussianDist


def test_linear_analytic_examples():
    assert dy.linear_analytic(1.0, 0.0, 2.0, 0.0) == 2.0
    assert dy.linear_analytic(1.0, 1.0, 2.0, np.log(2)) == pytest.approx(1.5, abs=1e-15)
    assert dy.linear_analytic(2.0, 3.0, 5.0, 100.0) == pytest.approx(1.5)


def test_linear_ensemble_point_init():
    g = dy.TimeGrid(0.01, 300)
    ens = dy.simulate_linear_ensemble(1.0, 1.0, 2.0, g, 5, seed=0)
    ref = dy.linear_analytic(1.0, 1.0, 2.0, g.times)
    assert np.allclose(ens.members[:, :, 0], ref[None, :], atol=0, rtol=0)


def test_linear_ensemble_mean_and_variance():
    a = 1.0
    g = dy.TimeGrid(0.01, 300)
    ens = dy.simulate_linear_ensemble(a, 1.0, GaussianDist(2.0, 0.09), g, 500, seed=1)
    mean, var = dy.ensemble_stats(ens)
    t = g.times
    decay = np.exp(-a * t)
    assert np.all(np.abs(mean[:, 0] - dy.linear_analytic(a, 1.0, 2.0, t)) <= 4 * 0.3 / np.sqrt(500) * decay)
    # sample variance decays exactly like its initial value
    assert np.allclose(var[:, 0], var[0, 0] * decay**2, rtol=1e-10)
    assert var[0, 0] == pytest.approx(0.09, rel=0.15)


def test_linear_rejects_bad_damping():
    with pytest.raises(ConfigError):
        dy.simulate_linear_ensemble(0.0, 1.0, 2.0, dy.TimeGrid(0.1, 10), 3, seed=0)


def test_l63_origin_fixed_point():
    traj = dy.simulate_l63(dy.L63Params(), [0, 0, 0], dy.TimeGrid(0.01, 500))
    assert np.all(traj == 0)


def test_l63_equilibrium_rhs_zero():
    p = dy.L63Params()
    c = np.sqrt(p.beta * (p.rho - 1))
    assert np.allclose(dy.l63_rhs(p)(np.array([c, c, p.rho - 1])), 0, atol=1e-12)


def test_l63_sensitivity():
    g = dy.TimeGrid(0.005, 6000)
    a = dy.simulate_l63(dy.L63Params(), [20, -20, 25], g)
    b = dy.simulate_l63(dy.L63Params(), [20 + 1e-8, -20, 25], g)
    assert np.abs(a[-1] - b[-1]).max() > 1.0


def test_l63_blowup_reported():
    with pytest.raises(BlowUpError):
        dy.simulate_l63(dy.L63Params(), [20, -20, 25], dy.TimeGrid(0.5, 50))


def test_l63_ensemble_spread_and_envelope():
    g = dy.TimeGrid(0.005, 2000)
    ens = dy.simulate_l63_ensemble(dy.L63Params(), GaussianDist([20, -20, 25], np.eye(3)), g, 100, seed=7)
    mean, var = dy.ensemble_stats(ens)
    assert np.sqrt(var[-1, 2]) > 5
    lo, hi = ens.members.min(axis=0), ens.members.max(axis=0)
    assert np.all((mean[-1] > lo[-1]) & (mean[-1] < hi[-1]))


def test_l63_ensemble_zero_cov():
    g = dy.TimeGrid(0.01, 100)
    ens = dy.simulate_l63_ensemble(dy.L63Params(), GaussianDist([1, 2, 3], np.zeros((3, 3))), g, 4, seed=0)
    assert np.all(ens.members == ens.members[0])


def test_ensemble_member_streams_independent_of_size():
    g = dy.TimeGrid(0.01, 50)
    init = GaussianDist([20, -20, 25], np.eye(3))
    small = dy.simulate_l63_ensemble(dy.L63Params(), init, g, 3, seed=9)
    big = dy.simulate_l63_ensemble(dy.L63Params(), init, g, 10, seed=9)
    assert np.array_equal(small.members, big.members[:3])


def test_ensemble_stats_duplicate_members():
    g = dy.TimeGrid(0.1, 10)
    m = np.tile(np.linspace(0, 1, 11)[None, :, None], (2, 1, 1))
    _, var = dy.ensemble_stats(dy.Ensemble(g, m))
    assert np.all(var == 0)


def test_ensemble_stats_single_member():
    g = dy.TimeGrid(0.1, 10)
    with pytest.raises(SizeError):
        dy.ensemble_stats(dy.Ensemble(g, np.zeros((1, 11, 1))))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30))
def test_reynolds_identity(xs):
    g = dy.TimeGrid(1.0, 1)
    x = np.asarray(xs)
    members = np.stack([x, 2 * x], axis=1)[:, :, None]
    mean, var = dy.ensemble_stats(dy.Ensemble(g, members))
    second = (members**2).mean(axis=0)
    assert np.allclose(second, mean**2 + var, rtol=1e-10, atol=1e-9)


def test_quadratic_closure():
    cc = dy.quadratic_closure_check(0.5, GaussianDist(1.0, 0.25), 20000, 1e-3, seed=3)
    assert abs(cc.fd_slope - cc.closed) < 3 * cc.stderr
    # dropping the fluctuation term misses b * var = 0.125
    assert abs(cc.fd_slope - cc.mean_only) > 10 * cc.stderr


def test_ou_pure_decay():
    g = dy.TimeGrid(0.01, 100)
    u = dy.simulate_ou(dy.OuParams(1.0, 0.0, 0.0, 0.0), 1.0 + 0j, g, seed=0)
    assert u[-1] == pytest.approx(np.exp(-1.0), abs=0.01)


def test_ou_equilibrium_statistics():
    p = dy.OuParams(1.0, 0.5, 1.0 + 0.5j, 1.0)
    g = dy.TimeGrid(0.01, 400000)
    u = dy.simulate_ou(p, p.equilibrium_mean, g, seed=2)
    assert abs(u.mean() - p.equilibrium_mean) < 0.05
    assert np.mean(np.abs(u - u.mean()) ** 2) == pytest.approx(p.equilibrium_variance, rel=0.05)


def test_ou_weak_order():
    # halving dt moves the variance estimate by less than its Monte Carlo error
    p = dy.OuParams(1.0, 0.0, 0.0, 1.0)
    v = []
    for dt, seed in ((0.01, 4), (0.005, 5)):
        u = dy.simulate_ou(p, 0j, dy.TimeGrid.from_horizon(4000, dt), seed=seed)
        v.append(np.mean(np.abs(u) ** 2))
    mc = 0.5 * np.sqrt(2 * 2 / 4000)  # var * sqrt(2 tau / T) with tau = 1/(2d) for |u|^2
    assert abs(v[0] - v[1]) < 3 * mc


def test_cubic_noiseless_decay():
    p = dy.CubicParams(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    x = dy.simulate_cubic(p, 1.0, dy.TimeGrid(0.001, 5000), seed=0)
    assert x[-1] == pytest.approx(np.exp(-5.0), rel=0.01)


def test_cubic_nearly_gaussian_kurtosis():
    from uqkit.prob import summary_stats

    x = dy.simulate_cubic(dy.CUBIC_REGIMES["nearly_gaussian"], 0.0, dy.TimeGrid(0.005, 400000), seed=1)
    assert 2.7 <= summary_stats(x[1000:]).kurtosis <= 3.3


def test_cubic_bimodal_two_peaks():
    from uqkit import prob
    from uqkit.calibrate import count_modes

    x = dy.simulate_cubic(dy.CUBIC_REGIMES["bimodal"], 0.0, dy.TimeGrid(0.005, 1_000_000), seed=2)
    est = prob.estimate_pdf(x, -6, 0.01, 1201)
    assert count_modes(est) == 2


def test_cubic_blowup():
    p = dy.CubicParams(0.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(BlowUpError):
        dy.simulate_cubic(p, 10.0, dy.TimeGrid(0.01, 1000), seed=0)


def test_flow_config_reference():
    c = dy.FlowModelConfig.square()
    assert c.n_modes == 24
    assert np.all(np.abs(c.modes).max(axis=1) <= 2)
    assert not np.any(np.all(c.modes == 0, axis=1))
    assert np.allclose(np.einsum("ij,ij->i", c.modes, c.eigenvectors), 0)


def test_flow_config_rejects_missing_partner():
    with pytest.raises(ConfigError):
        dy.FlowModelConfig(np.array([[1, 0]]), 0.5, 0.0, 0.0, 0.5, 0.1)


def test_flow_config_rejects_non_conjugate_forcing():
    with pytest.raises(ConfigError):
        dy.FlowModelConfig(np.array([[1, 0], [-1, 0]]), 0.5, 0.0, [1 + 1j, 1 + 1j], 0.5, 0.1)


def test_flow_zero():
    c = dy.FlowModelConfig.square(sigma=0.0)
    s = dy.simulate_flow(c, dy.TimeGrid(0.01, 20), seed=0)
    assert np.all(s.coeffs == 0)


def test_flow_equilibrium_variance_and_symmetry():
    c = dy.FlowModelConfig.square()
    s = dy.simulate_flow(c, dy.TimeGrid(0.01, 40000), seed=3)
    assert s.symmetry_defect() < 1e-10
    var = np.mean(np.abs(s.coeffs[2000:]) ** 2, axis=0)
    assert np.all(np.abs(var / 0.25 - 1) < 0.1 * 3)  # per mode
    assert var.mean() == pytest.approx(0.25, rel=0.1)


def test_velocity_single_pair():
    modes = np.array([[1, 0], [-1, 0]])
    r = np.array([[0, 1], [0, 1]], dtype=complex)
    c = dy.FlowModelConfig(modes, 0.5, 0.0, 0.0, 0.5, 0.1, eigenvectors=r)
    pts = np.random.default_rng(0).uniform(-np.pi, np.pi, (50, 2))
    vel = dy.velocity_from_coeffs(c, np.array([0.5, 0.5], dtype=complex), pts)
    assert np.allclose(vel[:, 0], 0, atol=1e-15)
    assert np.allclose(vel[:, 1], np.cos(pts[:, 0]), atol=1e-14)


def test_velocity_zero_coeffs():
    c = dy.FlowModelConfig.square()
    vel = dy.velocity_from_coeffs(c, np.zeros(24, dtype=complex), np.zeros((3, 2)))
    assert np.all(vel == 0)


def test_velocity_symmetry_error():
    c = dy.FlowModelConfig.square()
    coeffs = np.zeros(24, dtype=complex)
    coeffs[c.mode_index((1, 1))] = 1.0
    with pytest.raises(SymmetryError):
        dy.velocity_from_coeffs(c, coeffs, np.array([[0.3, 0.2]]))


def test_velocity_divergence_free():
    from uqkit.diagnostics import spectral_gradients

    c = dy.FlowModelConfig.square()
    s = dy.simulate_flow(c, dy.TimeGrid(0.01, 200), seed=4)
    u_x, _, _, v_y = spectral_gradients(c, s.coeffs[-1], 64)
    assert np.abs(u_x + v_y).max() < 1e-8


def test_eval_velocity_matches_field():
    c = dy.FlowModelConfig.square()
    s = dy.simulate_flow(c, dy.TimeGrid(0.01, 50), seed=5)
    u, v = dy.velocity_field(c, s.coeffs[10], 8)
    pts = dy.grid_points(8)
    vel = dy.eval_velocity(s, 10, pts)
    assert np.allclose(vel[:, 0], u.ravel()) and np.allclose(vel[:, 1], v.ravel())


def test_wrap_range():
    x = dy.wrap(np.array([np.pi, -np.pi, 3 * np.pi, 0.1, -7.0]))
    assert np.all((x > -np.pi) & (x <= np.pi))
    assert x[0] == pytest.approx(np.pi) and x[1] == pytest.approx(np.pi)


@pytest.mark.parametrize("factor, u0", [(0.99, 1.5), (0.9 + 0.05j, 1 - 2j)])
def test_linear_recursion_matches_loop(factor, u0):
    forcing = np.random.default_rng(3).standard_normal(500) * (1 + 0.5j if isinstance(factor, complex) else 1)
    ref = [u0]
    for g in forcing:
        ref.append(factor * ref[-1] + g)
    assert np.allclose(dy._linear_recursion(factor, forcing, u0), ref, rtol=1e-12, atol=1e-12)
