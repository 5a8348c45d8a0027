"""Diagnostics that are nonlinear in an uncertain state.

Two cases: least-squares estimation of ``a`` in ``dx/dt = a y, dy/dt = b x``
when ``y`` is only known through a Gaussian estimate, and Okubo-Weiss (OW)
eddy identification on flows drawn from a filter posterior.
"""

from dataclasses import dataclass

import numpy as np

from uqkit import _rng
from uqkit.dynamics import grid_points, velocity_field
from uqkit.errors import ConfigError, DegenerateSampleError, GridMismatchError, InstabilityError, RankError, SizeError
from uqkit.prob import StatSummary, sqrt_psd, summary_stats


# ---------------------------------------------------------------------------
# parameter estimation


@dataclass(frozen=True, eq=False)
class RegressionData:
    """Observed ``dx/dt`` with a Gaussian estimate ``N(y_mean, y_var)`` of ``y`` at each time."""

    times: np.ndarray
    xdot: np.ndarray
    y_mean: np.ndarray
    y_var: np.ndarray

    def __post_init__(self):
        arrays = [np.atleast_1d(np.asarray(getattr(self, k), dtype=float)) for k in ("times", "xdot", "y_mean", "y_var")]
        n = arrays[0].size
        if any(a.shape != (n,) for a in arrays):
            raise ConfigError("times, xdot, y_mean and y_var must be 1-D arrays of equal length")
        if np.any(arrays[3] < 0):
            raise ConfigError("y_var must be nonnegative")
        for k, a in zip(("times", "xdot", "y_mean", "y_var"), arrays):
            a.setflags(write=False)
            object.__setattr__(self, k, a)

    @classmethod
    def oscillator(cls, a=2.0, b=-2.0, y_var=0.0, horizon=None, n=20000, amplitude=1.0):
        """Data sampled uniformly over whole periods of ``dx/dt = a y, dy/dt = b x``.

        Requires ``a b < 0``. Starting from ``x = 0``, ``y = amplitude``,
        ``y(t) = amplitude cos(w t)`` with ``w = sqrt(-a b)``, so the time
        average of ``y^2`` over whole periods is ``amplitude^2 / 2``.
        """
        if not a * b < 0:
            raise ConfigError("need a*b < 0 for an oscillating solution")
        w = np.sqrt(-a * b)
        if horizon is None:
            horizon = 10 * 2 * np.pi / w
        t = np.arange(n) * horizon / n
        y = amplitude * np.cos(w * t)
        return cls(t, a * y, y, np.full(n, float(y_var)))


def estimate_theta_full(M_blocks, z_blocks):
    """Least squares ``theta = (sum M^T M)^{-1} sum M^T z`` over stacked blocks.

    ``M_blocks`` has shape ``(I, 2, 2)`` (``M_i = diag(y_i, x_i)``) and
    ``z_blocks`` shape ``(I, 2)`` (``z_i = (xdot_i, ydot_i)``).
    """
    M = np.asarray(M_blocks, dtype=float)
    z = np.asarray(z_blocks, dtype=float)
    if M.ndim != 3 or z.shape != M.shape[:2]:
        raise ConfigError("need M_blocks of shape (I, p, q) and z_blocks of shape (I, p)")
    normal = np.einsum("ikj,ikl->jl", M, M)
    rhs = np.einsum("ikj,ik->j", M, z)
    if np.linalg.matrix_rank(normal) < normal.shape[0]:
        raise RankError("normal matrix sum M^T M is singular")
    return np.linalg.solve(normal, rhs)


def oscillator_blocks(x, y, xdot, ydot):
    """Regression blocks for ``dx/dt = a y, dy/dt = b x``."""
    x, y, xdot, ydot = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (x, y, xdot, ydot))
    M = np.zeros((x.size, 2, 2))
    M[:, 0, 0] = y
    M[:, 1, 1] = x
    return M, np.column_stack([xdot, ydot])


def estimate_a(xdot, y):
    """``a = sum(y xdot) / sum(y^2)`` with ``y`` known exactly."""
    xdot = np.asarray(xdot, dtype=float)
    y = np.asarray(y, dtype=float)
    denom = np.sum(y**2, axis=-1)
    if np.any(denom == 0):
        raise DegenerateSampleError("sum of y^2 is zero")
    return np.sum(y * xdot, axis=-1) / denom


def estimate_a_uncertain(data):
    """``a = sum(<y> xdot) / sum(<y>^2 + var(y))``.

    Averaging ``y^2`` over the uncertainty adds the variance to the
    denominator; with zero variances this is :func:`estimate_a`.
    """
    denom = np.sum(data.y_mean**2 + data.y_var)
    if not denom > 0:
        raise DegenerateSampleError("denominator sum(<y>^2 + var) is zero")
    return float(np.sum(data.y_mean * data.xdot) / denom)


@dataclass(frozen=True, eq=False)
class ASampleResult:
    a: np.ndarray
    numerator: np.ndarray
    denominator: np.ndarray
    summary: StatSummary


def sample_a_distribution(data, n_samples, seed):
    """Estimate ``a`` separately for many draws ``y_i ~ N(y_mean_i, y_var_i)``.

    The average of the per-draw ``a`` generally differs both from the
    estimate at the mean and from :func:`estimate_a_uncertain`; the per-draw
    denominators, however, average to the latter's denominator.
    """
    if n_samples < 100:
        raise SizeError("n_samples must be at least 100")
    rng = _rng.stream(seed)
    y = data.y_mean + np.sqrt(data.y_var) * rng.standard_normal((n_samples, data.y_mean.size))
    num = y @ data.xdot
    den = np.sum(y**2, axis=1)
    a = num / den
    try:
        summary = summary_stats(a)
    except DegenerateSampleError:
        summary = StatSummary(float(a[0]), 0.0, 0.0, float("nan"), a.size)
    return ASampleResult(a, num, den, summary)


# ---------------------------------------------------------------------------
# Okubo-Weiss


@dataclass(frozen=True, eq=False)
class OwField:
    """OW parameter and its components; arrays indexed ``[iy, ix]``."""

    n: int
    dx_space: float
    ow: np.ndarray
    s_n: np.ndarray
    s_s: np.ndarray
    omega: np.ndarray


def ow_from_gradients(u_x, u_y, v_x, v_y, dx_space=float("nan")):
    """OW from given velocity gradients (the analytic-derivative entry point)."""
    u_x, u_y, v_x, v_y = np.broadcast_arrays(*(np.asarray(g, dtype=float) for g in (u_x, u_y, v_x, v_y)))
    s_n = u_x - v_y
    s_s = v_x + u_y
    omega = v_x - u_y
    n = s_n.shape[0] if s_n.ndim else 1
    return OwField(n, dx_space, s_n**2 + s_s**2 - omega**2, s_n, s_s, omega)


def periodic_gradients(u, v, dx_space):
    """Second-order central differences with periodic wrap; returns ``u_x, u_y, v_x, v_y``."""
    def ddx(a):
        return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2 * dx_space)

    def ddy(a):
        return (np.roll(a, -1, axis=0) - np.roll(a, 1, axis=0)) / (2 * dx_space)

    return ddx(u), ddy(u), ddx(v), ddy(v)


def ow_field(u, v, dx_space):
    """OW parameter of a gridded periodic velocity field."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise GridMismatchError("u and v must be square arrays of equal shape")
    if u.shape[0] < 4:
        raise SizeError("grid must be at least 4 x 4")
    if not dx_space > 0:
        raise ConfigError("dx_space must be positive")
    return ow_from_gradients(*periodic_gradients(u, v, dx_space), dx_space=dx_space)


def spectral_gradients(config, coeffs, n):
    """Exact gradients of a Fourier velocity field on the ``n x n`` grid."""
    pts = grid_points(n)
    phase = np.exp(1j * (pts @ config.modes.T)) * np.asarray(coeffs)[None, :]
    r = config.eigenvectors
    k = config.modes
    # d/dx_j exp(i k.x) = i k_j exp(i k.x)
    grads = [np.real((1j * phase * k[:, j][None, :]) @ r[:, c]).reshape(n, n) for c in (0, 1) for j in (0, 1)]
    u_x, u_y, v_x, v_y = grads
    return u_x, u_y, v_x, v_y


@dataclass(frozen=True, eq=False)
class ExpectedOw:
    mean_ow: np.ndarray
    ow_of_mean: np.ndarray
    fluctuation: np.ndarray
    residual: float


def expected_ow(flow_samples, dx_space=None):
    """Average OW over sampled flows and split it into mean-flow and fluctuation parts.

    ``flow_samples`` is a sequence of ``(u, v)`` grids on ``[-pi, pi)^2``
    unless ``dx_space`` says otherwise. The fluctuation part is
    ``E[u_x'^2] - 2 E[u_x' v_y'] + E[v_y'^2] + 4 E[v_x' u_y']`` with sample
    averages, and ``residual`` is the largest violation of
    ``mean_ow = ow_of_mean + fluctuation``.
    """
    samples = [(np.asarray(u, dtype=float), np.asarray(v, dtype=float)) for u, v in flow_samples]
    if len(samples) < 2:
        raise SizeError("need at least two flow samples")
    shape = samples[0][0].shape
    if any(u.shape != shape or v.shape != shape for u, v in samples):
        raise GridMismatchError("all samples must share one grid")
    if dx_space is None:
        dx_space = 2 * np.pi / shape[0]
    u = np.stack([s[0] for s in samples])
    v = np.stack([s[1] for s in samples])
    ows = np.stack([ow_field(a, b, dx_space).ow for a, b in zip(u, v)])
    mean_ow = ows.mean(axis=0)
    ow_of_mean = ow_field(u.mean(axis=0), v.mean(axis=0), dx_space).ow
    g = [np.stack(c) for c in zip(*(periodic_gradients(a, b, dx_space) for a, b in zip(u, v)))]
    ux, uy, vx, vy = (c - c.mean(axis=0) for c in g)
    fluct = np.mean(ux**2 - 2 * ux * vy + vy**2 + 4 * vx * uy, axis=0)
    scale = max(np.abs(mean_ow).max(), 1.0)
    residual = float(np.abs(mean_ow - ow_of_mean - fluct).max() / scale)
    return ExpectedOw(mean_ow, ow_of_mean, fluct, residual)


@dataclass(frozen=True, eq=False)
class PosteriorFlowSamples:
    """Flows drawn from a Gaussian posterior over Fourier amplitudes.

    ``coeffs`` is ``(n_samples, M)``; ``u``, ``v`` and ``ow`` are
    ``(n_samples, n, n)``.
    """

    coeffs: np.ndarray
    u: np.ndarray
    v: np.ndarray
    ow: np.ndarray
    dx_space: float

    def eddy_probability(self, threshold=0.0):
        """Fraction of samples with ``OW < threshold`` in each cell."""
        return np.mean(self.ow < threshold, axis=0)

    def ow_variance(self):
        return self.ow.var(axis=0)

    def expected(self):
        return expected_ow(list(zip(self.u, self.v)), self.dx_space)


def _half_space_factor(mean, cov, config):
    """Mean and real square-root covariance of the free amplitudes ``(Re z, Im z)``."""
    H = config.half
    Hp = config.partner[H]
    C = cov[np.ix_(H, H)]
    # for u_{-k} = conj(u_k) the cross block is the pseudo-covariance E[dz dz^T]
    Pc = cov[np.ix_(H, Hp)]
    aa = 0.5 * np.real(C + Pc)
    bb = 0.5 * np.real(C - Pc)
    ab = 0.5 * (np.imag(Pc) - np.imag(C))
    real_cov = np.block([[aa, ab], [ab.T, bb]])
    real_cov = 0.5 * (real_cov + real_cov.T)
    eig = np.linalg.eigvalsh(real_cov)
    if eig[0] < -1e-8 * max(1.0, eig[-1]):
        raise InstabilityError(f"posterior covariance is not positive semi-definite (min eigenvalue {eig[0]:.2e})")
    return mean[H], sqrt_psd(real_cov)


def sample_coefficients(mean, cov, config, n_samples, seed):
    """Conjugate-symmetric draws from ``N(mean, cov)``, shape ``(n_samples, M)``."""
    mean = np.asarray(mean, dtype=complex)
    cov = np.asarray(cov, dtype=complex)
    mu_h, factor = _half_space_factor(mean, cov, config)
    h = mu_h.size
    rng = _rng.stream(seed)
    w = rng.standard_normal((n_samples, 2 * h)) @ factor.T
    z = mu_h + w[:, :h] + 1j * w[:, h:]
    out = np.empty((n_samples, config.n_modes), dtype=complex)
    out[:, config.half] = z
    out[:, config.partner[config.half]] = z.conj()
    return out


def sample_posterior_flows(filt, index, n_samples, grid_n, seed):
    """Sample flows from the filter posterior at stored step ``index`` and compute OW for each."""
    if not 0 <= index < filt.n_times:
        raise ConfigError(f"index {index} outside 0..{filt.n_times - 1}")
    config = filt.config
    coeffs = sample_coefficients(filt.mean[index], filt.cov[index], config, n_samples, seed)
    dx_space = 2 * np.pi / grid_n
    u = np.empty((n_samples, grid_n, grid_n))
    v = np.empty_like(u)
    ow = np.empty_like(u)
    for s in range(n_samples):
        u[s], v[s] = velocity_field(config, coeffs[s], grid_n)
        ow[s] = ow_field(u[s], v[s], dx_space).ow
    return PosteriorFlowSamples(coeffs, u, v, ow, dx_space)
