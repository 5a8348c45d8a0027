"""Lagrangian data assimilation with the conditional Gaussian filter.

Tracers are advected by a :class:`~uqkit.dynamics.SpectralFlowSeries` and
observed without error in position; their increments carry the information.
Conditioned on the tracer paths the Fourier amplitudes enter linearly, so the
posterior is Gaussian with mean and covariance obeying closed ODEs. Those are
stepped here with forward Euler using the observed increments.
"""

from dataclasses import dataclass

import numpy as np

from uqkit import _rng
from uqkit.dynamics import FlowModelConfig, TimeGrid, velocity_field, velocity_from_coeffs, wrap
from uqkit.errors import ConfigError, InstabilityError, SizeError, WindowError
from uqkit.info import relative_entropy_gaussian
from uqkit.prob import GaussianDist

PSD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class TracerSet:
    """Tracer positions, shape ``(steps + 1, L, 2)``, wrapped to ``(-pi, pi]``."""

    grid: TimeGrid
    positions: np.ndarray
    sigma_x: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 3 or pos.shape[0] != self.grid.steps + 1 or pos.shape[2] != 2:
            raise ConfigError(f"positions shape {pos.shape} does not match the time grid")
        pos = wrap(pos)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n_tracers(self):
        return self.positions.shape[1]

    def subset(self, L):
        """The first ``L`` tracers."""
        if not 1 <= L <= self.n_tracers:
            raise SizeError(f"L must be between 1 and {self.n_tracers}")
        return TracerSet(self.grid, self.positions[:, :L], self.sigma_x)

    def increments(self):
        """Per-step displacements with periodic jumps removed, shape ``(steps, L, 2)``."""
        return wrap(np.diff(self.positions, axis=0))


@dataclass(frozen=True, eq=False)
class FilterTrajectory:
    """Posterior mean ``(n_times, M)`` and covariance ``(n_times, M, M)`` over Fourier modes.

    Every ``stride``-th step of ``grid`` is stored.
    """

    grid: TimeGrid
    config: FlowModelConfig
    mean: np.ndarray
    cov: np.ndarray
    stride: int = 1

    @property
    def n_times(self):
        return self.mean.shape[0]

    @property
    def times(self):
        return self.grid.dt * self.stride * np.arange(self.n_times)

    def posterior(self, index):
        return GaussianDist(self.mean[index], self.cov[index])

    def variance(self):
        """Posterior variance of each mode, ``(n_times, M)``."""
        return np.real(np.diagonal(self.cov, axis1=1, axis2=2))


def simulate_tracers(flow, L, x0=None, seed=0):
    """Advect ``L`` noisy tracers through ``flow`` with Euler-Maruyama.

    Tracer ``l`` draws its start point (when ``x0`` is not given) and its
    noise from stream ``(seed, l)``, so the first ``L`` tracers of a larger
    set follow the same paths.
    """
    if L < 1:
        raise SizeError("need at least one tracer")
    grid = flow.grid
    sigma_x = flow.config.sigma_x
    streams = [_rng.stream(seed, l) for l in range(L)]
    start = np.empty((L, 2))
    noise = np.empty((grid.steps, L, 2))
    for l, rng in enumerate(streams):
        start[l] = rng.uniform(-np.pi, np.pi, 2)
        noise[:, l, :] = rng.standard_normal((grid.steps, 2))
    if x0 is not None:
        start = np.asarray(x0, dtype=float).reshape(L, 2)
    noise *= sigma_x * np.sqrt(grid.dt)

    pos = np.empty((grid.steps + 1, L, 2))
    x = wrap(start)
    pos[0] = x
    config, coeffs = flow.config, flow.coeffs
    for n in range(grid.steps):
        u = velocity_from_coeffs(config, coeffs[n], x, check=False)
        x = wrap(x + u * grid.dt + noise[n])
        pos[n + 1] = x
    return TracerSet(grid, pos, sigma_x)


def build_projection(positions, config):
    """Observation matrix ``P(x)``, shape ``(2L, M)``.

    Rows ``2l`` and ``2l + 1`` hold the two components of
    ``exp(i k.x_l) r_k`` for tracer ``l``.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 2 or pos.shape[1] != 2:
        raise ConfigError("positions must have shape (L, 2)")
    phase = np.exp(1j * (pos @ config.modes.T))  # (L, M)
    P = phase[:, None, :] * config.eigenvectors.T[None, :, :]  # (L, 2, M)
    return P.reshape(-1, config.n_modes)


def run_filter(tracers, config, init=None, stride=1, check_every=10):
    """Conditional Gaussian filter for the Fourier amplitudes.

    Parameters
    ----------
    tracers : TracerSet
    config : FlowModelConfig
        Forecast model; ``config.sigma_x`` is the tracer noise assumed by the
        filter.
    init : GaussianDist, optional
        Initial posterior; defaults to the OU equilibrium of every mode.
    stride : int
        Store every ``stride``-th step.
    check_every : int
        How often the covariance is checked for positive semi-definiteness.

    Returns
    -------
    FilterTrajectory
    """
    grid = tracers.grid
    m = config.n_modes
    if init is None:
        init = config.equilibrium()
    if init.dim != m:
        raise ConfigError(f"initial posterior has dimension {init.dim}, config has {m} modes")
    mu = np.array(init.mean, dtype=complex)
    R = np.array(init.cov, dtype=complex)

    dx = tracers.increments().reshape(grid.steps, -1)
    pos = tracers.positions

    n_out = grid.steps // stride + 1
    means = np.empty((n_out, m), dtype=complex)
    covs = np.empty((n_out, m, m), dtype=complex)
    means[0], covs[0] = mu, R
    # a blow-up is reported by _check_psd, not by floating point warnings
    with np.errstate(over="ignore", invalid="ignore"):
        _filter_loop(grid, config, mu, R, dx, pos, stride, check_every, means, covs)
    return FilterTrajectory(grid, config, means, covs, stride)


def _filter_loop(grid, config, mu, R, dx, pos, stride, check_every, means, covs):
    dt = grid.dt
    gamma = config.damping
    forcing = config.f
    q = np.diag(config.sigma**2).astype(complex)
    inv_obs = 1.0 / config.sigma_x**2
    for n in range(grid.steps):
        P = build_projection(pos[n], config)
        PR = P @ R
        innovation = dx[n] - (P @ mu) * dt
        mu = mu + (forcing - gamma * mu) * dt + inv_obs * (PR.conj().T @ innovation)
        dR = -gamma[:, None] * R - R * gamma.conj()[None, :] + q - inv_obs * (PR.conj().T @ PR)
        R = R + dR * dt
        R = 0.5 * (R + R.conj().T)
        step = n + 1
        if step % check_every == 0 or step == grid.steps:
            _check_psd(R, step)
        if step % stride == 0:
            means[step // stride] = mu
            covs[step // stride] = R


def _check_psd(R, step):
    if not np.all(np.isfinite(R)):
        raise InstabilityError(f"filter covariance became non-finite at step {step}; reduce dt")
    eig = np.linalg.eigvalsh(R)
    if eig[0] < -PSD_TOL * max(1.0, eig[-1]):
        raise InstabilityError(
            f"filter covariance lost positive semi-definiteness at step {step} "
            f"(min eigenvalue {eig[0]:.2e}); reduce dt"
        )


@dataclass(frozen=True)
class UncertaintyReduction:
    """Time-averaged relative entropy of the posterior with respect to the prior.

    ``signal`` uses the filter's posterior mean; ``signal_truth`` replaces it
    by the true amplitudes, the value the signal approaches as tracers become
    dense.
    """

    signal: float
    dispersion: float
    signal_truth: float
    n_window: int


def uncertainty_reduction(filt, config=None, truth=None, window_start=0.5):
    """Signal and dispersion of posterior vs equilibrium prior, averaged over a window.

    The window covers stored steps from the fraction ``window_start`` of the
    run to its end (the second half by default).
    """
    first = int(np.floor(window_start * (filt.n_times - 1)))
    idx = np.arange(first, filt.n_times)
    if idx.size < 10:
        raise WindowError(f"averaging window has {idx.size} steps; at least 10 are needed")
    prior = (config or filt.config).equilibrium()
    signal, dispersion, signal_truth = [], [], []
    for i in idx:
        kl = relative_entropy_gaussian(filt.posterior(i), prior)
        signal.append(kl.signal)
        dispersion.append(kl.dispersion)
        if truth is not None:
            # signal only depends on the mean; reuse the prior covariance to avoid a second factorization
            t_step = i * filt.stride
            kt = relative_entropy_gaussian(GaussianDist(truth.coeffs[t_step], prior.cov), prior)
            signal_truth.append(kt.signal)
    return UncertaintyReduction(
        float(np.mean(signal)),
        float(np.mean(dispersion)),
        float(np.mean(signal_truth)) if signal_truth else float("nan"),
        int(idx.size),
    )


def reconstruct_flow(filt, index, grid_n):
    """Velocity ``(u, v)`` of the posterior-mean amplitudes on a ``grid_n x grid_n`` grid."""
    if not 0 <= index < filt.n_times:
        raise ConfigError(f"index {index} outside 0..{filt.n_times - 1}")
    return velocity_field(filt.config, filt.mean[index], grid_n)


def field_rmse(a, b):
    """Root-mean-square difference of two velocity fields given as ``(u, v)`` pairs."""
    return float(np.sqrt(np.mean((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2)))
