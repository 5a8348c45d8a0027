"""Forward models and ensembles.

Deterministic ODEs are stepped with classical RK4, SDEs with Euler-Maruyama.
Contents:

* the damped linear ODE ``dx/dt = -a x + f`` and its exact solution,
* Lorenz 63 and generic vectorized ODE ensembles,
* real and complex Ornstein-Uhlenbeck (OU) processes,
* the cubic reduced climate model with additive and multiplicative noise,
* a random incompressible flow on ``(-pi, pi]^2`` built from Fourier modes
  whose amplitudes are complex OU processes.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from uqkit import _rng
from uqkit.errors import BlowUpError, ConfigError, SizeError, SymmetryError
from uqkit.prob import GaussianDist, sqrt_psd

BLOWUP = 1e6


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError("steps must be a positive integer")
        object.__setattr__(self, "steps", int(self.steps))

    @classmethod
    def from_horizon(cls, horizon, dt):
        return cls(dt, int(round(horizon / dt)))

    @property
    def horizon(self):
        return self.dt * self.steps

    @property
    def times(self):
        return self.dt * np.arange(self.steps + 1)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Trajectories of ``n_member`` realizations, shape ``(n_member, n_times, state_dim)``.

    With ``stride > 1`` only every ``stride``-th step of ``grid`` is stored.
    """

    grid: TimeGrid
    members: np.ndarray
    stride: int = 1

    def __post_init__(self):
        members = np.asarray(self.members, dtype=float)
        if members.ndim == 2:
            members = members[:, :, None]
        if members.ndim != 3 or members.shape[0] < 1:
            raise ConfigError("members must have shape (n_member, n_times, state_dim)")
        if not np.all(np.isfinite(members)):
            raise BlowUpError("ensemble contains non-finite values")
        members.setflags(write=False)
        object.__setattr__(self, "members", members)

    @property
    def n_member(self):
        return self.members.shape[0]

    @property
    def times(self):
        return self.grid.dt * self.stride * np.arange(self.members.shape[1])


@dataclass(frozen=True)
class L63Params:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0


@dataclass(frozen=True)
class OuParams:
    """Complex OU ``du = [(-d + i omega) u + f] dt + sigma dW``."""

    d: float
    omega: float = 0.0
    f: complex = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if not self.d > 0:
            raise ConfigError("OU damping d must be positive")
        if self.sigma < 0:
            raise ConfigError("OU noise amplitude must be nonnegative")

    @property
    def equilibrium_mean(self):
        return self.f / (self.d - 1j * self.omega)

    @property
    def equilibrium_variance(self):
        return self.sigma**2 / (2 * self.d)


@dataclass(frozen=True)
class CubicParams:
    """``dx = (f + a x + b x^2 - c x^3) dt + (A - B x) dW_M + sigma dW_A``."""

    a: float
    b: float
    c: float
    f: float
    A: float
    B: float
    sigma: float


# the four dynamical regimes of the cubic model
CUBIC_REGIMES = {
    "nearly_gaussian": CubicParams(a=-2.2, b=0.0, c=0.0, f=2.0, A=0.1, B=0.1, sigma=1.0),
    "highly_skewed": CubicParams(a=-4.0, b=2.0, c=1.0, f=0.1, A=1.0, B=-1.0, sigma=1.0),
    "fat_tailed": CubicParams(a=-3.0, b=-1.5, c=0.5, f=0.0, A=0.5, B=-1.0, sigma=1.0),
    "bimodal": CubicParams(a=4.0, b=2.0, c=1.0, f=0.1, A=1.0, B=-1.0, sigma=1.0),
}


# ---------------------------------------------------------------------------
# linear damped ODE


def linear_analytic(a, f, x0, t):
    """Exact solution of ``dx/dt = -a x + f``."""
    decay = np.exp(-a * np.asarray(t, dtype=float))
    return x0 * decay + (1.0 - decay) * f / a


def _initial_states(init, n_member, seed, dim):
    """Per-member initial conditions; member ``i`` uses stream ``(seed, i)``."""
    if not isinstance(init, GaussianDist):
        x0 = np.broadcast_to(np.asarray(init, dtype=float).reshape(-1), (dim,))
        return np.tile(x0, (n_member, 1))
    if init.dim != dim:
        raise ConfigError(f"initial distribution has dimension {init.dim}, model needs {dim}")
    factor = sqrt_psd(np.real(init.cov))
    z = np.stack([_rng.stream(seed, i).standard_normal(dim) for i in range(n_member)])
    return np.real(init.mean) + z @ factor.T


def simulate_linear_ensemble(a, f, init, grid, n_member, seed, stride=1):
    """Ensemble of ``dx/dt = -a x + f`` solved exactly from sampled initial values."""
    if not a > 0:
        raise ConfigError("damping a must be positive")
    if n_member < 1:
        raise SizeError("n_member must be at least 1")
    x0 = _initial_states(init, n_member, seed, 1)[:, 0]
    t = grid.times[::stride]
    traj = linear_analytic(a, f, x0[:, None], t[None, :])
    return Ensemble(grid, traj[:, :, None], stride)


# ---------------------------------------------------------------------------
# deterministic ODE ensembles


def rk4_step(rhs, x, dt):
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * dt * k1)
    k3 = rhs(x + 0.5 * dt * k2)
    k4 = rhs(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_ode(rhs, x0, grid, stride=1):
    """RK4 integration of an autonomous vectorized right-hand side.

    ``x0`` has shape ``(..., dim)``; the result has the time axis inserted
    before the last one. Raises :class:`BlowUpError` if the state leaves
    ``|x| < 1e6``.
    """
    x = np.array(x0, dtype=float)
    out = np.empty(x.shape[:-1] + (grid.steps // stride + 1, x.shape[-1]))
    out[..., 0, :] = x
    for n in range(1, grid.steps + 1):
        x = rk4_step(rhs, x, grid.dt)
        if n % stride == 0:
            if not np.all(np.abs(x) < BLOWUP):
                raise BlowUpError(f"state exceeded {BLOWUP:g} at step {n}; reduce dt")
            out[..., n // stride, :] = x
    return out


def l63_rhs(params):
    s, r, b = params.sigma, params.rho, params.beta

    def rhs(state):
        x, y, z = state[..., 0], state[..., 1], state[..., 2]
        return np.stack([s * (y - x), x * (r - z) - y, x * y - b * z], axis=-1)

    return rhs


def simulate_l63(params, x0, grid, stride=1):
    """Single Lorenz 63 trajectory, shape ``(n_times, 3)``."""
    return integrate_ode(l63_rhs(params), np.asarray(x0, dtype=float).reshape(3), grid, stride)


def simulate_ode_ensemble(rhs, init, dim, grid, n_member, seed, stride=1):
    if n_member < 1:
        raise SizeError("n_member must be at least 1")
    x0 = _initial_states(init, n_member, seed, dim)
    return Ensemble(grid, integrate_ode(rhs, x0, grid, stride), stride)


def simulate_l63_ensemble(params, init, grid, n_member, seed, stride=1):
    return simulate_ode_ensemble(l63_rhs(params), init, 3, grid, n_member, seed, stride)


def ensemble_stats(ens):
    """Ensemble mean and fluctuation variance, each ``(n_times, state_dim)``.

    The variance is the ``1/N`` average of squared fluctuations, so that
    ``<x^2> = <x>^2 + <x'^2>`` holds exactly for the sample averages.
    """
    if ens.n_member < 2:
        raise SizeError("variance needs at least two members")
    mean = ens.members.mean(axis=0)
    var = ((ens.members - mean) ** 2).mean(axis=0)
    return mean, var


@dataclass(frozen=True)
class ClosureCheck:
    """Finite-difference ``d<x>/dt`` at ``t = 0`` for ``dx/dt = b x^2`` against its moment forms."""

    fd_slope: float
    closed: float
    mean_only: float
    stderr: float


def quadratic_closure_check(b, init, n_member, dt, seed):
    """Compare the ensemble-mean tendency of ``dx/dt = b x^2`` with ``b(<x>^2 + <x'^2>)``.

    The slope is a central difference of the ensemble mean over one RK4 step
    forward and one backward. ``mean_only`` is ``b <x>^2``, what the mean
    would do if fluctuations were ignored; ``stderr`` is the Monte Carlo
    standard error of ``<b x^2>``.
    """
    if n_member < 2:
        raise SizeError("need at least two members")
    x0 = _initial_states(init, n_member, seed, 1)[:, 0]

    def rhs(x):
        return b * x * x

    fwd = rk4_step(rhs, x0, dt)
    bwd = rk4_step(rhs, x0, -dt)
    slope = (fwd.mean() - bwd.mean()) / (2 * dt)
    m = x0.mean()
    var = np.mean((x0 - m) ** 2)
    return ClosureCheck(
        float(slope), float(b * (m * m + var)), float(b * m * m),
        float(np.std(b * x0 * x0) / np.sqrt(n_member)),
    )


# ---------------------------------------------------------------------------
# OU processes


def _linear_recursion(factor, forcing, u0):
    """``u[n+1] = factor * u[n] + forcing[n]`` with ``u[0] = u0``."""
    y = signal.lfilter([1.0], [1.0, -factor], forcing, zi=np.array([factor * u0]))[0]
    return np.concatenate([[u0], y])


def simulate_ou(params, u0, grid, seed):
    """Euler-Maruyama path of a complex OU process, length ``steps + 1``.

    The complex noise has independent real and imaginary increments of
    variance ``dt/2`` each.
    """
    rng = _rng.stream(seed)
    dw = _rng.complex_increments(rng, grid.steps, grid.dt)
    factor = 1.0 + (-params.d + 1j * params.omega) * grid.dt
    forcing = params.f * grid.dt + params.sigma * dw
    return _linear_recursion(factor, forcing, complex(u0))


def simulate_ou_real(a, f, sigma, x0, grid, seed):
    """Euler-Maruyama path of ``dx = (-a x + f) dt + sigma dW`` (real noise)."""
    if not a > 0:
        raise ConfigError("damping a must be positive")
    rng = _rng.stream(seed)
    dw = np.sqrt(grid.dt) * rng.standard_normal(grid.steps)
    return _linear_recursion(1.0 - a * grid.dt, f * grid.dt + sigma * dw, float(x0))


def simulate_cubic(params, x0, grid, seed):
    """Euler-Maruyama path of the cubic model with two independent noises."""
    rng = _rng.stream(seed)
    sq = np.sqrt(grid.dt)
    noise = rng.standard_normal((2, grid.steps)) * sq
    wm = noise[0].tolist()
    wa = noise[1].tolist()
    a, b, c, f = params.a, params.b, params.c, params.f
    A, B, s = params.A, params.B, params.sigma
    dt = grid.dt
    out = [0.0] * (grid.steps + 1)
    x = float(x0)
    out[0] = x
    # plain floats: this loop is the hot path for long calibration runs
    for n in range(grid.steps):
        x = x + (f + x * (a + x * (b - c * x))) * dt + (A - B * x) * wm[n] + s * wa[n]
        if not abs(x) < BLOWUP:
            raise BlowUpError(f"cubic model state exceeded {BLOWUP:g} at step {n + 1}; reduce dt")
        out[n + 1] = x
    return np.array(out)


# ---------------------------------------------------------------------------
# spectral random flow


def _upper_half(k):
    return k[1] > 0 or (k[1] == 0 and k[0] > 0)


def default_eigenvector(k):
    """Unit divergence-free direction for wavevector ``k``.

    ``(-k2, k1)/|k|`` for the representative of each conjugate pair in the
    upper half plane; the partner ``-k`` receives the conjugate (the same real
    vector), which keeps the field real.
    """
    k = np.asarray(k, dtype=float)
    rep = k if _upper_half(k) else -k
    return np.array([-rep[1], rep[0]], dtype=complex) / np.hypot(*rep)


@dataclass(frozen=True, eq=False)
class FlowModelConfig:
    """Fourier modes with per-mode complex OU amplitudes.

    Parameters are given per mode in the order of ``modes``. The configuration
    must be closed under ``k -> -k`` with conjugate parameters.
    """

    modes: np.ndarray
    d: np.ndarray
    omega: np.ndarray
    f: np.ndarray
    sigma: np.ndarray
    sigma_x: float
    eigenvectors: np.ndarray = None
    _partner: np.ndarray = field(init=False, repr=False, compare=False)
    _half: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=int).reshape(-1, 2)
        m = modes.shape[0]
        if m == 0:
            raise ConfigError("at least one conjugate pair of modes is required")

        def per_mode(v, dtype):
            arr = np.broadcast_to(np.asarray(v, dtype=dtype), (m,)).copy()
            arr.setflags(write=False)
            return arr

        d = per_mode(self.d, float)
        omega = per_mode(self.omega, float)
        f = per_mode(self.f, complex)
        sigma = per_mode(self.sigma, float)
        if self.eigenvectors is None:
            r = np.array([default_eigenvector(k) for k in modes])
        else:
            r = np.asarray(self.eigenvectors, dtype=complex).reshape(m, 2)
        r.setflags(write=False)
        if not self.sigma_x > 0:
            raise ConfigError("tracer noise sigma_x must be positive")
        if np.any(d <= 0) or np.any(sigma < 0):
            raise ConfigError("need d > 0 and sigma >= 0 for every mode")

        index = {tuple(k): i for i, k in enumerate(modes)}
        if len(index) != m:
            raise ConfigError("duplicate wavevectors")
        if (0, 0) in index:
            raise ConfigError("the (0, 0) mode is excluded")
        partner = np.empty(m, dtype=int)
        for i, k in enumerate(modes):
            j = index.get((-k[0], -k[1]))
            if j is None:
                raise ConfigError(f"mode {tuple(k)} has no conjugate partner")
            partner[i] = j
        tol = 1e-12
        if (
            np.abs(d - d[partner]).max() > tol
            or np.abs(omega + omega[partner]).max() > tol
            or np.abs(f - f[partner].conj()).max() > tol
            or np.abs(sigma - sigma[partner]).max() > tol
            or np.abs(r - r[partner].conj()).max() > tol
        ):
            raise ConfigError("parameters of -k must be the complex conjugates of those of k")
        if np.abs(np.einsum("ij,ij->i", modes, r)).max() > 1e-12:
            raise ConfigError("eigenvectors must satisfy k . r_k = 0")
        if np.abs(np.linalg.norm(r, axis=1) - 1).max() > 1e-12:
            raise ConfigError("eigenvectors must have unit length")

        modes.setflags(write=False)
        partner.setflags(write=False)
        half = np.array([i for i, k in enumerate(modes) if _upper_half(k)])
        half.setflags(write=False)
        for name, value in [("modes", modes), ("d", d), ("omega", omega), ("f", f),
                            ("sigma", sigma), ("eigenvectors", r), ("_partner", partner), ("_half", half)]:
            object.__setattr__(self, name, value)

    @classmethod
    def square(cls, kmax=2, d=0.5, omega=0.0, f=0.0, sigma=0.5, sigma_x=0.1):
        """All wavevectors in ``[-kmax, kmax]^2`` except the origin, shared parameters."""
        modes = [(k1, k2) for k1 in range(-kmax, kmax + 1) for k2 in range(-kmax, kmax + 1) if (k1, k2) != (0, 0)]
        modes = np.array(modes)
        sign = np.array([1.0 if _upper_half(k) else -1.0 for k in modes])
        return cls(modes, d, sign * omega, f, sigma, sigma_x)

    @property
    def n_modes(self):
        return self.modes.shape[0]

    @property
    def partner(self):
        """Index of ``-k`` for every mode."""
        return self._partner

    @property
    def half(self):
        """Indices of one representative per conjugate pair."""
        return self._half

    @property
    def damping(self):
        """Diagonal of the linear operator, ``d_k - i omega_k``."""
        return self.d - 1j * self.omega

    @property
    def equilibrium_mean(self):
        return self.f / self.damping

    @property
    def equilibrium_variance(self):
        return self.sigma**2 / (2 * self.d)

    def equilibrium(self):
        return GaussianDist(self.equilibrium_mean, np.diag(self.equilibrium_variance).astype(complex))

    def with_sigma_x(self, sigma_x):
        return FlowModelConfig(self.modes, self.d, self.omega, self.f, self.sigma, sigma_x, self.eigenvectors)

    def mode_index(self, k):
        hits = np.flatnonzero((self.modes == np.asarray(k)).all(axis=1))
        if hits.size == 0:
            raise KeyError(f"mode {tuple(k)} is not in the configuration")
        return int(hits[0])


@dataclass(frozen=True, eq=False)
class SpectralFlowSeries:
    config: FlowModelConfig
    grid: TimeGrid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.grid.steps + 1, self.config.n_modes):
            raise ConfigError(f"coeffs shape {coeffs.shape} does not match grid and modes")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def symmetry_defect(self):
        return float(np.abs(self.coeffs[:, self.config.partner] - self.coeffs.conj()).max())


def wrap(x):
    """Map positions into the periodic domain ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


def simulate_flow(config, grid, seed, u0=None):
    """Simulate every Fourier amplitude as a complex OU process.

    One representative per conjugate pair is integrated; its partner is the
    conjugate, which is the same as driving it with conjugated noise.
    """
    if not isinstance(config, FlowModelConfig):
        raise ConfigError("config must be a FlowModelConfig")
    m = config.n_modes
    u0 = np.zeros(m, dtype=complex) if u0 is None else np.asarray(u0, dtype=complex)
    if u0.shape != (m,) or np.abs(u0[config.partner] - u0.conj()).max() > 1e-12:
        raise SymmetryError("initial coefficients must be conjugate symmetric")
    rng = _rng.stream(seed)
    half = config.half
    dw = _rng.complex_increments(rng, (grid.steps, half.size), grid.dt)
    coeffs = np.empty((grid.steps + 1, m), dtype=complex)
    for col, i in enumerate(half):
        factor = 1.0 - config.damping[i] * grid.dt
        forcing = config.f[i] * grid.dt + config.sigma[i] * dw[:, col]
        coeffs[:, i] = _linear_recursion(factor, forcing, u0[i])
    coeffs[:, config.partner[half]] = coeffs[:, half].conj()
    return SpectralFlowSeries(config, grid, coeffs)


def velocity_from_coeffs(config, coeffs, positions, check=True):
    """``u(x) = sum_k u_k exp(i k.x) r_k`` at ``positions`` of shape ``(N, 2)``.

    Raises :class:`SymmetryError` when the imaginary residue reaches 1e-8.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    phase = np.exp(1j * (pos @ config.modes.T))
    vel = (phase * np.asarray(coeffs)[None, :]) @ config.eigenvectors
    if check:
        residue = np.abs(vel.imag).max(initial=0.0)
        if residue >= 1e-8:
            raise SymmetryError(f"velocity has imaginary part {residue:.2e}; coefficients break the reality condition")
    return vel.real


def eval_velocity(series, step, positions):
    if not 0 <= step <= series.grid.steps:
        raise ConfigError(f"step {step} outside 0..{series.grid.steps}")
    return velocity_from_coeffs(series.config, series.coeffs[step], wrap(positions))


def grid_points(n):
    """Cell corners of an ``n x n`` grid on ``[-pi, pi)^2``, shape ``(n*n, 2)``, row-major in y."""
    axis = -np.pi + 2 * np.pi * np.arange(n) / n
    xx, yy = np.meshgrid(axis, axis)
    return np.column_stack([xx.ravel(), yy.ravel()])


def velocity_field(config, coeffs, n):
    """Velocity components ``(u, v)`` on an ``n x n`` grid, arrays indexed ``[iy, ix]``."""
    vel = velocity_from_coeffs(config, coeffs, grid_points(n))
    return vel[:, 0].reshape(n, n), vel[:, 1].reshape(n, n)
