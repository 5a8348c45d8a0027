"""Parametric distributions, sample statistics and gridded densities.

Every numerical information measure in :mod:`uqkit.info` works on a
:class:`GridPdf`, a density tabulated on a uniform one-dimensional grid.
Grid integrals use the trapezoidal rule throughout.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from uqkit import _rng
from uqkit.errors import (
    ConfigError,
    DegenerateSampleError,
    DomainError,
    InvalidThresholdError,
    NormalizationError,
    SizeError,
)

DEFAULT_CLIP = 1e-5


def trapezoid(values, dx):
    """Trapezoidal integral of uniformly spaced ``values``."""
    values = np.asarray(values)
    return dx * (values.sum() - 0.5 * (values[0] + values[-1]))


class GaussianDist:
    """Multivariate Gaussian ``N(mean, cov)``.

    Scalars are promoted to a one-dimensional distribution. Complex Hermitian
    covariances are accepted so that posteriors over Fourier coefficients can
    be carried in the same type.
    """

    def __init__(self, mean, cov):
        mean = np.atleast_1d(np.asarray(mean))
        cov = np.atleast_2d(np.asarray(cov))
        m = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (m, m):
            raise ConfigError(f"mean shape {mean.shape} and cov shape {cov.shape} disagree")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ConfigError("non-finite Gaussian parameters")
        scale = max(np.abs(cov).max(), np.finfo(float).tiny)
        if np.abs(cov - cov.conj().T).max() > 1e-12 * scale:
            raise ConfigError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.conj().T)
        eig = np.linalg.eigvalsh(cov)
        if eig.min() < -1e-10 * max(eig.max(), 0.0):
            raise ConfigError(f"covariance is not positive semi-definite (min eigenvalue {eig.min():.3e})")
        mean.setflags(write=False)
        cov.setflags(write=False)
        self.mean = mean
        self.cov = cov

    @property
    def dim(self):
        return self.mean.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.mean) or np.iscomplexobj(self.cov)

    def pdf(self, x):
        """Density of a one-dimensional real Gaussian at ``x``."""
        if self.dim != 1:
            raise ConfigError("pdf is only provided for one-dimensional Gaussians")
        mu = float(np.real(self.mean[0]))
        var = float(np.real(self.cov[0, 0]))
        if var <= 0:
            raise DomainError("density of a point mass is not defined")
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - mu) ** 2 / var) / np.sqrt(2 * np.pi * var)

    def __repr__(self):
        if self.dim == 1:
            return f"GaussianDist(mean={self.mean[0].item()!r}, var={self.cov[0, 0].item()!r})"
        return f"GaussianDist(dim={self.dim})"


@dataclass(frozen=True)
class GammaDist:
    """Gamma distribution with shape ``k`` and scale ``theta``."""

    k: float
    theta: float

    def __post_init__(self):
        if not (self.k > 0 and self.theta > 0):
            raise ConfigError(f"Gamma parameters must be positive, got k={self.k}, theta={self.theta}")

    @property
    def mean(self):
        return self.k * self.theta

    @property
    def variance(self):
        return self.k * self.theta**2

    @property
    def skewness(self):
        return 2.0 / np.sqrt(self.k)

    @property
    def excess_kurtosis(self):
        # the familiar "6/k" is the excess value; raw kurtosis is 3 + 6/k
        return 6.0 / self.k

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        logp = (self.k - 1) * np.log(x[pos]) - x[pos] / self.theta - special.gammaln(self.k) - self.k * np.log(self.theta)
        out[pos] = np.exp(logp)
        at_zero = x == 0
        if np.any(at_zero):
            if self.k < 1:
                raise DomainError("Gamma density is unbounded at x=0 for k < 1; start the grid above 0")
            out[at_zero] = 1.0 / self.theta if self.k == 1 else 0.0
        return out


@dataclass(frozen=True, eq=False)
class GridPdf:
    """Density values on the uniform grid ``x0 + i*dx``."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise SizeError("a grid density needs at least two points")
        if not self.dx > 0:
            raise ConfigError("grid spacing must be positive")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ConfigError("density values must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self):
        return self.values.size

    @property
    def x(self):
        return self.x0 + self.dx * np.arange(self.n)

    def integral(self):
        return trapezoid(self.values, self.dx)

    def normalized(self):
        total = self.integral()
        if not total > 0:
            raise NormalizationError("density integrates to zero on this grid")
        return GridPdf(self.x0, self.dx, self.values / total)

    def moment(self, order, central=False):
        x = self.x
        if central:
            x = x - self.moment(1)
        return trapezoid(x**order * self.values, self.dx)

    def same_grid(self, other, rtol=1e-12):
        return (
            self.n == other.n
            and np.isclose(self.dx, other.dx, rtol=rtol, atol=0)
            and abs(self.x0 - other.x0) <= rtol * max(abs(self.x0), self.dx)
        )


@dataclass(frozen=True)
class StatSummary:
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    n: int

    @property
    def excess_kurtosis(self):
        return self.kurtosis - 3.0


def summary_stats(samples):
    """Mean, variance, skewness and raw kurtosis of a sample.

    Central moments use the ``1/n`` (population) normalization, so the
    Gaussian reference kurtosis is 3.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 4:
        raise SizeError("at least 4 samples are needed")
    mean = x.mean()
    dev = x - mean
    m2 = np.mean(dev**2)
    if m2 <= (64 * np.finfo(float).eps * np.abs(x).max()) ** 2:
        raise DegenerateSampleError("samples have zero variance; skewness and kurtosis are undefined")
    # standardize first so tiny or huge scales cannot under/overflow the powers
    z = dev / np.sqrt(m2)
    return StatSummary(float(mean), float(m2), float(np.mean(z**3)), float(np.mean(z**4)), int(x.size))


def tabulate(dist, x0, dx, n):
    """Evaluate ``dist`` on the grid and renormalize to unit integral."""
    if not dx > 0 or n < 2:
        raise SizeError("need dx > 0 and n >= 2")
    x = x0 + dx * np.arange(n)
    if isinstance(dist, GammaDist):
        if x0 < 0:
            raise DomainError("Gamma density is supported on x >= 0 only")
        values = dist.pdf(x)
    elif isinstance(dist, GaussianDist):
        values = dist.pdf(x)
    else:
        raise TypeError(f"cannot tabulate {type(dist).__name__}")
    return GridPdf(x0, dx, values).normalized()


def silverman_bandwidth(samples):
    x = np.asarray(samples, dtype=float)
    return 1.06 * x.std(ddof=1) * x.size ** (-0.2)


# kernels are cut off beyond this many bandwidths, so the estimate is
# exactly zero far from the data
_KERNEL_CUTOFF = 8.0
_DIRECT_LIMIT = 4_000_000


def estimate_pdf(samples, x0, dx, n, bandwidth=None):
    """Gaussian kernel density estimate on a uniform grid.

    Parameters
    ----------
    samples : array_like
        At least 10 real samples.
    x0, dx, n : float, float, int
        Grid origin, spacing and number of points.
    bandwidth : float, optional
        Kernel standard deviation. Defaults to Silverman's rule
        ``1.06 * std * n**(-1/5)``.

    Returns
    -------
    GridPdf
        The estimate, renormalized on the grid. Far from the data the
        truncated kernels leave exact zeros; pass the result through
        :func:`clip_normalize` before using it as a model density in a
        relative entropy.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 10:
        raise SizeError("kernel density estimation needs at least 10 samples")
    if not dx > 0 or n < 2:
        raise SizeError("need dx > 0 and n >= 2")
    if np.ptp(x) == 0:
        raise DegenerateSampleError("all samples are identical")
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    if not h > 0:
        raise ConfigError("bandwidth must be positive")
    grid = x0 + dx * np.arange(n)

    if x.size * n <= _DIRECT_LIMIT:
        values = np.zeros(n)
        chunk = max(1, _DIRECT_LIMIT // (4 * n))
        for start in range(0, x.size, chunk):
            z = (grid[:, None] - x[None, start:start + chunk]) / h
            k = np.exp(-0.5 * z**2)
            k[np.abs(z) > _KERNEL_CUTOFF] = 0.0
            values += k.sum(axis=1)
    else:
        # linear binning onto the grid, then a direct (not FFT) convolution
        # so that zeros stay exact
        pos = (x - x0) / dx
        inside = (pos >= 0) & (pos <= n - 1)
        pos = pos[inside]
        lo = np.floor(pos).astype(int)
        frac = pos - lo
        counts = np.bincount(lo, weights=1 - frac, minlength=n + 1)
        counts += np.bincount(lo + 1, weights=frac, minlength=n + 1)
        counts = counts[:n]
        half = int(np.ceil(_KERNEL_CUTOFF * h / dx))
        kern = np.exp(-0.5 * (np.arange(-half, half + 1) * dx / h) ** 2)
        values = np.convolve(counts, kern, mode="full")[half:half + n]
    values /= x.size * h * np.sqrt(2 * np.pi)
    return GridPdf(x0, dx, values).normalized()


def clip_normalize(p, eps=DEFAULT_CLIP):
    """Floor a density at ``eps`` and renormalize.

    Values below ``eps`` are replaced by ``eps`` and the result is scaled back
    to unit integral, which makes the density usable in the denominator of a
    relative entropy.
    """
    if not eps > 0:
        raise InvalidThresholdError("eps must be positive")
    if eps >= p.values.max():
        raise InvalidThresholdError(f"eps={eps} is not small compared with the density maximum {p.values.max():.3e}")
    return GridPdf(p.x0, p.dx, np.maximum(p.values, eps)).normalized()


def sample(dist, count, seed):
    """Draw ``count`` samples reproducibly.

    One-dimensional distributions give an array of shape ``(count,)``,
    ``m``-dimensional Gaussians an array of shape ``(count, m)``.
    """
    if count < 1:
        raise SizeError("count must be at least 1")
    rng = _rng.stream(seed)
    if isinstance(dist, GammaDist):
        return rng.gamma(dist.k, dist.theta, size=count)
    if not isinstance(dist, GaussianDist):
        raise TypeError(f"cannot sample {type(dist).__name__}")
    if dist.is_complex:
        raise ConfigError("use a real Gaussian here; complex posteriors are sampled in uqkit.diagnostics")
    z = rng.standard_normal((count, dist.dim))
    out = dist.mean + z @ sqrt_psd(dist.cov).T
    return out[:, 0] if dist.dim == 1 else out


def sqrt_psd(cov):
    """A factor ``S`` with ``S @ S^H == cov`` for a PSD (possibly singular) matrix."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(cov)
        return v * np.sqrt(np.clip(w, 0, None))
