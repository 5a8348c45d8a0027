"""Calibration of a linear stochastic (OU) surrogate.

The surrogate ``dx = (-a x + f) dt + sigma dW`` has equilibrium mean
``f/a``, variance ``sigma^2/(2a)`` and decorrelation time ``1/a``. Matching
those three statistics of a time series fixes ``(a, f, sigma)``.
"""

from dataclasses import dataclass, field

import numpy as np

from uqkit import prob
from uqkit.dynamics import TimeGrid, simulate_ou_real
from uqkit.errors import CalibrationError, DegenerateSampleError, SizeError, StationarityError
from uqkit.info import relative_entropy_grid

ACF_CUTOFF = 0.05


@dataclass(frozen=True)
class CalibrationResult:
    a: float
    f: float
    sigma: float
    mu: float
    R: float
    tau: float
    truncated: bool = False

    @classmethod
    def from_statistics(cls, mu, R, tau, truncated=False):
        if not (R > 0 and tau > 0):
            raise CalibrationError(f"need R > 0 and tau > 0, got R={R}, tau={tau}")
        a = 1.0 / tau
        return cls(a, mu * a, float(np.sqrt(2 * a * R)), mu, R, tau, truncated)

    @classmethod
    def from_parameters(cls, a, f, sigma):
        if not (a > 0 and sigma > 0):
            raise CalibrationError("need a > 0 and sigma > 0")
        return cls(a, f, sigma, f / a, sigma**2 / (2 * a), 1.0 / a)


def acf(series, dt, max_lag):
    """Autocorrelation at lags ``0, dt, ..., max_lag`` (``max_lag`` in time units).

    Time averages with the overall mean and variance:
    ``ACF(s) = mean((x_t - mu)(x_{t+s} - mu)) / R`` over the available pairs.
    """
    x = np.asarray(series, dtype=float).ravel()
    nlag = int(round(max_lag / dt))
    if nlag < 1:
        raise SizeError("max_lag must cover at least one step")
    if x.size < 10 * nlag:
        raise SizeError(f"series of {x.size} steps is too short for {nlag} lags (need 10x)")
    dev = x - x.mean()
    var = np.mean(dev**2)
    if var <= 0:
        raise DegenerateSampleError("series has zero variance")
    # zero-padded FFT gives all lagged products at once
    nfft = 1 << int(np.ceil(np.log2(2 * x.size)))
    spec = np.fft.rfft(dev, nfft)
    raw = np.fft.irfft(spec * spec.conj(), nfft)[: nlag + 1]
    out = raw / (x.size - np.arange(nlag + 1)) / var
    out[0] = 1.0
    return out


@dataclass(frozen=True)
class DecorrelationTime:
    tau: float
    truncation_lag: float
    truncated: bool


def decorrelation_time(acf_values, dt):
    """Integral of the ACF up to the first lag where ``|ACF| < 0.05``.

    If the ACF never falls below the cutoff the whole window is used and
    ``truncated`` is set.
    """
    r = np.asarray(acf_values, dtype=float)
    below = np.flatnonzero(np.abs(r) < ACF_CUTOFF)
    if below.size:
        end = int(below[0])
        truncated = False
    else:
        end = r.size - 1
        truncated = True
    tau = prob.trapezoid(r[: end + 1], dt) if end > 0 else 0.0
    return DecorrelationTime(float(tau), end * dt, truncated)


def check_stationary(series):
    """Reject a series whose two halves have clearly different means.

    The gap between the half means must stay below half of the combined
    standard deviation ``sqrt(var_1 + var_2)``. Returns the gap in those units.
    """
    x = np.asarray(series, dtype=float)
    halves = np.array_split(x, 2)
    means = [h.mean() for h in halves]
    std = np.sqrt(sum(h.var() for h in halves))
    if std == 0:
        raise DegenerateSampleError("series has zero variance")
    diff = abs(means[0] - means[1])
    if diff >= 0.5 * std:
        raise StationarityError(
            f"half-series means differ by {diff:.3g}, more than half the combined std {std:.3g}"
        )
    return diff / std


def calibrate_ou(series, dt, max_lag=None):
    """Fit ``(a, f, sigma)`` from the mean, variance and decorrelation time of ``series``.

    ``max_lag`` (time units) bounds the ACF window; the default is a tenth of
    the series length.
    """
    x = np.asarray(series, dtype=float).ravel()
    check_stationary(x)
    if max_lag is None:
        max_lag = 0.1 * x.size * dt
    mu = float(x.mean())
    R = float(x.var())
    dec = decorrelation_time(acf(x, dt, max_lag), dt)
    if not dec.tau > 0:
        raise CalibrationError(f"decorrelation time {dec.tau} is not positive")
    return CalibrationResult.from_statistics(mu, R, dec.tau, dec.truncated)


@dataclass(frozen=True)
class ValidationReport:
    mean_err: float
    var_err: float
    acf_linf: float
    kl: float
    kl_reverse: float
    tau: float
    params: dict = field(default_factory=dict)
    truth_stats: prob.StatSummary = None
    surrogate_stats: prob.StatSummary = None

    def to_json_dict(self):
        return {
            "mean_err": self.mean_err,
            "var_err": self.var_err,
            "acf_linf": self.acf_linf,
            "kl": self.kl,
            "kl_reverse": self.kl_reverse,
            "tau": self.tau,
            "params": dict(self.params),
        }


def pdf_pair(truth, model, n=2001, half_width=12.0, eps=prob.DEFAULT_CLIP):
    """Clipped kernel density estimates of two samples on a shared grid."""
    both = np.concatenate([np.ravel(truth), np.ravel(model)])
    center = both.mean()
    sd = both.std()
    x0 = center - half_width * sd
    dx = 2 * half_width * sd / (n - 1)
    p = prob.clip_normalize(prob.estimate_pdf(truth, x0, dx, n), eps)
    q = prob.clip_normalize(prob.estimate_pdf(model, x0, dx, n), eps)
    return p, q


def validate_surrogate(truth_series, result, dt, seed):
    """Run the calibrated surrogate as long as ``truth_series`` and compare.

    ``kl`` is the relative entropy of the surrogate's density with respect to
    the truth's, both from clipped kernel estimates; ``kl_reverse`` swaps the
    roles.
    """
    x = np.asarray(truth_series, dtype=float).ravel()
    grid = TimeGrid(dt, x.size - 1)
    sim = simulate_ou_real(result.a, result.f, result.sigma, result.mu, grid, seed)
    mean_err = abs(sim.mean() - x.mean()) / max(abs(x.mean()), np.sqrt(x.var()))
    var_err = abs(sim.var() - x.var()) / x.var()
    lag = 3 * result.tau
    acf_truth = acf(x, dt, lag)
    acf_sim = acf(sim, dt, lag)
    p_truth, p_sim = pdf_pair(x, sim)
    return ValidationReport(
        mean_err=float(mean_err),
        var_err=float(var_err),
        acf_linf=float(np.abs(acf_truth - acf_sim).max()),
        kl=relative_entropy_grid(p_sim, p_truth),
        kl_reverse=relative_entropy_grid(p_truth, p_sim),
        tau=result.tau,
        params={"a": result.a, "f": result.f, "sigma": result.sigma, "mu": result.mu, "R": result.R},
        truth_stats=prob.summary_stats(x),
        surrogate_stats=prob.summary_stats(sim),
    )


def surrogate_vs_truth_kl(truth_series, result, n=2001, half_width=12.0, eps=prob.DEFAULT_CLIP):
    """Relative entropies between the surrogate's Gaussian equilibrium and the truth's clipped KDE.

    Returns ``(kl, kl_reverse)``: ``kl`` takes the surrogate as the first
    argument, ``kl_reverse`` the truth.
    """
    x = np.asarray(truth_series, dtype=float).ravel()
    sd = np.sqrt(result.R)
    x0 = result.mu - half_width * sd
    dx = 2 * half_width * sd / (n - 1)
    g = prob.tabulate(prob.GaussianDist(result.mu, result.R), x0, dx, n)
    t = prob.clip_normalize(prob.estimate_pdf(x, x0, dx, n), eps)
    return relative_entropy_grid(g, t), relative_entropy_grid(t, g)


def count_modes(p, rel_height=0.05, smooth=5):
    """Number of local maxima of a gridded density above ``rel_height`` of its peak."""
    v = np.convolve(p.values, np.ones(smooth) / smooth, mode="same") if smooth > 1 else p.values
    interior = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]) & (v[1:-1] > rel_height * v.max())
    return int(interior.sum())
