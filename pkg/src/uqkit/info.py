"""Shannon entropy and relative entropy.

Natural logarithms throughout. Grid versions integrate with the trapezoidal
rule; Gaussian and Gamma versions are closed form.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from uqkit.errors import (
    ConfigError,
    DivergenceError,
    GridMismatchError,
    NormalizationError,
    SingularMatrixError,
)
from uqkit.prob import GaussianDist, GammaDist, trapezoid

_NORM_TOL = 1e-3


@dataclass(frozen=True)
class KlDecomposition:
    """Gaussian relative entropy split into mean and covariance mismatch."""

    signal: float
    dispersion: float

    @property
    def total(self):
        return self.signal + self.dispersion


def _xlogx(p):
    out = np.zeros_like(p, dtype=float)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def _check_normalized(p, name="p"):
    total = p.integral()
    if abs(total - 1.0) > _NORM_TOL:
        raise NormalizationError(f"{name} integrates to {total:.6f}; normalize it first")


def shannon_entropy_grid(p):
    """``-∫ p ln p`` for a normalized :class:`~uqkit.prob.GridPdf` (``0 ln 0 = 0``)."""
    _check_normalized(p)
    return float(-trapezoid(_xlogx(p.values), p.dx))


def shannon_entropy_discrete(p):
    p = np.asarray(p, dtype=float)
    if abs(p.sum() - 1.0) > _NORM_TOL:
        raise NormalizationError("probabilities must sum to 1")
    return float(-_xlogx(p).sum())


def _chol(cov, what):
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularMatrixError(f"{what} is singular or not positive definite") from None


def _logdet(cov, what="covariance"):
    c = _chol(cov, what)
    return 2.0 * float(np.sum(np.log(np.abs(np.diag(c)))))


def shannon_entropy_gaussian(dist):
    """Entropy ``(m/2)(1 + ln 2π) + ½ ln det R``; the mean plays no role."""
    m = dist.dim
    return 0.5 * m * (1.0 + np.log(2 * np.pi)) + 0.5 * _logdet(dist.cov)


def shannon_entropy_gamma(dist):
    """Entropy ``k + ln θ + ln Γ(k) + (1 - k) ψ(k)`` of a Gamma distribution."""
    k = dist.k
    return float(k + np.log(dist.theta) + special.gammaln(k) + (1.0 - k) * special.digamma(k))


def shannon_entropy(dist):
    if isinstance(dist, GaussianDist):
        return shannon_entropy_gaussian(dist)
    if isinstance(dist, GammaDist):
        return shannon_entropy_gamma(dist)
    return shannon_entropy_grid(dist)


def relative_entropy_grid(p, pm):
    """Relative entropy ``∫ p ln(p / pm)`` of two densities on one grid.

    ``pm`` must be strictly positive wherever ``p`` is; estimated densities
    should go through :func:`uqkit.prob.clip_normalize` first.
    """
    if not p.same_grid(pm):
        raise GridMismatchError("p and pm live on different grids")
    _check_normalized(p, "p")
    _check_normalized(pm, "pm")
    a, b = p.values, pm.values
    bad = (a > 0) & (b <= 0)
    if np.any(bad):
        raise DivergenceError(
            f"pm vanishes at {int(bad.sum())} grid points where p > 0; apply clip_normalize to pm"
        )
    integrand = np.zeros_like(a)
    pos = a > 0
    integrand[pos] = a[pos] * (np.log(a[pos]) - np.log(b[pos]))
    return float(trapezoid(integrand, p.dx))


def relative_entropy_discrete(p, pm):
    p = np.asarray(p, dtype=float)
    pm = np.asarray(pm, dtype=float)
    if p.shape != pm.shape:
        raise GridMismatchError("probability vectors differ in length")
    if np.any((p > 0) & (pm <= 0)):
        raise DivergenceError("pm has zero mass where p does not")
    pos = p > 0
    return float(np.sum(p[pos] * np.log(p[pos] / pm[pos])))


def relative_entropy_gaussian(p, pm):
    """Closed-form relative entropy of two Gaussians, split into signal and dispersion.

    ``signal = ½ (μ - μM)^H RM^{-1} (μ - μM)`` and
    ``dispersion = ½ [tr(R RM^{-1}) - m - ln det(R RM^{-1})]``. Complex
    Hermitian arguments are accepted; the real part of each term is kept.
    """
    if p.dim != pm.dim:
        raise ConfigError(f"dimension mismatch: {p.dim} vs {pm.dim}")
    m = p.dim
    lm = _chol(pm.cov, "model covariance")
    delta = (p.mean - pm.mean).reshape(-1, 1)
    w = np.linalg.solve(lm, delta)
    signal = 0.5 * float(np.real(np.vdot(w, w)))
    # tr(R RM^{-1}) = ||LM^{-1} L||_F^2 with R = L L^H
    if np.allclose(p.cov, 0):
        raise SingularMatrixError("covariance of p is singular; dispersion is infinite")
    lp = _chol(p.cov, "covariance of p")
    q = np.linalg.solve(lm, lp)
    trace = float(np.real(np.vdot(q, q)))
    logdet_ratio = 2.0 * float(np.sum(np.log(np.abs(np.diag(lp)))) - np.sum(np.log(np.abs(np.diag(lm)))))
    dispersion = 0.5 * (trace - m - logdet_ratio)
    # both terms are nonnegative in exact arithmetic
    return KlDecomposition(max(signal, 0.0), max(dispersion, 0.0))
