"""Gaussian Bayesian updates.

The analysis step of the Kalman filter for a linear observation
``v = G u + noise``, its closed form for ``L`` repeated scalar observations,
and the matrix identities behind that closed form.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from uqkit import _rng
from uqkit.errors import ConfigError, SingularMatrixError
from uqkit.info import relative_entropy_gaussian
from uqkit.prob import GaussianDist


@dataclass(frozen=True, eq=False)
class LinearObsModel:
    """Observation operator ``G`` (``L x m``) and noise covariance ``Ro`` (``L x L``)."""

    G: np.ndarray
    Ro: np.ndarray

    def __post_init__(self):
        G = np.atleast_2d(np.asarray(self.G, dtype=float))
        Ro = np.atleast_2d(np.asarray(self.Ro, dtype=float))
        if Ro.shape != (G.shape[0], G.shape[0]):
            raise ConfigError(f"Ro must be {G.shape[0]}x{G.shape[0]}, got {Ro.shape}")
        if np.abs(Ro - Ro.T).max() > 1e-12 * max(np.abs(Ro).max(), 1e-300):
            raise ConfigError("Ro must be symmetric")
        try:
            np.linalg.cholesky(Ro)
        except np.linalg.LinAlgError:
            raise ConfigError("Ro must be positive definite") from None
        G.setflags(write=False)
        Ro.setflags(write=False)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "Ro", Ro)

    @classmethod
    def repeated(cls, L, noise_var=1.0):
        """``L`` independent direct observations of a scalar state."""
        return cls(np.ones((L, 1)), noise_var * np.eye(L))


def gaussian_posterior(prior, obs, v, joseph=False):
    """Kalman analysis step.

    Parameters
    ----------
    prior : GaussianDist
        Forecast ``N(mu_f, R_f)``.
    obs : LinearObsModel
    v : array_like
        Observation vector of length ``L``.
    joseph : bool
        Use the Joseph form ``(I-KG) R_f (I-KG)^T + K Ro K^T`` for the
        covariance instead of ``(I-KG) R_f``.

    Returns
    -------
    posterior : GaussianDist
    gain : ndarray, shape (m, L)
    """
    G, Ro = obs.G, obs.Ro
    m = prior.dim
    if G.shape[1] != m:
        raise ConfigError(f"G has {G.shape[1]} columns, prior has dimension {m}")
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != G.shape[0]:
        raise ConfigError(f"expected {G.shape[0]} observations, got {v.shape[0]}")
    Rf = np.real(prior.cov)
    mu_f = np.real(prior.mean)
    innovation_cov = G @ Rf @ G.T + Ro
    try:
        factor = linalg.cho_factor(innovation_cov)
    except linalg.LinAlgError:
        raise SingularMatrixError("innovation covariance G R_f G^T + Ro is singular") from None
    # K = Rf G^T S^{-1}, computed as (S^{-1} G Rf)^T since S and Rf are symmetric
    K = linalg.cho_solve(factor, G @ Rf).T
    ikg = np.eye(m) - K @ G
    mu_a = ikg @ mu_f + K @ v
    if joseph:
        Ra = ikg @ Rf @ ikg.T + K @ Ro @ K.T
    else:
        Ra = ikg @ Rf
    Ra = 0.5 * (Ra + Ra.T)
    return GaussianDist(mu_a, Ra), K


def repeated_obs_posterior(mu_f, v):
    """Posterior for prior ``N(mu_f, 1)`` and ``L`` unit-noise observations.

    ``mu_a = (mu_f + sum v) / (L + 1)`` and ``R_a = 1 / (L + 1)``; with no
    observations the prior comes back unchanged.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    L = v.size
    return (mu_f + v.sum()) / (L + 1), 1.0 / (L + 1)


def dispersion_asymptote(L):
    """Dispersion of ``N(., 1/(L+1))`` relative to ``N(., 1)``: ``½(ln(L+1) - L/(L+1))``."""
    L = np.asarray(L, dtype=float)
    if np.any(L < 0):
        raise ConfigError("L must be nonnegative")
    return 0.5 * (np.log1p(L) - L / (L + 1))


def woodbury_identity_check(A, B, C, D, tol=1e-10):
    """Compare both sides of the Woodbury identity.

    ``(A + B C D)^{-1}`` against
    ``A^{-1} - A^{-1} B (C^{-1} + D A^{-1} B)^{-1} D A^{-1}``.

    Returns
    -------
    ok : bool
        Whether the max-norm residual is below ``tol``.
    residual : float
    """
    A, B, C, D = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, C, D))
    m, L = B.shape
    if A.shape != (m, m) or C.shape != (L, L) or D.shape != (L, m):
        raise ConfigError("need A m x m, B m x L, C L x L, D L x m")
    try:
        lhs = np.linalg.inv(A + B @ C @ D)
        Ainv = np.linalg.inv(A)
        inner = np.linalg.inv(np.linalg.inv(C) + D @ Ainv @ B)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("a block required by the identity is singular") from None
    rhs = Ainv - Ainv @ B @ inner @ D @ Ainv
    residual = float(np.abs(lhs - rhs).max())
    return residual < tol, residual


def push_through_identity_check(A, E, tol=1e-10):
    """Residual of ``(I - (A+E)^{-1} A) E^{-1} = (A+E)^{-1}``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    E = np.atleast_2d(np.asarray(E, dtype=float))
    try:
        S = np.linalg.inv(A + E)
        lhs = (np.eye(A.shape[0]) - S @ A) @ np.linalg.inv(E)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("A + E or E is singular") from None
    residual = float(np.abs(lhs - S).max())
    return residual < tol, residual


def repeated_observation_experiment(L_values, n_replicates, seed, mu_f=1.0):
    """Posterior statistics for repeated noisy observations of a scalar truth.

    Replicate ``j`` draws one truth from the prior ``N(mu_f, 1)`` (stream
    ``(seed, j)``) and one sequence of unit-noise observation errors (stream
    ``(seed, j, 1)``); the rows for ``L`` use the first ``L`` of them. The
    observation sets are therefore nested in ``L`` and any subset of ``L``
    values reproduces the same rows.

    Returns a list of dict rows with keys ``L, replicate, truth, mu_a, R_a,
    signal, dispersion``; the relative entropy compares the posterior with
    the prior.
    """
    prior = GaussianDist(mu_f, 1.0)
    rows = []
    L_values = [int(L) for L in L_values]
    if any(L < 0 for L in L_values):
        raise ConfigError("L must be nonnegative")
    L_max = max(L_values, default=0)
    truths = [mu_f + _rng.stream(seed, j).standard_normal() for j in range(n_replicates)]
    noise = [_rng.stream(seed, j, 1).standard_normal(L_max) for j in range(n_replicates)]
    for L in L_values:
        for j in range(n_replicates):
            truth = truths[j]
            v = truth + noise[j][:L]
            mu_a, Ra = repeated_obs_posterior(mu_f, v)
            kl = relative_entropy_gaussian(GaussianDist(mu_a, Ra), prior)
            rows.append(
                {"L": L, "replicate": j, "truth": truth, "mu_a": mu_a, "R_a": Ra,
                 "signal": kl.signal, "dispersion": kl.dispersion}
            )
    return rows
