"""Separable MMSE denoisers for the scalar channel ``q = x + N(0, tau_q)``.

Every denoiser returns the posterior mean and the posterior variance. The
posterior variance equals ``tau_q`` times the derivative of the mean with
respect to ``q``, which is the quantity the AMP variance updates need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import NumericError, ParameterError


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericError("non-finite denoiser input")


def bg_denoise(q, tau_q, rho: float, sigma2_x: float):
    """Posterior mean and variance under a Bernoulli-Gaussian prior.

    The prior is ``(1 - rho) delta(x) + rho N(x; 0, sigma2_x)``. The slab
    responsibility is evaluated from its log-odds, which keeps the result
    finite for arbitrarily large ``|q| / sqrt(tau_q)``.

    Parameters
    ----------
    q : array_like
        Pseudo-observations.
    tau_q : float or array_like
        Pseudo-observation noise variance, scalar or one per entry.
    rho : float
        Probability of a nonzero entry.
    sigma2_x : float
        Variance of the nonzero entries.

    Returns
    -------
    x_hat, tau_post : ndarray
    """
    q = np.asarray(q, dtype=float)
    tau_q = np.asarray(tau_q, dtype=float)
    _check_finite(q, tau_q)
    if np.any(tau_q <= 0):
        raise ParameterError("tau_q must be positive")
    if not 0.0 <= rho <= 1.0 or not sigma2_x > 0:
        raise ParameterError(f"invalid prior rho={rho}, sigma2_x={sigma2_x}")

    total = sigma2_x + tau_q
    slab_mean = q * (sigma2_x / total)
    slab_var = sigma2_x * tau_q / total
    if rho == 0.0:
        pi = np.zeros(np.broadcast(q, tau_q).shape)
    elif rho == 1.0:
        pi = np.ones(np.broadcast(q, tau_q).shape)
    else:
        log_odds = (
            np.log(rho / (1.0 - rho))
            + 0.5 * np.log(tau_q / total)
            + 0.5 * q**2 * sigma2_x / (tau_q * total)
        )
        pi = expit(log_odds)
    x_hat = pi * slab_mean
    tau_post = pi * slab_var + pi * (1.0 - pi) * slab_mean**2
    return x_hat, tau_post


def gaussian_denoise(q, tau_q, gamma):
    """Posterior mean and variance under independent ``N(0, 1/gamma_n)`` priors.

    ``gamma = 0`` is accepted and gives the flat-prior limit.
    """
    q = np.asarray(q, dtype=float)
    tau_q = np.asarray(tau_q, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    _check_finite(q, tau_q, gamma)
    if np.any(tau_q <= 0):
        raise ParameterError("tau_q must be positive")
    if np.any(gamma < 0):
        raise ParameterError("gamma must be non-negative")
    shrink = 1.0 + tau_q * gamma
    return q / shrink, tau_q / shrink


@dataclass(frozen=True)
class BernoulliGaussian:
    rho: float
    sigma2_x: float

    def __post_init__(self):
        if not 0.0 <= self.rho <= 1.0 or not self.sigma2_x > 0:
            raise ParameterError(f"invalid prior rho={self.rho}, sigma2_x={self.sigma2_x}")

    def __call__(self, q, tau_q):
        return bg_denoise(q, tau_q, self.rho, self.sigma2_x)


@dataclass(frozen=True)
class GaussianPrior:
    """Zero-mean Gaussian prior with per-entry precision ``gamma``."""

    gamma: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        if np.any(gamma <= 0):
            raise ParameterError("gamma entries must be positive")
        object.__setattr__(self, "gamma", gamma)

    def __call__(self, q, tau_q):
        return gaussian_denoise(q, tau_q, self.gamma)
