"""UTAMP-SBL: sparse Bayesian learning on top of UTAMP.

Each entry has a zero-mean Gaussian prior with precision ``gamma_n`` and the
precisions share a Gamma hyperprior with shape ``eps`` and rate 0. The noise
precision carries the improper prior ``1 / lambda``. All three are learned
jointly with the signal, and ``eps`` is retuned every iteration.

Only real-valued arithmetic is implemented. For proper complex data the
numerator of the gamma update would be ``eps + 1`` instead of ``2 eps + 1``.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, polygamma

from .errors import NumericError, ParameterError
from .result import RunResult, Trajectory, relative_change
from .transform import TransformedModel

GAMMA_MAX = 1e11
LAMBDA_MIN = 1e-12
LAMBDA_MAX = 1e12

EPS_UPDATES = ("closed_form", "newton_iteration")


@dataclass(frozen=True)
class SblConfig:
    max_iter: int = 300
    tol: float = 1e-10
    eps_init: float = 1e-3
    gamma_init: float = 1.0
    lambda_init: float = 1.0
    tau_x_init: float = 1.0
    eps_update: str = "closed_form"
    eta: float = 0.0
    # inner Newton steps per outer iteration when eps_update="newton_iteration"
    newton_max_steps: int = 50
    # False freezes lambda_hat at lambda_init
    learn_noise: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")
        if self.tol < 0:
            raise ParameterError("tol must be non-negative")
        for name in ("eps_init", "gamma_init", "lambda_init", "tau_x_init"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.eps_update not in EPS_UPDATES:
            raise ParameterError(f"eps_update must be one of {EPS_UPDATES}")
        if self.newton_max_steps < 1:
            raise ParameterError("newton_max_steps must be >= 1")
        if self.eta != 0.0:
            raise ParameterError("only the rate eta = 0 is supported")


def update_noise_precision(r, h_hat, v_h) -> float:
    """Posterior mean of the noise precision, clamped to [1e-12, 1e12]."""
    resid = np.asarray(r, dtype=float) - h_hat
    denom = float(resid @ resid) + float(np.sum(v_h))
    if denom <= 0.0:
        warnings.warn("noise precision denominator vanished; clamping to upper bound", stacklevel=2)
        return LAMBDA_MAX
    return min(max(len(resid) / denom, LAMBDA_MIN), LAMBDA_MAX)


def update_gamma(x_hat, tau_x, eps_hat: float, eta: float = 0.0) -> np.ndarray:
    """Posterior mean of the per-entry precisions, capped at 1e11."""
    x_hat = np.asarray(x_hat, dtype=float)
    with np.errstate(divide="ignore"):
        gamma = (2.0 * eps_hat + 1.0) / (2.0 * eta + x_hat**2 + tau_x)
    return np.minimum(gamma, GAMMA_MAX)


def jensen_gap(gamma) -> float:
    """``log(mean(gamma)) - mean(log(gamma))``, clipped at zero."""
    gamma = np.asarray(gamma, dtype=float)
    return max(math.log(float(np.mean(gamma))) - float(np.mean(np.log(gamma))), 0.0)


def update_epsilon_closed(gamma_hat) -> float:
    """Closed-form shape update ``0.5 * sqrt(jensen_gap(gamma_hat))``."""
    return 0.5 * math.sqrt(jensen_gap(gamma_hat))


def epsilon_score(eps: float, gamma_hat, eps_belief: float) -> float:
    """Derivative in ``eps`` of the profiled log-belief of the shape.

    ``eps_belief`` is the shape used to form the current Gamma beliefs of the
    precisions; it enters through the expected log-precision.
    """
    gamma_hat = np.asarray(gamma_hat, dtype=float)
    return (
        float(np.mean(np.log(gamma_hat)))
        - float(digamma(eps))
        + math.log(eps / float(np.mean(gamma_hat)))
        + float(digamma(eps_belief + 0.5))
        - math.log(eps_belief + 0.5)
    )


def update_epsilon_newton(gamma_hat, eps_current: float, eps_belief: float | None = None) -> float:
    """One generalized-Newton step on the shape (Minka's reciprocal form).

    Falls back to :func:`update_epsilon_closed` with a warning when the step
    would leave the positive axis.
    """
    if not eps_current > 0:
        raise ParameterError("eps_current must be positive")
    if eps_belief is None:
        eps_belief = eps_current
    g = epsilon_score(eps_current, gamma_hat, eps_belief)
    curvature = eps_current**2 * (1.0 / eps_current - float(polygamma(1, eps_current)))
    # the curvature cancels to zero in floating point for very large eps
    inv_new = 1.0 / eps_current + g / curvature if curvature < 0 else math.nan
    if not (np.isfinite(inv_new) and inv_new > 0):
        warnings.warn("Newton shape step left the positive axis; using closed form", stacklevel=2)
        return max(update_epsilon_closed(gamma_hat), np.finfo(float).tiny)
    return 1.0 / inv_new


def solve_epsilon_newton(gamma_hat, eps_belief: float, max_steps: int = 100, rtol: float = 1e-12) -> float:
    """Iterate :func:`update_epsilon_newton` to its fixed point."""
    eps = eps_belief
    for _ in range(max_steps):
        eps_new = update_epsilon_newton(gamma_hat, eps, eps_belief)
        if abs(eps_new - eps) <= rtol * eps_new:
            return eps_new
        eps = eps_new
    return eps


def _h_belief(r, p, tau_p, lam):
    """Gaussian belief of the noiseless outputs; rows with tau_p = 0 are exact."""
    live = tau_p > 0
    if np.all(live):
        v_h = 1.0 / (1.0 / tau_p + lam)
        return v_h * (lam * r + p / tau_p), v_h
    v_h = np.zeros_like(tau_p)
    h = p.copy()
    tp = tau_p[live]
    v_h[live] = 1.0 / (1.0 / tp + lam)
    h[live] = v_h[live] * (lam * r[live] + p[live] / tp)
    return h, v_h


def _assert_positive(t, **values):
    for name, v in values.items():
        if not np.all(np.asarray(v) > 0):
            raise AssertionError(f"{name} lost positivity at iteration {t}")


def sbl_run(tm: TransformedModel, cfg: SblConfig | None = None, truth=None, check: bool = False) -> RunResult:
    """Jointly estimate the signal, precisions, noise level and shape.

    Parameters
    ----------
    tm : TransformedModel
        Output of :func:`sblkit.transform.unitary_transform`.
    cfg : SblConfig, optional
        Iteration limits, initial values and the shape update rule.
    truth : array_like or SparseSignal, optional
        When given, the NMSE of every iterate is recorded.
    check : bool
        Assert positivity of all variances and precisions each iteration.

    Returns
    -------
    RunResult
        ``trace`` holds per-iteration ``lambda_hat``, ``eps_hat`` and ``tau_x``.
    """
    cfg = cfg or SblConfig()
    phi, r, lambda_p = tm.phi, tm.r, tm.lambda_p
    m, n = phi.shape
    traj = Trajectory(truth)
    if not np.any(r):
        warnings.warn("transformed observation is zero; returning the zero estimate", stacklevel=2)
        return RunResult(x_hat=np.zeros(n), iterations=0, converged=True, lambda_hat_final=math.nan)

    x = np.zeros(n)
    tau_x = cfg.tau_x_init
    eps = cfg.eps_init
    gamma = np.full(n, cfg.gamma_init)
    lam = cfg.lambda_init
    s = np.zeros(m)
    trace = {"lambda_hat": [], "eps_hat": [], "tau_x": []}
    converged = False
    t = 0
    start = time.perf_counter()
    while True:
        tau_p = tau_x * lambda_p
        p = phi @ x - tau_p * s
        if cfg.learn_noise:
            h, v_h = _h_belief(r, p, tau_p, lam)
            lam = update_noise_precision(r, h, v_h)
        tau_s = 1.0 / (tau_p + 1.0 / lam)
        s = tau_s * (r - p)
        tau_q = n / float(lambda_p @ tau_s)
        q = x + tau_q * (phi.T @ s)
        shrink = 1.0 + tau_q * gamma
        tau_x = tau_q * float(np.mean(1.0 / shrink))
        x_new = q / shrink
        if not (np.all(np.isfinite(x_new)) and np.isfinite(tau_x) and np.isfinite(lam)):
            raise NumericError("UTAMP-SBL state became non-finite", t + 1)
        gamma = update_gamma(x_new, tau_x, eps)
        if not np.all(gamma > 0):
            raise NumericError("precision estimate underflowed to zero", t + 1)
        if cfg.eps_update == "closed_form":
            eps = update_epsilon_closed(gamma)
        else:
            eps = solve_epsilon_newton(gamma, eps, max_steps=cfg.newton_max_steps)
        t += 1
        if check:
            _assert_positive(t, tau_s=tau_s, tau_q=tau_q, tau_x=tau_x, gamma=gamma, lambda_hat=lam)
            if cfg.learn_noise:
                _assert_positive(t, v_h=v_h[tau_p > 0])
        change = relative_change(x_new, x)
        x = x_new
        traj.record(x)
        trace["lambda_hat"].append(lam)
        trace["eps_hat"].append(eps)
        trace["tau_x"].append(tau_x)
        if change <= cfg.tol:
            converged = True
            break
        if t >= cfg.max_iter:
            break
    wall = time.perf_counter() - start
    return RunResult(
        x_hat=x,
        iterations=t,
        converged=converged,
        wall_time=wall,
        nmse_trajectory=traj.array(),
        lambda_hat_final=lam,
        eps_hat_final=eps,
        trace={k: np.asarray(v) for k, v in trace.items()},
    )
