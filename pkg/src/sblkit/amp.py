"""Vector-stepsize AMP and the AMP-SBL baseline built on it.

Both solvers apply the measurement matrix directly, so they inherit AMP's
fragility on non-i.i.d. matrices. The divergence guard stops a run as soon as
an iterate leaves ``[-1e12, 1e12]`` or turns non-finite and flags it, so
failures show up in benchmark tables instead of as NaN noise.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import NumericError, ParameterError
from .result import RunResult, Trajectory, blew_up, relative_change
from .sbl import GAMMA_MAX, update_epsilon_closed, update_noise_precision


def _validate(A, y, damping):
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ParameterError(f"A has shape {A.shape} but y has shape {y.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise NumericError("non-finite entries in A or y")
    if not 0.0 < damping <= 1.0:
        raise ParameterError(f"damping must lie in (0, 1], got {damping}")
    return A, y


def amp_run(
    A,
    y,
    denoiser,
    lam: float,
    max_iter: int = 300,
    tol: float = 1e-10,
    damping: float = 1.0,
    truth=None,
    x0=None,
    tau_x0=1.0,
) -> RunResult:
    """Vector-stepsize AMP with known noise precision ``lam``.

    ``denoiser(q, tau_q)`` must return the posterior mean and variance for
    vector ``tau_q``. With ``damping < 1`` the new ``s`` and ``x_hat`` are mixed
    with the previous ones as ``d * new + (1 - d) * old``.
    """
    A, y = _validate(A, y, damping)
    if not lam > 0:
        raise ParameterError(f"noise precision must be positive, got {lam}")
    m, n = A.shape
    A2 = A * A
    noise_var = 1.0 / lam
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    tau_x = np.broadcast_to(np.asarray(tau_x0, dtype=float), (n,)).copy()
    s = np.zeros(m)
    traj = Trajectory(truth)
    converged = diverged = False
    t = 0
    start = time.perf_counter()
    while t < max_iter:
        tau_p = A2 @ tau_x
        p = A @ x - tau_p * s
        tau_s = 1.0 / (tau_p + noise_var)
        s_new = tau_s * (y - p)
        s = damping * s_new + (1.0 - damping) * s
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            tau_q = 1.0 / (A2.T @ tau_s)
            q = x + tau_q * (A.T @ s)
        if blew_up(q, finite=(tau_q,)):
            diverged = True
            t += 1
            traj.record(x)
            break
        x_new, tau_x = denoiser(q, tau_q)
        x_new = damping * x_new + (1.0 - damping) * x
        t += 1
        change = relative_change(x_new, x)
        x = x_new
        traj.record(x)
        if blew_up(x, finite=(s,)):
            diverged = True
            break
        if change <= tol:
            converged = True
            break
    wall = time.perf_counter() - start
    return RunResult(
        x_hat=x if np.all(np.isfinite(x)) else np.nan_to_num(x),
        iterations=t,
        converged=converged,
        diverged=diverged,
        wall_time=wall,
        nmse_trajectory=traj.array(),
        lambda_hat_final=lam,
        damping=damping,
    )


def amp_sbl_run(
    A,
    y,
    max_iter: int = 300,
    tol: float = 1e-10,
    damping: float = 1.0,
    eps_init: float = 1e-3,
    lambda_init: float = 1.0,
    tau_x_init: float = 1.0,
    truth=None,
    stop_on_divergence: bool = True,
) -> RunResult:
    """SBL driven by vector-stepsize AMP on the untransformed model.

    This is the divergence-prone baseline: the same hyperprior and noise
    learning as UTAMP-SBL, but with per-entry variances propagated through
    ``|A|^2`` instead of the unitary transform. With
    ``stop_on_divergence=False`` a blown-up run is still flagged but keeps
    iterating until ``max_iter``, which is what fixed-budget timing needs.
    """
    A, y = _validate(A, y, damping)
    m, n = A.shape
    A2 = A * A
    x = np.zeros(n)
    tau_x = np.full(n, float(tau_x_init))
    s = np.zeros(m)
    gamma = np.ones(n)
    lam = float(lambda_init)
    eps = float(eps_init)
    traj = Trajectory(truth)
    converged = diverged = False
    t = 0
    start = time.perf_counter()
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        while t < max_iter:
            tau_p = A2 @ tau_x
            p = A @ x - tau_p * s
            v_h = 1.0 / (1.0 / tau_p + lam)
            h = v_h * (lam * y + p / tau_p)
            lam = update_noise_precision(y, h, v_h)
            tau_s = 1.0 / (tau_p + 1.0 / lam)
            s = damping * (tau_s * (y - p)) + (1.0 - damping) * s
            tau_q = 1.0 / (A2.T @ tau_s)
            q = x + tau_q * (A.T @ s)
            t += 1
            if not diverged and blew_up(q, finite=(tau_q, s)):
                diverged = True
                if stop_on_divergence:
                    traj.record(x)
                    break
            shrink = 1.0 + tau_q * gamma
            tau_x = tau_q / shrink
            x_new = damping * (q / shrink) + (1.0 - damping) * x
            gamma = np.minimum((2.0 * eps + 1.0) / (x_new**2 + tau_x), GAMMA_MAX)
            eps = update_epsilon_closed(gamma)
            change = relative_change(x_new, x)
            x = x_new
            traj.record(x)
            if not diverged and blew_up(x):
                diverged = True
                if stop_on_divergence:
                    break
            if change <= tol:
                converged = True
                break
    wall = time.perf_counter() - start
    return RunResult(
        x_hat=np.nan_to_num(x),
        iterations=t,
        converged=converged,
        diverged=diverged,
        wall_time=wall,
        nmse_trajectory=traj.array(),
        lambda_hat_final=lam,
        eps_hat_final=eps,
        damping=damping,
    )

