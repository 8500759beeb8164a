"""AMP with unitary transformation (UTAMP)."""

from __future__ import annotations

import time

import numpy as np

from .errors import NumericError, ParameterError
from .result import RunResult, Trajectory, relative_change
from .transform import TransformedModel


def utamp_run(
    tm: TransformedModel,
    denoiser,
    lam: float,
    max_iter: int = 300,
    tol: float = 1e-10,
    truth=None,
    x0=None,
    tau_x0: float = 1.0,
) -> RunResult:
    """Run UTAMP on a transformed model with known noise precision.

    Variances are scalars: ``tau_p = tau_x * lambda_p`` and the input
    variance ``tau_q`` is the harmonic-style average over the transformed
    channels. The posterior variances returned by ``denoiser`` are averaged
    into the next scalar ``tau_x``. ``lam=inf`` runs the noiseless model.

    Raises
    ------
    NumericError
        If any iterate becomes non-finite.
    """
    if not lam > 0:
        raise ParameterError(f"noise precision must be positive, got {lam}")
    if not tau_x0 > 0:
        raise ParameterError("initial tau_x must be positive")
    phi, r, lambda_p = tm.phi, tm.r, tm.lambda_p
    m, n = phi.shape
    noise_var = 1.0 / lam
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    tau_x = float(tau_x0)
    s = np.zeros(m)
    traj = Trajectory(truth)
    trace_tau_x = []
    converged = False
    t = 0
    start = time.perf_counter()
    while t < max_iter:
        tau_p = tau_x * lambda_p
        p = phi @ x - tau_p * s
        tau_s = 1.0 / (tau_p + noise_var)
        s = tau_s * (r - p)
        tau_q = n / float(lambda_p @ tau_s)
        q = x + tau_q * (phi.T @ s)
        x_new, tau_post = denoiser(q, tau_q)
        tau_x = float(np.mean(tau_post))
        t += 1
        if not (np.all(np.isfinite(x_new)) and np.isfinite(tau_x) and tau_x > 0):
            raise NumericError("UTAMP state became non-finite or tau_x collapsed", t)
        change = relative_change(x_new, x)
        x = x_new
        traj.record(x)
        trace_tau_x.append(tau_x)
        if change <= tol:
            converged = True
            break
    wall = time.perf_counter() - start
    return RunResult(
        x_hat=x,
        iterations=t,
        converged=converged,
        wall_time=wall,
        nmse_trajectory=traj.array(),
        lambda_hat_final=lam,
        trace={"tau_x": np.asarray(trace_tau_x)},
    )
