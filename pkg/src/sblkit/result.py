"""Container returned by every iterative solver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .problem_gen import nmse_db

DIVERGENCE_THRESHOLD = 1e12


@dataclass
class RunResult:
    x_hat: np.ndarray
    iterations: int
    converged: bool
    diverged: bool = False
    wall_time: float = 0.0
    nmse_trajectory: np.ndarray = field(default_factory=lambda: np.empty(0))
    lambda_hat_final: float = math.nan
    eps_hat_final: float = math.nan
    damping: float = 1.0
    # per-iteration diagnostics keyed by name (tau_x, lambda_hat, eps_hat, ...)
    trace: dict = field(default_factory=dict)


def relative_change(x_new: np.ndarray, x_old: np.ndarray) -> float:
    """``||x_new - x_old||^2 / ||x_new||^2`` with 0/0 read as no change."""
    diff = x_new - x_old
    num = float(diff @ diff)
    den = float(x_new @ x_new)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def blew_up(*arrays, finite=()) -> bool:
    """True if any of ``arrays`` leaves the divergence box or is non-finite.

    Arrays passed as ``finite`` are only checked for finiteness; variances and
    residual messages may legitimately grow without bound in noiseless runs.
    """
    for a in arrays:
        if not np.all(np.isfinite(a)) or np.max(np.abs(a), initial=0.0) > DIVERGENCE_THRESHOLD:
            return True
    return not all(np.all(np.isfinite(a)) for a in finite)


class Trajectory:
    """Collects per-iteration NMSE when the true signal is known."""

    def __init__(self, truth):
        if truth is not None and hasattr(truth, "values"):
            truth = truth.values
        if truth is not None:
            truth = np.asarray(truth, dtype=float)
            if not np.any(truth):
                truth = None
        self.truth = truth
        self.values: list[float] = []

    def record(self, x_hat):
        if self.truth is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                self.values.append(nmse_db(x_hat, self.truth))

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)
