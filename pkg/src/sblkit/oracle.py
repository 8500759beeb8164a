"""Support-oracle MMSE benchmark."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericError, ParameterError
from .problem_gen import nmse_db


@dataclass(frozen=True)
class OracleResult:
    x_hat_oracle: np.ndarray
    nmse_db: float


def oracle_mmse(A, y, support, lambda_true: float, sigma2_x: float, truth=None) -> OracleResult:
    """Genie-aided LMMSE estimate restricted to the true support.

    Solves ``(lam A_S^T A_S + I / sigma2_x) x_S = lam A_S^T y`` and sets every
    entry off the support to zero. With ``lambda_true = inf`` the noiseless
    least-squares limit is returned. ``nmse_db`` is NaN unless ``truth`` is
    given and nonzero.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    support = np.asarray(support, dtype=int)
    m, n = A.shape
    if support.size and (support.min() < 0 or support.max() >= n):
        raise ParameterError("support index out of range")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise NumericError("non-finite entries in A or y")
    if not (lambda_true > 0 and sigma2_x > 0):
        raise ParameterError("lambda_true and sigma2_x must be positive")
    x_hat = np.zeros(n)
    if support.size:
        a_s = A[:, support]
        if math.isinf(lambda_true):
            x_s = np.linalg.lstsq(a_s, y, rcond=None)[0]
        else:
            gram = lambda_true * (a_s.T @ a_s) + np.eye(support.size) / sigma2_x
            rhs = lambda_true * (a_s.T @ y)
            x_s = scipy.linalg.solve(gram, rhs, assume_a="pos")
            resid = np.linalg.norm(gram @ x_s - rhs)
            scale = np.linalg.norm(gram, 2) * np.linalg.norm(x_s) + np.linalg.norm(rhs)
            if not resid <= 1e-8 * scale:
                raise NumericError(f"oracle solve residual {resid:.3e} too large")
        x_hat[support] = x_s
    err = math.nan
    if truth is not None:
        truth = np.asarray(getattr(truth, "values", truth), dtype=float)
        if np.any(truth):
            err = nmse_db(x_hat, truth)
    return OracleResult(x_hat, err)
