"""Synthetic sparse-recovery instances.

All randomness flows through numpy's PCG64 bit generator. Integer seeds are
expanded with ``SeedSequence`` so that the same seed always yields the same
draws on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSignalError, ParameterError

MATRIX_KINDS = ("iid_gaussian", "ill_conditioned", "correlated", "nonzero_mean", "low_rank")


def as_rng(seed) -> np.random.Generator:
    """Return a PCG64 generator for an int seed, SeedSequence or Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class SparseSignal:
    values: np.ndarray
    support: np.ndarray
    rho: float
    sigma2_x: float

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class MatrixSpec:
    """Measurement-matrix family and its single shape parameter.

    ``param`` is kappa for ``ill_conditioned``, c for ``correlated``, mu for
    ``nonzero_mean`` and the rank R for ``low_rank``; it is ignored for
    ``iid_gaussian``.
    """

    kind: str
    m: int
    n: int
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in MATRIX_KINDS:
            raise ParameterError(f"unknown matrix kind {self.kind!r}")
        if self.m < 1 or self.n < 1:
            raise ParameterError("matrix dimensions must be positive")
        p = self.param
        if self.kind == "ill_conditioned" and not p >= 1:
            raise ParameterError(f"condition number must be >= 1, got {p}")
        if self.kind == "correlated" and not 0 <= p < 1:
            # c = 1 makes the correlation matrices singular
            raise ParameterError(f"correlation must lie in [0, 1), got {p}")
        if self.kind == "nonzero_mean" and not p >= 0:
            raise ParameterError(f"mean must be >= 0, got {p}")
        if self.kind == "low_rank":
            if p != int(p) or not 1 <= p < self.m:
                raise ParameterError(f"rank must be an integer in [1, M), got {p}")


@dataclass(frozen=True)
class SparseProblem:
    A: np.ndarray
    y: np.ndarray
    signal: SparseSignal
    lambda_true: float
    snr_db: float
    spec: MatrixSpec | None = field(default=None, compare=False)

    @property
    def x(self) -> np.ndarray:
        return self.signal.values

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


def gen_signal(n: int, rho: float, sigma2_x: float, seed) -> SparseSignal:
    """Draw a Bernoulli-Gaussian vector.

    Each entry is zero with probability ``1 - rho`` and otherwise
    ``N(0, sigma2_x)``.
    """
    if n < 1:
        raise ParameterError("signal length must be >= 1")
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"rho must lie in [0, 1], got {rho}")
    if not sigma2_x > 0:
        raise ParameterError(f"sigma2_x must be positive, got {sigma2_x}")
    rng = as_rng(seed)
    active = rng.random(n) < rho
    gauss = rng.standard_normal(n) * math.sqrt(sigma2_x)
    values = np.where(active, gauss, 0.0)
    return SparseSignal(values, np.flatnonzero(values), float(rho), float(sigma2_x))


def _haar_orthogonal(k: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    # sign fix makes the factor Haar distributed
    return q * np.where(np.diag(r) < 0, -1.0, 1.0)


def ill_conditioned_singular_values(k: int, kappa: float) -> np.ndarray:
    """Geometric profile with ratio kappa**(1/(k-1)) and largest value 1."""
    if k == 1:
        return np.ones(1)
    return kappa ** (-np.arange(k) / (k - 1))


def correlation_sqrt(size: int, c: float) -> np.ndarray:
    """Symmetric square root of the Kac-Murdock-Szego matrix c**|i-j|."""
    idx = np.arange(size)
    cmat = c ** np.abs(idx[:, None] - idx[None, :])
    w, v = np.linalg.eigh(cmat)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def gen_matrix(spec: MatrixSpec, seed) -> np.ndarray:
    """Draw a measurement matrix from one of the benchmark families."""
    rng = as_rng(seed)
    m, n = spec.m, spec.n
    if spec.kind == "iid_gaussian":
        return rng.standard_normal((m, n)) / math.sqrt(n)
    if spec.kind == "ill_conditioned":
        k = min(m, n)
        u = _haar_orthogonal(m, rng)
        v = _haar_orthogonal(n, rng)
        sv = ill_conditioned_singular_values(k, spec.param)
        return (u[:, :k] * sv) @ v[:k, :]
    if spec.kind == "correlated":
        g = rng.standard_normal((m, n)) / math.sqrt(n)
        if spec.param == 0:
            return g
        return correlation_sqrt(m, spec.param) @ g @ correlation_sqrt(n, spec.param)
    if spec.kind == "nonzero_mean":
        return spec.param + rng.standard_normal((m, n)) / math.sqrt(n)
    r = int(spec.param)
    b = rng.standard_normal((m, r))
    c = rng.standard_normal((r, n))
    return b @ c


def synthesize(A: np.ndarray, x, snr_db: float, seed) -> tuple[np.ndarray, float]:
    """Add white Gaussian noise calibrated to ``snr_db`` for this realization.

    The noise variance is ``||Ax||^2 / (M * 10**(snr_db/10))``. Passing
    ``snr_db=inf`` gives the noiseless case with ``lambda_true = inf``.
    """
    values = x.values if isinstance(x, SparseSignal) else np.asarray(x, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != values.shape[0]:
        raise ParameterError(f"A has shape {A.shape} but x has length {values.shape[0]}")
    z = A @ values
    if math.isinf(snr_db) and snr_db > 0:
        return z, math.inf
    power = float(z @ z)
    if power == 0.0:
        raise DegenerateSignalError("Ax is identically zero; SNR calibration is undefined")
    m = A.shape[0]
    noise_var = power / (m * 10.0 ** (snr_db / 10.0))
    rng = as_rng(seed)
    w = rng.standard_normal(m) * math.sqrt(noise_var)
    return z + w, 1.0 / noise_var


def make_problem(
    spec: MatrixSpec,
    rho: float,
    snr_db: float,
    seed: int,
    sigma2_x: float = 1.0,
) -> SparseProblem:
    """Build a full instance from one integer seed.

    The seed is split into independent streams for the matrix, the signal and
    the noise, so changing e.g. the SNR leaves A and x untouched.
    """
    ss_matrix, ss_signal, ss_noise = np.random.SeedSequence(int(seed)).spawn(3)
    A = gen_matrix(spec, ss_matrix)
    signal = gen_signal(spec.n, rho, sigma2_x, ss_signal)
    if signal.support.size == 0 and not math.isinf(snr_db):
        raise DegenerateSignalError(f"seed {seed} produced an all-zero signal")
    y, lam = synthesize(A, signal, snr_db, ss_noise)
    return SparseProblem(A, y, signal, lam, float(snr_db), spec)


def nmse_ratio(x_hat, x) -> float:
    x = np.asarray(x, dtype=float)
    ref = float(x @ x)
    if ref == 0.0:
        raise ParameterError("reference vector is zero; NMSE undefined")
    err = np.asarray(x_hat, dtype=float) - x
    return float(err @ err) / ref


def nmse_db(x_hat, x) -> float:
    """Normalized squared error in dB; an exact match returns ``-inf``."""
    x_hat = np.asarray(x_hat)
    if x_hat.shape != np.shape(x):
        raise ParameterError("x_hat and x must have equal length")
    ratio = nmse_ratio(x_hat, x)
    if ratio == 0.0:
        return -math.inf
    return 10.0 * math.log10(ratio)
