"""Unitary transformation of the linear model via a full SVD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ParameterError


@dataclass(frozen=True)
class TransformedModel:
    """The model ``r = phi @ x + noise`` with ``phi = diag(sv) @ V``.

    Attributes
    ----------
    r : ndarray, shape (M,)
        Rotated observation ``U^T y``.
    phi : ndarray, shape (M, N)
        Rows of ``V`` scaled by the singular values; rows beyond ``min(M, N)``
        are zero.
    lambda_p : ndarray, shape (M,)
        Squared singular values padded with zeros to length M, which equal the
        squared row norms of ``phi``.
    """

    r: np.ndarray
    phi: np.ndarray
    lambda_p: np.ndarray

    @property
    def m(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]


def unitary_transform(A, y, check: bool = False) -> TransformedModel:
    """Rotate ``y = A x + w`` by the left singular vectors of ``A``.

    Any valid SVD is accepted; sign and ordering conventions do not matter to
    the algorithms. With ``check=True`` the unitarity of U is asserted.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ParameterError(f"A has shape {A.shape} but y has shape {y.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise NumericError("non-finite entries in A or y")
    if not np.any(A):
        raise ParameterError("A is identically zero")
    m, n = A.shape
    try:
        u, sv, vh = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed: {exc}") from exc
    k = sv.shape[0]
    phi = np.zeros((m, n))
    phi[:k] = sv[:, None] * vh[:k]
    lambda_p = np.zeros(m)
    lambda_p[:k] = sv**2
    if check:
        np.testing.assert_allclose(u.T @ u, np.eye(m), rtol=0, atol=1e-10)
    return TransformedModel(u.T @ y, phi, lambda_p)
