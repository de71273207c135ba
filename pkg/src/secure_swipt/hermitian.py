"""Dense complex-Hermitian linear algebra helpers.

All routines accept numpy arrays and never mutate their inputs. Eigenvalues
are returned in ascending order; callers that need the dominant eigenpair
take the last entry.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ContractError

SYMMETRY_TOL = 1e-12
RANK_TOL = 1e-6


class EigenSystem(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _as_square(H) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {H.shape}")
    return H


def hermitian_part(H) -> np.ndarray:
    H = np.asarray(H)
    return 0.5 * (H + H.conj().swapaxes(-1, -2))


def check_hermitian(H, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Return the symmetrized matrix, raising if `H` is not Hermitian."""
    H = _as_square(H)
    scale = max(1.0, float(np.linalg.norm(H)))
    asym = float(np.linalg.norm(H - H.conj().T))
    if asym > tol * scale:
        raise ContractError(
            f"matrix is not Hermitian: |H - H^H|_F = {asym:.3e} (scale {scale:.3e})"
        )
    return hermitian_part(H)


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant entry is real and >= 0."""
    vectors = np.array(vectors, dtype=complex, copy=True)
    if vectors.size == 0:
        return vectors
    mags = np.abs(vectors)
    thresh = 1e-8 * mags.max(axis=0, keepdims=True)
    first = np.argmax(mags > thresh, axis=0)
    cols = np.arange(vectors.shape[1])
    pivot = vectors[first, cols]
    phase = np.ones_like(pivot)
    nz = np.abs(pivot) > 0
    phase[nz] = np.abs(pivot[nz]) / pivot[nz]
    return vectors * phase


def eig_hermitian(H) -> EigenSystem:
    """Ascending eigendecomposition with a reproducible eigenvector phase."""
    H = check_hermitian(H)
    values, vectors = np.linalg.eigh(H)
    return EigenSystem(values, fix_phase(vectors))


def numerical_rank(H, tol: float = RANK_TOL) -> int:
    """Count eigenvalues whose magnitude exceeds ``tol * max |eigenvalue|``."""
    values = np.linalg.eigvalsh(check_hermitian(H))
    top = np.abs(values).max(initial=0.0)
    if top == 0.0:
        return 0
    return int(np.count_nonzero(np.abs(values) > tol * top))


def null_space(H, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical null space of a Hermitian matrix.

    The column count is always ``dim - numerical_rank(H, tol)``.
    """
    values, vectors = eig_hermitian(H)
    top = np.abs(values).max(initial=0.0)
    if top == 0.0:
        return vectors
    keep = np.abs(values) <= tol * top
    return vectors[:, keep]


def is_psd(H, tol: float = 0.0) -> bool:
    H = check_hermitian(H)
    lam_min = float(np.linalg.eigvalsh(H)[0])
    return lam_min >= -tol * max(1.0, float(np.linalg.norm(H)))


def real_embedding(H) -> np.ndarray:
    """Map an n x n Hermitian matrix to the 2n x 2n real symmetric matrix
    ``[[Re H, -Im H], [Im H, Re H]]``.

    Works on stacks of matrices along the leading axes.
    """
    H = np.asarray(H)
    re, im = H.real, H.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def complex_from_embedding(T) -> np.ndarray:
    """Hermitian matrix whose real embedding is closest to ``T`` in Frobenius norm.

    For ``T = real_embedding(H)`` this returns ``H`` exactly.
    """
    T = np.asarray(T, dtype=float)
    n = T.shape[-1] // 2
    a = T[..., :n, :n]
    d = T[..., n:, n:]
    b = T[..., n:, :n]
    c = T[..., :n, n:]
    return 0.5 * (a + d) + 0.5j * (b - c)


def psd_sqrt_inv(H) -> np.ndarray:
    """Inverse square root of a positive definite Hermitian matrix."""
    values, vectors = np.linalg.eigh(hermitian_part(H))
    if values[0] <= 0:
        raise ContractError("matrix is not positive definite")
    return (vectors / np.sqrt(values)) @ vectors.conj().T


def dominant_eigenpair(H) -> tuple[float, np.ndarray]:
    values, vectors = eig_hermitian(H)
    return float(values[-1]), vectors[:, -1]


def eigenvalue_ratio(H) -> float:
    """Second-largest over largest eigenvalue; 0 for the zero matrix."""
    values = np.linalg.eigvalsh(hermitian_part(H))
    if values.size < 2 or values[-1] <= 0:
        return 0.0
    return float(max(values[-2], 0.0) / values[-1])
