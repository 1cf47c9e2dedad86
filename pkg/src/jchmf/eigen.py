"""Dense real-symmetric eigensolver used by the sector and mean-field code.

Thin contract layer over LAPACK (numpy.linalg.eigh): ascending eigenvalues,
orthonormal eigenvectors with a fixed sign convention, and explicit error
types for non-finite input and convergence failure.  Matrices here are tiny
(dim <= ~200), so the full decomposition is always affordable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EigenError(Exception):
    pass


class NonFiniteEntry(EigenError):
    pass


class NoConvergence(EigenError):
    pass


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]


def _check_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise EigenError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteEntry("matrix contains a non-finite entry")
    if not np.array_equal(m, m.T):
        raise EigenError("matrix is not exactly symmetric")
    return m


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # sign convention: largest-magnitude component of each vector positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def eigh(a) -> EigenDecomposition:
    """Full spectrum of an exactly symmetric real matrix, sorted ascending."""
    m = _check_matrix(a)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(vals, _fix_signs(vecs))


def eigvalsh(a) -> np.ndarray:
    """Eigenvalues only, sorted ascending."""
    m = _check_matrix(a)
    try:
        return np.linalg.eigvalsh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NoConvergence(str(exc)) from exc


def ground_pair(a) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a matching unit eigenvector."""
    dec = eigh(a)
    return float(dec.eigenvalues[0]), dec.eigenvectors[:, 0].copy()
