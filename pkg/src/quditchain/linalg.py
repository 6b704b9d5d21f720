"""Dense Hermitian eigendecomposition, unitary propagators, and norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenDecomposition",
    "hermitian_eig",
    "unitary_exp",
    "frobenius_distance",
    "spectra_match",
]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and the unitary matrix of eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eig(m: np.ndarray) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Rejects inputs whose Hermiticity defect exceeds 1e-9 relative to the
    Frobenius norm; the symmetrized (M + M^dag)/2 is what gets decomposed.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.linalg.norm(m)
    defect = np.linalg.norm(m - m.conj().T)
    if scale > 0 and defect > 1e-9 * scale:
        raise ValueError(f"matrix is not Hermitian: relative defect {defect/scale:.3e}")
    values, vectors = np.linalg.eigh((m + m.conj().T) / 2)
    return EigenDecomposition(values=values, vectors=vectors)


def unitary_exp(h: np.ndarray, t: float) -> np.ndarray:
    """U = exp(-i H t) for Hermitian H, via one eigendecomposition."""
    dec = hermitian_eig(h)
    phases = np.exp(-1j * dec.values * t)
    return (dec.vectors * phases) @ dec.vectors.conj().T


def frobenius_distance(a: np.ndarray, b: np.ndarray) -> float:
    """sqrt(Tr((A-B)^dag (A-B)))."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def spectra_match(a, b, tol: float) -> bool:
    """Compare two eigenvalue multisets by pairing after sorting.

    Robust for the highly degenerate spectra that show up here, where
    element order within a degenerate cluster is arbitrary.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        return False
    return bool(np.abs(a - b).max() <= tol)
