"""Dense complex linear algebra for small Hilbert spaces.

Everything here works on plain numpy arrays: square complex matrices of
dimension up to a few dozen.  Spectral routines go through the Hermitian
eigendecomposition; nothing is sparse, iterative, or GPU-aware on purpose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "EigenDecomposition",
    "LOG_FLOOR",
    "NotPositive",
    "NumericalFailure",
    "ShapeError",
    "as_matrix",
    "dag",
    "eigh",
    "hermitize",
    "matrix_log_on_support",
    "operator_norm",
    "partial_trace",
    "singular_values",
    "tensor",
    "trace_norm",
]

# eigenvalues below this floor are clamped before taking logs
LOG_FLOOR = 1e-14


class ShapeError(ValueError):
    """Operands do not have the shapes the operation requires."""


class NotPositive(ValueError):
    """A matrix that must be positive semidefinite has a negative eigenvalue."""


class NumericalFailure(RuntimeError):
    """The eigensolver did not converge; carries a residual norm."""

    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex matrix with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.conjugate(np.asarray(m)).T


def hermitize(m: np.ndarray) -> np.ndarray:
    """(M + M†)/2, the Hermitian part of M."""
    return (m + np.conjugate(m).T) / 2.0


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Hermitian spectral data: eigenvalues sorted descending, matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ np.conjugate(u).T


def eigh(m) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized first, so mild (<= 1e-12) Hermiticity violations
    are absorbed rather than rejected.  Eigenvalues come back in descending
    order with eigenvector columns to match.
    """
    a = hermitize(as_matrix(m))
    try:
        vals, vecs = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        off = a - np.diag(np.diag(a))
        raise NumericalFailure(
            f"Hermitian eigensolver did not converge: {exc}",
            residual=float(np.linalg.norm(off)),
        ) from exc
    # numpy sorts ascending; flip to descending
    return EigenDecomposition(vals[::-1].copy(), vecs[:, ::-1].copy())


def matrix_log_on_support(m, floor: float = LOG_FLOOR) -> np.ndarray:
    """Hermitian log with the spectrum clamped at ``floor``.

    Eigenvalues below the floor are treated as ``floor`` before taking logs,
    which keeps the result finite on (numerically) rank-deficient inputs.
    Raises NotPositive if the spectrum dips below -1e-10.
    """
    if floor <= 0.0:
        raise ValueError(f"floor must be positive, got {floor}")
    dec = eigh(m)
    lo = float(dec.eigenvalues.min()) if dec.eigenvalues.size else 0.0
    if lo < -1e-10:
        raise NotPositive(f"matrix has eigenvalue {lo:.3e} < -1e-10")
    logs = np.log(np.maximum(dec.eigenvalues, floor))
    u = dec.eigenvectors
    return (u * logs) @ np.conjugate(u).T


def singular_values(m) -> np.ndarray:
    """Singular values, descending, via the spectrum of M†M."""
    a = as_matrix(m)
    vals = np.linalg.eigvalsh(np.conjugate(a).T @ a)
    return np.sqrt(np.clip(vals[::-1], 0.0, None))


def operator_norm(m) -> float:
    """Largest singular value (spectral norm)."""
    return float(singular_values(m)[0])


def trace_norm(m) -> float:
    """Sum of singular values (Schatten-1 norm)."""
    return float(singular_values(m).sum())


def tensor(*ms) -> np.ndarray:
    """Kronecker product of the given matrices, left to right."""
    if not ms:
        raise ShapeError("tensor() needs at least one factor")
    mats = [as_matrix(m, name=f"factor {i}") for i, m in enumerate(ms)]
    return reduce(np.kron, mats)


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out tensor factors, keeping the ones in ``keep``.

    ``dims`` lists the factor dimensions of the full space; ``keep`` is the
    set of factor indices to retain, in their original order.
    """
    a = as_matrix(m)
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ShapeError(f"factor dimensions must be >= 1, got {dims}")
    total = math.prod(dims)
    if total != a.shape[0]:
        raise ShapeError(f"prod{dims} = {total} does not match matrix dim {a.shape[0]}")
    n = len(dims)
    keep = tuple(sorted({int(k) for k in keep}))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ShapeError(f"keep indices {keep} out of range for {n} factors")
    row = [chr(97 + i) for i in range(n)]
    col = [chr(97 + n + i) for i in range(n)]
    for i in range(n):
        if i not in keep:
            col[i] = row[i]  # repeated index: traced out
    spec = "".join(row) + "".join(col) + "->" + "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    dk = math.prod(dims[i] for i in keep)
    return np.einsum(spec, a.reshape(dims + dims)).reshape(dk, dk)
