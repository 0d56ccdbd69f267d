"""Matrix primitives used by the solvers.

Dense matrices are plain float64 ``numpy.ndarray``s. Binary sparse matrices
get a dedicated value-less CSR type since interactions and tag indicators
are strictly 0/1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import NumericalError, ResourceError, ValidationError

# Refuse Gram products whose dense result would exceed this many bytes.
DEFAULT_GRAM_BUDGET_BYTES = 8 << 30


@dataclass(frozen=True)
class SparseBinaryMatrix:
    """Row-compressed binary matrix: only column indices are stored.

    Column indices must be strictly increasing within each row.
    """

    shape: tuple[int, int]
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self):
        rows, cols = self.shape
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        if indptr.shape != (rows + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise ValidationError("malformed indptr")
        if np.any(np.diff(indptr) < 0):
            raise ValidationError("indptr must be non-decreasing")
        if len(indices) and (indices.min() < 0 or indices.max() >= cols):
            raise ValidationError("column index out of range")
        for r in range(rows):
            row = indices[indptr[r]:indptr[r + 1]]
            if len(row) > 1 and np.any(np.diff(row) <= 0):
                raise ValidationError(f"row {r}: column indices not strictly increasing")

    @property
    def nnz(self) -> int:
        return int(len(self.indices))

    @classmethod
    def from_rows(cls, rows: list[list[int]], n_cols: int) -> "SparseBinaryMatrix":
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        chunks = []
        for r, row in enumerate(rows):
            cols = np.unique(np.asarray(sorted(set(row)), dtype=np.int64))
            chunks.append(cols)
            indptr[r + 1] = indptr[r] + len(cols)
        indices = np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)
        return cls((len(rows), n_cols), indptr, indices)

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "SparseBinaryMatrix":
        a = np.asarray(a)
        rows = [list(np.nonzero(a[r])[0]) for r in range(a.shape[0])]
        return cls.from_rows(rows, a.shape[1])

    def row(self, r: int) -> np.ndarray:
        return self.indices[self.indptr[r]:self.indptr[r + 1]]

    def to_csr(self) -> sp.csr_matrix:
        data = np.ones(self.nnz, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()


@dataclass(frozen=True)
class SymEig:
    """Symmetric eigendecomposition, eigenvalues ascending."""

    values: np.ndarray
    vectors: np.ndarray


def gram(m, budget_bytes: int = DEFAULT_GRAM_BUDGET_BYTES) -> np.ndarray:
    """Return the Gram matrix MᵀM as a dense float64 array."""
    if isinstance(m, SparseBinaryMatrix):
        rows, cols = m.shape
        if rows == 0 or cols == 0:
            raise ValidationError("gram of empty matrix")
        if cols * cols * 8 > budget_bytes:
            raise ResourceError(f"gram result {cols}x{cols} exceeds memory budget")
        csr = m.to_csr()
        return np.asarray((csr.T @ csr).todense(), dtype=np.float64)
    a = np.asarray(m, dtype=np.float64)
    if a.size == 0:
        raise ValidationError("gram of empty matrix")
    if a.shape[1] ** 2 * 8 > budget_bytes:
        raise ResourceError(f"gram result {a.shape[1]}x{a.shape[1]} exceeds memory budget")
    return a.T @ a


def sym_eig(a: np.ndarray, sym_tol: float = 1e-8, clamp_tol: float = 1e-10) -> SymEig:
    """Eigendecomposition of a symmetric matrix.

    The input is symmetrized before decomposition; asymmetry beyond
    ``sym_tol`` (relative) is rejected. Small negative eigenvalues are
    clamped to zero, so PSD Gram matrices stay PSD after round-off.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("sym_eig requires a square matrix")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > sym_tol * scale:
        raise ValidationError("matrix is not symmetric within tolerance")
    a = 0.5 * (a + a.T)
    try:
        w, q = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh rarely fails
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    wmax = max(1.0, float(np.abs(w).max(initial=0.0)))
    w = np.where((w < 0) & (np.abs(w) <= clamp_tol * wmax), 0.0, w)
    return SymEig(values=w, vectors=q)
