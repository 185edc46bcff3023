"""Dense matrix/vector primitives shared by the solvers and diagnostics.

Matrices are plain 2-D float64 numpy arrays in row-major order; vectors are
1-D float64 arrays. The helpers here validate shape and finiteness once so
the hot loops can assume clean inputs. All functions are pure; arrays are
never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailureError, DimensionMismatchError, ZeroRowError

# Rows with Euclidean norm below this are treated as zero rows.
ZERO_ROW_TOL = 1e-14


def as_matrix(a) -> np.ndarray:
    """Coerce to a validated (m, n) float64 C-contiguous array.

    Raises DimensionMismatchError for a non-2-D input and ValueError if any
    entry is NaN or infinite.
    """
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-D matrix, got ndim={out.ndim}")
    if out.shape[0] < 1 or out.shape[1] < 1:
        raise DimensionMismatchError(f"matrix must be at least 1x1, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix entries must be finite")
    return out


def as_vector(v, length: int | None = None) -> np.ndarray:
    """Coerce to a validated 1-D float64 array, optionally of a fixed length."""
    out = np.ascontiguousarray(v, dtype=np.float64)
    if out.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got ndim={out.ndim}")
    if length is not None and out.shape[0] != length:
        raise DimensionMismatchError(f"expected length {length}, got {out.shape[0]}")
    if not np.all(np.isfinite(out)):
        raise ValueError("vector entries must be finite")
    return out


@dataclass(frozen=True)
class RowView:
    """One matrix row together with its cached Euclidean norm."""

    index: int
    values: np.ndarray
    norm: float = field(default=-1.0)

    def __post_init__(self):
        values = as_vector(self.values)
        object.__setattr__(self, "values", values)
        true_norm = float(np.linalg.norm(values))
        if self.norm < 0:
            object.__setattr__(self, "norm", true_norm)
        elif abs(self.norm - true_norm) > 1e-12 * max(true_norm, 1.0):
            raise ValueError(
                f"cached norm {self.norm} disagrees with recomputed norm {true_norm}"
            )

    @classmethod
    def from_matrix(cls, a: np.ndarray, index: int) -> "RowView":
        a = as_matrix(a)
        return cls(index=int(index), values=a[index].copy())


def row_norms(a: np.ndarray) -> tuple[np.ndarray, float]:
    """Euclidean norm of every row, plus the squared Frobenius norm.

    Zero rows are reported as 0.0; callers decide whether such rows are
    selectable.
    """
    a = as_matrix(a)
    sq = np.einsum("ij,ij->i", a, a)
    return np.sqrt(sq), float(sq.sum())


def normalize_rows(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale every row to unit Euclidean norm.

    Returns the normalized matrix and the vector of applied scalings (the
    original row norms), so a right-hand side can be rescaled consistently
    via ``b / scalings``. Raises ZeroRowError for any row with norm below
    ZERO_ROW_TOL.
    """
    a = as_matrix(a)
    norms, _ = row_norms(a)
    bad = np.nonzero(norms < ZERO_ROW_TOL)[0]
    if bad.size:
        raise ZeroRowError(index=int(bad[0]), norm=float(norms[bad[0]]))
    return a / norms[:, None], norms


def normalized_residuals(
    a: np.ndarray,
    b: np.ndarray,
    x: np.ndarray,
    norms: np.ndarray | None = None,
) -> np.ndarray:
    """Per-row distances |<x, a_j> - b_j| / ||a_j|| from x to each hyperplane.

    ``norms`` may be passed to reuse precomputed row norms. Raises
    DimensionMismatchError for incompatible shapes and ZeroRowError if a row
    norm is below ZERO_ROW_TOL.
    """
    a = as_matrix(a)
    m, n = a.shape
    b = as_vector(b, m)
    x = as_vector(x, n)
    if norms is None:
        norms, _ = row_norms(a)
    bad = np.nonzero(norms < ZERO_ROW_TOL)[0]
    if bad.size:
        raise ZeroRowError(index=int(bad[0]), norm=float(norms[bad[0]]))
    return np.abs(a @ x - b) / norms


def project_onto_row(x: np.ndarray, row: RowView, b_i: float) -> np.ndarray:
    """Orthogonal projection of x onto the hyperplane <a_i, y> = b_i.

    Returns x + ((b_i - <x, a_i>) / ||a_i||^2) a_i; the displacement is
    parallel to a_i.
    """
    if row.norm < ZERO_ROW_TOL:
        raise ZeroRowError(index=row.index, norm=row.norm)
    x = as_vector(x, row.values.shape[0])
    coeff = (float(b_i) - float(x @ row.values)) / (row.norm * row.norm)
    return x + coeff * row.values


def extreme_singular_values(a: np.ndarray, tol: float = 1e-10) -> tuple[float, float]:
    """Smallest and largest singular values of a dense matrix.

    Computed with LAPACK's divide-and-conquer SVD, falling back to the more
    robust one-sided Jacobi-free 'gesvd' driver if that fails to converge.
    Both meet any requested tolerance down to machine-level relative error;
    ``tol`` is validated for the contract but does not select the method.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(a)
    try:
        s = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError:
        try:
            import scipy.linalg

            s = scipy.linalg.svd(a, compute_uv=False, lapack_driver="gesvd")
        except Exception as exc:  # pragma: no cover - needs a pathological matrix
            raise ConvergenceFailureError(attempts=2, detail=str(exc)) from exc
    return float(s[-1]), float(s[0])
