"""Dense linear-algebra kernels shared by all estimator modules.

Every rank decision in the package flows through the same relative
singular-value cutoff, so pseudoinverses, range projectors and
observability ranks agree with each other about what counts as zero.
``rank_tol`` is relative: singular values at or below
``rank_tol * sigma_max`` are treated as exact zeros, and ``rank_tol = 0``
selects the conventional default ``eps * max(rows, cols)``.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import AsymmetryWarning, DimensionMismatch, InvalidMatrix

__all__ = [
    "EPS",
    "as_matrix",
    "as_vector",
    "pinv",
    "sym_pinv",
    "sym_sqrt",
    "numerical_rank",
    "sym_rank",
    "range_projector",
    "symmetrize",
    "qform",
]

EPS = float(np.finfo(np.float64).eps)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D float array.

    Raises
    ------
    InvalidMatrix
        If ``a`` is not interpretable as a 2-D numeric array with finite
        entries.
    """
    try:
        m = np.asarray(a, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidMatrix(f"{name}: not interpretable as a numeric array") from exc
    if m.ndim != 2:
        raise InvalidMatrix(f"{name}: expected a 2-D array, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise InvalidMatrix(f"{name}: non-finite entries")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    """Coerce ``a`` to a finite 1-D float array (scalars become length 1)."""
    try:
        v = np.atleast_1d(np.asarray(a, dtype=float))
    except (TypeError, ValueError) as exc:
        raise InvalidMatrix(f"{name}: not interpretable as a numeric array") from exc
    if v.ndim != 1:
        raise InvalidMatrix(f"{name}: expected a 1-D array, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise InvalidMatrix(f"{name}: non-finite entries")
    return v


def _cutoff(s: np.ndarray, shape, rank_tol: float) -> float:
    # Absolute cutoff below which singular values are treated as zero.
    if rank_tol < 0:
        raise InvalidMatrix("rank_tol must be nonnegative")
    rel = rank_tol if rank_tol > 0 else EPS * max(shape)
    return rel * (float(s[0]) if s.size else 0.0)


def pinv(a, rank_tol: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse via full SVD with a relative cutoff.

    Parameters
    ----------
    a : array_like
        Matrix to invert, any shape.
    rank_tol : float
        Relative singular-value cutoff; 0 selects the module default.

    Returns
    -------
    numpy.ndarray
        The pseudoinverse, with singular values at or below the cutoff
        treated as exact zeros.  A zero matrix comes back as the zero
        matrix of transposed shape.
    """
    m = as_matrix(a)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    cut = _cutoff(s, m.shape, rank_tol)
    r = int(np.count_nonzero(s > cut))
    if r == 0:
        return np.zeros((m.shape[1], m.shape[0]))
    return (vt[:r].T / s[:r]) @ u[:, :r].T


def sym_pinv(a, rank_tol: float = 0.0) -> np.ndarray:
    """Pseudoinverse of a symmetric positive-semidefinite matrix.

    Uses a symmetric eigendecomposition with the shared relative cutoff,
    so the result is symmetric PSD by construction.  Roundoff-scale
    negative eigenvalues are treated as exact zeros; a generic SVD would
    instead invert their magnitudes with mismatched left/right bases,
    which destroys symmetry precisely in the amplified junk directions.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"sym_pinv needs a square matrix, got {m.shape}")
    eigs, vecs = np.linalg.eigh(0.5 * (m + m.T))
    top = float(eigs[-1])
    scale = rank_tol if rank_tol > 0.0 else EPS * max(m.shape)
    keep = eigs > scale * max(top, 0.0)
    if not bool(np.any(keep)):
        return np.zeros_like(m)
    out = (vecs[:, keep] / eigs[keep]) @ vecs[:, keep].T
    return 0.5 * (out + out.T)


def sym_sqrt(a) -> np.ndarray:
    """Symmetric positive-semidefinite square root of a symmetric PSD matrix.

    Roundoff-scale negative eigenvalues are clipped to zero before taking
    the root, so the result is always real and PSD.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"sym_sqrt needs a square matrix, got {m.shape}")
    eigs, vecs = np.linalg.eigh(0.5 * (m + m.T))
    out = (vecs * np.sqrt(np.clip(eigs, 0.0, None))) @ vecs.T
    return 0.5 * (out + out.T)


def numerical_rank(a, rank_tol: float = 0.0) -> int:
    """Number of singular values above the shared relative cutoff."""
    m = as_matrix(a)
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.count_nonzero(s > _cutoff(s, m.shape, rank_tol)))


def sym_rank(a, rank_tol: float = 0.0) -> int:
    """Numerical rank of a square symmetric matrix."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"sym_rank needs a square matrix, got {m.shape}")
    return numerical_rank(m, rank_tol)


def range_projector(a, rank_tol: float = 0.0) -> np.ndarray:
    """Orthogonal projector onto the range of a square symmetric matrix.

    Equals ``pinv(a) @ a`` in exact arithmetic but is assembled from an
    orthonormal singular basis, so the result is symmetric and idempotent
    to roundoff.  A full-rank input yields the exact identity.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"range_projector needs a square matrix, got {m.shape}")
    m = 0.5 * (m + m.T)
    u, s, _ = np.linalg.svd(m)
    r = int(np.count_nonzero(s > _cutoff(s, m.shape, rank_tol)))
    if r == m.shape[0]:
        return np.eye(m.shape[0])
    proj = u[:, :r] @ u[:, :r].T
    return 0.5 * (proj + proj.T)


def symmetrize(a, warn_tol: float = 1e-8) -> np.ndarray:
    """Return ``(a + a.T) / 2``.

    Emits :class:`AsymmetryWarning` when the skew part is large relative
    to the matrix itself, ``||a - a.T|| > warn_tol * max(1, ||a||)``,
    which signals a drifting recursion rather than ordinary roundoff.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"symmetrize needs a square matrix, got {m.shape}")
    skew = float(np.linalg.norm(m - m.T))
    if skew > warn_tol * max(1.0, float(np.linalg.norm(m))):
        warnings.warn(
            f"asymmetry {skew:.3e} above warn threshold", AsymmetryWarning, stacklevel=2
        )
    return 0.5 * (m + m.T)


def qform(m, v) -> float:
    """Quadratic form ``<m v, v>``."""
    vec = np.asarray(v, dtype=float)
    return float(vec @ np.asarray(m, dtype=float) @ vec)
