"""Dense symmetric eigendecomposition and related kernels.

Everything downstream (subspace extraction, selection criteria) consumes the
routines here. Two routes exist for the leading eigenpairs of a sample
covariance ``X.T @ X / n``:

* direct decomposition of the p-by-p covariance, and
* the Gram route through the n-by-n matrix ``X @ X.T / n``, whose nonzero
  eigenvalues coincide and whose eigenvectors back-transform through ``X.T``.

``cov_eigs`` picks between them on cost (the Gram route wins when p > 2n) and
is what callers should normally use.

Eigenvector signs are fixed so the largest-magnitude entry of each vector is
positive; subspace quantities are sign-invariant but determinism requires a
convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidInput, NumericalFailure, RankDeficient

# Sample covariances are PSD up to round-off; eigenvalues in (-PSD_TOL, 0)
# are clamped to zero before they reach logs or square roots.
PSD_TOL = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    """Leading eigenpairs of a symmetric matrix, eigenvalues descending.

    ``vectors`` is column-orthonormal with one column per eigenvalue.
    ``source_dim`` records the shape of the matrix the system came from
    (``(n, p)`` for a covariance of an n-by-p data matrix).
    """

    values: np.ndarray
    vectors: np.ndarray
    source_dim: tuple[int, int]

    def __post_init__(self):
        if self.values.ndim != 1 or self.vectors.ndim != 2:
            raise InvalidInput("EigenSystem expects 1-d values and 2-d vectors")
        if self.vectors.shape[1] != self.values.shape[0]:
            raise InvalidInput("one eigenvector column per eigenvalue required")
        if np.any(np.diff(self.values) > 0):
            raise InvalidInput("eigenvalues must be sorted in descending order")


def _as_float_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise InvalidInput(f"{name} must be a 2-d array, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return a


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig_desc(m, top: int | None = None) -> EigenSystem:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    m : (d, d) array_like
        Symmetric matrix (checked to 1e-10 relative to its magnitude).
    top : int, optional
        Return only the `top` leading eigenpairs. Default: all.

    Raises
    ------
    InvalidInput
        Non-finite entries, asymmetry, or ``top`` out of range.
    NumericalFailure
        The underlying LAPACK routine did not converge.
    """
    m = _as_float_matrix(m, "matrix")
    d = m.shape[0]
    if m.shape[1] != d or d < 1:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))))
    if float(np.max(np.abs(m - m.T))) > 1e-10 * scale:
        raise InvalidInput("matrix is not symmetric within tolerance")
    if top is not None and not 1 <= top <= d:
        raise InvalidInput(f"top={top} out of range for dimension {d}")

    try:
        if top is None or top == d:
            values, vectors = scipy.linalg.eigh(m)
        else:
            values, vectors = scipy.linalg.eigh(m, subset_by_index=(d - top, d - 1))
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise NumericalFailure(f"symmetric eigensolver failed: {exc}") from exc

    order = slice(None, None, -1)  # eigh returns ascending
    return EigenSystem(
        values=np.ascontiguousarray(values[order]),
        vectors=fix_signs(np.ascontiguousarray(vectors[:, order])),
        source_dim=(d, d),
    )


def cov_eigs_gram(x, top: int) -> EigenSystem:
    """Leading eigenpairs of ``x.T @ x / n`` via the n-by-n Gram matrix.

    Intended for p > n, where it avoids forming the p-by-p covariance.
    Eigenvector j is recovered as ``x.T @ u_j / sqrt(n * lam_j)``, which is
    only possible for directions with nonzero eigenvalue.

    Raises
    ------
    RankDeficient
        If one of the requested eigenvalues is numerically zero.
    """
    x = _as_float_matrix(x, "data matrix")
    n, p = x.shape
    if not 1 <= top <= min(n, p):
        raise InvalidInput(f"top={top} out of range for shape {x.shape}")

    gram = x @ x.T / n
    gram = (gram + gram.T) / 2
    sub = sym_eig_desc(gram, top=top)
    values = sub.values.copy()
    if np.any(values <= 1e-12):
        raise RankDeficient(
            "cannot back-transform eigenvectors for numerically zero eigenvalues "
            f"(smallest requested: {values.min():.3e})"
        )
    vectors = x.T @ sub.vectors / np.sqrt(n * values)
    vectors /= np.linalg.norm(vectors, axis=0)
    values[(values > -PSD_TOL) & (values < 0)] = 0.0
    return EigenSystem(values=values, vectors=fix_signs(vectors), source_dim=(n, p))


def cov_eigs(x, top: int) -> EigenSystem:
    """Leading eigenpairs of the sample covariance ``x.T @ x / n``.

    Routes through the Gram matrix when p > 2n (O(n^2 p) instead of O(p^3))
    and falls back to the direct p-by-p decomposition if the Gram route hits
    a numerically null direction (possible only for rank-deficient data).
    """
    x = _as_float_matrix(x, "data matrix")
    n, p = x.shape
    if not 1 <= top <= min(n, p):
        raise InvalidInput(f"top={top} out of range for shape {x.shape}")
    if p > 2 * n:
        try:
            return cov_eigs_gram(x, top)
        except RankDeficient:
            pass
    cov = x.T @ x / n
    cov = (cov + cov.T) / 2
    sub = sym_eig_desc(cov, top=top)
    values = sub.values.copy()
    values[(values > -PSD_TOL) & (values < 0)] = 0.0
    return EigenSystem(values=values, vectors=sub.vectors, source_dim=(n, p))


def singular_values(a) -> np.ndarray:
    """Singular values of a rectangular matrix, descending."""
    a = _as_float_matrix(a, "matrix")
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(f"SVD failed: {exc}") from exc


def sum_sq_eigenvalues(x) -> float:
    """Sum of squared eigenvalues of ``x.T @ x / n``, without decomposing.

    Equals the squared Frobenius norm of the covariance; computed from the
    smaller of ``x.T @ x`` and ``x @ x.T`` (their Frobenius norms agree).
    Selection criteria subtract leading eigenvalue squares from this total
    to get tail sums.
    """
    x = _as_float_matrix(x, "data matrix")
    n, p = x.shape
    s = x.T @ x if p <= n else x @ x.T
    return float(np.sum(s * s)) / (n * n)
