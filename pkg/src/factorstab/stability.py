"""Split-sample loading instability.

The instability of a k-dimensional loading-space estimate is measured by
splitting the rows of X in half, extracting the leading-k eigenvector
subspace of each half's sample covariance, and taking the sine of the
largest principal angle between the two subspaces. Averaging over several
random splits gives the instability curve ins(k) for k = 1..kmax: near 0
when k matches the true factor count (both halves see the same signal
subspace) and near 1 when k overshoots (each half pads with noise
directions that are delocalized, hence mutually near-orthogonal).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput
from .linalg import cov_eigs, singular_values
from .rng import spawn_rng, spawn_seed


class SplitPair(NamedTuple):
    """Two disjoint row halves of a data matrix (sizes floor(n/2), n - floor(n/2))."""

    x1: np.ndarray
    x2: np.ndarray
    permutation: np.ndarray
    split_seed: int


@dataclass(frozen=True)
class InstabilityCurve:
    """ins(k) for k = 1..kmax plus the per-split raw sines (n_splits rows)."""

    kmax: int
    n_splits: int
    ins: np.ndarray
    raw: np.ndarray

    def __post_init__(self):
        if self.raw.shape != (self.n_splits, self.kmax):
            raise InvalidInput("raw must have shape (n_splits, kmax)")
        if self.ins.shape != (self.kmax,):
            raise InvalidInput("ins must have one entry per candidate k")
        if np.any(self.ins < 0) or np.any(self.ins > 1):
            raise InvalidInput("instability values must lie in [0, 1]")
        if not np.allclose(self.ins, self.raw.mean(axis=0), atol=1e-12):
            raise InvalidInput("ins must be the per-k mean of raw")


def split_rows(x, split_seed: int) -> SplitPair:
    """Randomly split the rows of x into two disjoint halves.

    The first half gets floor(n/2) rows; a uniform random permutation drawn
    from the stream of ``split_seed`` decides membership.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if n < 4:
        raise InvalidInput(f"need at least 4 rows to split, got {n}")
    perm = spawn_rng(split_seed).permutation(n)
    n1 = n // 2
    return SplitPair(
        x1=x[perm[:n1]], x2=x[perm[n1:]], permutation=perm, split_seed=split_seed
    )


def leading_subspace(x, k: int) -> np.ndarray:
    """Orthonormal basis (p, k) of the leading-k eigenvector subspace of
    the sample covariance ``x.T @ x / n``."""
    x = np.asarray(x, dtype=np.float64)
    n, p = x.shape
    if not 1 <= k <= min(n, p):
        raise InvalidInput(f"k={k} out of range for shape {x.shape}")
    return cov_eigs(x, top=k).vectors


def directed_sin_angle(u, v) -> float:
    """sin of the largest principal angle from subspace u into subspace v.

    This is the max over unit vectors in u of the min over v of the sine of
    the angle between them — directed: if dim(u) > dim(v), some direction of
    u is orthogonal to all of v and the value is exactly 1. Otherwise it
    equals sqrt(1 - s_min^2) with s_min the smallest singular value of
    ``u.T @ v``, computed here as the largest singular value of the residual
    ``u - v @ (v.T @ u)``, which keeps full precision for small angles
    (the cosine route loses half the digits near zero).

    Both arguments must be column-orthonormal bases with the same number of
    rows (the ambient dimension).
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.ndim != 2 or v.ndim != 2:
        raise InvalidInput("subspace bases must be 2-d (p, k) arrays")
    if u.shape[0] != v.shape[0]:
        raise InvalidInput(
            f"ambient dimensions differ: {u.shape[0]} vs {v.shape[0]}"
        )
    if u.shape[1] > v.shape[1]:
        return 1.0
    residual = u - v @ (v.T @ u)
    s_max = singular_values(residual)[0]
    return min(1.0, max(0.0, float(s_max)))


def symmetric_sin_angle(u, v) -> float:
    """max of the two directed angles; one number for unequal-dimension pairs."""
    return max(directed_sin_angle(u, v), directed_sin_angle(v, u))


def ins_curve(x, kmax: int, n_splits: int, seed: int) -> InstabilityCurve:
    """Averaged split-sample instability at every k in 1..kmax.

    For each of ``n_splits`` random splits, the two halves' leading-kmax
    bases are computed once and sliced per k; entry [j, k-1] of ``raw`` is
    the sine for split j at dimension k, and ``ins`` is the column mean.
    Deterministic in ``seed``.
    """
    x = np.asarray(x, dtype=np.float64)
    n, p = x.shape
    if n_splits < 1:
        raise InvalidInput("need at least one split")
    if not 1 <= kmax <= min(n // 2, p):
        raise InvalidInput(
            f"kmax={kmax} out of range: each half must have at least kmax rows "
            f"(n={n}, p={p})"
        )
    raw = np.empty((n_splits, kmax))
    for j in range(n_splits):
        half1, half2, _, _ = split_rows(x, spawn_seed(seed, j))
        basis1 = leading_subspace(half1, kmax)
        basis2 = leading_subspace(half2, kmax)
        for k in range(1, kmax + 1):
            raw[j, k - 1] = directed_sin_angle(basis1[:, :k], basis2[:, :k])
    return InstabilityCurve(
        kmax=kmax, n_splits=n_splits, ins=raw.mean(axis=0), raw=raw
    )
