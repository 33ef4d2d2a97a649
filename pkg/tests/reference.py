"""Slow reference implementations used to cross-check the fast paths."""

import numpy as np
from scipy.optimize import minimize


def sin_to_subspace(u_vec, v_basis):
    """Sine of the smallest angle between one unit vector and a subspace."""
    proj = v_basis.T @ u_vec
    cos_sq = min(1.0, float(proj @ proj))
    return np.sqrt(1.0 - cos_sq)


def brute_force_directed_sin(u_basis, v_basis, rng, n_samples=4000):
    """Directed max-min sine by dense sampling plus local refinement.

    Samples unit vectors of the first subspace through random coefficient
    vectors, takes the worst (largest) sine to the second subspace, then
    polishes from the best few starts with a general-purpose optimizer.
    The result is a lower bound that the refinement tightens.
    """
    k = u_basis.shape[1]
    coeffs = rng.standard_normal((n_samples, k))
    coeffs /= np.linalg.norm(coeffs, axis=1, keepdims=True)
    sines = np.array(
        [sin_to_subspace(u_basis @ a, v_basis) for a in coeffs]
    )
    best = float(sines.max())

    def negative_sine(a):
        norm = np.linalg.norm(a)
        if norm == 0:
            return 0.0
        return -sin_to_subspace(u_basis @ (a / norm), v_basis)

    for idx in np.argsort(sines)[-5:]:
        res = minimize(negative_sine, coeffs[idx], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
        best = max(best, float(-res.fun))
    return min(1.0, best)


def random_orthonormal(p, k, rng):
    q, _ = np.linalg.qr(rng.standard_normal((p, k)))
    return q[:, :k]
