import numpy as np
import pytest

from factorstab.errors import InvalidInput, RankDeficient
from factorstab.linalg import (
    cov_eigs,
    cov_eigs_gram,
    singular_values,
    sum_sq_eigenvalues,
    sym_eig_desc,
)
from factorstab.stability import directed_sin_angle


def random_symmetric(d, rng):
    a = rng.standard_normal((d, d))
    return (a + a.T) / 2


class TestSymEig:
    def test_identity(self):
        es = sym_eig_desc(np.eye(3))
        assert np.allclose(es.values, [1.0, 1.0, 1.0])
        assert np.allclose(es.vectors.T @ es.vectors, np.eye(3), atol=1e-12)

    def test_diagonal_sign_fixed(self):
        es = sym_eig_desc(np.diag([4.0, 1.0]))
        assert np.allclose(es.values, [4.0, 1.0])
        assert np.allclose(es.vectors, np.eye(2))  # e1, e2 with positive signs

    def test_reconstruction(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = random_symmetric(8, rng)
            es = sym_eig_desc(m)
            recon = es.vectors @ np.diag(es.values) @ es.vectors.T
            assert np.linalg.norm(recon - m) <= 1e-8 * np.linalg.norm(m)

    def test_descending_order(self):
        rng = np.random.default_rng(1)
        es = sym_eig_desc(random_symmetric(12, rng))
        assert np.all(np.diff(es.values) <= 0)

    def test_top_subset_matches_full(self):
        rng = np.random.default_rng(2)
        m = random_symmetric(10, rng)
        full = sym_eig_desc(m)
        part = sym_eig_desc(m, top=3)
        assert np.allclose(part.values, full.values[:3], atol=1e-10)
        for j in range(3):
            assert abs(abs(part.vectors[:, j] @ full.vectors[:, j]) - 1) < 1e-8

    def test_sign_convention_bitwise_repeatable(self):
        rng = np.random.default_rng(3)
        m = random_symmetric(7, rng)
        a = sym_eig_desc(m)
        b = sym_eig_desc(m)
        assert np.array_equal(a.vectors, b.vectors)
        # largest-magnitude entry of each vector is positive
        idx = np.argmax(np.abs(a.vectors), axis=0)
        assert np.all(a.vectors[idx, np.arange(7)] > 0)

    def test_rejects_asymmetric_and_nonfinite(self):
        with pytest.raises(InvalidInput):
            sym_eig_desc(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(InvalidInput):
            sym_eig_desc(np.array([[np.nan, 0.0], [0.0, 1.0]]))
        with pytest.raises(InvalidInput):
            sym_eig_desc(np.eye(3), top=4)


class TestGramRoute:
    def test_identity_two_by_two(self):
        es = cov_eigs_gram(np.eye(2), top=2)
        assert np.allclose(es.values, [0.5, 0.5])

    def test_matches_direct_route(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            n, p = rng.integers(10, 61, size=2)
            x = rng.standard_normal((n, p))
            top = min(4, n, p)
            gram = cov_eigs_gram(x, top=top)
            direct = sym_eig_desc((x.T @ x) / n, top=top)
            assert np.allclose(gram.values, direct.values, atol=1e-8)
            assert directed_sin_angle(gram.vectors, direct.vectors) < 1e-6

    def test_rank_one(self):
        rng = np.random.default_rng(5)
        u = rng.standard_normal(6)
        w = rng.standard_normal(9)
        x = np.outer(u, w)
        es = cov_eigs_gram(x, top=1)
        n = 6
        expected = (u @ u) * (w @ w) / n
        assert np.isclose(es.values[0], expected, rtol=1e-10)
        assert abs(abs(es.vectors[:, 0] @ (w / np.linalg.norm(w))) - 1) < 1e-10

    def test_rank_deficient_raises(self):
        rng = np.random.default_rng(6)
        u = rng.standard_normal(8)
        w = rng.standard_normal(12)
        x = np.outer(u, w)  # rank one, second eigenvalue is zero
        with pytest.raises(RankDeficient):
            cov_eigs_gram(x, top=2)

    def test_dispatcher_falls_back_on_rank_deficiency(self):
        rng = np.random.default_rng(7)
        scores = rng.uniform(-0.5, 0.5, (10, 2))
        loadings = rng.standard_normal((30, 2))
        x = scores @ loadings.T  # p > 2n and rank 2
        es = cov_eigs(x, top=4)  # gram route would fail; direct route succeeds
        assert len(es.values) == 4
        assert es.values[2] == pytest.approx(0.0, abs=1e-10)

    def test_covariance_eigenvalues_nonnegative(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            n, p = rng.integers(5, 40, size=2)
            x = rng.standard_normal((n, p))
            es = cov_eigs(x, top=min(n, p))
            assert np.all(es.values >= -1e-8)


class TestSingularValues:
    def test_identity(self):
        assert np.allclose(singular_values(np.eye(2)), [1.0, 1.0])

    def test_nilpotent(self):
        s = singular_values(np.array([[0.0, 1.0], [0.0, 0.0]]))
        assert np.allclose(s, [1.0, 0.0])

    def test_frobenius_identity(self):
        rng = np.random.default_rng(9)
        a = rng.standard_normal((3, 5))
        s = singular_values(a)
        assert len(s) == 3
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)
        assert np.isclose(np.sum(s**2), np.sum(a**2), atol=1e-10)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInput):
            singular_values(np.array([[1.0, np.inf]]))


class TestSumSqEigenvalues:
    def test_identity(self):
        # covariance of I_2 is I/2, eigenvalues (0.5, 0.5)
        assert np.isclose(sum_sq_eigenvalues(np.eye(2)), 0.5)

    def test_zero_matrix(self):
        assert sum_sq_eigenvalues(np.zeros((4, 3))) == 0.0

    def test_matches_full_decomposition(self):
        rng = np.random.default_rng(10)
        for n, p in [(12, 7), (7, 12), (20, 20)]:
            x = rng.standard_normal((n, p))
            total = sum_sq_eigenvalues(x)
            values = sym_eig_desc((x.T @ x) / n).values
            assert np.isclose(total, np.sum(values**2), rtol=1e-8)

    def test_tail_sums_match_brute_force(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal((25, 15))
        total = sum_sq_eigenvalues(x)
        values = sym_eig_desc((x.T @ x) / 25).values
        for k in range(0, 10):
            tail_fast = total - np.sum(values[:k] ** 2)
            tail_brute = np.sum(values[k:] ** 2)
            assert np.isclose(tail_fast, tail_brute, rtol=1e-8)
