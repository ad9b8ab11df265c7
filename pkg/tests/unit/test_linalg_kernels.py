"""
Unit tests for the linear-algebra kernels.
"""
import unittest

import numpy as np

from tests.oracles import jacobi_eigh, jacobi_svd
from tests.test_config import random_orthonormal, rng

from errors import NotSymmetricError, ShapeMismatchError, UsageError
from linalg_kernels import (LinearMap, dct_apply, dct_matrix, gen_eig_max, gen_eig_topk,
                            project_capped_simplex, project_l1_ball, project_simplex,
                            project_trace_capped_psd, sym_eig_topk, top_singular_triples)


class TestSingularTriples(unittest.TestCase):
    """Leading singular triples on the dense and Lanczos paths."""

    def test_dense_path_matches_jacobi(self):
        """Small matrices agree with the one-sided Jacobi oracle."""
        A = rng(1).standard_normal((7, 5))
        _, s, _ = jacobi_svd(A)
        triples = top_singular_triples(A, k=3)
        for t, ref in zip(triples, s[:3]):
            self.assertAlmostEqual(t.sigma, ref, delta=1e-10 * s[0])

    def test_lanczos_path(self):
        """Operators above the dense cutoff go through Lanczos and still match."""
        gen = rng(2)
        U = random_orthonormal(gen, 80, 60)
        V = random_orthonormal(gen, 60, 60)
        s = np.linspace(10.0, 0.1, 60)
        A = (U * s) @ V.T
        triples = top_singular_triples(A, k=3, tol=1e-10)
        for t, ref in zip(triples, s[:3]):
            self.assertAlmostEqual(t.sigma, ref, delta=1e-7 * s[0])
            self.assertLess(np.linalg.norm(A @ t.v - t.sigma * t.u), 1e-6 * s[0])

    def test_lanczos_wide_and_tall(self):
        """Wide operators keep the last beta; every triple matches a dense SVD."""
        A = rng(3).standard_normal((40, 200))
        s = np.linalg.svd(A, compute_uv=False)
        for M in (A, A.T):
            for k in (3, 40):
                triples = top_singular_triples(M, k=k)
                for t, ref in zip(triples, s[:k]):
                    self.assertAlmostEqual(t.sigma, ref, delta=1e-8 * s[0])
                    self.assertLess(np.linalg.norm(M @ t.v - t.sigma * t.u), 1e-8 * s[0])
                    self.assertLess(np.linalg.norm(M.T @ t.u - t.sigma * t.v), 1e-8 * s[0])

    def test_k_out_of_range(self):
        """k must lie between 1 and min(m, n)."""
        with self.assertRaises(UsageError):
            top_singular_triples(np.eye(3), k=4)
        with self.assertRaises(UsageError):
            top_singular_triples(np.eye(3), k=0)


class TestEigenpairs(unittest.TestCase):
    """Symmetric and generalized eigenpairs."""

    def test_sym_eig_matches_jacobi(self):
        """Top eigenvalues agree with cyclic Jacobi."""
        G = rng(3).standard_normal((6, 6))
        S = 0.5 * (G + G.T)
        ref, _ = jacobi_eigh(S)
        vals, vecs = sym_eig_topk(S, k=2)
        np.testing.assert_allclose(vals, ref[:2], atol=1e-10)
        np.testing.assert_allclose(S @ vecs, vecs * vals, atol=1e-9)

    def test_asymmetric_rejected(self):
        """A visibly asymmetric matrix is rejected."""
        S = np.array([[1.0, 2.0], [0.0, 1.0]])
        with self.assertRaises(NotSymmetricError):
            sym_eig_topk(S)

    def test_generalized_normalization(self):
        """Generalized eigenvectors satisfy p^T Lambda p = 1."""
        gen = rng(4)
        V = random_orthonormal(gen, 5, 3)
        lam = np.array([0.5, 1.0, 2.0])
        G = gen.standard_normal((5, 5))
        Z = G + G.T
        vals, P = gen_eig_topk(Z, V, lam, k=2)
        for i in range(2):
            p = P[:, i]
            self.assertAlmostEqual(float(p @ (lam * p)), 1.0, places=10)
        top, p = gen_eig_max(Z, V, lam)
        self.assertAlmostEqual(top, vals[0], places=10)
        self.assertAlmostEqual(float((V @ p) @ Z @ (V @ p)), top, places=8)


class TestTransformsAndProjections(unittest.TestCase):
    """DCT, linear maps and simplex-type projections."""

    def test_dct_orthonormal(self):
        """The DCT matrix is orthogonal and matches the fast transform."""
        D = dct_matrix(8)
        np.testing.assert_allclose(D @ D.T, np.eye(8), atol=1e-12)
        x = rng(5).standard_normal(8)
        np.testing.assert_allclose(D @ x, dct_apply(x), atol=1e-12)
        np.testing.assert_allclose(dct_apply(dct_apply(x), "inverse"), x, atol=1e-12)
        with self.assertRaises(UsageError):
            dct_apply(x, "sideways")

    def test_linear_map_adjoint(self):
        """<M x, y> == <x, M^* y> and shape checks fire."""
        gen = rng(6)
        M = LinearMap.dct((4, 4))
        x, y = gen.standard_normal((4, 4)), gen.standard_normal((4, 4))
        self.assertAlmostEqual(float(np.sum(M.apply(x) * y)), float(np.sum(x * M.adjoint_apply(y))), places=12)
        np.testing.assert_allclose(M.inverse_apply(M.apply(x)), x, atol=1e-12)
        with self.assertRaises(ShapeMismatchError):
            M.apply(np.zeros(3))

    def test_simplex_projections(self):
        """Projections land on the simplex, the capped simplex and the 1-ball."""
        v = np.array([0.9, 0.8, -0.3, 0.1])
        w = project_simplex(v, 1.0)
        self.assertAlmostEqual(w.sum(), 1.0, places=12)
        self.assertTrue(np.all(w >= 0))
        np.testing.assert_allclose(project_capped_simplex(np.array([0.2, -1.0, 0.3])), [0.2, 0.0, 0.3])
        x = np.array([[3.0, -1.0], [0.5, 0.0]])
        self.assertAlmostEqual(np.abs(project_l1_ball(x, 2.0)).sum(), 2.0, places=12)

    def test_trace_capped_psd(self):
        """Projection onto PSD matrices with trace at most tau."""
        S = np.diag([3.0, 1.0, -2.0])
        P = project_trace_capped_psd(S, 2.0)
        np.testing.assert_allclose(P, np.diag([2.0, 0.0, 0.0]), atol=1e-12)
        small = np.diag([0.5, 0.25, -1.0])
        np.testing.assert_allclose(project_trace_capped_psd(small, 2.0), np.diag([0.5, 0.25, 0.0]), atol=1e-12)


if __name__ == '__main__':
    unittest.main()
