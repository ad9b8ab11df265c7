"""
Integration tests for the conditional-gradient solvers and certificates.
"""
import os
import tempfile
import unittest

import numpy as np

from tests.test_config import TEST_PARAMS, lasso_desk_instance, random_orthonormal, random_psd, rng

from atomsets import NuclearBall, SignedBasis, TVAtoms
from config import FACE_TOL
from elements import MaskedMatrix
from errors import NotOrthonormalError, UnboundedSupportError, UsageError
from linalg_kernels import LinearMap
from solvers import (check_gauge_duality, check_optimality, dual_cg_least_squares, duality_gap,
                     least_squares_objective, primal_cg, psd_reduced_solve, quadratic_objective,
                     recover_from_certificate, safe_face_tol)
from solvers.recovery import _OpenBlock, _reduced_lipschitz


class TestPrimalCG(unittest.TestCase):
    """Primal conditional gradient on the LASSO desk instance."""

    def setUp(self):
        """Build the seeded instance."""
        self.A, self.b, self.x0, self.tau = lasso_desk_instance(TEST_PARAMS['seed'])
        self.desc = SignedBasis(self.A.shape[1])
        self.obj = least_squares_objective(self.A, self.b)

    def test_converges_with_certificate(self):
        """Exit gap within tolerance and the optimality check passes."""
        x, trace = primal_cg(self.obj, self.desc, self.tau, eps=TEST_PARAMS['lasso_gap'],
                             max_iter=TEST_PARAMS['lasso_iters'])
        self.assertTrue(trace.converged)
        self.assertLessEqual(trace.final_gap, TEST_PARAMS['lasso_gap'])
        self.assertLessEqual(self.desc.gauge(x), self.tau * (1.0 + 1e-12))
        report = check_optimality(self.desc, x, self.obj.grad(x), "gauge_constrained", self.tau, tol=1e-3)
        self.assertTrue(report.passed, report.notes)

    def test_gap_bounds_suboptimality(self):
        """Every recorded gap is at least the objective minus the best value seen."""
        for rule in ("exact", "harmonic"):
            _, trace = primal_cg(self.obj, self.desc, self.tau, eps=1e-10, max_iter=200, step_rule=rule)
            objectives = list(trace.objectives()) + [trace.final_objective]
            best = min(objectives)
            for rec in trace.records:
                self.assertGreaterEqual(rec.gap, rec.objective - best - 1e-10)

    def test_harmonic_steps(self):
        """The harmonic rule takes theta = 2 / (k + 2)."""
        _, trace = primal_cg(self.obj, self.desc, self.tau, eps=1e-12, max_iter=10, step_rule="harmonic")
        for rec in trace.records:
            self.assertAlmostEqual(rec.theta, 2.0 / (rec.k + 2.0))

    def test_exact_linesearch_monotone(self):
        """Exact linesearch never increases the objective."""
        _, trace = primal_cg(self.obj, self.desc, self.tau, eps=1e-12, max_iter=100)
        objectives = list(trace.objectives()) + [trace.final_objective]
        for before, after in zip(objectives, objectives[1:]):
            self.assertLessEqual(after, before + 1e-12 * (1.0 + abs(before)))

    def test_max_iter_returns_best_iterate(self):
        """At the cap the harmonic rule hands back the least objective seen."""
        x, trace = primal_cg(self.obj, self.desc, self.tau, eps=1e-14, max_iter=10, step_rule="harmonic")
        self.assertFalse(trace.converged)
        self.assertAlmostEqual(self.obj.eval(x), trace.final_objective, places=12)
        for rec in trace.records:
            self.assertLessEqual(trace.final_objective, rec.objective)
        self.assertGreaterEqual(trace.final_gap, -1e-12)

    def test_max_iter_warns(self):
        """Stopping on the iteration cap is logged and reported unconverged."""
        with self.assertLogs("atomkit", level="WARNING"):
            _, trace = primal_cg(self.obj, self.desc, self.tau, eps=1e-14, max_iter=3)
        self.assertFalse(trace.converged)
        self.assertEqual(trace.iterations, 3)
        self.assertTrue(np.isfinite(trace.final_gap))

    def test_trace_csv(self):
        """The trace file has a header and one line per iteration."""
        _, trace = primal_cg(self.obj, self.desc, self.tau, eps=1e-12, max_iter=5)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "trace.csv")
            trace.write_csv(path)
            with open(path) as f:
                lines = f.read().splitlines()
        self.assertEqual(lines[0], "k,gap,objective,theta,atom_tag")
        self.assertEqual(len(lines), trace.iterations + 1)

    def test_bad_arguments(self):
        """Nonpositive tau and unknown step rules are usage errors."""
        with self.assertRaises(UsageError):
            primal_cg(self.obj, self.desc, 0.0)
        with self.assertRaises(UsageError):
            primal_cg(self.obj, self.desc, 1.0, step_rule="armijo")

    def test_unbounded_support(self):
        """A gradient outside the polar cone stops the solver."""
        obj = quadratic_objective(np.eye(3), np.array([1.0, 0.0, 0.0]))
        with self.assertRaises(UnboundedSupportError):
            primal_cg(obj, TVAtoms(3), 1.0, x0=np.zeros(3))

    def test_duality_gap(self):
        """alpha * sigma(z) - <x, z> for the 1-norm."""
        desc = SignedBasis(3)
        value = duality_gap(desc, np.array([1.0, 0.0, 0.0]), np.array([1.0, -3.0, 2.0]), 2.0)
        self.assertAlmostEqual(value, 5.0)


class TestDualCG(unittest.TestCase):
    """Dual conditional gradient tracks the primal iterates through R and Q."""

    def test_matches_primal_shadow(self):
        """Gaps agree with primal CG started at the origin."""
        A, b, _, tau = lasso_desk_instance(TEST_PARAMS['seed'])
        desc = SignedBasis(A.shape[1])
        _, primal = primal_cg(least_squares_objective(A, b), desc, tau, eps=1e-12, max_iter=15,
                              x0=np.zeros(A.shape[1]))
        cert, dual = dual_cg_least_squares(A, b, desc, tau, eps=1e-12, max_iter=15)
        count = min(primal.iterations, dual.iterations)
        self.assertGreater(count, 0)
        scale = primal.records[0].gap
        for p, d in zip(primal.records[:count], dual.records[:count]):
            self.assertLessEqual(abs(p.gap - d.gap), 1e-8 * scale)
            self.assertLessEqual(abs(p.objective - d.objective), 1e-8 * scale)
        np.testing.assert_allclose(cert.z_star, A.T @ dual.residual, atol=1e-12)

    def test_fit_and_residual_add_up(self):
        """Q + R = b after every iteration."""
        A, b, _, tau = lasso_desk_instance(TEST_PARAMS['seed'])
        desc = SignedBasis(A.shape[1])
        for k in range(1, 9):
            _, trace = dual_cg_least_squares(A, b, desc, tau, eps=1e-14, max_iter=k)
            np.testing.assert_allclose(trace.image + trace.residual, b, atol=1e-12 * (1.0 + np.abs(b).max()))

    def test_completion_matches_primal_shadow(self):
        """On a masked nuclear-norm instance the stop tests agree with primal CG from the origin."""
        gen = rng(62)
        flat = np.sort(gen.choice(144, size=60, replace=False))
        rows, cols = np.divmod(flat, 12)
        omega = MaskedMatrix((12, 12), rows, cols, np.ones(60))
        X = gen.standard_normal((12, 2)) @ gen.standard_normal((2, 12))
        b = omega.sample(X)
        desc = NuclearBall(12, 12)
        tau = 0.8 * float(np.linalg.svd(X, compute_uv=False).sum())
        A = LinearMap.masked(omega)
        _, primal = primal_cg(least_squares_objective(A, b), desc, tau, eps=1e-12, max_iter=12,
                              x0=np.zeros((12, 12)))
        _, dual = dual_cg_least_squares(A, b, desc, tau, eps=1e-12, max_iter=12,
                                        rank_one_apply=omega.sample_rank_one)
        count = min(primal.iterations, dual.iterations)
        self.assertGreater(count, 0)
        for p, d in zip(primal.records[:count], dual.records[:count]):
            self.assertLessEqual(abs(p.gap - d.gap), 1e-8 * abs(p.gap))
            self.assertLessEqual(abs(p.objective - d.objective), 1e-8 * abs(p.objective))

    def test_masked_rank_one_path(self):
        """Rank-one sampling gives the same run as the dense operator."""
        gen = rng(60)
        flat = np.sort(gen.choice(144, size=72, replace=False))
        rows, cols = np.divmod(flat, 12)
        omega = MaskedMatrix((12, 12), rows, cols, np.ones(72))
        X = np.outer(gen.standard_normal(12), gen.standard_normal(12))
        b = omega.sample(X)
        desc = NuclearBall(12, 12)
        tau = float(np.linalg.svd(X, compute_uv=False).sum())
        A = LinearMap.masked(omega)
        _, fast = dual_cg_least_squares(A, b, desc, tau, eps=1e-12, max_iter=8,
                                        rank_one_apply=omega.sample_rank_one)
        _, slow = dual_cg_least_squares(A, b, desc, tau, eps=1e-12, max_iter=8)
        np.testing.assert_allclose(fast.gaps(), slow.gaps(), rtol=1e-8, atol=1e-10)


class TestRecovery(unittest.TestCase):
    """Second-stage recovery from a dual certificate."""

    def test_safe_face_tol(self):
        """Band is clipped to [FACE_TOL, 1]."""
        self.assertEqual(safe_face_tol(0.0, 1.0), FACE_TOL)
        self.assertEqual(safe_face_tol(1.0, 0.0), 1.0)
        self.assertEqual(safe_face_tol(1.0, np.inf), 1.0)
        self.assertAlmostEqual(safe_face_tol(0.02, 1.0), 0.4)

    def test_lasso_recovery(self):
        """Recovered component lies in the tau-ball and improves on the origin."""
        A, b, _, tau = lasso_desk_instance(TEST_PARAMS['seed'])
        desc = SignedBasis(A.shape[1])
        obj = least_squares_objective(A, b)
        cert, _ = dual_cg_least_squares(A, b, desc, tau, max_iter=200)
        result = recover_from_certificate(obj, cert, [desc], tau)
        self.assertEqual(len(result.components), 1)
        self.assertLessEqual(desc.gauge(result.components[0]), tau * (1.0 + 1e-9))
        self.assertTrue(np.all(result.coefficients[0] >= 0.0))
        self.assertLessEqual(result.objective, obj.eval(np.zeros(A.shape[1])))
        np.testing.assert_allclose(result.certificate, -obj.grad(result.total))
        self.assertGreaterEqual(result.gap, -1e-12)
        for tol in result.face_tols:
            self.assertGreaterEqual(tol, FACE_TOL)
            self.assertLessEqual(tol, 1.0)

    def test_reduced_lipschitz_by_power_iteration(self):
        """Two whole-set blocks under the identity give a reduced Gram with top eigenvalue 2."""
        obj = least_squares_objective(np.eye(6), np.ones(6))
        blocks = [_OpenBlock(SignedBasis(6), None, (6,)), _OpenBlock(SignedBasis(6), None, (6,))]
        self.assertAlmostEqual(_reduced_lipschitz(blocks, obj), 1.05 * 2.0, places=6)

    def test_psd_reduced_full_mask(self):
        """With every entry observed the planted core is recovered."""
        gen = rng(61)
        U = random_orthonormal(gen, 8, 2)
        V = random_orthonormal(gen, 7, 2)
        S0 = random_psd(gen, 2)
        S0 /= np.trace(S0)
        rows, cols = np.divmod(np.arange(56), 7)
        omega = MaskedMatrix((8, 7), rows, cols, np.ones(56))
        b = omega.sample(U @ S0 @ V.T)
        S = psd_reduced_solve(U, V, omega, b, tau=2.0)
        np.testing.assert_allclose(S, S0, atol=1e-8)

    def test_psd_reduced_not_orthonormal(self):
        """Frames must have orthonormal columns."""
        omega = MaskedMatrix((4, 4), np.array([0, 1]), np.array([0, 1]), np.ones(2))
        U = np.ones((4, 1))
        with self.assertRaises(NotOrthonormalError):
            psd_reduced_solve(U, U / 2.0, omega, np.ones(2), 1.0)


class TestCertificates(unittest.TestCase):
    """Alignment-based optimality checks."""

    def test_unconstrained_soft_threshold(self):
        """Soft thresholding solves 1/2 ||x - y||^2 + rho ||x||_1."""
        desc = SignedBasis(3)
        y = np.array([3.0, -0.5, 1.2])
        x = np.array([2.0, 0.0, 0.2])
        report = check_optimality(desc, x, x - y, "unconstrained", 1.0)
        self.assertTrue(report.passed, report.notes)
        self.assertFalse(check_optimality(desc, x, x - y, "unconstrained", 0.5).passed)

    def test_level_constrained_note(self):
        """The level-constrained form carries a note about strict feasibility."""
        desc = SignedBasis(2)
        report = check_optimality(desc, np.array([1.0, 0.0]), np.array([-1.0, 0.0]), "level_constrained")
        self.assertTrue(report.passed)
        self.assertEqual(len(report.notes), 1)

    def test_bad_forms(self):
        """Unknown forms and missing parameters are usage errors."""
        desc = SignedBasis(2)
        x, g = np.array([1.0, 0.0]), np.array([-1.0, 0.0])
        with self.assertRaises(UsageError):
            check_optimality(desc, x, g, "penalized")
        with self.assertRaises(UsageError):
            check_optimality(desc, x, g, "unconstrained")
        with self.assertRaises(UsageError):
            check_optimality(desc, x, g, "gauge_constrained")

    def test_gauge_duality(self):
        """Aligned pair with <x, z> = 1 is optimal; misaligned or infeasible is not."""
        desc = SignedBasis(2)
        x = np.array([1.0, 0.0])
        always = lambda _: True  # noqa: E731
        self.assertTrue(check_gauge_duality(desc, x, np.array([1.0, 0.5]), always, always))
        self.assertFalse(check_gauge_duality(desc, x, np.array([1.0, 2.0]), always, always))
        self.assertFalse(check_gauge_duality(desc, x, np.array([1.0, 0.5]), lambda _: False, always))


if __name__ == '__main__':
    unittest.main()
