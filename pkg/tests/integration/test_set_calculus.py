"""
Integration tests for sums and unions of atomic sets.
"""
import unittest

import numpy as np

from tests.oracles.grid import grid_sum_gauge
from tests.test_config import rng

from alignment import gauge_bruteforce
from atomsets import EuclideanBall, FiniteAtoms, Scaled, SignedBasis, Subspace
from errors import ShapeMismatchError, UsageError
from set_calculus import split_alignment, sum_descriptor, sum_gauge_numeric, union_descriptor


def one_norm(w):
    return float(np.abs(w).sum())


def two_norm(w):
    return float(np.linalg.norm(w))


class TestSum(unittest.TestCase):
    """Minkowski sum: supports add, gauges convolve."""

    def setUp(self):
        """1-ball plus 2-ball in the plane."""
        self.pair = sum_descriptor([SignedBasis(2), EuclideanBall(2)])

    def test_support_adds(self):
        """sigma of the sum is the sum of the sigmas."""
        gen = rng(70)
        for _ in range(100):
            z = gen.standard_normal(2)
            expected = np.abs(z).max() + np.linalg.norm(z)
            self.assertLessEqual(abs(self.pair.support(z) - expected), 1e-12 * (1.0 + expected))

    def test_numeric_gauge_matches_grid(self):
        """Bisection value agrees with a refined grid search over splits."""
        gen = rng(71)
        points = [np.array([1.0, 1.0])] + [gen.standard_normal(2) for _ in range(19)]
        for x in points:
            value, split = sum_gauge_numeric(self.pair, x)
            expected = grid_sum_gauge(one_norm, two_norm, x)
            self.assertLessEqual(abs(value - expected), 1e-4, f"x={x}")
            np.testing.assert_allclose(split[0] + split[1], x, atol=1e-12)

    def test_split_inherits_alignment(self):
        """Pieces of an optimal split are aligned with z in their own parts."""
        gen = rng(72)
        for _ in range(5):
            z = gen.standard_normal(2)
            k = int(np.argmax(np.abs(z)))
            a1 = np.zeros(2)
            a1[k] = np.sign(z[k])
            a2 = z / np.linalg.norm(z)
            x = a1 + a2
            value, split = sum_gauge_numeric(self.pair, x)
            self.assertAlmostEqual(value, 1.0, delta=1e-5)
            sigma = self.pair.support(z)
            for residual in split_alignment(self.pair, split, z):
                self.assertLessEqual(residual, 1e-4 * sigma)

    def test_exact_lp_path(self):
        """Two copies of the 1-ball: gauge of (2, 0) is 1 and decompose rebuilds x."""
        double = sum_descriptor([SignedBasis(2), SignedBasis(2)])
        self.assertTrue(double.gauge_exact)
        x = np.array([2.0, 0.0])
        self.assertAlmostEqual(double.gauge(x), 1.0)
        decomp = double.decompose(x)
        np.testing.assert_allclose(decomp.synthesize(), x, atol=1e-8)
        self.assertAlmostEqual(decomp.coefficient_sum(), 1.0, places=8)

    def test_face_of_sum(self):
        """Exposed atoms of the sum are sums of part atoms."""
        z = np.array([2.0, 1.0])
        face = self.pair.expose(z, 4)
        self.assertAlmostEqual(face.support_value, 2.0 + np.sqrt(5.0))
        for atom in face.atoms:
            self.assertAlmostEqual(float(np.dot(atom.element, z)), face.support_value, places=9)

    def test_usage(self):
        """Sums need two parts of one shape; splits need one piece per part."""
        with self.assertRaises(UsageError):
            sum_descriptor([SignedBasis(2)])
        with self.assertRaises(ShapeMismatchError):
            sum_descriptor([SignedBasis(2), SignedBasis(3)])
        with self.assertRaises(ShapeMismatchError):
            split_alignment(self.pair, [np.zeros(2)], np.ones(2))


class TestUnion(unittest.TestCase):
    """Union: supports take the max, gauges infimal-convolve."""

    def test_support_is_max(self):
        """sigma of the union is the largest part support."""
        union = union_descriptor([SignedBasis(2), EuclideanBall(2)])
        z = np.array([3.0, 4.0])
        self.assertAlmostEqual(union.support(z), 5.0)

    def test_numeric_gauge(self):
        """1-ball with 2-ball: the cheaper 2-norm wins."""
        union = union_descriptor([SignedBasis(2), EuclideanBall(2)])
        self.assertAlmostEqual(union.gauge(np.array([1.0, 1.0])), np.sqrt(2.0), places=9)

    def test_finite_union_lp(self):
        """Adding the atom (1, 1) makes its gauge 1."""
        union = union_descriptor([SignedBasis(2), FiniteAtoms([np.array([1.0, 1.0])])])
        self.assertTrue(union.gauge_exact)
        self.assertAlmostEqual(union.gauge(np.array([1.0, 1.0])), 1.0)
        self.assertAlmostEqual(union.gauge(np.array([1.0, 0.0])), 1.0)

    def test_split_matches_bruteforce(self):
        """Column generation on finite unions agrees with subset enumeration."""
        gen = rng(73)
        for _ in range(10):
            head = [gen.standard_normal(3) for _ in range(3)]
            tail = [gen.standard_normal(3) for _ in range(3)]
            union = union_descriptor([FiniteAtoms(head), FiniteAtoms(tail)])
            x = sum(c * a for c, a in zip(gen.uniform(0.1, 1.0, 6), head + tail))
            expected = gauge_bruteforce(head + tail, x)
            value, split = union.split(x)
            self.assertAlmostEqual(value, expected, delta=1e-6 * (1.0 + expected))
            self.assertAlmostEqual(union.gauge(x), expected, delta=1e-6 * (1.0 + expected))
            np.testing.assert_allclose(split[0] + split[1], x, atol=1e-9)

    def test_non_finite_parts(self):
        """Balls without atom lists still give the known hull gauges."""
        gen = rng(74)
        union = union_descriptor([SignedBasis(2), EuclideanBall(2)])
        for _ in range(5):
            x = gen.standard_normal(2)
            self.assertAlmostEqual(union.split(x)[0], float(np.linalg.norm(x)), delta=1e-7)
        wide = union_descriptor([Scaled(SignedBasis(2), 2.0), EuclideanBall(2)])
        self.assertAlmostEqual(wide.gauge(np.array([1.0, 1.0])), 1.0, delta=1e-7)

    def test_subspace_part_is_free(self):
        """A subspace part absorbs its own directions at no cost."""
        union = union_descriptor([Subspace(np.array([[1.0], [0.0], [0.0]])), SignedBasis(3)])
        x = np.array([5.0, 1.0, -2.0])
        value, split = union.split(x)
        self.assertAlmostEqual(value, 3.0, delta=1e-7)
        np.testing.assert_allclose(split[0], [5.0, 0.0, 0.0], atol=1e-7)
        np.testing.assert_allclose(split[1], [0.0, 1.0, -2.0], atol=1e-7)
        self.assertAlmostEqual(union.gauge(x), 3.0, delta=1e-7)


if __name__ == '__main__':
    unittest.main()
