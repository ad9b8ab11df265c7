"""
Test configuration and shared instance builders.
"""
import os
import sys
from typing import Dict

import numpy as np

# Add the parent directory to the Python path
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from selftest import lasso_desk_instance  # noqa: E402

# Test parameters
TEST_PARAMS: Dict[str, float] = {
    'seed': 0,
    'pair_count': 50,
    'inequality_tol': 1e-10,
    'identity_tol': 1e-10,
    'alignment_tol': 1e-8,
    'lasso_gap': 1e-4,
    'lasso_iters': 500,
}

EXAMPLE_ATOMS = [np.array([s1, s2, 1.0]) for s1 in (1.0, -1.0) for s2 in (1.0, -1.0)]


def rng(offset: int = 0) -> np.random.Generator:
    """Seeded generator for a test."""
    return np.random.default_rng(TEST_PARAMS['seed'] + offset)


def random_orthonormal(gen: np.random.Generator, n: int, k: int) -> np.ndarray:
    Q, _ = np.linalg.qr(gen.standard_normal((n, k)))
    return Q


def random_psd(gen: np.random.Generator, n: int, rank: int = None) -> np.ndarray:
    G = gen.standard_normal((n, rank or n))
    return G @ G.T


def write_csv(path: str, x) -> str:
    """Element CSV in the toolkit's format; returns the path."""
    from formats import write_element
    write_element(path, np.asarray(x, dtype=float))
    return path


__all__ = ['TEST_PARAMS', 'EXAMPLE_ATOMS', 'lasso_desk_instance', 'rng', 'random_orthonormal',
           'random_psd', 'write_csv']
