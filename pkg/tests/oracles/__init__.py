"""
Independent reference implementations used to cross-check the toolkit.

Nothing here calls LAPACK-backed decompositions, so agreement with the
library is a genuine second opinion.
"""
from .jacobi import jacobi_eigh, jacobi_svd
from .grid import grid_sum_gauge

__all__ = ['jacobi_eigh', 'jacobi_svd', 'grid_sum_gauge']
