"""
Combinators over atomic sets: Minkowski sums and unions.
"""
from typing import List, Sequence

import numpy as np

from alignment import alignment_residual
from atomsets import AtomicSet, SumSet, UnionSet, sum_gauge_numeric
from errors import ShapeMismatchError

__all__ = ['sum_descriptor', 'union_descriptor', 'sum_gauge_numeric', 'split_alignment']


def sum_descriptor(parts: Sequence[AtomicSet]) -> SumSet:
    """Minkowski sum; its gauge is the polar convolution of the part gauges."""
    return SumSet(parts)


def union_descriptor(parts: Sequence[AtomicSet]) -> UnionSet:
    """Union; its gauge is the sum convolution of the part gauges."""
    return UnionSet(parts)


def split_alignment(sum_set: SumSet, split: Sequence[np.ndarray], z: np.ndarray) -> List[float]:
    """Alignment residual of each piece of a split against its own part."""
    parts = sum_set.parts()
    if len(split) != len(parts):
        raise ShapeMismatchError(f"split has {len(split)} pieces for {len(parts)} parts")
    return [alignment_residual(p, xi, z) for p, xi in zip(parts, split)]
