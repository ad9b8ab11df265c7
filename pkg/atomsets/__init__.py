"""
Atomic sets: gauges, support functions, exposed faces and decompositions.
"""
from .base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind
from .signed_basis import SignedBasis
from .norm_balls import Box, EuclideanBall
from .nuclear_ball import NuclearBall
from .spectrahedron import Spectrahedron, WeightedSpectrahedron
from .subspace import Subspace
from .tv_atoms import TVAtoms
from .group_norm import GroupNorm
from .finite_atoms import FiniteAtoms
from .transformed import Scaled, Transformed
from .sum_set import SumSet, sum_gauge_numeric
from .union_set import UnionSet
from .registry import VariantRegistry

for _variant in (SignedBasis, Box, EuclideanBall, NuclearBall, Spectrahedron,
                 WeightedSpectrahedron, Subspace, TVAtoms, GroupNorm, FiniteAtoms,
                 Scaled, Transformed, SumSet, UnionSet):
    VariantRegistry.register(_variant)

__all__ = [
    'Atom', 'AtomicDecomposition', 'AtomicSet', 'ExposedFace', 'TagKind',
    'SignedBasis', 'Box', 'EuclideanBall', 'NuclearBall', 'Spectrahedron',
    'WeightedSpectrahedron', 'Subspace', 'TVAtoms', 'GroupNorm', 'FiniteAtoms',
    'Scaled', 'Transformed', 'SumSet', 'UnionSet', 'sum_gauge_numeric',
    'VariantRegistry',
]
