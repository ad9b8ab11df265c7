"""
Signed canonical basis: the atoms +-e_i, inducing the elementwise 1-norm.
"""
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from atomsets.base import (Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind,
                           unit_basis)
from config import DECOMPOSE_TOL, FACE_TOL
from linalg_kernels import project_l1_ball

_MAX_LISTED = 64


def _as_shape(shape) -> tuple:
    if isinstance(shape, (int, np.integer)):
        return (int(shape),)
    return tuple(shape)


class SignedBasis(AtomicSet):
    """{+-e_i}: gauge is the 1-norm, support the max-norm."""

    variant = "SignedBasis"
    has_projector = True
    origin_interior = True

    def __init__(self, shape):
        super().__init__(_as_shape(shape))

    def atom(self, index: int, sign: int) -> Atom:
        return Atom(sign * unit_basis(self.shape, index), TagKind.SIGNED_BASIS, index=index, sign=sign)

    @property
    def finite_atoms(self) -> Optional[List[Atom]]:
        if self.dim > _MAX_LISTED:
            return None
        return [self.atom(i, s) for i in range(self.dim) for s in (1, -1)]

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        return float(np.abs(x).sum())

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return float(np.abs(z).max()) if z.size else 0.0

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        flat = z.ravel()
        mags = np.abs(flat)
        sup = float(mags.max()) if flat.size else 0.0
        atoms: List[Atom] = []
        if sup == 0.0:
            for i in range(self.dim):
                for s in (1, -1):
                    if len(atoms) < k_max:
                        atoms.append(self.atom(i, s))
        else:
            for i in np.flatnonzero(mags >= sup - tol * sup)[:k_max]:
                atoms.append(self.atom(int(i), 1 if flat[i] > 0 else -1))
        return ExposedFace(sup, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        flat = x.ravel()
        scale = float(np.abs(flat).max()) if flat.size else 0.0
        terms = []
        if scale > 0:
            for i in np.flatnonzero(np.abs(flat) > tol * scale):
                terms.append((float(abs(flat[i])), self.atom(int(i), 1 if flat[i] > 0 else -1)))
        return AtomicDecomposition(terms, None, float(sum(c for c, _ in terms)))

    def project(self, y: np.ndarray) -> np.ndarray:
        return project_l1_ball(self.check(y, "y"), 1.0)

    def params(self) -> Dict[str, Any]:
        return {"shape": list(self.shape)}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'SignedBasis':
        return cls(params["shape"])
