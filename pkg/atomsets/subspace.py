"""
Linear subspace L = range(Q) as an atomic set.

Every element of L is a recession direction, so the gauge is 0 on L and +inf
off it, and the support is 0 on the orthogonal complement and +inf elsewhere.
"""
from typing import Any, Dict, List, Sequence

import numpy as np

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind
from config import DECOMPOSE_TOL, FACE_TOL, ORTHONORMAL_TOL, SUBSPACE_TOL
from errors import NotInConeError, NotOrthonormalError, ShapeMismatchError, UnboundedSupportError


class Subspace(AtomicSet):
    variant = "Subspace"
    has_projector = True

    def __init__(self, Q: np.ndarray):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2:
            raise ShapeMismatchError("subspace basis must be a 2-D array")
        if not np.allclose(Q.T @ Q, np.eye(Q.shape[1]), atol=ORTHONORMAL_TOL):
            raise NotOrthonormalError("subspace basis must have orthonormal columns")
        super().__init__((Q.shape[0],))
        self.Q = Q

    def _off(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(x - self.Q @ (self.Q.T @ x)))

    def _inside(self, x: np.ndarray) -> bool:
        return self._off(x) <= SUBSPACE_TOL * max(float(np.linalg.norm(x)), 1e-300)

    def _orthogonal(self, z: np.ndarray) -> bool:
        return float(np.linalg.norm(self.Q.T @ z)) <= SUBSPACE_TOL * max(float(np.linalg.norm(z)), 1e-300)

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        return 0.0 if self._inside(x) else np.inf

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return 0.0 if self._orthogonal(z) else np.inf

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        if not self._orthogonal(z):
            raise UnboundedSupportError("z is not orthogonal to the subspace")
        atoms = [Atom(self.Q[:, j].copy(), TagKind.SUBSPACE, index=j)
                 for j in range(min(k_max, self.Q.shape[1]))]
        return ExposedFace(0.0, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        if not self._inside(x):
            raise NotInConeError("element lies outside the subspace")
        recession = (1.0, Atom(x.copy(), TagKind.SUBSPACE)) if np.any(x) else None
        return AtomicDecomposition([], recession, 0.0)

    def project(self, y: np.ndarray) -> np.ndarray:
        y = self.check(y, "y")
        return self.Q @ (self.Q.T @ y)

    def lineality(self) -> List[np.ndarray]:
        return [self.Q[:, j].copy() for j in range(self.Q.shape[1])]

    def params(self) -> Dict[str, Any]:
        return {"Q": self.Q.tolist()}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'Subspace':
        return cls(np.asarray(params["Q"], dtype=float))
