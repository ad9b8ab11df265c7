"""
Euclidean ball and box (max-norm ball).
"""
from itertools import product
from typing import Any, Dict, List, Sequence

import numpy as np

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, unit_basis
from atomsets.signed_basis import _as_shape
from config import DECOMPOSE_TOL, FACE_TOL


class EuclideanBall(AtomicSet):
    """Unit sphere atoms; gauge and support are both the 2-norm."""

    variant = "EuclideanBall"
    has_projector = True
    origin_interior = True

    def __init__(self, shape):
        super().__init__(_as_shape(shape))

    def gauge(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.check(x)))

    def support(self, z: np.ndarray) -> float:
        return float(np.linalg.norm(self.check(z, "z")))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            atom = Atom(unit_basis(self.shape, 0))
        else:
            atom = Atom(z / nz)
        return ExposedFace(nz, [atom], z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        nx = float(np.linalg.norm(x))
        if nx == 0.0:
            return AtomicDecomposition([], None, 0.0)
        return AtomicDecomposition([(nx, Atom(x / nx))], None, nx)

    def project(self, y: np.ndarray) -> np.ndarray:
        y = self.check(y, "y")
        return y / max(1.0, float(np.linalg.norm(y)))

    def params(self) -> Dict[str, Any]:
        return {"shape": list(self.shape)}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'EuclideanBall':
        return cls(params["shape"])


class Box(AtomicSet):
    """Vertices of [-1, 1]^n; gauge is the max-norm, support the 1-norm."""

    variant = "Box"
    has_projector = True
    origin_interior = True

    def __init__(self, shape):
        super().__init__(_as_shape(shape))

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        return float(np.abs(x).max()) if x.size else 0.0

    def support(self, z: np.ndarray) -> float:
        return float(np.abs(self.check(z, "z")).sum())

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        flat = z.ravel()
        scale = float(np.abs(flat).max()) if flat.size else 0.0
        free = np.flatnonzero(np.abs(flat) <= tol * scale)
        base = np.where(flat >= 0, 1.0, -1.0)
        atoms: List[Atom] = []
        for flips in product((1.0, -1.0), repeat=len(free)):
            if len(atoms) >= k_max:
                break
            vertex = base.copy()
            vertex[free] = flips
            atoms.append(Atom(vertex.reshape(self.shape)))
        return ExposedFace(float(np.abs(flat).sum()), atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        flat = x.ravel()
        top = float(np.abs(flat).max()) if flat.size else 0.0
        if top == 0.0:
            return AtomicDecomposition([], None, 0.0)
        # u = (y + 1) / 2 in the unit cube is a convex combination of the n + 1
        # indicator vectors of its top-k coordinates, k = 0..n
        u = 0.5 * (flat / top + 1.0)
        order = np.argsort(-u, kind="stable")
        levels = np.concatenate([[1.0], u[order], [0.0]])
        weights = levels[:-1] - levels[1:]
        terms = []
        for k, w in enumerate(weights):
            if w <= tol:
                continue
            vertex = -np.ones(flat.size)
            vertex[order[:k]] = 1.0
            terms.append((float(w * top), Atom(vertex.reshape(self.shape))))
        return AtomicDecomposition(terms, None, top, minimal=True)

    def project(self, y: np.ndarray) -> np.ndarray:
        return np.clip(self.check(y, "y"), -1.0, 1.0)

    def params(self) -> Dict[str, Any]:
        return {"shape": list(self.shape)}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'Box':
        return cls(params["shape"])
