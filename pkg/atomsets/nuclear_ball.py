"""
Nuclear-norm ball: rank-one atoms u v^T with unit factors.
"""
from typing import Any, Dict, List, Sequence

import numpy as np

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, band_threshold
from config import DECOMPOSE_TOL, FACE_TOL
from linalg_kernels import project_capped_simplex, top_singular_triples


def rank_one_atom(u: np.ndarray, v: np.ndarray) -> Atom:
    return Atom(np.outer(u, v), TagKind.RANK_ONE, u=u, v=v)


class NuclearBall(AtomicSet):
    """Gauge is the nuclear norm, support the spectral norm."""

    variant = "NuclearBall"
    has_projector = True
    origin_interior = True

    def __init__(self, m: int, n: int, seed: int = 0):
        super().__init__((int(m), int(n)))
        self.seed = seed

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        return float(np.linalg.svd(x, compute_uv=False).sum())

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return top_singular_triples(z, 1, seed=self.seed)[0].sigma

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        k = min(k_max, min(self.shape))
        triples = top_singular_triples(z, k, seed=self.seed)
        sup = triples[0].sigma
        cut = band_threshold(sup, tol, 0.0)
        atoms = [rank_one_atom(t.u, t.v) for t in triples if t.sigma >= cut]
        return ExposedFace(sup, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        U, s, Vt = np.linalg.svd(x, full_matrices=False)
        terms = []
        if s.size and s[0] > 0:
            for i in np.flatnonzero(s > tol * s[0]):
                terms.append((float(s[i]), rank_one_atom(U[:, i], Vt[i])))
        return AtomicDecomposition(terms, None, float(sum(c for c, _ in terms)))

    def project(self, y: np.ndarray) -> np.ndarray:
        y = self.check(y, "y")
        U, s, Vt = np.linalg.svd(y, full_matrices=False)
        return (U * project_capped_simplex(s, 1.0)) @ Vt

    def params(self) -> Dict[str, Any]:
        return {"m": self.shape[0], "n": self.shape[1]}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'NuclearBall':
        return cls(params["m"], params["n"])
