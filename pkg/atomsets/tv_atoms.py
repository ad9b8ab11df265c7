"""
Anisotropic total variation on R^n.

Atoms are the signed columns of the upper-triangular ones matrix B
(n x (n-1)); the constant vector e is a recession direction. For
x = B c + c_e e the coefficients are c_i = x_i - x_{i+1} and c_e = x_{n-1},
so the gauge is ||D x||_1.
"""
from typing import Any, Dict, List, Sequence

import numpy as np

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, band_threshold
from config import DECOMPOSE_TOL, FACE_TOL, RECESSION_TOL
from errors import UnboundedSupportError, UsageError


def tv_matrix(n: int) -> np.ndarray:
    return np.triu(np.ones((n, n - 1)))


class TVAtoms(AtomicSet):
    variant = "TVAtoms"

    def __init__(self, n: int):
        if n < 1:
            raise UsageError("TVAtoms needs n >= 1")
        super().__init__((int(n),))
        self.n = int(n)

    def column(self, j: int, sign: int = 1) -> Atom:
        b = np.zeros(self.n)
        b[:j + 1] = sign
        return Atom(b, TagKind.TV_COLUMN, index=j, sign=sign)

    def recession_direction(self) -> Atom:
        return Atom(np.ones(self.n), TagKind.RECESSION)

    def lineality(self) -> List[np.ndarray]:
        return [np.ones(self.n)]

    def coefficients(self, x: np.ndarray):
        """(c, c_e) with x = B c + c_e e."""
        return x[:-1] - x[1:], float(x[-1])

    def _bounded(self, z: np.ndarray) -> bool:
        return abs(float(z.sum())) <= RECESSION_TOL * max(float(np.abs(z).sum()), 1e-300)

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        return float(np.abs(np.diff(x)).sum())

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        if not self._bounded(z):
            return np.inf
        partial = np.cumsum(z)[:-1]
        return float(np.abs(partial).max()) if partial.size else 0.0

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        if not self._bounded(z):
            raise UnboundedSupportError("<e, z> != 0: TV support is unbounded")
        partial = np.cumsum(z)[:-1]
        mags = np.abs(partial)
        sup = float(mags.max()) if mags.size else 0.0
        atoms: List[Atom] = []
        if mags.size:
            cut = band_threshold(sup, tol, float(np.abs(z).max()))
            for j in np.flatnonzero(mags >= cut):
                if sup == 0.0:
                    atoms.append(self.column(int(j), 1))
                    if len(atoms) < k_max:
                        atoms.append(self.column(int(j), -1))
                else:
                    atoms.append(self.column(int(j), 1 if partial[j] > 0 else -1))
                if len(atoms) >= k_max:
                    break
        return ExposedFace(sup, atoms[:k_max], z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        c, c_e = self.coefficients(x)
        scale = float(np.abs(x).max()) if x.size else 0.0
        terms = []
        for j in np.flatnonzero(np.abs(c) > tol * max(scale, 1e-300)):
            terms.append((float(abs(c[j])), self.column(int(j), 1 if c[j] > 0 else -1)))
        recession = None
        if abs(c_e) > tol * max(scale, 1e-300):
            e = self.recession_direction()
            recession = (abs(c_e), e if c_e > 0 else Atom(-e.element, TagKind.RECESSION))
        return AtomicDecomposition(terms, recession, float(sum(w for w, _ in terms)))

    def params(self) -> Dict[str, Any]:
        return {"n": self.n}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'TVAtoms':
        return cls(params["n"])
