"""
Explicit finite atomic set {a_1, ..., a_m}.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linprog

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, band_threshold
from config import DECOMPOSE_TOL, FACE_TOL, FINITE_PROJECTION_ITERS
from errors import NotInConeError, ShapeMismatchError, UsageError
from linalg_kernels import project_capped_simplex
from logger import logger

_LP_TOL = 1e-9


def atoms_matrix(atoms: Sequence[Atom]) -> np.ndarray:
    """Columns are the flattened atom elements."""
    return np.column_stack([a.element.ravel() for a in atoms])


def lp_gauge(A: np.ndarray, x: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
    """min sum(c) s.t. A c = x, c >= 0. Returns (inf, None) when infeasible."""
    m = A.shape[1]
    if not np.any(x):
        return 0.0, np.zeros(m)
    scale = float(np.abs(x).max())
    res = linprog(np.ones(m), A_eq=A, b_eq=x / scale, bounds=(0, None), method="highs")
    if res.status == 2:
        return np.inf, None
    if res.status != 0:
        logger.warning(f"linprog status {res.status}: {res.message}")
        return np.inf, None
    c = np.maximum(res.x, 0.0)
    c = _polish(A, x / scale, c)
    if np.linalg.norm(A @ c - x / scale) > 1e-6 * max(1.0, np.linalg.norm(x / scale)):
        return np.inf, None
    return float(c.sum()) * scale, c * scale


def _polish(A: np.ndarray, x: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Refit the LP support by least squares when that keeps c positive and sum(c) unchanged."""
    active = np.flatnonzero(c > _LP_TOL * max(c.max(initial=0.0), 1e-300))
    if active.size == 0:
        return c
    sol, *_ = np.linalg.lstsq(A[:, active], x, rcond=None)
    if np.any(sol <= 0) or abs(sol.sum() - c.sum()) > _LP_TOL * (1.0 + c.sum()):
        return c
    out = np.zeros_like(c)
    out[active] = sol
    return out


class FiniteAtoms(AtomicSet):
    """Finite atom list; gauge by linear programming."""

    variant = "FiniteAtoms"
    has_projector = True

    def __init__(self, atoms: Sequence[Union[Atom, np.ndarray]], iters: int = FINITE_PROJECTION_ITERS):
        if not atoms:
            raise UsageError("FiniteAtoms needs at least one atom")
        listed: List[Atom] = []
        for i, a in enumerate(atoms):
            if isinstance(a, Atom):
                listed.append(a)
            else:
                listed.append(Atom(np.asarray(a, dtype=float), TagKind.GENERIC, index=i))
        super().__init__(listed[0].element.shape)
        for a in listed:
            if a.element.shape != self.shape:
                raise ShapeMismatchError(f"atom shape {a.element.shape} differs from {self.shape}")
        self.atoms = listed
        self.A = atoms_matrix(listed)
        self.iters = iters

    @property
    def finite_atoms(self) -> Optional[List[Atom]]:
        return list(self.atoms)

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        value, _ = lp_gauge(self.A, x.ravel())
        return value

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return max(0.0, float((self.A.T @ z.ravel()).max()))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        values = self.A.T @ z.ravel()
        sup = max(0.0, float(values.max()))
        cut = band_threshold(sup, tol, float(np.abs(z).max(initial=0.0)))
        atoms = [self.atoms[i] for i in np.flatnonzero(values >= cut)[:k_max]]
        return ExposedFace(sup, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        value, c = lp_gauge(self.A, x.ravel())
        if c is None:
            raise NotInConeError("element lies outside the cone of the atoms")
        top = c.max(initial=0.0)
        terms = [(float(c[i]), self.atoms[i]) for i in np.flatnonzero(c > tol * max(top, 1e-300))]
        return AtomicDecomposition(terms, None, value)

    def project(self, y: np.ndarray) -> np.ndarray:
        """Accelerated projected gradient on coefficients over the capped simplex."""
        y = self.check(y, "y").ravel()
        A = self.A
        L = max(float(np.linalg.norm(A, 2)) ** 2, 1e-300)
        c = np.zeros(A.shape[1])
        w, t = c.copy(), 1.0
        for _ in range(self.iters):
            c_next = project_capped_simplex(w - (A.T @ (A @ w - y)) / L, 1.0)
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            w = c_next + ((t - 1.0) / t_next) * (c_next - c)
            if np.linalg.norm(c_next - c) <= 1e-15 * max(1.0, np.linalg.norm(c)):
                c = c_next
                break
            c, t = c_next, t_next
        return (A @ c).reshape(self.shape)

    def params(self) -> Dict[str, Any]:
        return {"atoms": [a.element.tolist() for a in self.atoms]}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'FiniteAtoms':
        return cls([np.asarray(a, dtype=float) for a in params["atoms"]])
