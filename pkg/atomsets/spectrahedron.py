"""
Spectrahedral atomic sets.

Spectrahedron(n): atoms p p^T with ||p|| = 1; the gauge is the trace on the
PSD cone. WeightedSpectrahedron(V, lam): atoms p p^T with p^T L p = 1 for
L = V diag(lam) V^T; when L is singular the hull recedes along PSD matrices
living on the null space of L.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, band_threshold
from config import DECOMPOSE_TOL, FACE_TOL, ORTHONORMAL_TOL, PSD_TOL, RECESSION_TOL, SYMMETRY_TOL
from errors import (NonPositiveWeightError, NotInConeError, NotOrthonormalError, ShapeMismatchError,
                    UnboundedSupportError)
from linalg_kernels import project_trace_capped_psd, sym_eig_topk
from logger import logger


def sym_part(Z: np.ndarray) -> np.ndarray:
    return 0.5 * (Z + Z.T)


def psd_eigh(X: np.ndarray) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Eigendecomposition of a symmetric X, or None when X leaves the PSD cone."""
    scale = float(np.max(np.abs(X))) if X.size else 0.0
    if np.max(np.abs(X - X.T), initial=0.0) > SYMMETRY_TOL * max(scale, 1.0):
        return None
    vals, vecs = np.linalg.eigh(sym_part(X))
    if vals.size and vals[0] < -PSD_TOL * max(np.linalg.norm(X, 2), 1e-300):
        return None
    return vals, vecs


def sym_rank_one(p: np.ndarray) -> Atom:
    return Atom(np.outer(p, p), TagKind.SYM_RANK_ONE, u=p, v=p)


def _top_face(M: np.ndarray, k_max: int, seed: int) -> Tuple[float, np.ndarray, np.ndarray]:
    k = max(1, min(k_max, M.shape[0]))
    vals, vecs = sym_eig_topk(M, k, seed=seed)
    return float(vals[0]), vals, vecs


class Spectrahedron(AtomicSet):
    """{p p^T : ||p|| = 1}; gauge trace(X) on PSD X, support max(0, lambda_max)."""

    variant = "Spectrahedron"
    has_projector = True

    def __init__(self, n: int, seed: int = 0):
        super().__init__((int(n), int(n)))
        self.seed = seed

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        if psd_eigh(x) is None:
            return np.inf
        return max(float(np.trace(x)), 0.0)

    def support(self, z: np.ndarray) -> float:
        z = sym_part(self.check(z, "z"))
        lam, _, _ = _top_face(z, 1, self.seed)
        return max(0.0, lam)

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = sym_part(self.check(z, "z"))
        lam, vals, vecs = _top_face(z, k_max, self.seed)
        sup = max(0.0, lam)
        cut = band_threshold(sup, tol, float(np.max(np.abs(z), initial=0.0)))
        atoms = [sym_rank_one(vecs[:, i]) for i in range(vals.size) if vals[i] >= cut]
        return ExposedFace(sup, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        eig = psd_eigh(x)
        if eig is None:
            raise NotInConeError("matrix is not positive semidefinite")
        vals, vecs = eig
        terms = []
        top = vals[-1] if vals.size else 0.0
        if top > 0:
            for i in range(vals.size - 1, -1, -1):
                if vals[i] > tol * top:
                    terms.append((float(vals[i]), sym_rank_one(vecs[:, i])))
        return AtomicDecomposition(terms, None, float(sum(c for c, _ in terms)))

    def project(self, y: np.ndarray) -> np.ndarray:
        return project_trace_capped_psd(sym_part(self.check(y, "y")), 1.0)

    def params(self) -> Dict[str, Any]:
        return {"n": self.shape[0]}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'Spectrahedron':
        return cls(params["n"])


class WeightedSpectrahedron(AtomicSet):
    """{p p^T : p^T L p = 1} with L = V diag(lam) V^T, lam > 0, V orthonormal columns."""

    variant = "WeightedSpectrahedron"

    def __init__(self, V: np.ndarray, lam: np.ndarray, seed: int = 0):
        V = np.asarray(V, dtype=float)
        lam = np.asarray(lam, dtype=float).ravel()
        if V.ndim != 2 or V.shape[1] != lam.size:
            raise ShapeMismatchError(f"V has shape {V.shape}, expected (n, {lam.size})")
        if np.any(lam <= 0):
            raise NonPositiveWeightError("all weights must be positive")
        if not np.allclose(V.T @ V, np.eye(lam.size), atol=ORTHONORMAL_TOL):
            raise NotOrthonormalError("V must have orthonormal columns")
        n = V.shape[0]
        super().__init__((n, n))
        self.V = V
        self.lam = lam
        self.seed = seed
        self.L = (V * lam) @ V.T
        self.null_basis = scipy.linalg.null_space(V.T) if lam.size < n else np.zeros((n, 0))
        self._d = lam ** -0.5

    @property
    def singular(self) -> bool:
        return self.null_basis.shape[1] > 0

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        if psd_eigh(x) is None:
            return np.inf
        return max(float(np.sum(self.L * x)), 0.0)

    def _reduced(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Weighted reduced matrix and the map from its eigenvectors to atoms.

        Along the null space of L the best completion of p = V a + N b is
        b = -pinv(N^T Z N) N^T Z V a, giving the Schur complement of the null
        block. Raises UnboundedSupportError when that block is not NSD or
        couples to a null direction of itself.
        """
        V, Nb = self.V, self.null_basis
        A = V.T @ z @ V
        lift = V.copy()
        if self.singular:
            scale = max(float(np.max(np.abs(z), initial=0.0)), 1e-300)
            block = sym_part(Nb.T @ z @ Nb)
            bvals, bvecs = np.linalg.eigh(block)
            if bvals[-1] > RECESSION_TOL * scale:
                raise UnboundedSupportError("Z is positive on a recession direction")
            C = V.T @ z @ Nb
            flat = np.abs(bvals) <= RECESSION_TOL * scale
            if np.any(flat) and np.linalg.norm(C @ bvecs[:, flat]) > RECESSION_TOL * scale:
                raise UnboundedSupportError("Z couples to a flat recession direction")
            inv_vals = np.where(flat, 0.0, 1.0 / np.where(flat, 1.0, bvals))
            block_pinv = (bvecs * inv_vals) @ bvecs.T
            A = A - C @ block_pinv @ C.T
            lift = V - Nb @ block_pinv @ C.T
        d = self._d
        M = d[:, None] * sym_part(A) * d[None, :]
        return M, lift * d[None, :]

    def support(self, z: np.ndarray) -> float:
        z = sym_part(self.check(z, "z"))
        try:
            M, _ = self._reduced(z)
        except UnboundedSupportError:
            return np.inf
        lam, _, _ = _top_face(M, 1, self.seed)
        return max(0.0, lam)

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = sym_part(self.check(z, "z"))
        M, lift = self._reduced(z)
        lam, vals, W = _top_face(M, k_max, self.seed)
        sup = max(0.0, lam)
        cut = band_threshold(sup, tol, float(np.max(np.abs(z), initial=0.0)))
        atoms = [sym_rank_one(lift @ W[:, i]) for i in range(vals.size) if vals[i] >= cut]
        return ExposedFace(sup, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        if psd_eigh(x) is None:
            raise NotInConeError("matrix is not positive semidefinite")
        x = sym_part(x)
        root = self.lam ** 0.5
        M = root[:, None] * (self.V.T @ x @ self.V) * root[None, :]
        mu, W = np.linalg.eigh(sym_part(M))
        terms = []
        top = mu[-1] if mu.size else 0.0
        for i in range(mu.size - 1, -1, -1):
            if top > 0 and mu[i] > tol * top:
                terms.append((float(mu[i]), sym_rank_one(self.V @ (self._d * W[:, i]))))
        recession = None
        rest = x - self.V @ (self.V.T @ x @ self.V) @ self.V.T
        if np.linalg.norm(rest) > tol * max(np.linalg.norm(x), 1e-300):
            if not self.singular:
                logger.warning(f"WeightedSpectrahedron decomposition residual {np.linalg.norm(rest):.3e}")
            recession = (1.0, Atom(rest, TagKind.RECESSION))
        return AtomicDecomposition(terms, recession, max(float(np.sum(self.L * x)), 0.0))

    def params(self) -> Dict[str, Any]:
        return {"V": self.V.tolist(), "lam": self.lam.tolist()}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'WeightedSpectrahedron':
        return cls(np.asarray(params["V"], dtype=float), np.asarray(params["lam"], dtype=float))
