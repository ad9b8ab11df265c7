"""
Group norm: atoms are unit vectors supported on one group.

Support and faces use the exact max over per-group 2-norms. With disjoint
groups the gauge is the sum of group 2-norms; with overlapping groups it is
the latent group norm min sum ||w_g|| over splits x = sum P_g w_g, evaluated
by Douglas-Rachford splitting.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, band_threshold
from config import DECOMPOSE_TOL, FACE_TOL, GROUP_NORM_ITERS, SUBSPACE_TOL
from errors import NoProjectorError, NotInConeError, UsageError
from linalg_kernels import project_capped_simplex
from logger import logger

_SPLIT_STEP = 0.1


class GroupNorm(AtomicSet):
    variant = "GroupNorm"

    def __init__(self, n: int, groups: Sequence[Sequence[int]], iters: int = GROUP_NORM_ITERS):
        super().__init__((int(n),))
        if not groups:
            raise UsageError("GroupNorm needs at least one group")
        self.groups: List[np.ndarray] = []
        for g in groups:
            idx = np.asarray(sorted(set(int(i) for i in g)), dtype=int)
            if idx.size == 0 or idx[0] < 0 or idx[-1] >= n:
                raise UsageError(f"group {list(g)} is empty or out of range for n={n}")
            self.groups.append(idx)
        self.counts = np.zeros(n)
        for idx in self.groups:
            self.counts[idx] += 1
        self.overlap = bool(np.any(self.counts > 1))
        self.iters = iters

    @property
    def has_projector(self) -> bool:
        return not self.overlap

    @property
    def gauge_exact(self) -> bool:
        return not self.overlap

    def group_atom(self, g: int, direction: np.ndarray) -> Atom:
        a = np.zeros(self.dim)
        a[self.groups[g]] = direction
        return Atom(a, TagKind.GROUP, index=g)

    def _covered(self, x: np.ndarray) -> bool:
        outside = x[self.counts == 0]
        return float(np.linalg.norm(outside)) <= SUBSPACE_TOL * max(float(np.linalg.norm(x)), 1e-300)

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        if not self._covered(x):
            return np.inf
        if not self.overlap:
            return float(sum(np.linalg.norm(x[idx]) for idx in self.groups))
        value, _ = self.latent_split(x)
        return value

    def latent_split(self, x: np.ndarray) -> Tuple[float, List[np.ndarray]]:
        """Best split found for overlapping groups: (sum ||w_g||, [w_g])."""
        scale = float(np.linalg.norm(x))
        if scale == 0.0:
            return 0.0, [np.zeros(idx.size) for idx in self.groups]
        target = x / scale
        safe = np.maximum(self.counts, 1)

        def gather(y):
            return [y[idx] for idx in self.groups]

        def scatter(ws):
            out = np.zeros(self.dim)
            for idx, w in zip(self.groups, ws):
                out[idx] += w
            return out

        def to_affine(ws):
            shift = gather((scatter(ws) - target) / safe)
            return [w - s for w, s in zip(ws, shift)]

        def shrink(ws):
            out = []
            for w in ws:
                nw = np.linalg.norm(w)
                out.append(w * max(0.0, 1.0 - _SPLIT_STEP / nw) if nw > 0 else w)
            return out

        y = gather(target / safe)
        best_w = y
        best = float(sum(np.linalg.norm(w) for w in y))
        for _ in range(self.iters):
            w = to_affine(y)
            value = float(sum(np.linalg.norm(v) for v in w))
            if value < best:
                best, best_w = value, w
            v = shrink([2 * a - b for a, b in zip(w, y)])
            y = [b + c - a for a, b, c in zip(w, y, v)]
        logger.debug(f"latent group split: value={best * scale:.6e}")
        return best * scale, [w * scale for w in best_w]

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return float(max(np.linalg.norm(z[idx]) for idx in self.groups))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        norms = np.array([np.linalg.norm(z[idx]) for idx in self.groups])
        sup = float(norms.max())
        atoms: List[Atom] = []
        cut = band_threshold(sup, tol, float(np.abs(z).max(initial=0.0)))
        for g in np.flatnonzero(norms >= cut)[:k_max]:
            idx = self.groups[g]
            if norms[g] > 0:
                direction = z[idx] / norms[g]
            else:
                direction = np.zeros(idx.size)
                direction[0] = 1.0
            atoms.append(self.group_atom(int(g), direction))
        return ExposedFace(sup, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        if not self._covered(x):
            raise NotInConeError("element has mass outside every group")
        if self.overlap:
            _, pieces = self.latent_split(x)
        else:
            pieces = [x[idx] for idx in self.groups]
        norms = [float(np.linalg.norm(w)) for w in pieces]
        top = max(norms) if norms else 0.0
        terms = []
        for g, (w, nw) in enumerate(zip(pieces, norms)):
            if top > 0 and nw > tol * top:
                terms.append((nw, self.group_atom(g, w / nw)))
        claimed = float(sum(c for c, _ in terms))
        return AtomicDecomposition(terms, None, claimed, minimal=not self.overlap)

    def project(self, y: np.ndarray) -> np.ndarray:
        if self.overlap:
            raise NoProjectorError("overlapping GroupNorm has no projector")
        y = self.check(y, "y")
        norms = np.array([np.linalg.norm(y[idx]) for idx in self.groups])
        shrunk = project_capped_simplex(norms, 1.0)
        out = np.zeros(self.dim)
        for idx, nw, s in zip(self.groups, norms, shrunk):
            if nw > 0:
                out[idx] = y[idx] * (s / nw)
        return out

    def params(self) -> Dict[str, Any]:
        return {"n": self.dim, "groups": [idx.tolist() for idx in self.groups]}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'GroupNorm':
        return cls(params["n"], params["groups"])
