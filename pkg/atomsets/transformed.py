"""
Linear images and preimages of atomic sets, and positive scalings.
"""
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from atomsets.base import AtomicDecomposition, AtomicSet, ExposedFace
from config import DECOMPOSE_TOL, FACE_TOL
from errors import GaugeUnsupportedError, NoProjectorError, ShapeMismatchError, UsageError
from linalg_kernels import LinearMap

MODES = ("image", "preimage")


def _map_decomposition(decomp: AtomicDecomposition, fn) -> AtomicDecomposition:
    terms = [(c, a.mapped(fn(a.element))) for c, a in decomp.terms]
    recession = None
    if decomp.recession_part is not None:
        c, a = decomp.recession_part
        recession = (c, a.mapped(fn(a.element)))
    return AtomicDecomposition(terms, recession, decomp.claimed_gauge, decomp.minimal)


class Transformed(AtomicSet):
    """M A (image) or {x : M x in A} (preimage)."""

    variant = "Transformed"

    def __init__(self, inner: AtomicSet, M: LinearMap, mode: str = "image"):
        if mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {mode!r}")
        if mode == "image":
            if tuple(M.in_shape) != inner.shape:
                raise ShapeMismatchError(f"map input {M.in_shape} != inner shape {inner.shape}")
            shape = M.out_shape
        else:
            if tuple(M.out_shape) != inner.shape:
                raise ShapeMismatchError(f"map output {M.out_shape} != inner shape {inner.shape}")
            shape = M.in_shape
        super().__init__(shape)
        self.inner = inner
        self.M = M
        self.mode = mode

    @property
    def has_projector(self) -> bool:
        return self.M.orthogonal and self.inner.has_projector

    @property
    def origin_interior(self) -> bool:
        return self.M.invertible and self.inner.origin_interior

    @property
    def gauge_exact(self) -> bool:
        return self.inner.gauge_exact

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        if self.mode == "preimage":
            return self.inner.gauge(self.M.apply(x))
        if not self.M.invertible:
            raise GaugeUnsupportedError("image gauge needs an invertible map")
        return self.inner.gauge(self.M.inverse_apply(x))

    def _pull_back(self, z: np.ndarray) -> np.ndarray:
        if self.mode == "image":
            return self.M.adjoint_apply(z)
        if not self.M.invertible:
            raise GaugeUnsupportedError("preimage support needs an invertible map")
        return self.M.adjoint().inverse_apply(z)

    def _push(self, element: np.ndarray) -> np.ndarray:
        if self.mode == "image":
            return self.M.apply(element)
        return self.M.inverse_apply(element)

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return self.inner.support(self._pull_back(z))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        face = self.inner.expose(self._pull_back(z), k_max, tol)
        atoms = [a.mapped(self._push(a.element)) for a in face.atoms]
        return ExposedFace(face.support_value, atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        if self.mode == "preimage":
            if not self.M.invertible:
                raise GaugeUnsupportedError("preimage decomposition needs an invertible map")
            return _map_decomposition(self.inner.decompose(self.M.apply(x), tol), self.M.inverse_apply)
        if not self.M.invertible:
            raise GaugeUnsupportedError("image decomposition needs an invertible map")
        return _map_decomposition(self.inner.decompose(self.M.inverse_apply(x), tol), self.M.apply)

    def project(self, y: np.ndarray) -> np.ndarray:
        if not self.has_projector:
            raise NoProjectorError("Transformed sets project only through orthogonal maps")
        y = self.check(y, "y")
        if self.mode == "image":
            return self.M.apply(self.inner.project(self.M.adjoint_apply(y)))
        return self.M.adjoint_apply(self.inner.project(self.M.apply(y)))

    def lineality(self) -> List[np.ndarray]:
        if not self.M.invertible:
            return []
        return [self._push(d) for d in self.inner.lineality()]

    def params(self) -> Dict[str, Any]:
        return {"map": self.M.to_dict(), "mode": self.mode}

    def parts(self) -> Sequence[AtomicSet]:
        return (self.inner,)

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'Transformed':
        if len(parts) != 1:
            raise UsageError("Transformed takes exactly one part")
        inner = parts[0]
        mode = params.get("mode", "image")
        data = params["map"]
        if data.get("kind") in ("matrix", "matrix^T"):
            M = LinearMap.from_dict(data, ())
        else:
            M = LinearMap.from_dict(data, inner.shape)
        return cls(inner, M, mode)


class Scaled(AtomicSet):
    """alpha * A for alpha > 0."""

    variant = "Scaled"

    def __init__(self, inner: AtomicSet, alpha: float):
        if not alpha > 0:
            raise UsageError(f"Scaled needs alpha > 0, got {alpha}")
        super().__init__(inner.shape)
        self.inner = inner
        self.alpha = float(alpha)

    @property
    def has_projector(self) -> bool:
        return self.inner.has_projector

    @property
    def gauge_exact(self) -> bool:
        return self.inner.gauge_exact

    @property
    def origin_interior(self) -> bool:
        return self.inner.origin_interior

    @property
    def finite_atoms(self):
        atoms = self.inner.finite_atoms
        return None if atoms is None else [a.scaled(self.alpha) for a in atoms]

    def gauge(self, x: np.ndarray) -> float:
        return self.inner.gauge(self.check(x)) / self.alpha

    def support(self, z: np.ndarray) -> float:
        return self.alpha * self.inner.support(self.check(z, "z"))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        face = self.inner.expose(z, k_max, tol)
        return ExposedFace(self.alpha * face.support_value,
                           [a.scaled(self.alpha) for a in face.atoms], z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        d = self.inner.decompose(self.check(x), tol)
        terms = [(c / self.alpha, a.scaled(self.alpha)) for c, a in d.terms]
        return AtomicDecomposition(terms, d.recession_part, d.claimed_gauge / self.alpha, d.minimal)

    def project(self, y: np.ndarray) -> np.ndarray:
        y = self.check(y, "y")
        return self.alpha * self.inner.project(y / self.alpha)

    def lineality(self) -> List[np.ndarray]:
        return self.inner.lineality()

    def params(self) -> Dict[str, Any]:
        return {"alpha": self.alpha}

    def parts(self) -> Sequence[AtomicSet]:
        return (self.inner,)

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'Scaled':
        if len(parts) != 1:
            raise UsageError("Scaled takes exactly one part")
        return cls(parts[0], params["alpha"])
