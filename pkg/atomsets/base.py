"""
Base types shared by every atomic set.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import DECOMPOSE_TOL, FACE_TOL
from elements import Shape, as_element, inner
from errors import NoProjectorError, ShapeMismatchError


class TagKind(Enum):
    """Structural tag of an atom."""
    SIGNED_BASIS = "SignedBasis"
    RANK_ONE = "RankOne"
    SYM_RANK_ONE = "SymRankOne"
    GROUP = "Group"
    TV_COLUMN = "TVColumn"
    RECESSION = "RecessionDir"
    SUBSPACE = "SubspaceElement"
    COMPOSITE = "Composite"
    GENERIC = "Generic"


@dataclass(eq=False)
class Atom:
    """Unit-gauge element of an atomic set, or a recession direction (gauge 0)."""
    element: np.ndarray
    kind: TagKind = TagKind.GENERIC
    index: Optional[int] = None
    sign: int = 0
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    children: Tuple['Atom', ...] = ()

    @property
    def is_recession(self) -> bool:
        return self.kind in (TagKind.RECESSION, TagKind.SUBSPACE)

    def scaled(self, alpha: float) -> 'Atom':
        """Same structural tag, element multiplied by alpha."""
        return Atom(alpha * self.element, self.kind, self.index, self.sign, self.u, self.v,
                    tuple(c.scaled(alpha) for c in self.children))

    def mapped(self, element: np.ndarray) -> 'Atom':
        """Atom carrying a transformed element but the original tag."""
        return Atom(element, self.kind, self.index, self.sign, self.u, self.v, self.children)

    def describe(self) -> str:
        if self.kind in (TagKind.SIGNED_BASIS, TagKind.TV_COLUMN):
            return f"{self.kind.value}({self.index},{'+' if self.sign >= 0 else '-'})"
        if self.kind in (TagKind.GROUP, TagKind.GENERIC) and self.index is not None:
            return f"{self.kind.value}({self.index})"
        if self.kind == TagKind.COMPOSITE:
            return "Composite(" + "+".join(c.describe() for c in self.children) + ")"
        return self.kind.value

    def to_dict(self) -> Dict[str, Any]:
        return {"tag": self.describe(), "element": self.element.tolist()}


@dataclass
class AtomicDecomposition:
    """x = sum c_a a (+ recession part), all c_a > 0."""
    terms: List[Tuple[float, Atom]]
    recession_part: Optional[Tuple[float, Atom]] = None
    claimed_gauge: float = 0.0
    minimal: bool = True

    def synthesize(self, shape: Shape) -> np.ndarray:
        out = np.zeros(shape)
        for c, a in self.terms:
            out += c * a.element
        if self.recession_part is not None:
            c, a = self.recession_part
            out += c * a.element
        return out

    def coefficient_sum(self) -> float:
        return float(sum(c for c, _ in self.terms))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "claimed_gauge": self.claimed_gauge,
            "minimal": self.minimal,
            "terms": [{"coefficient": c, **a.to_dict()} for c, a in self.terms],
        }
        if self.recession_part is not None:
            c, a = self.recession_part
            data["recession"] = {"coefficient": c, **a.to_dict()}
        return data


@dataclass
class ExposedFace:
    """Atoms achieving the support value at z, within a relative band."""
    support_value: float
    atoms: List[Atom]
    exposing_vector: np.ndarray
    tol: float = FACE_TOL

    def to_dict(self) -> Dict[str, Any]:
        return {"support": self.support_value, "tol": self.tol,
                "atoms": [a.to_dict() for a in self.atoms]}


def band_threshold(sup: float, tol: float, scale: float) -> float:
    """Lowest inner product still counted as attaining sup."""
    if sup != 0.0:
        return sup - tol * abs(sup)
    return -tol * scale


def unit_basis(shape: Shape, flat_index: int) -> np.ndarray:
    e = np.zeros(int(np.prod(shape)))
    e[flat_index] = 1.0
    return e.reshape(shape)


class AtomicSet(ABC):
    """An atomic set A with its gauge, support function and exposed faces.

    Subclasses set `variant` and `shape`, and implement gauge, support,
    expose and decompose. Sets whose hull conv(A u {0}) has a cheap Euclidean
    projection override `project` and set `has_projector`.
    """

    variant: str = "AtomicSet"
    has_projector: bool = False
    gauge_exact: bool = True
    origin_interior: bool = False

    def __init__(self, shape: Shape):
        self.shape: Shape = tuple(int(s) for s in shape)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    @property
    def finite_atoms(self) -> Optional[List[Atom]]:
        """Explicit atom list when the set is finite and small."""
        return None

    def check(self, x: Any, name: str = "x") -> np.ndarray:
        return as_element(x, self.shape, name)

    @abstractmethod
    def gauge(self, x: np.ndarray) -> float:
        """gamma_A(x) in [0, inf]."""

    @abstractmethod
    def support(self, z: np.ndarray) -> float:
        """sigma_A(z) in [0, inf]."""

    @abstractmethod
    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        """Up to k_max atoms whose inner product with z attains the support."""

    @abstractmethod
    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        """Minimal atomic decomposition of x."""

    def project(self, y: np.ndarray) -> np.ndarray:
        """Euclidean projection onto conv(A u {0})."""
        raise NoProjectorError(f"{self.variant} has no projector")

    def lineality(self) -> List[np.ndarray]:
        """Directions d with gauge(t d) = 0 for every real t; empty when none are known."""
        return []

    @abstractmethod
    def params(self) -> Dict[str, Any]:
        """Recipe parameters."""

    def parts(self) -> Sequence['AtomicSet']:
        return ()

    def to_dict(self) -> Dict[str, Any]:
        recipe: Dict[str, Any] = {"variant": self.variant, "params": self.params()}
        children = self.parts()
        if children:
            recipe["parts"] = [p.to_dict() for p in children]
        return recipe

    def same_shape(self, other: 'AtomicSet') -> None:
        if other.shape != self.shape:
            raise ShapeMismatchError(f"{other.variant} has shape {other.shape}, expected {self.shape}")

    def __repr__(self) -> str:
        return f"{self.variant}{self.params()}"


def max_inner(atoms: Sequence[Atom], z: np.ndarray) -> Tuple[float, List[float]]:
    values = [inner(a.element, z) for a in atoms]
    return (max(values) if values else -np.inf), values
