"""
Ambient elements and masked observation patterns.

Elements are float64 numpy arrays: 1-D for vectors, 2-D for matrices.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from errors import ShapeMismatchError, UsageError

Shape = Tuple[int, ...]


def as_element(x: Any, shape: Optional[Shape] = None, name: str = "x") -> np.ndarray:
    """Convert to a finite float64 array, optionally checking its shape."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.ndim > 2:
        raise ShapeMismatchError(f"{name} must be a vector or matrix, got ndim={arr.ndim}")
    if shape is not None and arr.shape != tuple(shape):
        raise ShapeMismatchError(f"{name} has shape {arr.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite entries")
    return arr


def inner(x: np.ndarray, z: np.ndarray) -> float:
    """Trace inner product <x, z>."""
    if x.shape != z.shape:
        raise ShapeMismatchError(f"inner product of shapes {x.shape} and {z.shape}")
    return float(np.vdot(x, z))


def as_rows_cols(shape: Shape) -> Tuple[int, int]:
    """(rows, cols) view of a shape with cols=1 for vectors."""
    if len(shape) == 1:
        return shape[0], 1
    return shape[0], shape[1]


@dataclass
class MaskedMatrix:
    """Sparse pattern Omega on an (m, n) grid with one value per entry.

    Entries are unique and sorted lexicographically by (i, j).
    """
    shape: Tuple[int, int]
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        m, n = self.shape
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        if self.values is None:
            self.values = np.zeros(self.rows.size)
        self.values = np.asarray(self.values, dtype=float)
        if not (self.rows.shape == self.cols.shape == self.values.shape) or self.rows.ndim != 1:
            raise ShapeMismatchError("rows, cols and values must be 1-D of equal length")
        if self.rows.size:
            if self.rows.min() < 0 or self.rows.max() >= m or self.cols.min() < 0 or self.cols.max() >= n:
                raise ShapeMismatchError(f"mask index outside {self.shape}")
        order = np.lexsort((self.cols, self.rows))
        self.rows, self.cols, self.values = self.rows[order], self.cols[order], self.values[order]
        flat = self.rows * n + self.cols
        if flat.size > 1 and np.any(np.diff(flat) == 0):
            raise UsageError("duplicate (i, j) entries in mask")

    @classmethod
    def from_triples(cls, shape: Tuple[int, int],
                     triples: Iterable[Sequence[float]]) -> 'MaskedMatrix':
        data = np.asarray(list(triples), dtype=float).reshape(-1, 3)
        return cls(tuple(shape), data[:, 0].astype(np.int64), data[:, 1].astype(np.int64), data[:, 2])

    @property
    def nnz(self) -> int:
        return int(self.rows.size)

    def with_values(self, values: np.ndarray) -> 'MaskedMatrix':
        return MaskedMatrix(self.shape, self.rows, self.cols, np.asarray(values, dtype=float))

    def sample(self, X: np.ndarray) -> np.ndarray:
        """Values of X on the pattern, in entry order."""
        if X.shape != tuple(self.shape):
            raise ShapeMismatchError(f"sample expects {self.shape}, got {X.shape}")
        return X[self.rows, self.cols]

    def sample_rank_one(self, u: np.ndarray, v: np.ndarray, scale: float = 1.0) -> np.ndarray:
        """Values of scale * u v^T on the pattern without forming the matrix."""
        return scale * u[self.rows] * v[self.cols]

    def scatter(self, values: np.ndarray) -> np.ndarray:
        """Dense (m, n) matrix holding values on the pattern and zeros elsewhere."""
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = values
        return out

    def to_sparse(self, values: Optional[np.ndarray] = None) -> sp.csr_matrix:
        vals = self.values if values is None else values
        return sp.csr_matrix((vals, (self.rows, self.cols)), shape=self.shape)

    def triples(self):
        return [(int(i), int(j), float(v)) for i, j, v in zip(self.rows, self.cols, self.values)]

    def to_dict(self) -> Dict[str, Any]:
        return {"shape": list(self.shape), "entries": [list(t) for t in self.triples()]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MaskedMatrix':
        return cls.from_triples(tuple(data["shape"]), data["entries"])
