"""
Union of atomic sets (sum convolution of gauges).

The gauge is an LP over the atoms when every part is small and finite.
Otherwise column generation prices new atoms with the part faces at the LP
duals, carrying lineality directions as free columns; parts that cannot be
priced fall back to a convex split when every part gauge is finite.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, band_threshold
from atomsets.finite_atoms import atoms_matrix, lp_gauge
from config import COLUMN_ROUNDS, COLUMN_SEED_MAX_DIM, DECOMPOSE_TOL, FACE_TOL, SPLIT_TOL
from errors import AtomkitError, GaugeUnsupportedError, NotInConeError, UsageError
from logger import logger


def _seed_atoms(parts: Sequence[AtomicSet], x: np.ndarray) -> List[Tuple[int, np.ndarray]]:
    directions = [x, -x]
    if x.size <= COLUMN_SEED_MAX_DIM:
        for j in range(x.size):
            e = np.zeros(x.size)
            e[j] = 1.0
            directions += [e.reshape(x.shape), -e.reshape(x.shape)]
    seeds = []
    for i, part in enumerate(parts):
        atoms = part.finite_atoms
        if atoms is not None and len(atoms) <= COLUMN_SEED_MAX_DIM:
            seeds += [(i, a.element) for a in atoms if not a.is_recession]
            continue
        for d in directions:
            try:
                face = part.expose(d, 1)
            except AtomkitError:
                continue
            if face.atoms and np.isfinite(face.support_value) and not face.atoms[0].is_recession:
                seeds.append((i, face.atoms[0].element))
    return seeds


def union_column_generation(parts: Sequence[AtomicSet], x: np.ndarray, tol: float = SPLIT_TOL,
                            rounds: int = COLUMN_ROUNDS) -> Optional[Tuple[float, List[np.ndarray]]]:
    """Gauge of the union as min sum(c) over part atoms, and the split by part.

    Lineality directions enter as free columns at no cost. Stops once every
    part support at the LP duals is at most 1 + tol, which certifies the LP
    value within that factor. Returns None when a part cannot be priced.
    """
    scale = float(np.abs(x).max())
    target = x.ravel() / scale
    owners: List[int] = []
    columns: List[np.ndarray] = []
    keys = set()

    def add(i: int, element: np.ndarray) -> bool:
        key = (i, np.round(element, 12).tobytes())
        if key in keys or not np.any(element):
            return False
        keys.add(key)
        owners.append(i)
        columns.append(np.asarray(element, dtype=float).ravel())
        return True

    for i, element in _seed_atoms(parts, x):
        add(i, element)
    free = [(i, d.ravel()) for i, part in enumerate(parts) for d in part.lineality()]
    if not columns and not free:
        return None

    value, c = np.inf, None
    for r in range(rounds):
        M = np.column_stack(columns + [d for _, d in free])
        cost = np.concatenate([np.ones(len(columns)), np.zeros(len(free))])
        bounds = [(0, None)] * len(columns) + [(None, None)] * len(free)
        res = linprog(cost, A_eq=M, b_eq=target, bounds=bounds, method="highs")
        if res.status != 0:
            logger.debug(f"union column generation: master LP status {res.status}")
            return None
        c = res.x
        value = float(np.maximum(c[:len(columns)], 0.0).sum())
        z = np.asarray(res.eqlin.marginals, dtype=float).reshape(x.shape)
        try:
            sigmas = [part.support(z) for part in parts]
        except AtomkitError:
            return None
        if not all(np.isfinite(s) for s in sigmas):
            logger.debug("union column generation: a part support is unbounded at the duals")
            return None
        if max(sigmas) <= 1.0 + tol:
            logger.debug(f"union column generation: value={value * scale:.9e} after {r + 1} rounds")
            break
        grew = False
        for i, (part, s) in enumerate(zip(parts, sigmas)):
            if s > 1.0 + tol:
                face = part.expose(z, 1)
                if face.atoms:
                    grew = add(i, face.atoms[0].element) or grew
        if not grew:
            break
    else:
        logger.warning(f"union column generation stopped after {rounds} rounds; "
                       f"lower bound {value / max(sigmas) * scale:.9e}, upper {value * scale:.9e}")

    pieces = [np.zeros(x.size) for _ in parts]
    for cj, i, col in zip(c, owners + [i for i, _ in free], columns + [d for _, d in free]):
        pieces[i] = pieces[i] + cj * col
    pieces = [scale * p.reshape(x.shape) for p in pieces]
    pieces[0] = pieces[0] + (x - sum(pieces))
    return value * scale, pieces


def _convex_split(parts: Sequence[AtomicSet], x: np.ndarray) -> Tuple[float, List[np.ndarray]]:
    """min_w sum_i gauge_i(w_i) with sum_i w_i = x, for parts whose gauges are finite everywhere."""
    if not all(p.origin_interior for p in parts):
        raise GaugeUnsupportedError("union parts can neither be priced nor split on the whole space")
    k = len(parts)
    shape = x.shape

    def pieces_of(flat):
        free = flat.reshape((k - 1,) + shape)
        return list(free) + [x - free.sum(axis=0)]

    def h(flat):
        return float(sum(p.gauge(w) for p, w in zip(parts, pieces_of(flat))))

    singles = [np.zeros(((k - 1),) + shape) for _ in range(k)]
    for i in range(k - 1):
        singles[i][i] = x
    values = [h(s.ravel()) for s in singles]
    start = singles[int(np.argmin(values))]
    res = minimize(h, start.ravel(), method="Powell")
    best = res.x if res.fun < min(values) else start.ravel()
    value = min(float(res.fun), min(values))
    logger.debug(f"union convex split: value={value:.9e}")
    return value, pieces_of(best)


class UnionSet(AtomicSet):
    """A_1 u ... u A_k."""

    variant = "Union"

    def __init__(self, parts: Sequence[AtomicSet]):
        if len(parts) < 2:
            raise UsageError("Union needs at least two parts")
        super().__init__(parts[0].shape)
        for p in parts[1:]:
            self.same_shape(p)
        self._parts = tuple(parts)

    def parts(self) -> Sequence[AtomicSet]:
        return self._parts

    @property
    def origin_interior(self) -> bool:
        return any(p.origin_interior for p in self._parts)

    @property
    def finite_atoms(self) -> Optional[List[Atom]]:
        lists = [p.finite_atoms for p in self._parts]
        if any(l is None for l in lists):
            return None
        return [a for l in lists for a in l]

    @property
    def gauge_exact(self) -> bool:
        return self.finite_atoms is not None

    def lineality(self) -> List[np.ndarray]:
        return [d for p in self._parts for d in p.lineality()]

    def split(self, x: np.ndarray) -> Tuple[float, List[np.ndarray]]:
        """Least sum of part gauges over x = sum_i x_i, with the pieces, one per part."""
        x = self.check(x)
        if not np.any(x):
            return 0.0, [np.zeros(self.shape) for _ in self._parts]
        found = union_column_generation(self._parts, x)
        if found is not None:
            return found
        return _convex_split(self._parts, x)

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        atoms = self.finite_atoms
        if atoms is not None:
            value, _ = lp_gauge(atoms_matrix(atoms), x.ravel())
            return value
        try:
            value, _ = self.split(x)
        except GaugeUnsupportedError:
            return np.inf
        return value

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return float(max(p.support(z) for p in self._parts))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        sups = [p.support(z) for p in self._parts]
        sup = float(max(sups))
        cut = band_threshold(sup, tol, float(np.abs(z).max(initial=0.0)))
        atoms: List[Atom] = []
        for p, s in zip(self._parts, sups):
            if s >= cut and len(atoms) < k_max:
                atoms.extend(p.expose(z, k_max - len(atoms), tol).atoms)
        return ExposedFace(sup, atoms[:k_max], z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        atoms = self.finite_atoms
        if atoms is not None:
            value, c = lp_gauge(atoms_matrix(atoms), x.ravel())
            if c is None:
                raise NotInConeError("element lies outside the cone of the union")
            top = c.max(initial=0.0)
            terms = [(float(c[i]), atoms[i]) for i in np.flatnonzero(c > tol * max(top, 1e-300))]
            return AtomicDecomposition(terms, None, value)
        value, split = self.split(x)
        if not np.isfinite(value):
            raise NotInConeError("element lies outside the cone of the union")
        pieces = [p.decompose(w, tol) for p, w in zip(self._parts, split) if np.any(w)]
        terms = [t for d in pieces for t in d.terms]
        recs = [d.recession_part for d in pieces if d.recession_part is not None]
        recession = None
        if recs:
            recession = (1.0, recs[0][1].mapped(sum(c * a.element for c, a in recs)))
        return AtomicDecomposition(terms, recession, value, minimal=False)

    def params(self) -> Dict[str, Any]:
        return {}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'UnionSet':
        return cls(parts)
