"""
Minkowski sum of atomic sets (polar convolution of gauges).

support(z) is the sum of part supports and faces are sums of part faces.
The gauge is the least level tau with x in tau * (sum of part hulls): exact by
linear programming over sums of part atoms when every part is small and
finite, otherwise by column generation priced with the part faces, and as a
last resort by bisection with a product-space feasibility check.
"""
import itertools
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from atomsets.base import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind
from atomsets.finite_atoms import FiniteAtoms, atoms_matrix, lp_gauge
from config import (BISECTION_ITERS, COLUMN_ROUNDS, COLUMN_SEED_MAX_DIM, DECOMPOSE_TOL, FACE_TOL,
                    MAX_EXACT_SUM_ATOMS, PROJECTION_ITERS, SPLIT_TOL)
from errors import (AtomkitError, GaugeUnsupportedError, InfeasibleError, NoProjectorError,
                    NotInConeError, UsageError)
from logger import logger

_MAX_DOUBLINGS = 60


def composite(children: Sequence[Atom], shape) -> Atom:
    element = np.zeros(shape)
    for c in children:
        element = element + c.element
    return Atom(element, TagKind.COMPOSITE, children=tuple(children))


def face_pairings(sizes: Sequence[int], cap: int) -> Iterator[Tuple[int, ...]]:
    """Index tuples over part faces: diagonal first, then lexicographic, at most cap."""
    seen = set()
    count = 0
    for i in range(min(sizes)):
        combo = tuple(i for _ in sizes)
        seen.add(combo)
        yield combo
        count += 1
        if count >= cap:
            return
    for combo in itertools.product(*(range(s) for s in sizes)):
        if combo in seen:
            continue
        yield combo
        count += 1
        if count >= cap:
            return


def _projector(part: AtomicSet):
    if part.has_projector:
        return part.project
    atoms = part.finite_atoms
    if atoms is not None:
        return FiniteAtoms(atoms).project
    raise NoProjectorError(f"{part.variant} has neither a projector nor a finite atom list")


def _single_part_bound(parts: Sequence[AtomicSet], x: np.ndarray) -> float:
    best = np.inf
    for part in parts:
        try:
            best = min(best, part.gauge(x))
        except GaugeUnsupportedError:
            continue
    return best


def _feasible_split(projectors, x: np.ndarray, tau: float, start: List[np.ndarray],
                    tol: float, iters: int) -> Tuple[bool, List[np.ndarray]]:
    """Alternate between prod_i tau*C_i and {sum x_i = x}; the split is in the product."""
    k = len(projectors)
    w = [s.copy() for s in start]
    threshold = tol * (1.0 + float(np.linalg.norm(x)))
    pieces = w
    for _ in range(iters):
        pieces = [tau * proj(wi / tau) for proj, wi in zip(projectors, w)]
        r = x - sum(pieces)
        if float(np.linalg.norm(r)) <= threshold:
            return True, pieces
        w = [p + r / k for p in pieces]
    return False, pieces


class _Columns:
    """Sum atoms collected so far, one element per part (zero where a part is absent)."""

    def __init__(self, k: int, shape):
        self.k = k
        self.shape = shape
        self.pieces: List[List[np.ndarray]] = []
        self._keys = set()

    def add(self, pieces: List[np.ndarray]) -> bool:
        key = tuple(np.round(np.concatenate([p.ravel() for p in pieces]), 12))
        if key in self._keys or not any(np.any(p) for p in pieces):
            return False
        self._keys.add(key)
        self.pieces.append(pieces)
        return True

    def single(self, i: int, element: np.ndarray) -> bool:
        pieces = [np.zeros(self.shape) for _ in range(self.k)]
        pieces[i] = np.asarray(element, dtype=float)
        return self.add(pieces)

    def matrix(self) -> np.ndarray:
        return np.column_stack([sum(p).ravel() for p in self.pieces])

    def split(self, c: np.ndarray) -> List[np.ndarray]:
        out = [np.zeros(self.shape) for _ in range(self.k)]
        for cj, pieces in zip(c, self.pieces):
            if cj > 0:
                for i, p in enumerate(pieces):
                    out[i] = out[i] + cj * p
        return out


def _seed_columns(parts: Sequence[AtomicSet], x: np.ndarray, columns: _Columns) -> None:
    directions = [x, -x]
    if x.size <= COLUMN_SEED_MAX_DIM:
        for j in range(x.size):
            e = np.zeros(x.size)
            e[j] = 1.0
            directions += [e.reshape(x.shape), -e.reshape(x.shape)]
    for i, part in enumerate(parts):
        atoms = part.finite_atoms
        if atoms is not None and len(atoms) <= COLUMN_SEED_MAX_DIM:
            for a in atoms:
                columns.single(i, a.element)
            continue
        for d in directions:
            try:
                face = part.expose(d, 1)
            except AtomkitError:
                continue
            if face.atoms and np.isfinite(face.support_value):
                columns.single(i, face.atoms[0].element)


def _column_generation(parts: Sequence[AtomicSet], x: np.ndarray, tol: float,
                       rounds: int) -> Optional[Tuple[float, List[np.ndarray]]]:
    """Gauge of the sum as an LP over sum atoms priced by the part faces.

    The master LP is min sum(c) s.t. sum_j c_j s_j = x over collected sum
    atoms s_j; its dual z prices a new atom built from each part's exposed
    atom at z. Stops once sum_i max(sigma_i(z), 0) <= 1 + tol, which
    certifies the LP value. Returns None when the parts cannot be priced.
    """
    scale = float(np.abs(x).max())
    target = x.ravel() / scale
    columns = _Columns(len(parts), x.shape)
    _seed_columns(parts, x, columns)
    if not columns.pieces:
        return None
    value, c = np.inf, None
    for r in range(rounds):
        res = linprog(np.ones(len(columns.pieces)), A_eq=columns.matrix(), b_eq=target,
                      bounds=(0, None), method="highs")
        if res.status != 0:
            logger.debug(f"column generation: master LP status {res.status}, falling back")
            return None
        c = np.maximum(res.x, 0.0)
        value = float(c.sum())
        z = np.asarray(res.eqlin.marginals, dtype=float).reshape(x.shape)
        sigmas = []
        for part in parts:
            try:
                s = part.support(z)
            except AtomkitError:
                return None
            if not np.isfinite(s):
                return None
            sigmas.append(max(s, 0.0))
        total = sum(sigmas)
        if total <= 1.0 + tol:
            logger.debug(f"column generation: value={value * scale:.9e} after {r + 1} rounds")
            break
        pieces = []
        for part, s in zip(parts, sigmas):
            if s > 0:
                pieces.append(part.expose(z, 1).atoms[0].element)
            else:
                pieces.append(np.zeros(x.shape))
        if not columns.add(pieces):
            break
    else:
        logger.warning(f"column generation stopped after {rounds} rounds; "
                       f"lower bound {value / total * scale:.9e}, upper {value * scale:.9e}")
    split = [scale * p for p in columns.split(c)]
    split[0] = split[0] + (x - sum(split))
    return value * scale, split


def sum_gauge_numeric(sum_set: 'SumSet', x: np.ndarray, tol: float = SPLIT_TOL,
                      bisection_iters: int = BISECTION_ITERS,
                      projection_iters: int = PROJECTION_ITERS,
                      column_rounds: int = COLUMN_ROUNDS) -> Tuple[float, List[np.ndarray]]:
    """Least tau with x in tau * sum(conv(A_i u {0})), and a split attaining it.

    Column generation when every part can be priced at the LP duals,
    otherwise bisection on tau with alternating projections.
    """
    x = sum_set.check(x)
    parts = sum_set.parts()
    k = len(parts)
    if not np.any(x):
        return 0.0, [np.zeros_like(x) for _ in parts]
    found_by_lp = _column_generation(parts, x, tol, column_rounds)
    if found_by_lp is not None:
        return found_by_lp
    projectors = [_projector(p) for p in parts]

    hi = _single_part_bound(parts, x)
    hi = 1.01 * hi if np.isfinite(hi) and hi > 0 else float(np.linalg.norm(x))
    split = [x / k for _ in parts]
    ok, found = _feasible_split(projectors, x, hi, split, tol, projection_iters)
    doublings = 0
    while not ok:
        if doublings >= _MAX_DOUBLINGS:
            raise InfeasibleError("element lies outside the cone of the sum")
        hi *= 2.0
        doublings += 1
        ok, found = _feasible_split(projectors, x, hi, found, tol, projection_iters)
    split = found
    lo = 0.0
    for it in range(bisection_iters):
        if hi - lo <= tol * max(hi, 1.0):
            break
        mid = 0.5 * (lo + hi)
        ok, found = _feasible_split(projectors, x, mid, split, tol, projection_iters)
        if ok:
            hi, split = mid, found
        else:
            lo = mid
    split = [s.copy() for s in split]
    split[0] = split[0] + (x - sum(split))
    logger.debug(f"sum gauge bisection: value={hi:.9e}, bracket width={hi - lo:.3e}")
    return hi, split


def _northwest_merge(decomps: Sequence[AtomicDecomposition], level: float,
                     shape) -> List[Tuple[float, Atom]]:
    """Pair coefficient lists that each sum to level into composite atoms."""
    zero = Atom(np.zeros(shape), TagKind.GENERIC)
    queues = []
    for d in decomps:
        q = [[c, a] for c, a in d.terms]
        pad = level - d.coefficient_sum()
        if pad > 0:
            q.append([pad, zero])
        queues.append(q)
    heads = [0] * len(queues)
    terms: List[Tuple[float, Atom]] = []
    while all(h < len(q) for h, q in zip(heads, queues)):
        step = min(q[h][0] for h, q in zip(heads, queues))
        if step > 0:
            children = [q[h][1] for h, q in zip(heads, queues)]
            terms.append((float(step), composite([c for c in children if c is not zero], shape)))
        for i, q in enumerate(queues):
            q[heads[i]][0] -= step
            if q[heads[i]][0] <= 0:
                heads[i] += 1
    return terms


class SumSet(AtomicSet):
    """A_1 + ... + A_k."""

    variant = "Sum"

    def __init__(self, parts: Sequence[AtomicSet]):
        if len(parts) < 2:
            raise UsageError("Sum needs at least two parts")
        super().__init__(parts[0].shape)
        for p in parts[1:]:
            self.same_shape(p)
        self._parts = tuple(parts)

    def parts(self) -> Sequence[AtomicSet]:
        return self._parts

    def lineality(self) -> List[np.ndarray]:
        return [d for p in self._parts for d in p.lineality()]

    @property
    def origin_interior(self) -> bool:
        return any(p.origin_interior for p in self._parts)

    @property
    def interior_flag(self) -> bool:
        return self.origin_interior

    def combo_atoms(self) -> Optional[List[Atom]]:
        """Nonzero sums of part atoms and zeros, or None when not small and finite."""
        lists = [p.finite_atoms for p in self._parts]
        if any(l is None for l in lists):
            return None
        if int(np.prod([len(l) + 1 for l in lists])) > MAX_EXACT_SUM_ATOMS:
            return None
        out = []
        for combo in itertools.product(*[[None] + list(l) for l in lists]):
            children = [a for a in combo if a is not None]
            if children:
                out.append(composite(children, self.shape))
        return out

    @property
    def gauge_exact(self) -> bool:
        return self.combo_atoms() is not None

    def gauge(self, x: np.ndarray) -> float:
        x = self.check(x)
        combos = self.combo_atoms()
        if combos is not None:
            value, _ = lp_gauge(atoms_matrix(combos), x.ravel())
            return value
        try:
            value, _ = sum_gauge_numeric(self, x)
        except InfeasibleError:
            return np.inf
        return value

    def support(self, z: np.ndarray) -> float:
        z = self.check(z, "z")
        return float(sum(p.support(z) for p in self._parts))

    def expose(self, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
        z = self.check(z, "z")
        faces = [p.expose(z, k_max, tol) for p in self._parts]
        zero = Atom(np.zeros(self.shape), TagKind.GENERIC)
        options = [f.atoms if f.atoms else [zero] for f in faces]
        atoms = []
        for combo in face_pairings([len(o) for o in options], k_max):
            children = [o[i] for o, i in zip(options, combo)]
            atoms.append(composite([c for c in children if c is not zero], self.shape))
        return ExposedFace(float(sum(f.support_value for f in faces)), atoms, z, tol)

    def decompose(self, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
        x = self.check(x)
        combos = self.combo_atoms()
        if combos is not None:
            value, c = lp_gauge(atoms_matrix(combos), x.ravel())
            if c is None:
                raise NotInConeError("element lies outside the cone of the sum")
            top = c.max(initial=0.0)
            terms = [(float(c[i]), combos[i]) for i in np.flatnonzero(c > tol * max(top, 1e-300))]
            return AtomicDecomposition(terms, None, value)
        try:
            level, split = sum_gauge_numeric(self, x)
        except InfeasibleError as e:
            raise NotInConeError(str(e)) from e
        decomps = [p.decompose(xi, tol) for p, xi in zip(self._parts, split)]
        level = max([level] + [d.coefficient_sum() for d in decomps])
        terms = _northwest_merge(decomps, level, self.shape)
        recession_parts = [d.recession_part for d in decomps if d.recession_part is not None]
        recession = None
        if recession_parts:
            element = sum(c * a.element for c, a in recession_parts)
            recession = (1.0, Atom(element, TagKind.RECESSION))
        return AtomicDecomposition(terms, recession, level, minimal=False)

    def params(self) -> Dict[str, Any]:
        return {}

    @classmethod
    def from_params(cls, params: Dict[str, Any], parts: Sequence[AtomicSet]) -> 'SumSet':
        return cls(parts)
