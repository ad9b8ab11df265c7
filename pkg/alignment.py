"""
Alignment of primal-dual pairs and the operations built on it.

A pair (x, z) is aligned with respect to an atomic set when the polar
inequality <x, z> <= gauge(x) * support(z) holds with equality. Aligned
pairs are exactly those whose minimal decompositions use only atoms exposed
by z.
"""
import itertools
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from atomsets import Atom, AtomicDecomposition, AtomicSet, ExposedFace, TagKind, Transformed
from config import (BRUTEFORCE_MAX_ATOMS, BRUTEFORCE_MAX_DIM, DECOMPOSE_TOL, FACE_TOL,
                    MOREAU_GOLDEN_ITERS, RANK_ONE_ANGLE_TOL)
from elements import inner
from errors import BothInfiniteError, NoProjectorError, TooLargeError
from linalg_kernels import LinearMap
from logger import logger

_GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


def gauge(desc: AtomicSet, x: np.ndarray) -> float:
    return desc.gauge(x)


def support(desc: AtomicSet, z: np.ndarray) -> float:
    return desc.support(z)


def expose(desc: AtomicSet, z: np.ndarray, k_max: int = 1, tol: float = FACE_TOL) -> ExposedFace:
    return desc.expose(z, k_max, tol)


def decompose(desc: AtomicSet, x: np.ndarray, tol: float = DECOMPOSE_TOL) -> AtomicDecomposition:
    return desc.decompose(x, tol)


def transform(desc: AtomicSet, M: LinearMap, mode: str = "image") -> AtomicSet:
    return Transformed(desc, M, mode)


def polar_inequality_slack(desc: AtomicSet, x: np.ndarray, z: np.ndarray) -> float:
    """gauge(x) * support(z) - <x, z>, with 0 * inf = 0 and inf elsewhere."""
    g = desc.gauge(x)
    s = desc.support(z)
    if g == 0.0 or s == 0.0:
        return -inner(x, z)
    if not (np.isfinite(g) and np.isfinite(s)):
        return np.inf
    return g * s - inner(x, z)


def alignment_residual(desc: AtomicSet, x: np.ndarray, z: np.ndarray) -> float:
    """gauge(x) * support(z) - <x, z>, zero exactly for aligned pairs.

    When either factor is zero the product is taken as zero, 0 * inf included,
    and the residual is |<x, z>|. Raises BothInfiniteError when a nonzero
    factor meets an infinite one.
    """
    g = desc.gauge(x)
    s = desc.support(z)
    ip = inner(x, z)
    if g == 0.0 or s == 0.0:
        return abs(ip)
    if not (np.isfinite(g) and np.isfinite(s)):
        raise BothInfiniteError(f"gauge={g}, support={s}: pair outside the polar domain")
    r = g * s - ip
    if r < -1e-10 * (1.0 + g * s):
        logger.warning(f"polar inequality violated by {r:.3e}")
    return max(r, 0.0)


def _rank_one_frames(face: ExposedFace, kind: TagKind) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    atoms = [a for a in face.atoms if a.kind == kind and a.u is not None]
    if not atoms:
        return None, None
    U = np.column_stack([a.u for a in atoms])
    V = np.column_stack([a.v if a.v is not None else a.u for a in atoms])
    return U, V


def _element_match(a: Atom, b: Atom, tol: float) -> bool:
    return a.element.shape == b.element.shape and \
        float(np.linalg.norm(a.element - b.element)) <= tol * max(1.0, float(np.linalg.norm(b.element)))


def atom_in_face(atom: Atom, face: ExposedFace, tol: float = RANK_ONE_ANGLE_TOL) -> bool:
    """Tag-aware membership of an atom in an exposed face."""
    if atom.kind in (TagKind.SIGNED_BASIS, TagKind.TV_COLUMN):
        return any(b.kind == atom.kind and b.index == atom.index and b.sign == atom.sign
                   for b in face.atoms)
    if atom.kind in (TagKind.RANK_ONE, TagKind.SYM_RANK_ONE) and atom.u is not None:
        U, V = _rank_one_frames(face, atom.kind)
        if U is None:
            return False
        u = atom.u / np.linalg.norm(atom.u)
        v = atom.v / np.linalg.norm(atom.v) if atom.v is not None else u
        cu = U.T @ u
        cv = V.T @ v
        off_u = float(np.linalg.norm(u - U @ cu))
        off_v = float(np.linalg.norm(v - V @ cv))
        return off_u <= tol and off_v <= tol and float(np.linalg.norm(cu - cv)) <= tol
    if atom.kind == TagKind.GROUP:
        return any(b.kind == TagKind.GROUP and b.index == atom.index and _element_match(atom, b, tol)
                   for b in face.atoms)
    return any(_element_match(atom, b, tol) for b in face.atoms)


def is_supported_by(decomp: AtomicDecomposition, face: ExposedFace,
                    tol: float = RANK_ONE_ANGLE_TOL) -> bool:
    """True when every atom of the decomposition lies in the face."""
    return all(atom_in_face(a, face, tol) for _, a in decomp.terms)


def restrict_to_support(decomp: AtomicDecomposition, face: ExposedFace,
                        tol: float = RANK_ONE_ANGLE_TOL) -> AtomicDecomposition:
    """Keep only the terms whose atoms lie in the face."""
    kept = [(c, a) for c, a in decomp.terms if atom_in_face(a, face, tol)]
    return AtomicDecomposition(kept, decomp.recession_part, float(sum(c for c, _ in kept)),
                               decomp.minimal)


def gauge_bruteforce(atoms: Sequence[np.ndarray], x: np.ndarray, tol: float = 1e-9) -> float:
    """Exact min sum(c) over c >= 0 with sum c_a a = x, by enumerating atom subsets."""
    elements = [np.asarray(a.element if isinstance(a, Atom) else a, dtype=float).ravel() for a in atoms]
    x = np.asarray(x, dtype=float).ravel()
    dim = x.size
    if len(elements) > BRUTEFORCE_MAX_ATOMS or dim > BRUTEFORCE_MAX_DIM:
        raise TooLargeError(f"gauge_bruteforce limited to {BRUTEFORCE_MAX_ATOMS} atoms "
                            f"in dimension {BRUTEFORCE_MAX_DIM}")
    if not np.any(x):
        return 0.0
    best = np.inf
    residual_tol = tol * (1.0 + float(np.linalg.norm(x)))
    for size in range(1, min(len(elements), dim + 1) + 1):
        for subset in itertools.combinations(range(len(elements)), size):
            A = np.column_stack([elements[i] for i in subset])
            if np.linalg.matrix_rank(A) < size:
                continue
            c, *_ = np.linalg.lstsq(A, x, rcond=None)
            if np.any(c < -tol) or np.linalg.norm(A @ c - x) > residual_tol:
                continue
            best = min(best, float(np.maximum(c, 0.0).sum()))
    return best


def _golden_minimize(phi: Callable[[float], float], lo: float, hi: float, iters: int) -> Tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = phi(c), phi(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = phi(d)
    return a, b


def moreau_decompose(desc: AtomicSet, s: np.ndarray, alpha: float,
                     iters: int = MOREAU_GOLDEN_ITERS) -> Tuple[float, np.ndarray, float, np.ndarray]:
    """Split (s, alpha) = alpha_x (x, 1) + alpha_z (z, -1) with x in C and z in the polar of C.

    The first piece is the projection onto the cone over C x {1}; its ray scale
    t is found by golden-section search and polished with a root of the
    derivative.
    """
    if not desc.has_projector:
        raise NoProjectorError(f"{desc.variant} has no projector")
    s = desc.check(s, "s")
    alpha = float(alpha)

    if desc.support(s) + alpha <= 0.0:
        t = 0.0
    else:
        def phi(t: float) -> float:
            if t <= 0.0:
                return float(np.sum(s * s)) + alpha * alpha
            x = desc.project(s / t)
            return float(np.sum((s - t * x) ** 2)) + (alpha - t) ** 2

        def slope(t: float) -> float:
            x = desc.project(s / t)
            return inner(x, s - t * x) + (alpha - t)

        hi = float(np.sqrt(np.sum(s * s) + alpha * alpha)) + 1.0
        a, b = _golden_minimize(phi, 0.0, hi, iters)
        t = 0.5 * (a + b)
        lo_t, hi_t = max(a, 1e-300), b
        if lo_t < hi_t and t > 0:
            try:
                if slope(lo_t) > 0 > slope(hi_t):
                    t = brentq(slope, lo_t, hi_t, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            except ValueError:
                pass
        if phi(t) > phi(0.0):
            t = 0.0

    if t > 0.0:
        x = desc.project(s / t)
    else:
        x = np.zeros(desc.shape)
    alpha_x = t
    alpha_z = t - alpha
    rest = s - t * x
    if alpha_z > 0.0:
        z = rest / alpha_z
    else:
        alpha_z = 0.0
        if np.linalg.norm(rest) > 1e-8 * (1.0 + np.linalg.norm(s)):
            logger.warning(f"Moreau polar part has zero scale but residual {np.linalg.norm(rest):.3e}")
        z = np.zeros(desc.shape)
    logger.debug(f"Moreau split: alpha_x={alpha_x:.6e}, alpha_z={alpha_z:.6e}")
    return alpha_x, x, alpha_z, z
