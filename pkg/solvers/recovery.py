"""
Second stage of the two-stage method: recover primal components from a dual
certificate by solving the problem reduced to the exposed faces.

A part whose gap-safe band covers the whole set stays an element-space block.
Least-squares objectives first get a fully corrective atom pass; block FISTA
follows when that pass does not close the gap, and under the identity
operator an exact fit is completed on a part with room under its level.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import nnls

from atomsets import AtomicSet, ExposedFace, TagKind
from config import (FACE_TOL, ORTHONORMAL_TOL, RECOVERY_FACE_K, RECOVERY_GAP_TOL, RECOVERY_ITERS,
                    RECOVERY_ROUNDS, RECOVERY_SLACK)
from elements import MaskedMatrix
from errors import AtomkitError, EmptyFaceError, NotOrthonormalError, ShapeMismatchError
from linalg_kernels import power_norm_estimate, project_capped_simplex, project_trace_capped_psd
from logger import logger
from solvers.conditional_gradient import DualCertificate
from solvers.objectives import SmoothObjective


def safe_face_tol(gap: float, support_value: float) -> float:
    """Relative face band that keeps every atom of the optimal support.

    With least squares and atoms of unit Euclidean norm, ||z - z_opt|| <=
    sqrt(2 gap), so optimal atoms score within 2 sqrt(2 gap) of sigma(z).
    """
    if support_value <= 0 or not np.isfinite(support_value):
        return 1.0
    band = 2.0 * np.sqrt(2.0 * max(gap, 0.0)) / support_value
    return float(min(1.0, max(FACE_TOL, band)))


class _FaceBlock:
    """Parameterization of the cone of one exposed face with gauge <= tau."""

    def __init__(self, face: ExposedFace, shape):
        self.face = face
        self.shape = shape
        atoms = face.atoms
        spectral = bool(atoms) and all(
            a.kind in (TagKind.RANK_ONE, TagKind.SYM_RANK_ONE) and a.u is not None
            and a.element.shape == (a.u.size, (a.v if a.v is not None else a.u).size)
            and np.allclose(a.element, np.outer(a.u, a.v if a.v is not None else a.u))
            for a in atoms)
        if spectral:
            U = np.column_stack([a.u for a in atoms])
            V = np.column_stack([a.v if a.v is not None else a.u for a in atoms])
            self.U, self.V = U, V
            self.kind = "spectral"
            self.param = np.zeros((U.shape[1], V.shape[1]))
            self.norm_sq = 1.0
        else:
            self.kind = "finite"
            self.A = np.column_stack([a.element.ravel() for a in atoms]) if atoms \
                else np.zeros((int(np.prod(shape)), 0))
            self.param = np.zeros(self.A.shape[1])
            self.norm_sq = float(np.linalg.norm(self.A, 2)) ** 2 if atoms else 0.0

    def synthesize(self, p: np.ndarray) -> np.ndarray:
        if self.kind == "spectral":
            return self.U @ p @ self.V.T
        return (self.A @ p).reshape(self.shape)

    def pull(self, G: np.ndarray) -> np.ndarray:
        if self.kind == "spectral":
            P = self.U.T @ G @ self.V
            return 0.5 * (P + P.T)
        return self.A.T @ G.ravel()

    def symmetrize(self, p: np.ndarray) -> np.ndarray:
        return 0.5 * (p + p.T) if self.kind == "spectral" else p

    def project(self, p: np.ndarray, tau: float) -> np.ndarray:
        if self.kind == "spectral":
            return project_trace_capped_psd(0.5 * (p + p.T), tau)
        return project_capped_simplex(p, tau) if p.size else p

    def best_atom(self, G: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
        """Best scoring element of the face cone's generators at G."""
        if self.kind == "spectral":
            vals, vecs = np.linalg.eigh(self.pull(G))
            w = vecs[:, -1]
            return float(vals[-1]), np.outer(self.U @ w, self.V @ w)
        if not self.A.shape[1]:
            return 0.0, None
        scores = self.A.T @ G.ravel()
        j = int(np.argmax(scores))
        return float(scores[j]), self.A[:, j].reshape(self.shape)

    def support(self, G: np.ndarray) -> float:
        if self.kind == "spectral":
            return float(np.linalg.eigvalsh(self.pull(G))[-1])
        return float(np.max(self.A.T @ G.ravel())) if self.A.shape[1] else 0.0

    def weights(self, component: np.ndarray, p: np.ndarray) -> np.ndarray:
        if self.kind == "spectral":
            return np.maximum(np.linalg.eigvalsh(0.5 * (p + p.T)), 0.0)
        return np.asarray(p, dtype=float)


class _OpenBlock:
    """The whole level set tau * A of one part, kept in element space."""

    kind = "open"
    norm_sq = 1.0

    def __init__(self, desc: AtomicSet, face: ExposedFace, shape):
        self.desc = desc
        self.face = face
        self.shape = shape
        self.param = np.zeros(shape)

    def synthesize(self, p: np.ndarray) -> np.ndarray:
        return p

    def pull(self, G: np.ndarray) -> np.ndarray:
        return G

    def symmetrize(self, p: np.ndarray) -> np.ndarray:
        return p

    def project(self, p: np.ndarray, tau: float) -> np.ndarray:
        return tau * self.desc.project(p / tau)

    def best_atom(self, G: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
        face = self.desc.expose(G, 1)
        if not face.atoms or not np.isfinite(face.support_value):
            return float(face.support_value), None
        return float(face.support_value), face.atoms[0].element

    def support(self, G: np.ndarray) -> float:
        return float(self.desc.support(G))

    def weights(self, component: np.ndarray, p: np.ndarray) -> np.ndarray:
        try:
            return np.array([c for c, _ in self.desc.decompose(component).terms], dtype=float)
        except AtomkitError:
            return np.zeros(0)


@dataclass
class RecoveryResult:
    """Recovered components with the certificate -grad f at their sum.

    coefficients[i] holds the nonnegative weights of the atoms that
    synthesize component i; gap is the duality gap of the reduced problem.
    """
    components: List[np.ndarray]
    coefficients: List[np.ndarray]
    faces: List[ExposedFace]
    objective: float
    iterations: int
    face_tols: List[float] = field(default_factory=list)
    certificate: Optional[np.ndarray] = None
    gap: float = np.inf
    method: str = ""

    @property
    def total(self) -> np.ndarray:
        out = self.components[0].copy()
        for c in self.components[1:]:
            out = out + c
        return out


@dataclass
class _Candidate:
    components: List[np.ndarray]
    weights: List[np.ndarray]
    objective: float
    gap: float
    method: str


def _reduced_gap(blocks, components: Sequence[np.ndarray], g: np.ndarray, tau: float) -> float:
    return float(sum(tau * max(b.support(g), 0.0) - float(np.sum(x * g))
                     for b, x in zip(blocks, components)))


def _candidate(blocks, obj: SmoothObjective, components, weights, tau: float, method: str) -> _Candidate:
    total = sum(components)
    gap = _reduced_gap(blocks, components, -obj.grad(total), tau)
    return _Candidate(list(components), list(weights), obj.eval(total), gap, method)


def _atom_pass(blocks, obj: SmoothObjective, tau: float, rounds: int, gap_tol: float):
    """Fully corrective pass: NNLS over the best atom of every block, round after round.

    Returns (components, weights, rounds), or None once some part needs a
    weight sum above tau.
    """
    op = obj.operator
    target = np.asarray(obj.target, dtype=float).ravel()
    k = len(blocks)
    components = [np.zeros(obj.shape) for _ in blocks]
    atoms: List[np.ndarray] = []
    owners: List[int] = []
    images: List[np.ndarray] = []
    keys = set()
    c = np.zeros(0)
    r = 0
    for r in range(rounds):
        g = -obj.grad(sum(components))
        if _reduced_gap(blocks, components, g, tau) <= gap_tol:
            break
        grew = False
        for i, block in enumerate(blocks):
            score, element = block.best_atom(g)
            if element is None or not score > 0:
                continue
            key = (i, np.round(element, 12).tobytes())
            if key in keys:
                continue
            keys.add(key)
            atoms.append(element)
            owners.append(i)
            images.append(op.apply(element).ravel())
            grew = True
        if not grew:
            break
        Q, R = np.linalg.qr(np.column_stack(images))
        c, _ = nnls(R, Q.T @ target)
        owner = np.asarray(owners)
        sums = [float(c[owner == i].sum()) for i in range(k)]
        if max(sums) > tau * (1.0 + 1e-12):
            logger.debug(f"atom pass: weight sums {sums} exceed tau={tau:.6e} in round {r + 1}")
            return None
        components = [np.zeros(obj.shape) for _ in blocks]
        for cj, i, a in zip(c, owners, atoms):
            if cj > 0:
                components[i] = components[i] + cj * a
    owner = np.asarray(owners, dtype=int)
    weights = [c[owner == i] for i in range(k)]
    return components, weights, r + 1


def _reduced_lipschitz(blocks, obj: SmoothObjective) -> float:
    """Largest eigenvalue of the reduced Hessian, by power iteration."""
    if obj.hessian_apply is None:
        return obj.smoothness() * max(sum(b.norm_sq for b in blocks), 1e-300)
    sizes = [b.param.size for b in blocks]
    cuts = np.cumsum(sizes)[:-1]

    def gram(v):
        params = [b.symmetrize(p.reshape(b.param.shape)) for b, p in zip(blocks, np.split(v, cuts))]
        H = obj.hessian_apply(sum(b.synthesize(p) for b, p in zip(blocks, params)))
        return np.concatenate([b.pull(H).ravel() for b in blocks])

    return 1.05 * max(power_norm_estimate(gram, (int(sum(sizes)),)), 1e-300)


def _fista(blocks, obj: SmoothObjective, tau: float, iters: int, step: float):
    params = [b.param.copy() for b in blocks]
    extra = [p.copy() for p in params]
    t = 1.0
    k = -1
    for k in range(iters):
        x = sum(b.synthesize(p) for b, p in zip(blocks, extra))
        G = obj.grad(x)
        nxt = [b.project(p - step * b.pull(G), tau) for b, p in zip(blocks, extra)]
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        change = sum(float(np.sum((n - p) ** 2)) for n, p in zip(nxt, params))
        extra = [n + ((t - 1.0) / t_next) * (n - p) for n, p in zip(nxt, params)]
        params, t = nxt, t_next
        if change <= 1e-30:
            break
    return params, k + 1


def _complete(blocks, obj: SmoothObjective, components: List[np.ndarray], tau: float):
    """Hand the whole remaining residual to an open part whose level still allows it."""
    op = obj.operator
    if op is None or op.kind != "identity" or obj.target is None:
        return None
    for i, block in enumerate(blocks):
        if block.kind != "open":
            continue
        rest = obj.target - sum(x for j, x in enumerate(components) if j != i)
        try:
            level = block.desc.gauge(rest)
        except AtomkitError:
            continue
        if level <= tau * (1.0 + 1e-12):
            out = list(components)
            out[i] = rest
            return i, out
    return None


def _run_fista(blocks, obj: SmoothObjective, cap: float, tau: float, iters: int, step: float,
               method: str) -> Tuple[_Candidate, int]:
    params, n = _fista(blocks, obj, cap, iters, step)
    components = [b.synthesize(p) for b, p in zip(blocks, params)]
    weights = [b.weights(x, p) for b, x, p in zip(blocks, components, params)]
    return _candidate(blocks, obj, components, weights, tau, method), n


def recover_from_certificate(obj: SmoothObjective, cert: DualCertificate, descs: Sequence[AtomicSet],
                             tau: float, face_tol: Optional[float] = None,
                             k_max: int = RECOVERY_FACE_K, iters: int = RECOVERY_ITERS,
                             rounds: int = RECOVERY_ROUNDS, slack: float = RECOVERY_SLACK) -> RecoveryResult:
    """Minimize f(sum x_i) over x_i in the cone of the atoms part i exposes at z_star.

    Each x_i is limited to coefficient sum (trace for spectral faces) <= tau.
    face_tol defaults to the gap-safe band of each part; a part whose band
    reaches 1, or whose face hits k_max atoms, is searched over its whole
    level set when it has a projector. When the fit can be exact, a second
    FISTA run with levels tau / (1 + slack) leaves room to complete it.
    """
    z = cert.z_star
    shape = obj.shape
    faces, tols, blocks = [], [], []
    for desc in descs:
        sup = desc.support(z)
        tol = face_tol if face_tol is not None else safe_face_tol(cert.gap_at_exit, sup)
        face = desc.expose(z, k_max, tol)
        whole = desc.has_projector and (tol >= 1.0 or len(face.atoms) >= k_max)
        blocks.append(_OpenBlock(desc, face, shape) if whole else _FaceBlock(face, shape))
        faces.append(face)
        tols.append(tol)
    if all(b.kind != "open" and not f.atoms for b, f in zip(blocks, faces)):
        raise EmptyFaceError("no part exposes an atom at the certificate")

    gap_tol = RECOVERY_GAP_TOL * max(obj.eval(np.zeros(shape)), 1e-300)
    candidates: List[_Candidate] = []
    n_iter = 0
    if obj.operator is not None and obj.target is not None:
        found = _atom_pass(blocks, obj, tau, rounds, gap_tol)
        if found is not None:
            components, weights, n_iter = found
            candidates.append(_candidate(blocks, obj, components, weights, tau, "atoms"))
    if not candidates or candidates[0].gap > gap_tol:
        step = 1.0 / _reduced_lipschitz(blocks, obj)
        first, n = _run_fista(blocks, obj, tau, tau, iters, step, "fista")
        n_iter += n
        candidates.append(first)
        completed = _complete(blocks, obj, first.components, tau)
        if completed is None and slack > 0 and first.objective - first.gap <= 0 \
                and any(b.kind == "open" for b in blocks):
            tight, n = _run_fista(blocks, obj, tau / (1.0 + slack), tau, iters, step, "fista")
            n_iter += n
            candidates.append(tight)
            completed = _complete(blocks, obj, tight.components, tau)
            base = tight
        else:
            base = first
        if completed is not None:
            i, components = completed
            weights = list(base.weights)
            weights[i] = blocks[i].weights(components[i], components[i])
            candidates.append(_candidate(blocks, obj, components, weights, tau, "completed"))

    best = min(candidates, key=lambda c: c.objective)
    total = sum(best.components)
    logger.info(f"recovery: parts={len(descs)}, blocks={[b.kind for b in blocks]}, "
                f"face sizes={[len(f.atoms) for f in faces]}, method={best.method}, "
                f"objective={best.objective:.6e}, gap={best.gap:.3e}, iterations={n_iter}")
    return RecoveryResult(best.components, best.weights, faces, best.objective, n_iter, tols,
                          -obj.grad(total), best.gap, best.method)

def _check_orthonormal(M: np.ndarray, name: str) -> None:
    if M.ndim != 2 or not np.allclose(M.T @ M, np.eye(M.shape[1]), atol=ORTHONORMAL_TOL):
        raise NotOrthonormalError(f"{name} must have orthonormal columns")


def psd_reduced_solve(U: np.ndarray, V: np.ndarray, omega: MaskedMatrix, b: np.ndarray, tau: float,
                      iters: int = RECOVERY_ITERS) -> np.ndarray:
    """argmin 1/2 ||Omega(U S V^T) - b||^2 over S PSD with trace(S) <= tau."""
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    _check_orthonormal(U, "U")
    _check_orthonormal(V, "V")
    if U.shape[1] != V.shape[1] or (U.shape[0], V.shape[0]) != tuple(omega.shape):
        raise ShapeMismatchError(f"U {U.shape}, V {V.shape} do not fit mask shape {omega.shape}")
    b = np.asarray(b, dtype=float)
    Ur = U[omega.rows]
    Vc = V[omega.cols]

    def sample(S):
        return np.einsum('ij,jk,ik->i', Ur, S, Vc)

    def pull(r):
        G = Ur.T @ (r[:, None] * Vc)
        return 0.5 * (G + G.T)

    ell = U.shape[1]
    S = np.zeros((ell, ell))
    Y = S.copy()
    t = 1.0
    k = -1
    threshold = 1e-6 * max(float(np.linalg.norm(b)), 1e-300)
    for k in range(iters):
        S_next = project_trace_capped_psd(Y - pull(sample(Y) - b), tau)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Y = S_next + ((t - 1.0) / t_next) * (S_next - S)
        stationarity = float(np.linalg.norm(S_next - S))
        S, t = S_next, t_next
        if stationarity <= 1e-3 * threshold:
            break
    logger.debug(f"psd reduced solve: ell={ell}, iterations={k + 1}")
    return S
