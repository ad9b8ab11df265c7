"""
Primal and dual conditional-gradient (Frank-Wolfe) methods.

Both methods pick, at each iteration, an atom exposed by the negative
gradient z and stop once the gap <tau a - x, z> falls below eps. The dual
variant for least squares never forms the primal iterate: it keeps the
residual R = b - A x and the image Q = A x only.
"""
import csv
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from atomsets import Atom, AtomicSet, ExposedFace
from config import CG_MAX_ITER, CG_RELATIVE_EPS, FACE_TOL
from elements import inner
from errors import UnboundedSupportError, UsageError
from linalg_kernels import LinearMap
from logger import logger
from solvers.objectives import SmoothObjective, as_linear_map

STEP_RULES = ("exact", "harmonic")
TRACE_COLUMNS = ("k", "gap", "objective", "theta", "atom_tag")


@dataclass
class TraceRecord:
    k: int
    gap: float
    objective: float
    theta: float
    atom_tag: str


@dataclass
class CGTrace:
    """Per-iteration records plus the final state of a run.

    Each record holds the gap and objective at the iterate before the step,
    the step taken and the tag of the chosen atom.
    """
    records: List[TraceRecord] = field(default_factory=list)
    x: Optional[np.ndarray] = None
    residual: Optional[np.ndarray] = None
    image: Optional[np.ndarray] = None
    final_gap: float = np.inf
    final_objective: float = np.inf
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.records)

    def gaps(self) -> np.ndarray:
        return np.array([r.gap for r in self.records])

    def objectives(self) -> np.ndarray:
        return np.array([r.objective for r in self.records])

    def to_rows(self) -> List[Tuple]:
        return [(r.k, r.gap, r.objective, r.theta, r.atom_tag) for r in self.records]

    def write_csv(self, filename: str) -> None:
        with open(filename, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for k, gap, obj, theta, tag in self.to_rows():
                writer.writerow([k, repr(gap), repr(obj), repr(theta), tag])


@dataclass
class DualCertificate:
    """z_star = -grad f at exit, with its support value and exposed face."""
    z_star: np.ndarray
    support_value: float
    gap_at_exit: float
    exposed: ExposedFace


def _lmo(desc: AtomicSet, z: np.ndarray, tau: float) -> Tuple[np.ndarray, Optional[Atom]]:
    """tau times an atom exposed by z, or the origin when no atom attains sigma(z)."""
    face = desc.expose(z, 1, FACE_TOL)
    if not np.isfinite(face.support_value):
        raise UnboundedSupportError("support of the negative gradient is unbounded")
    if not face.atoms:
        return np.zeros(desc.shape), None
    atom = face.atoms[0]
    return tau * atom.element, atom


def _tag(atom: Optional[Atom]) -> str:
    return atom.describe() if atom is not None else "origin"


def default_eps(f0: float) -> float:
    return CG_RELATIVE_EPS * (1.0 + abs(f0))


def primal_cg(obj: SmoothObjective, desc: AtomicSet, tau: float, eps: Optional[float] = None,
              max_iter: int = CG_MAX_ITER, step_rule: str = "exact",
              x0: Optional[np.ndarray] = None) -> Tuple[np.ndarray, CGTrace]:
    """Conditional gradient for min f(x) subject to gauge(x) <= tau.

    Stopping at max_iter returns the iterate with the least objective seen,
    together with its own gap.
    """
    if not tau > 0:
        raise UsageError(f"tau must be positive, got {tau}")
    if step_rule not in STEP_RULES:
        raise UsageError(f"step_rule must be one of {STEP_RULES}, got {step_rule!r}")
    if step_rule == "exact" and obj.quadratic_form is None:
        logger.warning("exact linesearch needs a quadratic form; using the harmonic rule")
        step_rule = "harmonic"

    if x0 is None:
        x, _ = _lmo(desc, -obj.grad(np.zeros(obj.shape)), tau)
    else:
        x = desc.check(x0, "x0").copy()
    if eps is None:
        eps = default_eps(obj.eval(x))
    logger.info(f"primal CG: variant={desc.variant}, tau={tau}, eps={eps:.3e}, rule={step_rule}")

    trace = CGTrace()
    best_x, best_f, best_gap = x, np.inf, np.inf
    for k in range(max_iter):
        z = -obj.grad(x)
        a, atom = _lmo(desc, z, tau)
        d = a - x
        gap = inner(d, z)
        fx = obj.eval(x)
        if fx < best_f:
            best_x, best_f, best_gap = x, fx, gap
        if gap < eps:
            trace.converged = True
            trace.final_gap, trace.final_objective = gap, fx
            break
        if step_rule == "exact":
            curvature = obj.quadratic_form(d)
            theta = min(1.0, gap / curvature) if curvature > 0 else 1.0
        else:
            theta = 2.0 / (k + 2.0)
        trace.records.append(TraceRecord(k, gap, fx, theta, _tag(atom)))
        logger.debug(f"primal CG k={k}: gap={gap:.6e}, f={fx:.6e}, theta={theta:.4f}")
        x = x + theta * d
    else:
        z = -obj.grad(x)
        a, _ = _lmo(desc, z, tau)
        fx = obj.eval(x)
        if fx < best_f:
            best_x, best_f, best_gap = x, fx, inner(a - x, z)
        x = best_x
        trace.final_gap, trace.final_objective = best_gap, best_f
        logger.warning(f"primal CG stopped at max_iter={max_iter} with gap {trace.final_gap:.3e}")
    trace.x = x
    logger.info(f"primal CG done: iterations={trace.iterations}, gap={trace.final_gap:.3e}")
    return x, trace


def duality_gap(desc: AtomicSet, x: np.ndarray, z: np.ndarray, alpha_star: float) -> float:
    """alpha_star * sigma(z) - <x, z>, an upper bound on f(x) - f(x*)."""
    s = desc.support(z)
    if not np.isfinite(s):
        raise UnboundedSupportError("support of z is unbounded")
    return alpha_star * s - inner(x, z)


RankOneSampler = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


def dual_cg_least_squares(A: Union[np.ndarray, LinearMap], b: np.ndarray, desc: AtomicSet, tau: float,
                          eps: Optional[float] = None, max_iter: int = CG_MAX_ITER,
                          rank_one_apply: Optional[RankOneSampler] = None
                          ) -> Tuple[DualCertificate, CGTrace]:
    """Conditional gradient on 1/2 ||A x - b||^2 tracking only R = b - A x and Q = A x.

    rank_one_apply(u, v, scale) returns A(scale * u v^T) without forming the
    matrix; it is used for rank-one atoms when given.
    """
    if not tau > 0:
        raise UsageError(f"tau must be positive, got {tau}")
    op = as_linear_map(A)
    b = np.asarray(b, dtype=float)
    R = b.copy()
    Q = np.zeros_like(b)
    if eps is None:
        eps = default_eps(0.5 * float(np.sum(b * b)))
    logger.info(f"dual CG: variant={desc.variant}, tau={tau}, eps={eps:.3e}")

    trace = CGTrace()
    gap = np.inf
    for k in range(max_iter):
        Z = op.adjoint_apply(R)
        face = desc.expose(Z, 1, FACE_TOL)
        if not np.isfinite(face.support_value):
            raise UnboundedSupportError("support of the negative gradient is unbounded")
        atom = face.atoms[0] if face.atoms else None
        if atom is None:
            image = np.zeros_like(b)
        elif rank_one_apply is not None and atom.u is not None and atom.v is not None:
            image = rank_one_apply(atom.u, atom.v, tau)
        else:
            image = op.apply(tau * atom.element)
        dR = image - Q
        gap = inner(dR, R)
        objective = 0.5 * float(np.sum(R * R))
        if gap < eps:
            trace.converged = True
            break
        theta = min(1.0, gap / float(np.sum(dR * dR)))
        trace.records.append(TraceRecord(k, gap, objective, theta, _tag(atom)))
        logger.debug(f"dual CG k={k}: gap={gap:.6e}, f={objective:.6e}, theta={theta:.4f}")
        R = R - theta * dR
        Q = Q + theta * dR
    else:
        Z = op.adjoint_apply(R)
        face = desc.expose(Z, 1, FACE_TOL)
        atom = face.atoms[0] if face.atoms else None
        if atom is None:
            gap = -inner(Q, R)
        elif rank_one_apply is not None and atom.u is not None and atom.v is not None:
            gap = inner(rank_one_apply(atom.u, atom.v, tau) - Q, R)
        else:
            gap = inner(op.apply(tau * atom.element) - Q, R)
        logger.warning(f"dual CG stopped at max_iter={max_iter} with gap {gap:.3e}")

    trace.residual, trace.image = R, Q
    trace.final_gap = gap
    trace.final_objective = 0.5 * float(np.sum(R * R))
    cert = DualCertificate(Z, face.support_value, gap, face)
    logger.info(f"dual CG done: iterations={trace.iterations}, gap={gap:.3e}")
    return cert, trace
