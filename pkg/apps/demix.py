"""
Morphological component demixing: b = sparse + low rank + DCT-sparse noise.

Stage one runs dual conditional gradient on 1/2 ||x - b||^2 over the sum of
the three atomic sets; stage two splits the fit across the faces each set
exposes at the resulting certificate.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from alignment import alignment_residual
from atomsets import AtomicSet, NuclearBall, SignedBasis, Transformed
from config import (DEMIX_DCT_FRAC, DEMIX_ITERS, DEMIX_MAX_COHERENCE, DEMIX_MAX_REGENERATE,
                    DEMIX_NOISE_GAUGE, DEMIX_RANK, DEMIX_SIZE, DEMIX_SPARSE_FRAC, DEMIX_TAU_FACTOR)
from errors import BadFractionError, UsageError
from linalg_kernels import LinearMap, dct_apply, dct_matrix
from logger import logger
from set_calculus import sum_descriptor
from solvers import (DualCertificate, RecoveryResult, dual_cg_least_squares, least_squares_objective,
                     recover_from_certificate)

COMPONENT_NAMES = ("sparse", "lowrank", "dct")
_MAX_FRACTION = 0.2


@dataclass
class DemixInstance:
    size: int
    x_s: np.ndarray
    x_l: np.ndarray
    eps: np.ndarray
    b: np.ndarray
    seed: int
    sparse_frac: float
    rank: int
    dct_frac: float
    gauges: Dict[str, float] = field(default_factory=dict)
    coherence: float = 0.0

    @property
    def truth(self) -> List[np.ndarray]:
        return [self.x_s, self.x_l, self.eps]


@dataclass
class DemixResult:
    components: List[np.ndarray]
    metrics: Dict[str, Any]
    images: Dict[str, np.ndarray]
    certificate: DualCertificate
    recovery: RecoveryResult


def demix_parts(size: int) -> List[AtomicSet]:
    """1-norm ball, nuclear-norm ball and the 1-norm ball seen through the inverse DCT."""
    shape = (size, size)
    return [SignedBasis(shape), NuclearBall(size, size),
            Transformed(SignedBasis(shape), LinearMap.dct(shape).adjoint(), "image")]


def block_signs(size: int, width: int) -> np.ndarray:
    return np.where((np.arange(size) // max(width, 1)) % 2 == 0, 1.0, -1.0)


def _chessboard(size: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    x = np.zeros((size, size))
    for k in range(rank):
        width = size // 2 ** (k + 1)
        p = block_signs(size, width) if width >= 1 else rng.choice([-1.0, 1.0], size)
        x += np.outer(p, p) / (k + 1)
    return x / np.linalg.norm(x)


def _spikes(size: int, count: int, rng: np.random.Generator) -> np.ndarray:
    x = np.zeros(size * size)
    if count:
        idx = rng.choice(size * size, size=count, replace=False)
        x[idx] = rng.choice([-1.0, 1.0], count) * rng.uniform(1.0, 2.0, count)
    return x.reshape(size, size)


def planted_coherence(x_s: np.ndarray, x_l: np.ndarray, dct_coeffs: np.ndarray) -> float:
    """Largest |<a, a'>| between atoms of two different planted supports."""
    size = x_l.shape[0]
    U, s, Vt = np.linalg.svd(x_l)
    keep = s > 1e-12 * max(s[0], 1e-300)
    U, Vt = U[:, keep], Vt[keep]
    spikes = np.argwhere(x_s != 0)
    freqs = np.argwhere(dct_coeffs != 0)
    worst = 0.0
    if spikes.size and U.size:
        worst = max(worst, float(np.max(np.abs(U[spikes[:, 0]] * Vt.T[spikes[:, 1]]))))
    if freqs.size:
        D = dct_matrix(size)
        if U.size:
            cu = D @ U
            cv = D @ Vt.T
            worst = max(worst, float(np.max(np.abs(cu[freqs[:, 0]] * cv[freqs[:, 1]]))))
        if spikes.size:
            basis = np.abs(D[freqs[:, 0]][:, spikes[:, 0]] * D[freqs[:, 1]][:, spikes[:, 1]])
            worst = max(worst, float(basis.max()))
    return worst


def gen_demix_instance(size: int = DEMIX_SIZE, sparse_frac: float = DEMIX_SPARSE_FRAC,
                       rank: int = DEMIX_RANK, dct_frac: float = DEMIX_DCT_FRAC,
                       seed: int = 0) -> DemixInstance:
    """Seeded instance; the seed advances until the planted supports are incoherent."""
    for name, frac in (("sparse_frac", sparse_frac), ("dct_frac", dct_frac)):
        if not 0.0 <= frac <= _MAX_FRACTION:
            raise BadFractionError(f"{name} must lie in [0, {_MAX_FRACTION}], got {frac}")
    if size < 4 or rank < 1 or rank > size // 4:
        raise UsageError(f"need size >= 4 and 1 <= rank <= size/4, got size={size}, rank={rank}")

    for attempt in range(DEMIX_MAX_REGENERATE):
        effective = seed + attempt
        rng = np.random.default_rng(effective)
        x_l = _chessboard(size, rank, rng)
        nuclear = float(np.linalg.svd(x_l, compute_uv=False).sum())
        x_s = _spikes(size, int(round(sparse_frac * size * size)), rng)
        if np.any(x_s):
            x_s *= nuclear / np.abs(x_s).sum()
        coeffs = _spikes(size, int(round(dct_frac * size * size)), rng)
        if np.any(coeffs):
            coeffs *= DEMIX_NOISE_GAUGE * nuclear / np.abs(coeffs).sum()
        coherence = planted_coherence(x_s, x_l, coeffs)
        if coherence <= DEMIX_MAX_COHERENCE:
            break
        logger.info(f"demix seed {effective}: coherence {coherence:.3f} too high, regenerating")
    else:
        raise UsageError(f"no incoherent instance within {DEMIX_MAX_REGENERATE} seeds from {seed}")

    eps = dct_apply(coeffs, "inverse")
    b = x_s + x_l + eps
    gauges = {"sparse": float(np.abs(x_s).sum()), "lowrank": nuclear,
              "dct": float(np.abs(coeffs).sum())}
    return DemixInstance(size, x_s, x_l, eps, b, effective, sparse_frac, rank, dct_frac, gauges, coherence)


def default_tau(inst: DemixInstance) -> float:
    return DEMIX_TAU_FACTOR * max(inst.gauges.values())


def _relative_error(x: np.ndarray, truth: np.ndarray) -> float:
    scale = float(np.linalg.norm(truth))
    err = float(np.linalg.norm(x - truth))
    return err / scale if scale > 0 else err


def run_mca_demix(inst: DemixInstance, tau: Optional[float] = None, iters: int = DEMIX_ITERS) -> DemixResult:
    """Two-stage demixing of inst.b into sparse, low-rank and DCT-sparse parts.

    Alignment of each component is measured against -grad f at the recovered
    sum, next to its scale 1 + gauge * support.
    """
    if tau is None:
        tau = default_tau(inst)
    if not tau > 0:
        raise UsageError(f"tau must be positive, got {tau}")
    shape = inst.b.shape
    parts = demix_parts(inst.size)
    identity = LinearMap.identity(shape)
    logger.info(f"demix stage 1: size={inst.size}, tau={tau:.6e}, iters={iters}")
    cert, trace = dual_cg_least_squares(identity, inst.b, sum_descriptor(parts), tau, max_iter=iters)

    obj = least_squares_objective(identity, inst.b)
    logger.info("demix stage 2: recovering components on the exposed faces")
    recovery = recover_from_certificate(obj, cert, parts, tau)
    components = recovery.components
    bound = trace.final_objective + trace.final_gap
    if recovery.objective > bound:
        logger.warning(f"demix stage 2 objective {recovery.objective:.6e} above the stage 1 "
                       f"bound {bound:.6e}")

    z = recovery.certificate
    metrics: Dict[str, Any] = {
        "tau": tau,
        "seed": inst.seed,
        "stage1_iterations": trace.iterations,
        "stage1_gap": trace.final_gap,
        "stage1_objective": trace.final_objective,
        "stage1_bound": bound,
        "stage2_objective": recovery.objective,
        "stage2_gap": recovery.gap,
        "stage2_method": recovery.method,
        "residual_norm": float(np.linalg.norm(inst.b - recovery.total)),
    }
    for name, part, x, truth, tol in zip(COMPONENT_NAMES, parts, components, inst.truth, recovery.face_tols):
        gauge = part.gauge(x)
        metrics[f"{name}_relative_error"] = _relative_error(x, truth)
        metrics[f"{name}_alignment"] = alignment_residual(part, x, z)
        metrics[f"{name}_alignment_scale"] = 1.0 + gauge * part.support(z)
        metrics[f"{name}_face_tol"] = tol
        metrics[f"{name}_gauge"] = gauge
    images = {"observed": inst.b, "sparse": components[0], "lowrank": components[1],
              "dct": components[2], "residual": inst.b - recovery.total}
    return DemixResult(components, metrics, images, cert, recovery)
