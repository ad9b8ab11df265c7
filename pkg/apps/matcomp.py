"""
Low-rank matrix completion benchmark: primal against dual conditional gradient.
"""
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from atomsets import NuclearBall
from config import MATCOMP_DENSITY, MATCOMP_ITERS, MATCOMP_NOISE, RANK_ENERGY, RECOVERY_ELL
from elements import MaskedMatrix
from errors import BadDensityError, UsageError, ZeroMatrixError
from linalg_kernels import LinearMap, top_singular_triples
from logger import logger
from solvers import dual_cg_least_squares, least_squares_objective, primal_cg, psd_reduced_solve


@dataclass
class MatCompInstance:
    omega: MaskedMatrix
    B: MaskedMatrix
    m: int
    n: int
    rank: int
    density: float
    noise_scale: float
    seed: int
    planted_nuclear: float

    @property
    def b(self) -> np.ndarray:
        return self.B.values


def true_rank(m: int) -> int:
    """round(m / 100) with halves rounded up, at least 1."""
    return max(1, int(np.floor(m / 100.0 + 0.5)))


def gen_matcomp_instance(m: int, n: int, density: float = MATCOMP_DENSITY, noise: float = MATCOMP_NOISE,
                         seed: int = 0) -> MatCompInstance:
    """B = Omega(U V^T + noise N) with U, V, N standard normal and a uniform mask."""
    if m < 10 or n < 10:
        raise UsageError(f"matrix completion needs m, n >= 10, got {m}x{n}")
    if not 0.0 < density <= 1.0:
        raise BadDensityError(f"density must lie in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    r = true_rank(m)
    U = rng.standard_normal((m, r))
    V = rng.standard_normal((n, r))
    N = rng.standard_normal((m, n))
    count = int(round(density * m * n))
    flat = np.sort(rng.choice(m * n, size=count, replace=False))
    rows, cols = np.divmod(flat, n)
    planted = U @ V.T
    values = (planted + noise * N)[rows, cols]
    omega = MaskedMatrix((m, n), rows, cols, np.ones(count))
    B = omega.with_values(values)
    nuclear = float(np.linalg.svd(planted, compute_uv=False).sum())
    logger.debug(f"matcomp instance {m}x{n}: rank={r}, observed={count}, tau={nuclear:.6e}")
    return MatCompInstance(omega, B, m, n, r, density, noise, seed, nuclear)


def estimate_rank_90(X: Union[np.ndarray, Tuple[np.ndarray, np.ndarray, np.ndarray]],
                     energy: float = RANK_ENERGY) -> int:
    """Smallest k whose top-k singular values carry the given share of the Frobenius norm.

    Accepts a matrix, a factorization (U, S, V) or a vector of singular values.
    """
    if isinstance(X, tuple):
        S = np.asarray(X[1], dtype=float)
        s = np.linalg.svd(S, compute_uv=False) if S.ndim == 2 else np.abs(S)
    else:
        X = np.asarray(X, dtype=float)
        s = np.linalg.svd(X, compute_uv=False) if X.ndim == 2 else np.abs(X)
    s = np.sort(s)[::-1]
    total = float(np.sum(s * s))
    if total == 0.0:
        raise ZeroMatrixError("rank estimate of a zero matrix")
    cumulative = np.cumsum(s * s)
    target = energy * energy * total * (1.0 - 1e-12)
    return int(np.searchsorted(cumulative, target) + 1)


@dataclass
class BenchRow:
    size: int
    residual_primal: float
    rank_primal: int
    time_primal_s: float
    residual_dual: float
    rank_dual: int
    time_dual_s: float
    residual_recovered: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _bench_rank(X, label: str) -> int:
    """90% rank of an iterate, reported as 1 when the iterate is zero."""
    try:
        return estimate_rank_90(X)
    except ZeroMatrixError:
        logger.warning(f"{label} iterate is zero; reporting rank 1")
        return 1


def _bench_one(size: int, iters: int, ell: int, seed: int, density: float, noise: float,
               record_time: bool) -> BenchRow:
    inst = gen_matcomp_instance(size, size, density, noise, seed)
    omega, b, tau = inst.omega, inst.b, inst.planted_nuclear
    A = LinearMap.masked(omega)
    desc = NuclearBall(size, size, seed=seed)
    clock = time.perf_counter

    start = clock()
    x, _ = primal_cg(least_squares_objective(A, b), desc, tau, max_iter=iters,
                     x0=np.zeros((size, size)))
    time_primal = clock() - start
    residual_primal = float(np.linalg.norm(omega.sample(x) - b))

    start = clock()
    cert, trace = dual_cg_least_squares(A, b, desc, tau, max_iter=iters,
                                        rank_one_apply=omega.sample_rank_one)
    residual_recovered = float(np.linalg.norm(b))
    U = V = None
    S = np.zeros(1)
    if trace.iterations > 0:
        k = min(ell, size)
        triples = top_singular_triples(cert.z_star, k, seed=seed)
        U = np.column_stack([t.u for t in triples])
        V = np.column_stack([t.v for t in triples])
        S = psd_reduced_solve(U, V, omega, b, tau)
        residual_recovered = float(np.linalg.norm(omega.sample(U @ S @ V.T) - b))
    rank_dual = _bench_rank((U, S, V), "dual")
    time_dual = clock() - start
    residual_dual = float(np.linalg.norm(trace.residual))

    row = BenchRow(size, residual_primal, _bench_rank(x, "primal"), time_primal if record_time else 0.0,
                   residual_dual, rank_dual, time_dual if record_time else 0.0, residual_recovered)
    logger.info(f"bench size={size}: primal={residual_primal:.6f} (rank {row.rank_primal}), "
                f"dual={residual_dual:.6f} (rank {rank_dual})")
    return row


def run_matcomp_benchmark(sizes: Sequence[int], iters: int = MATCOMP_ITERS, ell: int = RECOVERY_ELL,
                          seed: int = 0, jobs: int = 1, record_time: bool = True,
                          density: float = MATCOMP_DENSITY, noise: float = MATCOMP_NOISE) -> List[BenchRow]:
    """One row per size, in input order, each on an independent seeded instance."""
    if jobs < 1:
        raise UsageError(f"jobs must be >= 1, got {jobs}")
    args = [(int(s), iters, ell, seed, density, noise, record_time) for s in sizes]
    if jobs == 1 or len(args) <= 1:
        return [_bench_one(*a) for a in args]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda a: _bench_one(*a), args))
