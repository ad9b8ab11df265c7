"""
Property suites runnable from the command line.

Each suite draws seeded random instances and counts how many trials satisfy
its property. Reduced trial counts are the default; full counts match the
acceptance runs.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from alignment import (alignment_residual, gauge_bruteforce, is_supported_by, moreau_decompose,
                       polar_inequality_slack, transform)
from apps import gen_demix_instance, run_matcomp_benchmark, run_mca_demix
from atomsets import (AtomicDecomposition, AtomicSet, Box, EuclideanBall, FiniteAtoms, GroupNorm,
                      NuclearBall, Scaled, SignedBasis, Spectrahedron, Subspace, TVAtoms,
                      WeightedSpectrahedron)
from elements import inner
from errors import AtomkitError
from linalg_kernels import LinearMap
from logger import logger
from set_calculus import sum_descriptor, sum_gauge_numeric
from solvers import check_optimality, least_squares_objective, primal_cg


LASSO_FACE_BAND = 0.1


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def check(self, condition: bool, note: str = "") -> None:
        if condition:
            self.passed += 1
        else:
            self.failed += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)

    def to_dict(self) -> Dict[str, object]:
        return {"passed": self.passed, "failed": self.failed, "notes": list(self.notes)}


def lasso_desk_instance(seed: int = 0) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """(A, b, x0, tau): 10 x 20 Gaussian A, 2-sparse x0, b = A x0, tau = ||x0||_1."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((10, 20)) / np.sqrt(10.0)
    x0 = np.zeros(20)
    support = rng.choice(20, size=2, replace=False)
    x0[support] = rng.choice([-1.0, 1.0], 2) * rng.uniform(1.0, 2.0, 2)
    return A, A @ x0, x0, float(np.abs(x0).sum())


def concrete_descriptors(rng: np.random.Generator) -> List[Tuple[AtomicSet, Callable, Callable]]:
    """(set, x sampler, z sampler) pairs whose samples give finite gauges and supports."""
    n = 5
    Q, _ = np.linalg.qr(rng.standard_normal((n, 2)))
    V, _ = np.linalg.qr(rng.standard_normal((4, 3)))
    lam = rng.uniform(0.5, 2.0, 3)

    def psd(m):
        def draw():
            G = rng.standard_normal((m, m))
            return G @ G.T
        return draw

    def tv_z():
        z = rng.standard_normal(n)
        return z - z.mean()

    def subspace_z():
        z = rng.standard_normal(n)
        return z - Q @ (Q.T @ z)

    def weighted_z():
        G = rng.standard_normal((4, 4))
        Z = 0.5 * (G + G.T)
        Nb = np.linalg.svd(V.T)[2][3:].T
        return Z - Nb @ (Nb.T @ Z @ Nb) @ Nb.T - 5.0 * Nb @ Nb.T

    def weighted_x():
        G = rng.standard_normal((4, 3)) @ V.T
        return V @ (V.T @ (G.T @ G) @ V) @ V.T

    vec = lambda: rng.standard_normal(n)
    mat = lambda: rng.standard_normal((4, 3))
    sym = lambda: 0.5 * (lambda G: G + G.T)(rng.standard_normal((4, 4)))
    return [
        (SignedBasis(n), vec, vec),
        (NuclearBall(4, 3), mat, mat),
        (Subspace(Q), lambda: Q @ rng.standard_normal(2), subspace_z),
        (TVAtoms(n), vec, tv_z),
        (GroupNorm(n, [[0, 1], [2, 3, 4]]), vec, vec),
        (Spectrahedron(4), psd(4), sym),
        (WeightedSpectrahedron(V, lam), weighted_x, weighted_z),
    ]


def suite_polar_inequality(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("polar_inequality")
    rng = np.random.default_rng(seed)
    for desc, draw_x, draw_z in concrete_descriptors(rng):
        for _ in range(trials):
            x, z = draw_x(), draw_z()
            g, s = desc.gauge(x), desc.support(z)
            slack = polar_inequality_slack(desc, x, z)
            product = g * s if g > 0 and s > 0 else 0.0
            result.check(slack >= -1e-10 * (1.0 + product), f"{desc.variant}: slack {slack:.3e}")
    return result


def suite_non_uniqueness(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("non_uniqueness")
    atoms = [np.array([s1, s2, 1.0]) for s1 in (1.0, -1.0) for s2 in (1.0, -1.0)]
    x = np.array([0.0, 0.0, 2.0])
    desc = FiniteAtoms(atoms)
    result.check(abs(desc.gauge(x) - 2.0) <= 1e-10, "linear program gauge")
    result.check(abs(gauge_bruteforce(atoms, x) - 2.0) <= 1e-10, "enumerated gauge")
    d = desc.decompose(x)
    result.check(abs(d.coefficient_sum() - 2.0) <= 1e-8 and np.allclose(d.synthesize((3,)), x),
                 "decomposition")
    return result


def suite_support_identification(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("support_identification")
    rng = np.random.default_rng(seed)
    for t in range(trials):
        dim = int(rng.integers(2, 5))
        count = int(rng.integers(dim, 8))
        atoms = [rng.standard_normal(dim) for _ in range(count)]
        desc = FiniteAtoms(atoms)
        z = rng.standard_normal(dim)
        face = desc.expose(z, count)
        if t % 2 == 0 and face.atoms:
            weights = rng.uniform(0.5, 1.5, len(face.atoms))
            x = sum(w * a.element for w, a in zip(weights, face.atoms))
        else:
            x = sum(w * a for w, a in zip(rng.uniform(0.0, 1.0, count), atoms))
        g = gauge_bruteforce(atoms, x)
        if not np.isfinite(g):
            continue
        s = desc.support(z)
        residual = max(g * s, 0.0) - inner(x, z) if s > 0 else abs(inner(x, z))
        aligned = residual <= 1e-9 * (1.0 + g * s)
        supported = is_supported_by(desc.decompose(x, tol=1e-7), face)
        result.check(aligned == supported, f"trial {t}: aligned={aligned}, supported={supported}")
    return result


def suite_gauge_properties(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("gauge_properties")
    rng = np.random.default_rng(seed)
    basis, box = SignedBasis(4), Box(4)
    nuclear = NuclearBall(5, 4)
    dct_set = transform(SignedBasis(6), LinearMap.dct((6,)).adjoint(), "image")
    same = transform(nuclear, LinearMap.identity((5, 4)), "image")
    tv = TVAtoms(5)
    for _ in range(trials):
        z = rng.standard_normal(4)
        result.check(abs(basis.support(z) - box.gauge(z)) <= 1e-12, "1-norm/max-norm polarity")
        Z = rng.standard_normal((5, 4))
        result.check(abs(nuclear.support(Z) - np.linalg.svd(Z, compute_uv=False)[0]) <= 1e-10,
                     "spectral norm support")
        result.check(abs(same.support(Z) - nuclear.support(Z)) <= 1e-10 and
                     abs(same.gauge(Z) - nuclear.gauge(Z)) <= 1e-10, "identity transform")
        x = rng.standard_normal(6)
        expected = float(np.abs(LinearMap.dct((6,)).apply(x)).sum())
        result.check(abs(dct_set.gauge(x) - expected) <= 1e-10 * (1 + expected), "DCT transform gauge")
        for alpha in (0.5, 2.0, 10.0):
            scaled = Scaled(basis, alpha)
            result.check(abs(scaled.support(z) - alpha * basis.support(z)) <= 1e-10 * alpha, "scaling")
            result.check(abs(basis.gauge(alpha * z) - alpha * basis.gauge(z)) <= 1e-10 * alpha * basis.gauge(z),
                         "homogeneity")
        c = float(rng.standard_normal())
        result.check(tv.gauge(c * np.ones(5)) == 0.0, "TV recession gauge")
        w = rng.standard_normal(5)
        result.check(tv.support(w + (1.0 - w.sum()) / 5.0) == np.inf, "TV unbounded support")
    return result


def nuclear_pair(rng: np.random.Generator, m: int, n: int, r: int, d: int):
    """X and Z sharing ordered singular bases; X has rank r, Z's top face has dimension d."""
    U, _ = np.linalg.qr(rng.standard_normal((m, m)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    k = min(m, n)
    sx = np.zeros(k)
    sx[:r] = np.sort(rng.uniform(0.5, 2.0, r))[::-1]
    sz = np.sort(rng.uniform(0.0, 0.9, k))[::-1]
    sz[:d] = 1.0
    X = (U[:, :k] * sx) @ V[:, :k].T
    Z = (U[:, :k] * sz) @ V[:, :k].T
    return X, Z, U[:, :k], V[:, :k], sz


def suite_nuclear_alignment(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("nuclear_alignment")
    rng = np.random.default_rng(seed)
    desc = NuclearBall(6, 5)
    for _ in range(trials):
        r = int(rng.integers(1, 4))
        d = int(rng.integers(r, 5))
        X, Z, U, V, sz = nuclear_pair(rng, 6, 5, r, d)
        scale = desc.support(Z) * desc.gauge(X)
        result.check(alignment_residual(desc, X, Z) <= 1e-8 * scale, "shared ordered SVD pair")
        face = desc.expose(Z, d)
        result.check(len(face.atoms) >= r and is_supported_by(desc.decompose(X), face), "d >= r inclusion")
        flipped = (U * sz[::-1]) @ V.T
        result.check(alignment_residual(desc, X, flipped) > 1e-3, "reversed singular values")
    return result


def suite_lasso(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("lasso")
    A, b, _, tau = lasso_desk_instance(seed)
    desc = SignedBasis(20)
    obj = least_squares_objective(A, b)
    x, trace = primal_cg(obj, desc, tau, eps=1e-4, max_iter=500)
    result.check(trace.converged and trace.final_gap <= 1e-4, f"exit gap {trace.final_gap:.3e}")
    grad = obj.grad(x)
    report = check_optimality(desc, x, grad, "gauge_constrained", tau, tol=1e-3)
    result.check(report.passed, f"optimality residual {report.residual:.3e}")
    z = -grad
    sigma = desc.support(z)
    face = desc.expose(z, 20, tol=LASSO_FACE_BAND)
    # any atom outside the band face carries weight below gap / (band * sigma)
    cut = trace.final_gap / (LASSO_FACE_BAND * sigma) if sigma > 0 else np.inf
    significant = AtomicDecomposition([(c, a) for c, a in desc.decompose(x).terms if c > cut])
    result.check(is_supported_by(significant, face), "significant support inside exposed face")
    return result


def suite_gap_bound(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("gap_bound")
    for t in range(max(1, trials // 50)):
        A, b, _, tau = lasso_desk_instance(seed + t)
        obj = least_squares_objective(A, b)
        for rule in ("exact", "harmonic"):
            _, trace = primal_cg(obj, SignedBasis(20), tau, max_iter=200, step_rule=rule)
            best = min(trace.objectives().min(initial=np.inf), trace.final_objective)
            for rec in trace.records:
                result.check(rec.gap >= rec.objective - best - 1e-10, f"{rule} k={rec.k}")
    return result


def suite_matcomp(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("matcomp")
    row = run_matcomp_benchmark([100], iters=10, seed=seed, record_time=False)[0]
    agreement = abs(row.residual_primal - row.residual_dual) / row.residual_primal
    result.check(agreement <= 0.01, f"residual agreement {agreement:.3e}")
    result.check(row.rank_dual <= row.rank_primal, f"ranks {row.rank_dual} > {row.rank_primal}")
    return result


def suite_moreau(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("moreau")
    rng = np.random.default_rng(seed)
    for desc in (EuclideanBall(3), SignedBasis(3)):
        for _ in range(trials):
            s = rng.standard_normal(3)
            alpha = float(rng.standard_normal())
            ax, x, az, z = moreau_decompose(desc, s, alpha)
            error = np.linalg.norm(ax * x + az * z - s) + abs(ax - az - alpha)
            result.check(error <= 1e-8, f"{desc.variant} reconstruction {error:.3e}")
            residual = alignment_residual(desc, ax * x, az * z)
            result.check(residual <= 1e-8, f"{desc.variant} alignment {residual:.3e}")
    return result


def suite_polar_convolution(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("polar_convolution")
    rng = np.random.default_rng(seed)
    pair = sum_descriptor([SignedBasis(2), EuclideanBall(2)])
    for _ in range(trials):
        z = rng.standard_normal(2)
        expected = np.abs(z).max() + np.linalg.norm(z)
        result.check(abs(pair.support(z) - expected) <= 1e-12 * (1 + expected), "support of a sum")
    value, split = sum_gauge_numeric(sum_descriptor([SignedBasis(2), SignedBasis(2)]), np.array([2.0, 0.0]))
    result.check(abs(value - 1.0) <= 1e-6, f"doubling gauge {value:.9f}")
    result.check(np.allclose(split[0] + split[1], [2.0, 0.0]), "split conservation")
    return result


def suite_demix(trials: int, seed: int) -> SuiteResult:
    result = SuiteResult("demix")
    inst = gen_demix_instance(size=16, rank=1, seed=seed)
    out = run_mca_demix(inst, iters=100)
    m = out.metrics
    total = out.components[0] + out.components[1] + out.components[2]
    result.check(np.array_equal(total, out.recovery.total), "conservation")
    tau = m["tau"]
    result.check(m["stage2_objective"] <= m["stage1_bound"],
                 f"stage 2 objective {m['stage2_objective']:.3e} above bound {m['stage1_bound']:.3e}")
    for name in ("sparse", "lowrank", "dct"):
        result.check(m[f"{name}_gauge"] <= tau * (1.0 + 1e-6), f"{name} gauge above tau")
        result.check(m[f"{name}_alignment"] <= 1e-6 * m[f"{name}_alignment_scale"],
                     f"{name} alignment {m[f'{name}_alignment']:.3e}")
    return result


SUITES: Dict[str, Tuple[Callable[[int, int], SuiteResult], int, int]] = {
    "polar_inequality": (suite_polar_inequality, 200, 10000),
    "non_uniqueness": (suite_non_uniqueness, 1, 1),
    "support_identification": (suite_support_identification, 100, 500),
    "gauge_properties": (suite_gauge_properties, 50, 1000),
    "nuclear_alignment": (suite_nuclear_alignment, 20, 100),
    "lasso": (suite_lasso, 1, 1),
    "gap_bound": (suite_gap_bound, 50, 250),
    "matcomp": (suite_matcomp, 1, 1),
    "moreau": (suite_moreau, 20, 100),
    "polar_convolution": (suite_polar_convolution, 100, 1000),
    "demix": (suite_demix, 1, 1),
}


def run_selftests(name_filter: Optional[str] = None, full: bool = False, seed: int = 0) -> List[SuiteResult]:
    """Run every suite whose name contains name_filter."""
    results = []
    for name, (suite, reduced, complete) in SUITES.items():
        if name_filter and name_filter not in name:
            continue
        logger.info(f"selftest {name}: {'full' if full else 'reduced'} run")
        try:
            res = suite(complete if full else reduced, seed)
        except AtomkitError as e:
            logger.error(f"selftest {name} raised {type(e).__name__}: {e}")
            res = SuiteResult(name, 0, 1, [f"{type(e).__name__}: {e}"])
        logger.info(f"selftest {name}: passed={res.passed}, failed={res.failed}")
        results.append(res)
    return results
