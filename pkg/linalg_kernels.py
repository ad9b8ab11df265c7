"""
Deterministic dense and iterative linear-algebra kernels.

Singular triples and extreme eigenpairs use LAPACK for small operands and
Lanczos iterations with full reorthogonalization above DENSE_CUTOFF. Every
random start vector comes from a seeded generator, so results depend only on
(input, seed).
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import scipy.fft
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from config import (DEFAULT_MAX_ITER, DEFAULT_TOL, DENSE_CUTOFF, LANCZOS_BLOCK,
                    ORTHONORMAL_TOL, SYMMETRY_TOL)
from elements import MaskedMatrix, Shape
from errors import (NonConvergenceError, NonPositiveWeightError, NotOrthonormalError,
                    NotSymmetricError, ShapeMismatchError, UsageError)
from logger import logger

MatrixLike = Union[np.ndarray, sp.spmatrix, LinearOperator, 'LinearMap']

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class SingularTriple:
    """sigma >= 0 with unit left/right singular vectors."""
    sigma: float
    u: np.ndarray
    v: np.ndarray


@dataclass
class LinearMap:
    """Linear map between element shapes with an adjoint and optional inverse."""
    in_shape: Shape
    out_shape: Shape
    forward: Callable[[np.ndarray], np.ndarray]
    backward: Callable[[np.ndarray], np.ndarray]
    inverse_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    orthogonal: bool = False
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape != tuple(self.in_shape):
            raise ShapeMismatchError(f"{self.kind} map expects {self.in_shape}, got {x.shape}")
        return self.forward(x)

    def adjoint_apply(self, y: np.ndarray) -> np.ndarray:
        if y.shape != tuple(self.out_shape):
            raise ShapeMismatchError(f"{self.kind} adjoint expects {self.out_shape}, got {y.shape}")
        return self.backward(y)

    @property
    def invertible(self) -> bool:
        return self.orthogonal or self.inverse_fn is not None

    def inverse_apply(self, y: np.ndarray) -> np.ndarray:
        if not self.invertible:
            raise UsageError(f"{self.kind} map has no inverse")
        if y.shape != tuple(self.out_shape):
            raise ShapeMismatchError(f"{self.kind} inverse expects {self.out_shape}, got {y.shape}")
        return self.backward(y) if self.orthogonal else self.inverse_fn(y)

    def adjoint(self) -> 'LinearMap':
        inverse_fn = None
        if self.orthogonal:
            inverse_fn = self.forward
        elif self.kind in ("scaling", "identity"):
            inverse_fn = self.inverse_fn
        elif self.kind in ("matrix", "matrix^T") and self.inverse_fn is not None:
            M = np.asarray(self.params["matrix"], dtype=float)
            M_eff = M if self.kind == "matrix" else M.T
            inverse_fn = lambda y, A=M_eff.T: np.linalg.solve(A, y)
        return LinearMap(self.out_shape, self.in_shape, self.backward, self.forward,
                         inverse_fn, self.orthogonal, _ADJOINT_KIND.get(self.kind, self.kind + "^T"),
                         dict(self.params))

    def as_operator(self) -> LinearOperator:
        """scipy LinearOperator acting on flattened elements."""
        n_in = int(np.prod(self.in_shape))
        n_out = int(np.prod(self.out_shape))
        return LinearOperator(
            (n_out, n_in),
            matvec=lambda v: self.forward(np.reshape(v, self.in_shape)).ravel(),
            rmatvec=lambda w: self.backward(np.reshape(w, self.out_shape)).ravel(),
            dtype=float,
        )

    def to_dict(self) -> Dict[str, Any]:
        if self.kind in ("custom", "masked"):
            raise UsageError(f"{self.kind} maps are not serializable")
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, data: Dict[str, Any], shape: Shape) -> 'LinearMap':
        """Rebuild a serializable map; shape is the input shape."""
        kind = data.get("kind")
        if kind == "identity":
            return cls.identity(shape)
        if kind == "dct":
            return cls.dct(shape)
        if kind == "idct":
            return cls.dct(shape).adjoint()
        if kind == "scaling":
            return cls.scaling(float(data["alpha"]), shape)
        if kind == "matrix":
            return cls.from_matrix(np.asarray(data["matrix"], dtype=float))
        if kind == "matrix^T":
            return cls.from_matrix(np.asarray(data["matrix"], dtype=float)).adjoint()
        raise UsageError(f"Unknown linear map kind: {kind!r}")

    @classmethod
    def identity(cls, shape: Shape) -> 'LinearMap':
        shape = tuple(shape)
        return cls(shape, shape, lambda x: x.copy(), lambda y: y.copy(), None, True, "identity", {})

    @classmethod
    def scaling(cls, alpha: float, shape: Shape) -> 'LinearMap':
        if alpha == 0:
            raise UsageError("scaling map needs alpha != 0")
        shape = tuple(shape)
        return cls(shape, shape, lambda x: alpha * x, lambda y: alpha * y,
                   lambda y: y / alpha, False, "scaling", {"alpha": float(alpha)})

    @classmethod
    def dct(cls, shape: Shape) -> 'LinearMap':
        shape = tuple(shape)
        return cls(shape, shape, lambda x: dct_apply(x, "forward"), lambda y: dct_apply(y, "inverse"),
                   None, True, "dct", {})

    @classmethod
    def from_matrix(cls, M: np.ndarray) -> 'LinearMap':
        M = np.asarray(M, dtype=float)
        if M.ndim != 2:
            raise ShapeMismatchError("linear map matrix must be 2-D")
        m, n = M.shape
        orthogonal = m == n and np.allclose(M.T @ M, np.eye(n), atol=ORTHONORMAL_TOL)
        inverse_fn = None
        if m == n and not orthogonal and np.linalg.matrix_rank(M) == n:
            inverse_fn = lambda y: np.linalg.solve(M, y)
        return cls((n,), (m,), lambda x: M @ x, lambda y: M.T @ y, inverse_fn, orthogonal,
                   "matrix", {"matrix": M.tolist()})

    @classmethod
    def masked(cls, omega: MaskedMatrix) -> 'LinearMap':
        """Sampling operator X -> X[Omega] with adjoint scattering back to (m, n)."""
        return cls(tuple(omega.shape), (omega.nnz,), omega.sample, omega.scatter,
                   None, False, "masked", {})


_ADJOINT_KIND = {"dct": "idct", "idct": "dct", "identity": "identity",
                 "scaling": "scaling", "matrix": "matrix^T", "matrix^T": "matrix"}


def _sign_normalize(u: np.ndarray, v: Optional[np.ndarray] = None):
    """Flip so the largest-magnitude entry of u is positive."""
    idx = int(np.argmax(np.abs(u)))
    if u[idx] < 0:
        u = -u
        if v is not None:
            v = -v
    return u, v


def _reorthogonalize(w: np.ndarray, Q: np.ndarray) -> np.ndarray:
    if Q.shape[1] == 0:
        return w
    for _ in range(2):
        w = w - Q @ (Q.T @ w)
    return w


def _fresh_direction(Q: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random unit vector orthogonal to the columns of Q."""
    w = _reorthogonalize(rng.standard_normal(Q.shape[0]), Q)
    return w / np.linalg.norm(w)


def _to_operator(A: MatrixLike) -> Tuple[Optional[np.ndarray], LinearOperator]:
    if isinstance(A, LinearMap):
        return None, A.as_operator()
    if isinstance(A, LinearOperator):
        return None, A
    if sp.issparse(A):
        return None, aslinearoperator(A)
    dense = np.asarray(A, dtype=float)
    if dense.ndim != 2:
        raise ShapeMismatchError(f"operator must be 2-D, got shape {dense.shape}")
    return dense, aslinearoperator(dense)


def _triple_residual(op: LinearOperator, t: SingularTriple) -> float:
    r1 = np.linalg.norm(op.matvec(t.v) - t.sigma * t.u)
    r2 = np.linalg.norm(op.rmatvec(t.u) - t.sigma * t.v)
    return max(r1, r2)


def top_singular_triples(A: MatrixLike, k: int = 1, tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> List[SingularTriple]:
    """Leading k singular triples in descending sigma order.

    Args:
        A: dense array, scipy sparse matrix, scipy LinearOperator or LinearMap
        k: number of triples, 1 <= k <= min(m, n)
        tol: residual tolerance relative to sigma_1
        max_iter: cap on Lanczos steps
        seed: seed of the start vector

    Raises:
        NonConvergenceError: residuals above tol after max_iter steps
        ShapeMismatchError: operator dimensions inconsistent
    """
    dense, op = _to_operator(A)
    m, n = op.shape
    if k < 1 or k > min(m, n):
        raise UsageError(f"k must lie in [1, {min(m, n)}], got {k}")
    if tol <= 0:
        raise UsageError("tol must be positive")

    if min(m, n) <= DENSE_CUTOFF:
        return _dense_triples(dense if dense is not None else op.matmat(np.eye(n)), k)

    return _lanczos_bidiagonal(op, k, tol, max_iter, np.random.default_rng(seed))


def _dense_triples(dense: np.ndarray, k: int) -> List[SingularTriple]:
    U, s, Vt = np.linalg.svd(dense, full_matrices=False)
    triples = []
    for i in range(k):
        u, v = _sign_normalize(U[:, i], Vt[i])
        triples.append(SingularTriple(float(s[i]), u, v))
    return triples


def _lanczos_bidiagonal(op: LinearOperator, k: int, tol: float, max_iter: int,
                        rng: np.random.Generator) -> List[SingularTriple]:
    """Golub-Kahan steps with full reorthogonalization.

    After p steps A^T U_p = V_{p+1} B^T with B the p x (p+1) upper bidiagonal
    matrix carrying beta_p in its last column; Ritz triples come from its SVD.
    """
    m, n = op.shape
    p_cap = min(m, n)
    U = np.zeros((m, p_cap))
    V = np.zeros((n, p_cap + 1))
    alpha = np.zeros(p_cap)
    beta = np.zeros(p_cap)
    V[:, 0] = _fresh_direction(V[:, :0], rng)
    norm_est = 0.0
    next_check = min(p_cap, max(2 * k, k + LANCZOS_BLOCK))

    for j in range(p_cap):
        if j >= max_iter:
            raise NonConvergenceError(f"Lanczos bidiagonalization did not converge in {j} steps",
                                      iterations=j)
        u = op.matvec(V[:, j])
        if j > 0:
            u = u - beta[j - 1] * U[:, j - 1]
        u = _reorthogonalize(u, U[:, :j])
        a = np.linalg.norm(u)
        norm_est = max(norm_est, a)
        if a <= 1e-14 * max(norm_est, 1.0):
            alpha[j] = 0.0
            U[:, j] = _fresh_direction(U[:, :j], rng)
        else:
            alpha[j] = a
            U[:, j] = u / a

        w = op.rmatvec(U[:, j]) - alpha[j] * V[:, j]
        w = _reorthogonalize(w, V[:, :j + 1])
        b = np.linalg.norm(w)
        norm_est = max(norm_est, b)
        if j + 1 < n:
            if b <= 1e-14 * max(norm_est, 1.0):
                beta[j] = 0.0
                V[:, j + 1] = _fresh_direction(V[:, :j + 1], rng)
            else:
                beta[j] = b
                V[:, j + 1] = w / b

        p = j + 1
        if p < next_check and p < p_cap:
            continue
        next_check = p + LANCZOS_BLOCK

        B = np.zeros((p, p + 1))
        B[np.arange(p), np.arange(p)] = alpha[:p]
        B[np.arange(p), np.arange(1, p + 1)] = beta[:p]
        X, s, Yt = np.linalg.svd(B, full_matrices=False)
        triples = []
        for i in range(k):
            u_i, v_i = _sign_normalize(U[:, :p] @ X[:, i], V[:, :p + 1] @ Yt[i])
            triples.append(SingularTriple(float(s[i]), u_i, v_i))
        threshold = tol * max(triples[0].sigma, _TINY)
        worst = max(_triple_residual(op, t) for t in triples)
        if worst <= threshold:
            logger.debug(f"Lanczos bidiagonalization converged: steps={p}, residual={worst:.3e}")
            return triples
        if p == p_cap:
            logger.warning(f"Lanczos residual {worst:.3e} above {threshold:.3e} after the full "
                           f"Krylov space, using a dense SVD")
            return _dense_triples(op.matmat(np.eye(n)), k)

    raise NonConvergenceError("Lanczos bidiagonalization exhausted the Krylov space", iterations=p_cap)


def check_symmetric(S: np.ndarray, name: str = "S") -> np.ndarray:
    """Return (S + S^T)/2 after checking symmetry within SYMMETRY_TOL relative."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeMismatchError(f"{name} must be square, got shape {S.shape}")
    scale = np.max(np.abs(S)) if S.size else 0.0
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_TOL * max(scale, _TINY):
        raise NotSymmetricError(f"{name} is not symmetric")
    return 0.5 * (S + S.T)


def sym_eig_topk(S: np.ndarray, k: int = 1, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """k algebraically largest eigenpairs, values descending, vectors as columns."""
    S = check_symmetric(S)
    n = S.shape[0]
    if k < 1 or k > n:
        raise UsageError(f"k must lie in [1, {n}], got {k}")
    if n <= DENSE_CUTOFF:
        vals, vecs = np.linalg.eigh(S)
        order = np.arange(n - 1, n - 1 - k, -1)
        return vals[order], vecs[:, order]
    return _lanczos_symmetric(S, k, tol, max_iter, np.random.default_rng(seed))


def _lanczos_symmetric(S: np.ndarray, k: int, tol: float, max_iter: int,
                       rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = S.shape[0]
    Q = np.zeros((n, n))
    alpha = np.zeros(n)
    beta = np.zeros(n)
    Q[:, 0] = _fresh_direction(Q[:, :0], rng)
    norm_est = 0.0
    next_check = min(n, max(2 * k, k + LANCZOS_BLOCK))

    for j in range(n):
        if j >= max_iter:
            raise NonConvergenceError(f"Lanczos did not converge in {j} steps", iterations=j)
        w = S @ Q[:, j]
        alpha[j] = Q[:, j] @ w
        w = _reorthogonalize(w, Q[:, :j + 1])
        b = np.linalg.norm(w)
        norm_est = max(norm_est, abs(alpha[j]), b)
        if j + 1 < n:
            if b <= 1e-14 * max(norm_est, 1.0):
                beta[j] = 0.0
                Q[:, j + 1] = _fresh_direction(Q[:, :j + 1], rng)
            else:
                beta[j] = b
                Q[:, j + 1] = w / b

        p = j + 1
        if p < next_check and p < n:
            continue
        next_check = p + LANCZOS_BLOCK

        T = np.diag(alpha[:p]) + np.diag(beta[:p - 1], 1) + np.diag(beta[:p - 1], -1)
        theta, Y = np.linalg.eigh(T)
        if p < k:
            continue
        order = np.arange(p - 1, p - 1 - k, -1)
        vals = theta[order]
        vecs = Q[:, :p] @ Y[:, order]
        scale = max(np.max(np.abs(theta)), _TINY)
        worst = max(np.linalg.norm(S @ vecs[:, i] - vals[i] * vecs[:, i]) for i in range(k))
        if worst <= tol * scale or p == n:
            logger.debug(f"Lanczos converged: steps={p}, residual={worst:.3e}")
            return vals, vecs

    raise NonConvergenceError("Lanczos exhausted the Krylov space", iterations=n)


def sym_eig_top(S: np.ndarray, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                seed: int = 0) -> Tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector."""
    vals, vecs = sym_eig_topk(S, 1, tol, max_iter, seed)
    u, _ = _sign_normalize(vecs[:, 0])
    return float(vals[0]), u


def _weighted_congruence(Z: np.ndarray, V: np.ndarray, lam: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    lam = np.asarray(lam, dtype=float).ravel()
    V = np.asarray(V, dtype=float)
    if np.any(lam <= 0):
        raise NonPositiveWeightError("all weights must be positive")
    if V.ndim != 2 or V.shape[1] != lam.size:
        raise ShapeMismatchError(f"V has shape {V.shape}, expected (n, {lam.size})")
    if not np.allclose(V.T @ V, np.eye(lam.size), atol=ORTHONORMAL_TOL):
        raise NotOrthonormalError("V must have orthonormal columns")
    Z = check_symmetric(Z, "Z")
    if Z.shape[0] != V.shape[0]:
        raise ShapeMismatchError(f"Z has shape {Z.shape}, V has {V.shape[0]} rows")
    d = lam ** -0.5
    M = d[:, None] * (V.T @ Z @ V) * d[None, :]
    return 0.5 * (M + M.T), d


def gen_eig_topk(Z: np.ndarray, V: np.ndarray, lam: np.ndarray, k: int = 1,
                 tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                 seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Top-k eigenpairs of the pencil (V^T Z V, Lambda); columns p satisfy p^T Lambda p = 1."""
    M, d = _weighted_congruence(Z, V, lam)
    vals, W = sym_eig_topk(M, k, tol, max_iter, seed)
    return vals, d[:, None] * W


def gen_eig_max(Z: np.ndarray, V: np.ndarray, lam: np.ndarray, tol: float = DEFAULT_TOL,
                max_iter: int = DEFAULT_MAX_ITER, seed: int = 0) -> Tuple[float, np.ndarray]:
    vals, P = gen_eig_topk(Z, V, lam, 1, tol, max_iter, seed)
    p, _ = _sign_normalize(P[:, 0])
    return float(vals[0]), p


def dct_apply(x: np.ndarray, direction: str = "forward") -> np.ndarray:
    """Orthonormal DCT-II (forward) or its transpose (inverse); separable on matrices."""
    if direction == "forward":
        return scipy.fft.dctn(x, type=2, norm="ortho")
    if direction == "inverse":
        return scipy.fft.idctn(x, type=2, norm="ortho")
    raise UsageError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dct_matrix(n: int) -> np.ndarray:
    """D with D @ x == dct_apply(x) for length-n vectors."""
    return scipy.fft.dct(np.eye(n), type=2, norm="ortho", axis=0)


def project_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection of a vector onto {w >= 0, sum(w) = radius}."""
    v = np.asarray(v, dtype=float).ravel()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def project_capped_simplex(v: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Projection onto {w >= 0, sum(w) <= radius}."""
    w = np.maximum(np.asarray(v, dtype=float).ravel(), 0.0)
    if w.sum() <= radius:
        return w
    return project_simplex(v, radius)


def project_l1_ball(x: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Projection onto the l1 ball of the given radius, any shape."""
    flat = x.ravel()
    if np.abs(flat).sum() <= radius:
        return x.copy()
    return (np.sign(flat) * project_simplex(np.abs(flat), radius)).reshape(x.shape)


def project_trace_capped_psd(S: np.ndarray, tau: float) -> np.ndarray:
    """Projection onto {P PSD, trace(P) <= tau}."""
    if tau <= 0:
        raise UsageError("tau must be positive")
    S = check_symmetric(S)
    vals, vecs = np.linalg.eigh(S)
    lam = project_capped_simplex(vals, tau)
    P = (vecs * lam) @ vecs.T
    return 0.5 * (P + P.T)


def power_norm_estimate(gram_apply: Callable[[np.ndarray], np.ndarray], shape: Shape,
                        iters: int = 100, seed: int = 0) -> float:
    """Largest eigenvalue of a PSD map given by its action."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(shape)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = gram_apply(x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        if abs(ny - est) <= 1e-10 * ny:
            est = ny
            break
        est = ny
        x = y / ny
    return float(est)
