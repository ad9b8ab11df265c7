"""
Smooth convex objectives for the conditional-gradient solvers.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from elements import Shape
from errors import ShapeMismatchError, UsageError
from linalg_kernels import LinearMap, power_norm_estimate


@dataclass
class SmoothObjective:
    """f with its gradient; quadratic objectives also carry their Hessian action.

    quadratic_form(d) returns <d, H d> and drives the exact linesearch.
    Least-squares objectives also keep their operator and target.
    """
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    shape: Shape
    quadratic_form: Optional[Callable[[np.ndarray], float]] = None
    hessian_apply: Optional[Callable[[np.ndarray], np.ndarray]] = None
    lipschitz: Optional[float] = None
    operator: Optional[LinearMap] = None
    target: Optional[np.ndarray] = None

    def __call__(self, x: np.ndarray) -> float:
        return self.eval(x)

    def smoothness(self, seed: int = 0) -> float:
        """Lipschitz constant of the gradient."""
        if self.lipschitz is None:
            if self.hessian_apply is None:
                raise UsageError("objective has neither a Lipschitz constant nor a Hessian")
            self.lipschitz = power_norm_estimate(self.hessian_apply, self.shape, seed=seed)
        return self.lipschitz


def as_linear_map(A: Union[np.ndarray, LinearMap], shape: Optional[Shape] = None) -> LinearMap:
    if isinstance(A, LinearMap):
        return A
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ShapeMismatchError("operator matrix must be 2-D")
    return LinearMap.from_matrix(A)


def least_squares_objective(A: Union[np.ndarray, LinearMap], b: np.ndarray) -> SmoothObjective:
    """f(x) = 1/2 ||A x - b||^2."""
    op = as_linear_map(A)
    b = np.asarray(b, dtype=float)
    if b.shape != tuple(op.out_shape):
        raise ShapeMismatchError(f"b has shape {b.shape}, operator output is {op.out_shape}")

    def f(x):
        r = op.apply(x) - b
        return 0.5 * float(np.sum(r * r))

    def grad(x):
        return op.adjoint_apply(op.apply(x) - b)

    def qf(d):
        Ad = op.apply(d)
        return float(np.sum(Ad * Ad))

    def hess(d):
        return op.adjoint_apply(op.apply(d))

    lipschitz = 1.0 if op.orthogonal else None
    return SmoothObjective(f, grad, tuple(op.in_shape), qf, hess, lipschitz, op, b)


def quadratic_objective(H: np.ndarray, c: np.ndarray) -> SmoothObjective:
    """f(x) = 1/2 <x, H x> - <c, x> for symmetric PSD H on vectors."""
    H = np.asarray(H, dtype=float)
    c = np.asarray(c, dtype=float).ravel()
    if H.shape != (c.size, c.size):
        raise ShapeMismatchError(f"H has shape {H.shape}, expected ({c.size}, {c.size})")
    return SmoothObjective(
        lambda x: 0.5 * float(x @ H @ x) - float(c @ x),
        lambda x: H @ x - c,
        (c.size,),
        lambda d: float(d @ H @ d),
        lambda d: H @ d,
    )
