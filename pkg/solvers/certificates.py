"""
Optimality certificates built from alignment.
"""
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from alignment import alignment_residual
from atomsets import AtomicSet
from elements import inner
from errors import UsageError

FORMS = ("unconstrained", "gauge_constrained", "level_constrained")


@dataclass
class OptimalityReport:
    residual: float
    scale: float
    passed: bool
    support_value: float
    gauge_value: float
    gap: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self):
        return {"residual": self.residual, "scale": self.scale, "passed": self.passed,
                "support": self.support_value, "gauge": self.gauge_value, "gap": self.gap,
                "notes": list(self.notes)}


def check_optimality(desc: AtomicSet, x: np.ndarray, grad: np.ndarray, form: str = "gauge_constrained",
                     param: Optional[float] = None, tol: float = 1e-6) -> OptimalityReport:
    """Check that x is optimal through alignment of (x, -grad).

    Forms: unconstrained  min f + param * gauge;
           gauge_constrained  min f s.t. gauge <= param;
           level_constrained  min gauge s.t. f <= param.
    """
    if form not in FORMS:
        raise UsageError(f"form must be one of {FORMS}, got {form!r}")
    z = -np.asarray(grad, dtype=float)
    g = desc.gauge(x)
    s = desc.support(z)
    residual = alignment_residual(desc, x, z)
    product = g * s if g > 0 and s > 0 else 0.0
    scale = 1.0 + abs(product)
    passed = residual <= tol * scale
    report = OptimalityReport(residual, scale, passed, s, g)

    if form == "unconstrained":
        if param is None:
            raise UsageError("unconstrained form needs the weight rho")
        if s > param * (1.0 + tol):
            report.passed = False
            report.notes.append(f"support {s:.6e} exceeds rho {param:.6e}")
        elif g > 0 and abs(s - param) > tol * max(param, 1.0):
            report.passed = False
            report.notes.append(f"support {s:.6e} differs from rho {param:.6e} at a nonzero gauge")
    elif form == "gauge_constrained":
        if param is None:
            raise UsageError("gauge_constrained form needs the bound alpha")
        if g > param * (1.0 + tol):
            report.passed = False
            report.notes.append(f"gauge {g:.6e} exceeds alpha {param:.6e}")
        report.gap = param * s - inner(x, z)
        if report.gap > tol * scale:
            report.passed = False
            report.notes.append(f"duality gap {report.gap:.3e}")
    else:
        report.notes.append("strict feasibility of the level constraint is assumed, not verified")
    return report


def check_gauge_duality(desc: AtomicSet, x: np.ndarray, z: np.ndarray,
                        membership_D: Callable[[np.ndarray], bool],
                        membership_Dprime: Callable[[np.ndarray], bool], tol: float = 1e-9) -> bool:
    """Primal-dual optimality for the gauge dual pair over D and its antipolar."""
    if not membership_D(x) or not membership_Dprime(z):
        return False
    if abs(inner(x, z) - 1.0) > tol:
        return False
    return alignment_residual(desc, x, z) <= tol
