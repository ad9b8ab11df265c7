"""
Conditional-gradient solvers, certificates and support recovery.
"""
from .objectives import SmoothObjective, least_squares_objective, quadratic_objective
from .conditional_gradient import (CGTrace, DualCertificate, TraceRecord, dual_cg_least_squares,
                                   duality_gap, primal_cg)
from .recovery import RecoveryResult, psd_reduced_solve, recover_from_certificate, safe_face_tol
from .certificates import OptimalityReport, check_gauge_duality, check_optimality

__all__ = [
    'SmoothObjective', 'least_squares_objective', 'quadratic_objective',
    'CGTrace', 'DualCertificate', 'TraceRecord', 'dual_cg_least_squares', 'duality_gap', 'primal_cg',
    'RecoveryResult', 'psd_reduced_solve', 'recover_from_certificate', 'safe_face_tol',
    'OptimalityReport', 'check_gauge_duality', 'check_optimality',
]
