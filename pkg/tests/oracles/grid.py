"""
Brute-force polar convolution gauge in the plane.
"""
from typing import Callable

import numpy as np


def grid_sum_gauge(gauge_a: Callable[[np.ndarray], float], gauge_b: Callable[[np.ndarray], float],
                   x: np.ndarray, radius: float = None, points: int = 81, refinements: int = 10) -> float:
    """min over w of max(gauge_a(w), gauge_b(x - w)) by grid search with successive zooming."""
    x = np.asarray(x, dtype=float)
    if radius is None:
        radius = 2.0 * np.linalg.norm(x) + 1.0
    center = 0.5 * x
    best = np.inf
    for _ in range(refinements):
        axis = np.linspace(-radius, radius, points)
        best_w = center
        for dx in axis:
            for dy in axis:
                w = center + np.array([dx, dy])
                value = max(gauge_a(w), gauge_b(x - w))
                if value < best:
                    best, best_w = value, w
        center = best_w
        radius *= 4.0 / points
    return best
