"""Theoretical competitive-ratio bounds, evaluated from instance parameters."""

import math

E = math.e


def integral_bound(alpha: float, tau: float = 1.0) -> float:
    """``2 (e alpha tau)^alpha`` for the integral algorithm on power costs."""
    return 2 * (E * alpha * tau) ** alpha


def dual_opt_factor(alpha: float) -> float:
    return 1 + alpha * math.exp(-alpha)


def dos_bound(q: float, alpha: float, tau: float = 1.0) -> float:
    """``4 (max(q, 1) tau + (e tau alpha)^alpha)``; pass Q for REP instances."""
    return 4 * (max(q, 1.0) * tau + (E * tau * alpha) ** alpha)


def fractional_bound(alpha: float, epsilon: float) -> float:
    return (1 + epsilon) ** (alpha + 1) * alpha**alpha


def tree_ratio_floor(q: int) -> float:
    return q / 2
