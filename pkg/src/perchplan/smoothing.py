"""Scalar smoothing kernels shared by every penalty term."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SmoothingParams:
    """Widths of the penalty smoother (mu) and the logistic gate (eps)."""

    mu: float = 1e-2
    eps: float = 1e-2

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def l_mu(x, mu):
    """C2 smoothing of max(x, 0): cubic blend on (0, mu], linear beyond.

    Returns (value, derivative).
    """
    if x <= 0.0:
        return 0.0, 0.0
    if x <= mu:
        r = x / mu
        value = (mu - x / 2.0) * r**3
        deriv = -0.5 * r**3 + 3.0 * (mu - x / 2.0) * x * x / mu**3
        return value, deriv
    return x - mu / 2.0, 1.0


def l_eps(x, eps):
    """Smoothed step from 0 to 1 over [-eps, eps], C1 everywhere.

    Returns (value, derivative).
    """
    if x <= -eps:
        return 0.0, 0.0
    if x > eps:
        return 1.0, 0.0
    k = 1.0 / (2.0 * eps**4)
    if x <= 0.0:
        value = k * (x + eps) ** 3 * (eps - x)
        deriv = k * (3.0 * (x + eps) ** 2 * (eps - x) - (x + eps) ** 3)
        return value, deriv
    value = k * (x - eps) ** 3 * (eps + x) + 1.0
    deriv = k * (3.0 * (x - eps) ** 2 * (eps + x) + (x - eps) ** 3)
    return value, deriv
