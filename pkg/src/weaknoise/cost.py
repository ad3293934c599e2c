"""Power-law error cost functions and their exponent maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["PowerCost"]


@dataclass(frozen=True)
class PowerCost:
    """Cost rho(t) = |t|**alpha with alpha >= 1.

    The induced exponent map is zeta(c) = alpha*c: an error of size
    e**(-n*c) costs exactly e**(-n*alpha*c), for every block length n.
    alpha >= 1 keeps rho convex; rho is symmetric with rho(0) = 0.
    """

    alpha: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 1.0:
            raise ValueError(f"alpha must be finite and >= 1, got {self.alpha!r}")

    def rho(self, t):
        """Cost of an estimation error t (scalar or ndarray)."""
        return abs(t) ** self.alpha

    def zeta(self, cexp: float) -> float:
        """Cost exponent induced by an error with decay exponent cexp >= 0."""
        if not (cexp >= 0.0):
            raise ValueError(f"error exponent must be >= 0, got {cexp!r}")
        return self.alpha * cexp
