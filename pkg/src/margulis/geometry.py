"""Upper half-space model of hyperbolic n-space.

A point of H^n is a pair (v, t) with v in R^(n-1) and t > 0.  The model
metric (dv^2 + dt^2) / t^2 induces the distance

    cosh rho((v,t), (w,s)) = 1 + (|v - w|^2 + (t - s)^2) / (2 t s).

Boundary points live in R^(n-1) together with a single point at infinity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatch(ValueError):
    """Operands live in hyperbolic spaces of different dimension."""


@dataclass(frozen=True, eq=False)
class HPoint:
    """A point (v, t) of the upper half-space, t > 0."""

    v: np.ndarray
    t: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float).reshape(-1)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))
        if not np.all(np.isfinite(v)):
            raise ValueError("coordinates must be finite")
        if not (self.t > 0 and np.isfinite(self.t)):
            raise ValueError("height t must be positive and finite")

    @property
    def n(self) -> int:
        return self.v.size + 1

    def __repr__(self):
        return f"HPoint(v={self.v.tolist()}, t={self.t})"


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """A point of the extended boundary R^(n-1) u {infinity}.

    Exactly one variant holds: either ``v`` is a finite coordinate vector,
    or the point is the distinguished point at infinity (``v is None``).
    """

    v: np.ndarray | None

    def __post_init__(self):
        if self.v is not None:
            v = np.asarray(self.v, dtype=float).reshape(-1)
            if not np.all(np.isfinite(v)):
                raise ValueError("finite boundary point must have finite coordinates")
            object.__setattr__(self, "v", v)

    @classmethod
    def finite(cls, v) -> "BoundaryPoint":
        return cls(np.asarray(v, dtype=float))

    @property
    def is_infinity(self) -> bool:
        return self.v is None

    def __repr__(self):
        return "BoundaryPoint(infinity)" if self.is_infinity else f"BoundaryPoint({self.v.tolist()})"


#: The distinguished boundary point at infinity.
INFINITY = BoundaryPoint(None)


def vertical_point(v, s: float) -> HPoint:
    """The point at height s on the vertical line through the boundary point v."""
    if not s > 0:
        raise ValueError("height must be positive")
    return HPoint(np.asarray(v, dtype=float), float(s))


def check_same_dimension(x, y):
    if x.n != y.n:
        raise DimensionMismatch(f"dimension {x.n} vs {y.n}")


def hyperbolic_distance(x: HPoint, y: HPoint) -> float:
    """Hyperbolic distance between two points of the upper half-space.

    Evaluated as rho = log1p(s + sqrt(s (s + 2))) with
    s = |x - y|^2 / (2 t_x t_y), which is arccosh(1 + s) rearranged to
    stay accurate when the points are close (s near 0).
    """
    check_same_dimension(x, y)
    d2 = float(np.sum((x.v - y.v) ** 2)) + (x.t - y.t) ** 2
    s = d2 / (2.0 * x.t * y.t)
    return float(np.log1p(s + np.sqrt(s * (s + 2.0))))
