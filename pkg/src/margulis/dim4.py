"""The H^4 specialization: cylindrical screws and Diophantine asymptotics.

In H^4 a screw translation in cylindrical coordinates (r, theta, z) acts as

    g(r, theta, z, t) = (r, theta + 2 pi alpha, z + 1, t),

so the boundary function depends only on the distance r to the rotation
axis and has the closed form

    B_g(r) = c(eps) * min_i (4 sin^2(pi i alpha) r^2 + i^2)^(1/2).

The minimizing indices track the best rational approximations of alpha:
|sin(pi i alpha)| is small exactly when i is a continued-fraction
denominator.  For badly approximable alpha (bounded partial quotients)
B_g(r) grows like sqrt(r); for Liouville-type alpha it stalls on long
windows.  Both behaviors are exercised here at desk scale.

To keep sin(pi i alpha) honest for large i, alpha is carried as an exact
rational (doubles are re-encoded exactly) and i * alpha is reduced mod 1
in integer arithmetic before any floating-point sine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .moebius import MoebiusWord, Orthogonal, Translation, inversion_in_sphere
from .parabolic import (
    DEFAULT_BUDGET,
    BoundaryEvaluation,
    MargulisParams,
    ScrewTranslation,
)

_TWO53 = 1 << 53
_FLOAT53 = float(_TWO53)

#: Residual threshold, relative to alpha, past which further partial
#: quotients of a float64 input are noise.
HORIZON_REL = 1e-15


class PrecisionHorizon(ValueError):
    """Requested continued-fraction depth exceeds what a float64 input supports."""


#: Named rotation numbers accepted wherever an alpha is expected.
NAMED_ALPHAS = {
    "golden": (math.sqrt(5.0) - 1.0) / 2.0,
    "sqrt2-1": math.sqrt(2.0) - 1.0,
}


def as_alpha(value) -> Fraction:
    """Coerce a rotation number to an exact Fraction in (0, 1).

    Floats are re-encoded as the exact rational they denote; pairs (p, q)
    and Fractions pass through; the names in NAMED_ALPHAS are accepted.
    """
    if isinstance(value, str):
        if value not in NAMED_ALPHAS:
            raise ValueError(f"unknown rotation number name {value!r}")
        value = NAMED_ALPHAS[value]
    if isinstance(value, tuple):
        value = Fraction(int(value[0]), int(value[1]))
    elif not isinstance(value, Fraction):
        value = Fraction(float(value))
    if not (0 < value < 1):
        raise ValueError("rotation number must lie strictly between 0 and 1")
    return value


@dataclass(frozen=True, eq=False)
class CylScrew:
    """The cylindrical screw (r, theta, z, t) -> (r, theta + 2 pi alpha, z + 1, t)."""

    alpha: Fraction
    source: str = "rational"

    @classmethod
    def from_value(cls, value) -> "CylScrew":
        if isinstance(value, str):
            return cls(as_alpha(value), source=value)
        if isinstance(value, Fraction):
            return cls(as_alpha(value), source="rational")
        if isinstance(value, tuple):
            return cls(as_alpha(value), source="rational")
        return cls(as_alpha(value), source="float64")

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    def to_screw(self) -> ScrewTranslation:
        theta = 2.0 * math.pi * self.alpha_float
        A = np.eye(3)
        A[0, 0] = A[1, 1] = math.cos(theta)
        A[0, 1] = -math.sin(theta)
        A[1, 0] = math.sin(theta)
        return ScrewTranslation(A, np.array([0.0, 0.0, 1.0]))


# -- continued fractions ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class ContinuedFraction:
    """Partial quotients and convergents of a rotation number in (0, 1).

    Quotients are a_1, a_2, ... (the integer part a_0 is zero); convergents
    start at p_0/q_0 = 0/1, so ``q`` begins (1, a_1, ...).  For float64 input
    ``horizon`` is the number of quotients the 53-bit value determines; the
    stored quotients never extend past it.
    """

    quotients: tuple
    p: tuple
    q: tuple
    source: str
    horizon: int | None = None

    def __post_init__(self):
        for k in range(1, len(self.p)):
            det = self.p[k] * self.q[k - 1] - self.p[k - 1] * self.q[k]
            if det not in (1, -1):
                raise ArithmeticError("convergents violate the determinant identity")

    @property
    def denominators(self) -> tuple:
        return self.q


def continued_fraction(alpha, depth: int | None = None) -> ContinuedFraction:
    """Continued fraction of alpha in (0, 1).

    Exact rational input expands until termination (or ``depth``).  Float
    input is expanded exactly as the rational it denotes, but truncated at
    the precision horizon: the first convergent within HORIZON_REL * alpha
    of the value ends the reliable part.  Asking for more is an error.
    """
    # names denote float64 constants, so they share the float horizon
    from_float = isinstance(alpha, (str, float, np.floating))
    frac = as_alpha(alpha)

    quotients = []
    p = [0]
    q = [1]
    num, den = frac.numerator, frac.denominator
    horizon = None
    k = 0
    # expand 1/alpha: alpha = 1/(a_1 + 1/(a_2 + ...))
    while num != 0:
        a = den // num
        den, num = num, den - a * num
        k += 1
        quotients.append(a)
        p.append(a * p[-1] + (1 if len(p) == 1 else p[-2]))
        q.append(a * q[-1] + (0 if len(q) == 1 else q[-2]))
        err = abs(frac - Fraction(p[-1], q[-1]))
        if from_float and err < HORIZON_REL * frac:
            horizon = k
            break
        if depth is not None and k >= depth:
            break

    if depth is not None and depth > k and from_float and num != 0:
        raise PrecisionHorizon(
            f"float64 input determines only {k} partial quotients, {depth} requested"
        )
    if depth is not None and depth < len(quotients):
        quotients = quotients[:depth]
        p = p[: depth + 1]
        q = q[: depth + 1]

    return ContinuedFraction(
        tuple(quotients), tuple(p), tuple(q),
        "float64" if from_float else "rational",
        horizon,
    )


def is_convergent_denominator(alpha, i: int) -> bool:
    """Whether i is a convergent denominator q_k of alpha."""
    cf = alpha if isinstance(alpha, ContinuedFraction) else continued_fraction(alpha)
    return int(i) in set(cf.q)


# -- the radial boundary function ------------------------------------------


def cyl_boundary(
    alpha, params: MargulisParams, r: float, budget: int = DEFAULT_BUDGET
) -> BoundaryEvaluation:
    """B_g(r) = c(eps) * min_i (4 sin^2(pi i alpha) r^2 + i^2)^(1/2).

    Same truncation rule as the general boundary function (linear lower bound
    c(eps) * i), but i * alpha is reduced mod 1 with exact integer residues,
    so the sine stays accurate for indices far beyond double precision.
    """
    frac = as_alpha(alpha)
    r = float(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    q = frac.denominator
    p = frac.numerator % q
    c = params.c
    best = math.inf
    best_i = 0
    m = 0
    i = 0
    while i < budget:
        i += 1
        if c * i >= best:
            return BoundaryEvaluation(best, best_i, i - 1, True)
        m += p
        if m >= q:
            m -= q
        d = m if 2 * m <= q else q - m  # distance of i*alpha to the nearest integer, times q
        s = math.sin(math.pi * ((d * _TWO53 // q) / _FLOAT53))
        u = c * math.hypot(2.0 * s * r, float(i))
        if u < best:
            best = u
            best_i = i
    return BoundaryEvaluation(best, best_i, budget, False)


# -- asymptotics -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SlopeEstimate:
    """Least-squares exponent of log B_g(r) against log r on a log-spaced grid.

    ``max_sqrt_ratio`` is the grid maximum of B_g(r) / sqrt(r), the quantity
    with a universal asymptotic ceiling for every rotation number.
    """

    exponent: float
    residual: float
    r_min: float
    r_max: float
    radii: tuple
    values: tuple
    max_sqrt_ratio: float


def slope_estimate(
    alpha,
    params: MargulisParams,
    r_min: float = 1e2,
    r_max: float = 1e10,
    samples: int = 16,
    budget: int = DEFAULT_BUDGET,
) -> SlopeEstimate:
    """Fit the growth exponent of the radial boundary function.

    Badly approximable rotation numbers give an exponent near 1/2; the fit
    window starts at r >= 100 so the linear-in-i regime near the axis does
    not pollute the asymptotic slope.
    """
    if r_min < 1e2:
        raise ValueError("fitting window must start at r >= 100")
    if r_max <= r_min:
        raise ValueError("empty fitting window")
    if samples < 8:
        raise ValueError("need at least 8 samples for a slope estimate")
    frac = as_alpha(alpha)
    radii = np.geomspace(r_min, r_max, samples)
    values = np.array([cyl_boundary(frac, params, r, budget).value for r in radii])
    logs_r = np.log(radii)
    logs_b = np.log(values)
    slope, intercept = np.polyfit(logs_r, logs_b, 1)
    residual = float(np.max(np.abs(logs_b - (slope * logs_r + intercept))))
    return SlopeEstimate(
        float(slope), residual, float(r_min), float(r_max),
        tuple(float(r) for r in radii), tuple(float(b) for b in values),
        float(np.max(values / np.sqrt(radii))),
    )


def liouville_alpha(k_max: int) -> Fraction:
    """The truncated Liouville number sum_{k<=k_max} 10^(-k!), exactly."""
    if k_max not in (3, 4, 5):
        raise ValueError("k_max must be 3, 4, or 5")
    return sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, k_max + 1))


@dataclass(frozen=True, eq=False)
class WindowRow:
    r_lo: float
    r_hi: float
    slope: float
    flagged: bool


@dataclass(frozen=True, eq=False)
class LiouvilleTable:
    """Sliding-window local slopes of log B_g over a radius window.

    Windows with local slope below the flag threshold are the slow-growth
    stretches produced by extremely good rational approximations.
    """

    alpha: Fraction
    radii: tuple
    values: tuple
    windows: tuple
    flag_threshold: float


def local_slope_table(
    alpha,
    params: MargulisParams,
    r_window=(1e3, 1e9),
    per_decade: int = 8,
    window_decades: float = 1.5,
    flag_threshold: float = 0.1,
    budget: int = DEFAULT_BUDGET,
) -> LiouvilleTable:
    """Local slopes of log B_g(r) over sliding log-radius windows."""
    lo, hi = float(r_window[0]), float(r_window[1])
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < r_lo < r_hi")
    frac = as_alpha(alpha)
    count = int(round(math.log10(hi / lo) * per_decade)) + 1
    radii = np.geomspace(lo, hi, count)
    values = np.array([cyl_boundary(frac, params, r, budget).value for r in radii])
    width = int(window_decades * per_decade) + 1
    if width > count:
        raise ValueError("window wider than the sampled range")
    logs_r = np.log(radii)
    logs_b = np.log(values)
    rows = []
    for start in range(count - width + 1):
        sl = logs_r[start : start + width]
        sb = logs_b[start : start + width]
        slope = float(np.polyfit(sl, sb, 1)[0])
        rows.append(
            WindowRow(float(radii[start]), float(radii[start + width - 1]), slope,
                      slope < flag_threshold)
        )
    return LiouvilleTable(
        frac,
        tuple(float(r) for r in radii),
        tuple(float(b) for b in values),
        tuple(rows),
        flag_threshold,
    )


def liouville_demo(
    k_max: int,
    params: MargulisParams,
    r_window=(1e3, 1e9),
    per_decade: int = 8,
    window_decades: float = 1.5,
    flag_threshold: float = 0.1,
    budget: int = DEFAULT_BUDGET,
) -> LiouvilleTable:
    """Local-slope table for the truncated Liouville rotation number."""
    return local_slope_table(
        liouville_alpha(k_max), params, r_window, per_decade,
        window_decades, flag_threshold, budget,
    )


# -- the screw-inversion pair ----------------------------------------------


def screw_inversion_pair(alpha, r: float):
    """A cylindrical screw g and a companion map h whose isometric sphere
    outruns every displacement bound.

    h is the inversion in the sphere of radius r^(2/3) about a = (r, 0, 0)
    composed with the Euclidean reflection-translation (x, y, z) ->
    (-x + 2r, y, z).  Then h(infinity) = h^{-1}(infinity) = a and
    R_h = r^(2/3), while both displacement factors grow linearly in r;
    the geometric threshold only grows like B_g(r) = o(r).

    Returns (CylScrew, MoebiusWord).
    """
    if not r > 0:
        raise ValueError("radius parameter must be positive")
    cyl = CylScrew.from_value(alpha)
    r = float(r)
    center = np.array([r, 0.0, 0.0])
    gamma = MoebiusWord(
        (Translation(np.array([2.0 * r, 0.0, 0.0])),
         Orthogonal(np.diag([-1.0, 1.0, 1.0]))),
        4,
    )
    eta = inversion_in_sphere(center, r ** (2.0 / 3.0))
    return cyl, eta * gamma
