"""Parabolic screw translations and their Margulis-region boundary functions.

A parabolic isometry fixing infinity acts on the upper half-space as
g(v, t) = (A v + a, t) with A a rotation of R^(n-1) and a a nonzero
translation part; after conjugating by a suitable boundary translation one
may assume A a = a (the normal form used throughout this package).

Writing E = ker(A - I) and v = w + w_perp for the orthogonal splitting
E + E_perp, the i-th displacement satisfies

    g^i(v) - v = (A^i - I) w_perp + i a,

an orthogonal sum, so with c(eps) = 1 / sqrt(2 cosh(eps) - 2) the functions

    u_{g,i}(v) = c(eps) * (|(A^i - I) w_perp|^2 + i^2 |a|^2)^(1/2)

are the heights below which the i-th iterate moves (v, t) less than eps.
The boundary function B_g(v) = inf_i u_{g,i}(v) is the height of the
Margulis region T_g = {(v, t) : t > B_g(v)} above v.

The infimum over all i is reduced to a provably finite minimum: since
u_{g,i} >= c(eps) * i * |a|, the scan can stop at the first index whose
linear lower bound already exceeds the running minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .geometry import HPoint
from .moebius import MoebiusWord, Orthogonal, Translation

#: Index cap for the infimum scan; hitting it yields exact=False, not an error.
DEFAULT_BUDGET = 10**8

#: Orthogonality tolerance for the rotation part.
ROTATION_TOL = 1e-12
#: Singular-value threshold defining E = ker(A - I).
KERNEL_TOL = 1e-10
#: Tolerance on the normal-form invariant A a = a.
NORMAL_FORM_TOL = 1e-10
#: Eigenvalue-angle rationality test: denominator cap and tolerance.
ORDER_DENOMINATOR_CAP = 10**6
ORDER_TOL = 1e-12

PURE_TRANSLATION = "PureTranslation"
RATIONAL_SCREW = "RationalScrew"
IRRATIONAL_SCREW = "IrrationalScrew"

DEFAULT_EPSILON_H2 = math.asinh(1.0)


class NotParabolic(ValueError):
    """The map (A, a) is not parabolic: its translation part dies on ker(A - I)."""


def default_epsilon(n: int) -> float:
    """Default Margulis parameter: sinh^-1(1) in H^2, a conservative 0.1 above.

    The criterion is sound only for eps below the Margulis constant of H^n,
    which is unknown in general; every certificate records the eps it used.
    """
    return DEFAULT_EPSILON_H2 if n == 2 else 0.1


def c_epsilon(eps: float) -> float:
    """The constant c(eps) = 1 / sqrt(2 cosh(eps) - 2) = 1 / (2 sinh(eps/2)).

    Strictly decreasing, c(eps) ~ 1/eps as eps -> 0.  The second form is the
    one evaluated (no cancellation for small eps).
    """
    eps = float(eps)
    if not (eps > 0 and math.isfinite(eps)):
        raise ValueError("eps must be a positive real")
    return 1.0 / (2.0 * math.sinh(eps / 2.0))


@dataclass(frozen=True)
class MargulisParams:
    """A Margulis parameter eps together with the derived constant c(eps)."""

    epsilon: float
    c: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "c", c_epsilon(self.epsilon))


@dataclass(frozen=True)
class BoundaryEvaluation:
    """Result of minimizing u_{g,i} over i.

    ``value`` = u at ``attained_index``.  If ``exact`` is True, every index
    beyond ``truncation_index`` has linear lower bound c * i * |a| at or above
    ``value``, so the finite scan provably equals the infimum over all of N.
    If False, the scan stopped at its budget and ``value`` is only an upper
    bound for the infimum (still sound wherever an upper bound suffices).
    """

    value: float
    attained_index: int
    truncation_index: int
    exact: bool


class Membership(NamedTuple):
    inside: bool
    margin: float
    evaluation: BoundaryEvaluation


def _rational_angle_order(theta: float) -> int | None:
    """Order of the rotation angle theta if theta/(2 pi) is rational with
    denominator <= ORDER_DENOMINATOR_CAP, else None.  Ambiguity resolves to
    None (irrational), which only costs sharpness downstream, never soundness.

    A candidate p/q is accepted only when x sits closer to it than half the
    minimal gap 1/(q * CAP) to any other admissible rational; otherwise the
    float cannot distinguish p/q from a nearby irrational, and irrationals
    with slowly growing continued fractions (the golden angle is the extreme
    case) would be misread as enormous-order rotations.
    """
    x = theta / (2.0 * math.pi)
    cand = Fraction(x).limit_denominator(ORDER_DENOMINATOR_CAP)
    if cand == 0:
        return None
    floor = 0.5 / (cand.denominator * ORDER_DENOMINATOR_CAP)
    if abs(x - float(cand)) <= min(ORDER_TOL, floor):
        return cand.denominator
    return None


@dataclass(eq=False)
class ScrewTranslation:
    """A parabolic fixing infinity in normal form: (v, t) -> (A v + a, t), A a = a.

    ``shift`` records the conjugating boundary translation used to reach this
    form: a point x in the original coordinates corresponds to x + shift here.
    Construct through :func:`normalize`, which computes the shift; direct
    construction requires A a = a already.
    """

    A: np.ndarray
    a: np.ndarray
    shift: np.ndarray | None = None
    n: int = field(init=False)
    kind: str = field(init=False)
    order: int | None = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        a = np.asarray(self.a, dtype=float).reshape(-1)
        m = a.size
        if A.shape != (m, m):
            raise ValueError(f"rotation is {A.shape}, translation has length {m}")
        if np.linalg.norm(A.T @ A - np.eye(m)) > ROTATION_TOL:
            raise ValueError("rotation part is not orthogonal")
        if np.linalg.det(A) <= 0:
            raise ValueError("rotation part must have determinant +1")
        na = float(np.linalg.norm(a))
        if na == 0.0:
            raise NotParabolic("translation part vanishes")
        if np.linalg.norm(A @ a - a) > NORMAL_FORM_TOL * (1.0 + na):
            raise ValueError("not in normal form: A a != a (use normalize())")
        shift = np.zeros(m) if self.shift is None else np.asarray(self.shift, dtype=float)
        self.A, self.a, self.shift, self.n = A, a, shift, m + 1
        self._a_norm = na
        self._decompose()
        self._classify()

    # -- spectral data -----------------------------------------------------

    def _decompose(self):
        """Split R^(n-1) into E = ker(A - I) and rotation planes.

        E comes from the SVD of A - I (singular values <= KERNEL_TOL), the
        rotation angles and their invariant coordinates from the real Schur
        form, which is block diagonal for orthogonal matrices.
        """
        m = self.a.size
        _, sv, vt = np.linalg.svd(self.A - np.eye(m))
        kernel_rows = sv <= KERNEL_TOL
        self._E_basis = vt[kernel_rows].T  # columns span E
        T, Z = scipy.linalg.schur(self.A, output="real")
        angles = []
        slices = []
        j = 0
        while j < m:
            if j + 1 < m and abs(T[j + 1, j]) > ROTATION_TOL:
                theta = abs(math.atan2(T[j + 1, j], T[j, j]))
                if 2.0 * math.sin(theta / 2.0) > KERNEL_TOL:
                    angles.append(theta)
                    slices.append((j, j + 2))
                j += 2
            else:
                if T[j, j] < 0.0:  # eigenvalue -1: a half-turn direction
                    angles.append(math.pi)
                    slices.append((j, j + 1))
                j += 1
        if m - self._E_basis.shape[1] != sum(hi - lo for lo, hi in slices):
            raise ArithmeticError("kernel split disagrees between SVD and Schur form")
        self._Z = Z
        self._angles = np.array(angles)
        self._slices = slices

    def _classify(self):
        if self._angles.size == 0:
            self.kind, self.order = PURE_TRANSLATION, None
            return
        orders = [_rational_angle_order(theta) for theta in self._angles]
        if any(o is None for o in orders):
            self.kind, self.order = IRRATIONAL_SCREW, None
        else:
            self.kind, self.order = RATIONAL_SCREW, math.lcm(*orders)

    # -- action ------------------------------------------------------------

    @property
    def translation_norm(self) -> float:
        return self._a_norm

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.A @ np.asarray(v, dtype=float) + self.a

    def apply_upper(self, x: HPoint) -> HPoint:
        if x.n != self.n:
            raise ValueError(f"point in H^{x.n}, screw in H^{self.n}")
        return HPoint(self.apply(x.v), x.t)

    def as_word(self) -> MoebiusWord:
        return MoebiusWord((Translation(self.a), Orthogonal(self.A)), self.n)

    def masses(self, v: np.ndarray) -> np.ndarray:
        """Component norms of v in the rotation planes, one per angle.

        These determine |(A^i - I) v| = (sum_b 4 m_b^2 sin^2(i theta_b / 2))^(1/2);
        the E component of v does not enter.
        """
        y = self._Z.T @ np.asarray(v, dtype=float)
        return np.array([np.linalg.norm(y[lo:hi]) for lo, hi in self._slices])

    def w_perp_norm(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        w = self._E_basis @ (self._E_basis.T @ v)
        return float(np.linalg.norm(v - w))


def normalize(A, a) -> ScrewTranslation:
    """Conjugate (A, a) by a boundary translation into the normal form A a = a.

    The conjugator b solves (A - I) b = a_perp on E_perp, where a_perp is the
    component of a orthogonal to E = ker(A - I); this is invertible there.
    Raises NotParabolic when a projects to zero on E (the map then has a
    finite fixed point on the boundary and is not parabolic).
    """
    A = np.asarray(A, dtype=float)
    a = np.asarray(a, dtype=float).reshape(-1)
    m = a.size
    if A.shape != (m, m):
        raise ValueError(f"rotation is {A.shape}, translation has length {m}")
    if np.linalg.norm(A.T @ A - np.eye(m)) > ROTATION_TOL:
        raise ValueError("rotation part is not orthogonal")
    if np.linalg.det(A) <= 0:
        raise ValueError("rotation part must have determinant +1")
    _, sv, vt = np.linalg.svd(A - np.eye(m))
    basis = vt[sv <= KERNEL_TOL].T
    a_E = basis @ (basis.T @ a)
    if np.linalg.norm(a_E) <= 1e-12 * max(1.0, np.linalg.norm(a)):
        raise NotParabolic("translation part is orthogonal to ker(A - I)")
    a_perp = a - a_E
    b, *_ = np.linalg.lstsq(A - np.eye(m), a_perp, rcond=1e-10)
    residual = np.linalg.norm((A - np.eye(m)) @ b - a_perp)
    if residual > 1e-8 * (1.0 + np.linalg.norm(a)):
        raise ArithmeticError("conjugating translation solve failed")
    return ScrewTranslation(A, a_E, shift=b)


# -- displacement functions and their infima -------------------------------


def u_i(g: ScrewTranslation, params: MargulisParams, v, i: int) -> float:
    """u_{g,i}(v) = c(eps) * (|(A^i - I) w_perp|^2 + i^2 |a|^2)^(1/2)."""
    if i < 1:
        raise ValueError("index must be a positive integer")
    m = g.masses(np.asarray(v, dtype=float))
    rot = 0.0
    if m.size:
        s = 2.0 * m * np.sin(0.5 * i * g._angles)
        rot = float(np.sqrt(np.sum(s * s)))
    return params.c * math.hypot(rot, i * g.translation_norm)


def u_tilde(g: ScrewTranslation, params: MargulisParams, r: float, i: int) -> float:
    """Radial envelope c(eps) * (|A^i - I|^2 r^2 + i^2 |a|^2)^(1/2), with the
    operator norm taken on E_perp; the supremum of u_{g,i} over |w_perp| = r."""
    if i < 1:
        raise ValueError("index must be a positive integer")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    op = 0.0
    if g._angles.size:
        op = float(np.max(2.0 * np.abs(np.sin(0.5 * i * g._angles))))
    return params.c * math.hypot(op * r, i * g.translation_norm)


def _truncated_minimum(
    u_chunk: Callable[[np.ndarray], np.ndarray],
    lb_coefficient: float,
    budget: int,
    chunk: int = 8192,
) -> BoundaryEvaluation:
    """Minimize u over i in N using the linear lower bound lb(i) = lb_coefficient * i.

    Sequential semantics: scan i = 1, 2, ...; before evaluating u_i, stop if
    lb(i) is at or above the running minimum (every later term is too); ties
    in the minimum go to the smallest index.  Vectorized in chunks with a
    prefix running minimum, which reproduces the sequential rule exactly.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    best = math.inf
    best_i = 0
    start = 1
    while start <= budget:
        stop = min(start + chunk - 1, budget)
        idx = np.arange(start, stop + 1, dtype=float)
        u = u_chunk(idx)
        lb = lb_coefficient * idx
        running = np.minimum.accumulate(np.concatenate(([best], u)))[:-1]
        hit = lb >= running
        if hit.any():
            k = int(np.argmax(hit))
            head = u[:k]
            if head.size:
                j = int(np.argmin(head))
                if head[j] < best:
                    best, best_i = float(head[j]), int(idx[j])
            return BoundaryEvaluation(best, best_i, int(idx[k]) - 1, True)
        j = int(np.argmin(u))
        if u[j] < best:
            best, best_i = float(u[j]), int(idx[j])
        start = stop + 1
    return BoundaryEvaluation(best, best_i, budget, False)


def boundary_function(
    g: ScrewTranslation,
    params: MargulisParams,
    v,
    budget: int = DEFAULT_BUDGET,
) -> BoundaryEvaluation:
    """B_g(v) = inf_i u_{g,i}(v), computed as a provably exact finite minimum.

    With the budget hit (exact=False) the value is an upper bound on B_g(v).
    """
    v = np.asarray(v, dtype=float)
    m = g.masses(v)
    c, na, angles = params.c, g.translation_norm, g._angles

    if m.size == 0:
        def u_chunk(idx):
            return c * na * idx
    else:
        two_m = 2.0 * m

        def u_chunk(idx):
            s = two_m[:, None] * np.sin(0.5 * np.outer(angles, idx))
            rot = np.sqrt(np.einsum("bi,bi->i", s, s))
            return c * np.hypot(rot, na * idx)

    return _truncated_minimum(u_chunk, c * na, budget)


def boundary_tilde(
    g: ScrewTranslation,
    params: MargulisParams,
    r: float,
    budget: int = DEFAULT_BUDGET,
) -> BoundaryEvaluation:
    """Radial envelope of the boundary function: inf_i of the u_tilde.

    Dominates B_g at every v with |w_perp| = r, and is o(r) as r grows."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    c, na, angles = params.c, g.translation_norm, g._angles

    if angles.size == 0:
        def u_chunk(idx):
            return c * na * idx
    else:
        def u_chunk(idx):
            op = np.max(2.0 * np.abs(np.sin(0.5 * np.outer(angles, idx))), axis=0)
            return c * np.hypot(op * r, na * idx)

    return _truncated_minimum(u_chunk, c * na, budget)


def in_margulis_region(
    g: ScrewTranslation,
    params: MargulisParams,
    x: HPoint,
    budget: int = DEFAULT_BUDGET,
) -> Membership:
    """Is x = (v, t) in T_g = {t > B_g(v)}?  Returns the signed margin t - B_g(v).

    Equivalent to: some iterate g^i moves x a hyperbolic distance below eps.
    If the evaluation is inexact, the value is an upper bound for B_g(v), so
    ``inside=True`` is still rigorous while ``inside=False`` is provisional.
    """
    if x.n != g.n:
        raise ValueError(f"point in H^{x.n}, screw in H^{g.n}")
    ev = boundary_function(g, params, x.v, budget)
    margin = x.t - ev.value
    return Membership(margin > 0.0, margin, ev)
