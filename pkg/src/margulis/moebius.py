"""Moebius maps of the extended boundary and their Poincare extensions.

A map is stored as a composition word of four conformal primitives
(translation, orthogonal map, dilation, inversion in the unit sphere),
applied right to left.  This representation is dimension-agnostic, keeps
the point at infinity symbolic, and gives closed-form conformal factors,
which is all the isometric-sphere computations need.

The Poincare extension of each primitive acts on the upper half-space:
translations and orthogonal maps fix the height, dilations scale (v, t)
jointly, and the unit inversion sends (v, t) to (v, t) / (|v|^2 + t^2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .geometry import (
    INFINITY,
    BoundaryPoint,
    DimensionMismatch,
    HPoint,
    hyperbolic_distance,
)

ORTHOGONAL_TOL = 1e-12
PROBE_TOL = 1e-9
RADIUS_CROSS_CHECK_TOL = 1e-8
POLE_RETRIES = 5
POLE_PERTURBATION = 1e-6


class FixesInfinity(ValueError):
    """The map stabilizes infinity, so it has no isometric sphere."""


class PoleError(ArithmeticError):
    """A probe point kept landing on an inversion pole."""


class WordBudgetExceeded(RuntimeError):
    """The word enumeration exceeded its configured cap."""


@dataclass(frozen=True, eq=False)
class Translation:
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if not np.all(np.isfinite(b)):
            raise ValueError("translation vector must be finite")
        object.__setattr__(self, "b", b)

    def inverse(self):
        return Translation(-self.b)


@dataclass(frozen=True, eq=False)
class Orthogonal:
    Q: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("orthogonal part must be a square matrix")
        err = np.linalg.norm(Q.T @ Q - np.eye(Q.shape[0]))
        if not err <= ORTHOGONAL_TOL:
            raise ValueError(f"matrix is not orthogonal to {ORTHOGONAL_TOL:g} (defect {err:.3e})")
        object.__setattr__(self, "Q", Q)

    def inverse(self):
        return Orthogonal(self.Q.T)


@dataclass(frozen=True, eq=False)
class Dilation:
    factor: float

    def __post_init__(self):
        f = float(self.factor)
        if not (f > 0 and np.isfinite(f)):
            raise ValueError("dilation factor must be positive and finite")
        object.__setattr__(self, "factor", f)

    def inverse(self):
        return Dilation(1.0 / self.factor)


@dataclass(frozen=True, eq=False)
class UnitInversion:
    """x -> x / |x|^2 on the boundary; swaps 0 and infinity."""

    def inverse(self):
        return UnitInversion()


Primitive = Union[Translation, Orthogonal, Dilation, UnitInversion]


def _primitive_dim(p: Primitive) -> int | None:
    if isinstance(p, Translation):
        return p.b.size
    if isinstance(p, Orthogonal):
        return p.Q.shape[0]
    return None


@dataclass(eq=False)
class MoebiusWord:
    """A composition word of conformal primitives, applied right to left.

    The empty word is the identity.  ``n`` is the dimension of the ambient
    hyperbolic space, so primitives act on vectors of length n - 1.
    """

    factors: tuple
    n: int

    def __post_init__(self):
        self.factors = tuple(self.factors)
        if self.n < 2:
            raise ValueError("hyperbolic dimension must be at least 2")
        for p in self.factors:
            d = _primitive_dim(p)
            if d is not None and d != self.n - 1:
                raise DimensionMismatch(f"primitive acts on R^{d}, word on R^{self.n - 1}")

    @classmethod
    def identity(cls, n: int) -> "MoebiusWord":
        return cls((), n)

    def __mul__(self, other: "MoebiusWord") -> "MoebiusWord":
        if self.n != other.n:
            raise DimensionMismatch(f"dimension {self.n} vs {other.n}")
        return MoebiusWord(self.factors + other.factors, self.n)

    def __len__(self):
        return len(self.factors)

    def inverse(self) -> "MoebiusWord":
        return MoebiusWord(tuple(p.inverse() for p in reversed(self.factors)), self.n)

    # -- boundary action ---------------------------------------------------

    def apply_boundary(self, p) -> BoundaryPoint:
        """Apply the word to a boundary point; infinity is tracked symbolically."""
        if not isinstance(p, BoundaryPoint):
            p = BoundaryPoint.finite(p)
        if not p.is_infinity and p.v.size != self.n - 1:
            raise DimensionMismatch(f"point in R^{p.v.size}, word on R^{self.n - 1}")
        cur = p
        for prim in reversed(self.factors):
            cur = _apply_primitive_boundary(prim, cur, self.n)
        return cur

    def apply_upper(self, x: HPoint) -> HPoint:
        """Apply the Poincare extension to a point of the upper half-space."""
        if x.n != self.n:
            raise DimensionMismatch(f"point in H^{x.n}, word on H^{self.n}")
        v, t = x.v, x.t
        for prim in reversed(self.factors):
            if isinstance(prim, Translation):
                v = v + prim.b
            elif isinstance(prim, Orthogonal):
                v = prim.Q @ v
            elif isinstance(prim, Dilation):
                v = prim.factor * v
                t = prim.factor * t
            else:
                q = float(v @ v) + t * t
                v = v / q
                t = t / q
        return HPoint(v, t)

    # -- equality by evaluation -------------------------------------------

    def agrees_with(self, other: "MoebiusWord", tol: float = PROBE_TOL) -> bool:
        """Probe-frame equality test: same action on n+1 generic boundary
        points and on infinity, up to ``tol`` in the chordal metric.

        The chordal metric of the conformal sphere is used so that a huge
        finite value produced by rounding on a path through a pole still
        counts as infinity.
        """
        if self.n != other.n:
            return False
        return all(
            chordal_distance(self.apply_boundary(p), other.apply_boundary(p)) <= tol
            for p in _probe_frame(self.n)
        )

    def is_identity(self, tol: float = PROBE_TOL) -> bool:
        return self.agrees_with(MoebiusWord.identity(self.n), tol)


def chordal_distance(a: BoundaryPoint, b: BoundaryPoint) -> float:
    """Distance on the extended boundary under the round metric of the
    conformal sphere: |a - b| / sqrt((1 + |a|^2)(1 + |b|^2)), with the
    natural limit 1 / sqrt(1 + |a|^2) when b is infinity."""
    if a.is_infinity and b.is_infinity:
        return 0.0
    if a.is_infinity or b.is_infinity:
        finite = b if a.is_infinity else a
        return 1.0 / np.sqrt(1.0 + float(finite.v @ finite.v))
    na = 1.0 + float(a.v @ a.v)
    nb = 1.0 + float(b.v @ b.v)
    return float(np.linalg.norm(a.v - b.v)) / np.sqrt(na * nb)


def _apply_primitive_boundary(prim: Primitive, p: BoundaryPoint, n: int) -> BoundaryPoint:
    if isinstance(prim, UnitInversion):
        if p.is_infinity:
            return BoundaryPoint.finite(np.zeros(n - 1))
        q = float(p.v @ p.v)
        if q == 0.0:
            return INFINITY
        return BoundaryPoint.finite(p.v / q)
    if p.is_infinity:
        return p
    if isinstance(prim, Translation):
        return BoundaryPoint.finite(p.v + prim.b)
    if isinstance(prim, Orthogonal):
        return BoundaryPoint.finite(prim.Q @ p.v)
    return BoundaryPoint.finite(prim.factor * p.v)


def _probe_frame(n: int) -> list:
    """n+1 generic finite boundary points plus infinity, fixed per dimension."""
    rng = np.random.default_rng(70451 + n)
    pts = rng.normal(size=(n + 1, n - 1)) * (1.0 + np.arange(n + 1)[:, None] / 3.0)
    return [BoundaryPoint.finite(v) for v in pts] + [INFINITY]


def inversion_in_sphere(center, radius: float, n: int | None = None) -> MoebiusWord:
    """Inversion in the sphere S(center, radius) as a word:
    x -> center + radius^2 (x - center) / |x - center|^2."""
    c = np.asarray(center, dtype=float).reshape(-1)
    if not radius > 0:
        raise ValueError("radius must be positive")
    n = c.size + 1 if n is None else n
    return MoebiusWord(
        (Translation(c), Dilation(radius * radius), UnitInversion(), Translation(-c)), n
    )


# -- conformal factor and isometric spheres -------------------------------


def conformal_factor(h: MoebiusWord, p, _retry: int = 0) -> float:
    """The scalar |h'(p)| at a finite boundary point p.

    Chain rule through the word: translations and orthogonal maps contribute
    1, a dilation contributes its factor, an inversion at the running point q
    contributes 1 / |q|^2.  If the evaluation hits an inversion pole exactly,
    the probe is perturbed deterministically (magnitude 1e-6) and retried.
    """
    if isinstance(p, BoundaryPoint):
        if p.is_infinity:
            raise ValueError("conformal factor is chart-dependent at infinity")
        p = p.v
    cur = np.asarray(p, dtype=float).reshape(-1)
    if cur.size != h.n - 1:
        raise DimensionMismatch(f"point in R^{cur.size}, word on R^{h.n - 1}")
    factor = 1.0
    for prim in reversed(h.factors):
        if isinstance(prim, UnitInversion):
            q = float(cur @ cur)
            if q == 0.0:
                # exact pole: the chain-rule factor is infinite here
                if _retry >= POLE_RETRIES:
                    raise PoleError("probe point hit an inversion pole repeatedly")
                rng = np.random.default_rng(987654321 + _retry)
                jitter = rng.normal(size=cur.size)
                jitter *= POLE_PERTURBATION / np.linalg.norm(jitter)
                return conformal_factor(h, np.asarray(p, dtype=float) + jitter, _retry + 1)
            factor /= q
            cur = cur / q
        elif isinstance(prim, Translation):
            cur = cur + prim.b
        elif isinstance(prim, Orthogonal):
            cur = prim.Q @ cur
        else:
            factor *= prim.factor
            cur = prim.factor * cur
    return factor


@dataclass(frozen=True, eq=False)
class IsometricSphere:
    """Center v_h = h^{-1}(infinity), cocenter v_hinv = h(infinity), radius R_h.

    h maps the sphere |x - center| = R isometrically onto the sphere of the
    same radius about the cocenter, exchanging interior and exterior.
    """

    center: np.ndarray
    cocenter: np.ndarray
    radius: float


def isometric_sphere(h: MoebiusWord) -> IsometricSphere:
    """Isometric sphere of a word with h(infinity) != infinity.

    The radius comes from R^2 = |h'(x)| |x - v_h|^2, which holds at every
    finite x != v_h; it is evaluated at two probe points and cross-checked
    to relative tolerance 1e-8.
    """
    image_inf = h.apply_boundary(INFINITY)
    if image_inf.is_infinity:
        raise FixesInfinity("h fixes infinity; isometric sphere undefined")
    cocenter = image_inf.v
    center = h.inverse().apply_boundary(INFINITY).v

    d = h.n - 1
    # probes scale with the center so that x - center stays well conditioned
    scale = max(1.0, float(np.linalg.norm(center)))
    u1 = np.zeros(d)
    u1[0] = scale
    u2 = scale * np.ones(d) / np.sqrt(d)
    estimates = []
    for offset in (u1, 2.0 * u2):
        x = center + offset
        realized = x - center
        r2 = conformal_factor(h, x) * float(realized @ realized)
        estimates.append(r2)
    r2a, r2b = estimates
    if abs(r2a - r2b) > RADIUS_CROSS_CHECK_TOL * max(abs(r2a), abs(r2b)):
        raise ArithmeticError(
            f"isometric sphere radius cross-check failed: {r2a!r} vs {r2b!r}"
        )
    return IsometricSphere(center, cocenter, float(np.sqrt(r2a)))


def vertical_image(h: MoebiusWord, s: float) -> HPoint:
    """Image of the point (v_h, s) on the vertical geodesic through the center.

    Contract (tested, not assumed): the result is (v_hinv, R_h^2 / s), since h
    carries the vertical geodesic through v_h to the one through v_hinv,
    swapping the heights across R_h.
    """
    if not s > 0:
        raise ValueError("height must be positive")
    sphere = isometric_sphere(h)
    return h.apply_upper(HPoint(sphere.center, float(s)))


# -- near-identity word scan ----------------------------------------------


@dataclass(frozen=True, eq=False)
class ScanHit:
    """A freely reduced word moving the basepoint less than delta.

    ``letters`` are signed 1-based generator indices (-k is the inverse of
    generator k), leftmost letter applied last.  ``acts_as_identity`` is the
    probe-frame identity test; a hit with displacement 0 and this flag set is
    a relation, not a small nontrivial motion.
    """

    letters: tuple
    word: MoebiusWord
    displacement: float
    acts_as_identity: bool

    def label(self, names: Sequence[str] | None = None) -> str:
        out = []
        for k in self.letters:
            name = names[abs(k) - 1] if names else f"g{abs(k)}"
            out.append(name if k > 0 else name + "^-1")
        return " ".join(out)


def near_identity_scan(
    gens: Sequence[MoebiusWord],
    max_len: int,
    basepoint: HPoint,
    delta: float,
    word_budget: int = 100000,
) -> list:
    """Enumerate freely reduced words in the generators and their inverses up
    to length ``max_len`` and report those moving ``basepoint`` less than
    ``delta`` in the hyperbolic metric.

    This is one-sided evidence only: hits suggest non-discreteness (or
    relations), while an empty report proves nothing.  Deterministic output,
    sorted by (displacement, length, letters).
    """
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not gens:
        return []
    n = gens[0].n
    for g in gens:
        if g.n != n:
            raise DimensionMismatch("generators live in different dimensions")
    if basepoint.n != n:
        raise DimensionMismatch("basepoint dimension does not match generators")

    letter_words = {}
    for k, g in enumerate(gens, start=1):
        letter_words[k] = g
        letter_words[-k] = g.inverse()

    hits = []
    count = 0
    frontier = [((), MoebiusWord.identity(n))]
    for _ in range(max_len):
        next_frontier = []
        for letters, word in frontier:
            last = letters[-1] if letters else 0
            for k in letter_words:
                if k == -last:
                    continue  # free reduction: no immediate cancellation
                count += 1
                if count > word_budget:
                    raise WordBudgetExceeded(
                        f"enumeration exceeded word budget {word_budget}"
                    )
                new_letters = letters + (k,)
                new_word = word * letter_words[k]
                disp = hyperbolic_distance(new_word.apply_upper(basepoint), basepoint)
                if disp < delta:
                    hits.append(
                        ScanHit(new_letters, new_word, disp, new_word.is_identity())
                    )
                next_frontier.append((new_letters, new_word))
        frontier = next_frontier
    hits.sort(key=lambda hit: (hit.displacement, len(hit.letters), hit.letters))
    return hits
