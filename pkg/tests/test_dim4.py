import math
from fractions import Fraction

import numpy as np
import pytest

from margulis import (
    INFINITY,
    CylScrew,
    MargulisParams,
    PrecisionHorizon,
    as_alpha,
    asymptotic_slack,
    boundary_function,
    continued_fraction,
    cyl_boundary,
    is_convergent_denominator,
    isometric_sphere,
    liouville_alpha,
    liouville_demo,
    local_slope_table,
    screw_inversion_pair,
    slope_estimate,
)
from margulis.parabolic import IRRATIONAL_SCREW

GOLDEN_FLOAT = (math.sqrt(5.0) - 1.0) / 2.0

# frozen before implementation: B_g at r = 1e6 for the golden rotation
# number at eps = 0.1, minimum attained at the Fibonacci index 1597 with
# the scan provably complete by index 2376
FROZEN_GOLDEN_R1E6 = 23752.05
FROZEN_GOLDEN_R1E6_INDEX = 1597
FROZEN_GOLDEN_R1E6_TRUNC = 2376


def test_as_alpha_forms():
    assert as_alpha(0.25) == Fraction(1, 4)
    assert as_alpha((2, 7)) == Fraction(2, 7)
    assert as_alpha(Fraction(3, 8)) == Fraction(3, 8)
    assert as_alpha("golden") == Fraction(GOLDEN_FLOAT)
    assert as_alpha("sqrt2-1") == Fraction(math.sqrt(2.0) - 1.0)
    for bad in (0.0, 1.0, 1.5, -0.2):
        with pytest.raises(ValueError):
            as_alpha(bad)
    with pytest.raises(ValueError):
        as_alpha("silver")


def test_cyl_screw_construction():
    cyl = CylScrew.from_value("golden")
    assert cyl.source == "golden"
    assert cyl.alpha_float == pytest.approx(GOLDEN_FLOAT)
    g = cyl.to_screw()
    assert g.kind == IRRATIONAL_SCREW
    assert g.order is None
    assert np.allclose(g.a, [0.0, 0.0, 1.0])
    th = 2.0 * math.pi * GOLDEN_FLOAT
    assert g.A[0, 0] == pytest.approx(math.cos(th))
    assert CylScrew.from_value((1, 3)).source == "rational"
    assert CylScrew.from_value(0.3).source == "float64"


def test_continued_fraction_exact_rational():
    cf = continued_fraction(Fraction(1, 3))
    assert cf.quotients == (3,)
    assert cf.p == (0, 1)
    assert cf.q == (1, 3)
    assert cf.source == "rational"
    assert cf.horizon is None

    cf = continued_fraction(Fraction(113, 355))
    assert cf.quotients == (3, 7, 16)
    assert cf.p == (0, 1, 7, 113)
    assert cf.q == (1, 3, 22, 355)
    assert Fraction(cf.p[-1], cf.q[-1]) == Fraction(113, 355)

    short = continued_fraction(Fraction(113, 355), depth=2)
    assert short.quotients == (3, 7)
    assert short.q == (1, 3, 22)


def test_continued_fraction_golden_is_fibonacci():
    cf = continued_fraction("golden")
    assert cf.source == "float64"
    assert cf.horizon == len(cf.quotients)
    assert cf.horizon >= 30
    assert all(a == 1 for a in cf.quotients)
    fib = [1, 1]
    while len(fib) < 13:
        fib.append(fib[-1] + fib[-2])
    assert list(cf.q[:13]) == fib[:13]


def test_precision_horizon():
    ok = continued_fraction("golden", depth=10)
    assert len(ok.quotients) == 10
    with pytest.raises(PrecisionHorizon):
        continued_fraction("golden", depth=100)
    with pytest.raises(PrecisionHorizon):
        continued_fraction(GOLDEN_FLOAT, depth=100)
    # naturally terminating float input has no horizon to violate
    done = continued_fraction(0.5, depth=50)
    assert done.quotients == (2,)


def test_convergent_denominators():
    for i in (1, 2, 3, 5, 8, 13, 21):
        assert is_convergent_denominator("golden", i)
    for i in (4, 6, 7, 9, 12):
        assert not is_convergent_denominator("golden", i)
    cf = continued_fraction(Fraction(113, 355))
    assert is_convergent_denominator(cf, 22)
    assert not is_convergent_denominator(cf, 23)


def test_golden_boundary_frozen_value():
    params = MargulisParams(0.1)
    ev = cyl_boundary("golden", params, 1e6)
    assert ev.exact
    assert ev.value == pytest.approx(FROZEN_GOLDEN_R1E6, abs=0.5)
    assert ev.attained_index == FROZEN_GOLDEN_R1E6_INDEX
    assert ev.truncation_index == FROZEN_GOLDEN_R1E6_TRUNC
    assert is_convergent_denominator("golden", ev.attained_index)


def test_golden_boundary_against_extended_precision():
    # independent oracle: the same minimum recomputed with 40-digit sines
    mpmath = pytest.importorskip("mpmath")
    mp = mpmath.mp
    old = mp.dps
    mp.dps = 40
    try:
        frac = as_alpha("golden")
        alpha = mpmath.mpf(frac.numerator) / mpmath.mpf(frac.denominator)
        c = 1 / (2 * mpmath.sinh(mpmath.mpf(0.1) / 2))
        r = mpmath.mpf(10) ** 6
        best, best_i = None, None
        for i in range(1, 2500):
            s = mpmath.sin(mpmath.pi * i * alpha)
            u = c * mpmath.sqrt(4 * s * s * r * r + i * i)
            if best is None or u < best:
                best, best_i = u, i
        ev = cyl_boundary(frac, MargulisParams(0.1), 1e6)
        assert ev.attained_index == best_i
        assert ev.value == pytest.approx(float(best), rel=5e-12)
    finally:
        mp.dps = old


def test_cyl_matches_generic_screw():
    # the closed radial form against the general machinery, off-axis point
    params = MargulisParams(0.1)
    for alpha in ("golden", (2, 7)):
        g = CylScrew.from_value(alpha).to_screw()
        for r in (0.5, 10.0, 100.0):
            radial = cyl_boundary(alpha, params, r)
            generic = boundary_function(g, params, np.array([r, 0.0, 0.0]))
            assert radial.value == pytest.approx(generic.value, rel=1e-11)
            assert radial.attained_index == generic.attained_index


def test_rational_alpha_plateaus_at_order():
    params = MargulisParams(0.1)
    ev = cyl_boundary((2, 7), params, 1e8)
    assert ev.value == pytest.approx(params.c * 7.0, rel=1e-12)
    assert ev.attained_index == 7


def test_budget_exhaustion():
    params = MargulisParams(0.1)
    ev = cyl_boundary("golden", params, 1e6, budget=3)
    assert not ev.exact
    assert ev.truncation_index == 3
    full = cyl_boundary("golden", params, 1e6)
    assert full.value <= ev.value


def test_slope_estimate_basics():
    params = MargulisParams(0.1)
    est = slope_estimate("golden", params, 1e2, 1e7, samples=11)
    assert 0.40 <= est.exponent <= 0.60
    assert est.max_sqrt_ratio < 50.0
    assert len(est.radii) == 11
    with pytest.raises(ValueError):
        slope_estimate("golden", params, 10.0, 1e6)
    with pytest.raises(ValueError):
        slope_estimate("golden", params, 1e2, 1e6, samples=5)


def test_liouville_alpha_exact():
    assert liouville_alpha(3) == Fraction(110001, 10**6)
    assert liouville_alpha(4) == Fraction(110001, 10**6) + Fraction(1, 10**24)
    assert liouville_alpha(5) == (Fraction(110001, 10**6) + Fraction(1, 10**24)
                                  + Fraction(1, 10**120))
    with pytest.raises(ValueError):
        liouville_alpha(6)


def test_liouville_has_slow_windows_golden_does_not():
    params = MargulisParams(0.1)
    slow = liouville_demo(3, params, (1e3, 1e6))
    assert any(w.flagged for w in slow.windows)
    steady = local_slope_table("golden", params, (1e3, 1e6))
    assert not any(w.flagged for w in steady.windows)


def test_screw_inversion_pair_geometry():
    r = 1e6
    cyl, h = screw_inversion_pair("golden", r)
    center = np.array([r, 0.0, 0.0])
    assert np.allclose(h.apply_boundary(INFINITY).v, center)
    assert np.allclose(h.inverse().apply_boundary(INFINITY).v, center)
    # involution; probe residue scales with the O(r) word coefficients
    assert (h * h).is_identity(tol=1e-11 * r)
    r_small = 1e3
    _, h_small = screw_inversion_pair("golden", r_small)
    assert (h_small * h_small).is_identity()
    sphere = isometric_sphere(h)
    assert sphere.radius == pytest.approx(r ** (2.0 / 3.0), rel=1e-8)
    assert np.allclose(sphere.center, center, atol=1e-6 * r)


def test_screw_inversion_family_outruns_displacement_bounds():
    params = MargulisParams(0.1)
    g = CylScrew.from_value("golden").to_screw()
    rows = asymptotic_slack(
        g,
        lambda r: screw_inversion_pair("golden", r)[1],
        params,
        [1e2, 1e4, 1e6],
    )
    ours = [row.ratio_ours for row in rows]
    assert ours[0] > ours[1] > ours[2]  # geometric threshold is o(sqrt_rr)
    for row in rows:
        assert row.waterman_threshold == pytest.approx(2.0 * row.sqrt_rr, rel=1e-12)
    # R_h / sqrt_rr shrinks too; at desk radii the sphere has not yet caught
    # the geometric threshold, which is why firing needs r beyond ~2e8
    ratio_R = [row.ratio_R for row in rows]
    assert ratio_R[0] > ratio_R[1] > ratio_R[2]
    for row in rows:
        assert row.R_h < row.our_threshold


def test_screw_inversion_validation():
    with pytest.raises(ValueError):
        screw_inversion_pair("golden", 0.0)
    with pytest.raises(ValueError):
        screw_inversion_pair("golden", -5.0)
