import math

import numpy as np
import pytest

from helpers import block_rotation, haar_rotation, random_screw

from margulis import (
    DEFAULT_BUDGET,
    HPoint,
    MargulisParams,
    MoebiusWord,
    NotParabolic,
    Orthogonal,
    ScrewTranslation,
    Translation,
    boundary_function,
    boundary_tilde,
    c_epsilon,
    default_epsilon,
    in_margulis_region,
    normalize,
)
from margulis.parabolic import (
    IRRATIONAL_SCREW,
    PURE_TRANSLATION,
    RATIONAL_SCREW,
    u_i,
    u_tilde,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def orbit_displacements(g, v, count):
    """c-free displacement norms |g^i(v) - v| by actually iterating the map."""
    v = np.asarray(v, dtype=float)
    out = []
    x = v
    for _ in range(count):
        x = g.apply(x)
        out.append(float(np.linalg.norm(x - v)))
    return np.array(out)


def test_constant_c_frozen_values():
    # frozen oracle values, computed from 1/sqrt(2 cosh(eps) - 2) beforehand
    assert c_epsilon(math.asinh(1.0)) == pytest.approx(1.0986841134678098, rel=1e-14)
    assert c_epsilon(0.1) == pytest.approx(9.995834548290933, rel=1e-14)
    # the two closed forms agree
    for eps in (0.01, 0.3, 1.0, 4.0):
        assert c_epsilon(eps) == pytest.approx(
            1.0 / math.sqrt(2.0 * math.cosh(eps) - 2.0), rel=1e-12)


def test_c_is_decreasing_and_validated():
    assert c_epsilon(0.1) > c_epsilon(0.5) > c_epsilon(2.0)
    for bad in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            c_epsilon(bad)
    with pytest.raises(ValueError):
        MargulisParams(-0.5)


def test_default_epsilon():
    assert default_epsilon(2) == pytest.approx(math.asinh(1.0))
    assert default_epsilon(3) == 0.1
    assert default_epsilon(7) == 0.1
    assert DEFAULT_BUDGET == 10**8


def test_kind_classification():
    rng = np.random.default_rng(31)
    pure = random_screw(rng, 4, ())
    assert pure.kind == PURE_TRANSLATION and pure.order is None

    rational = random_screw(rng, 4, (2.0 * math.pi * 3.0 / 10.0,))
    assert rational.kind == RATIONAL_SCREW and rational.order == 10

    two = random_screw(rng, 6, (2.0 * math.pi / 4.0, 2.0 * math.pi / 6.0))
    assert two.kind == RATIONAL_SCREW and two.order == 12

    irr = random_screw(rng, 4, (2.0 * math.pi * GOLDEN,))
    assert irr.kind == IRRATIONAL_SCREW and irr.order is None

    # near-rational angles classify as irrational (sound direction)
    near = random_screw(rng, 4, (2.0 * math.pi * (1.0 / 7.0 + 1e-9),))
    assert near.kind == IRRATIONAL_SCREW


def test_half_turn_angle():
    A = np.diag([-1.0, -1.0, 1.0])
    g = ScrewTranslation(A, np.array([0.0, 0.0, 1.0]))
    assert g.kind == RATIONAL_SCREW and g.order == 2


def test_normal_form_enforced():
    th = 2.0 * math.pi / 5.0
    A = block_rotation(3, (th,))
    bad_a = np.array([1.0, 0.0, 1.0])  # has a component inside the plane
    with pytest.raises(ValueError):
        ScrewTranslation(A, bad_a)
    with pytest.raises(NotParabolic):
        ScrewTranslation(A, np.zeros(3))


def test_normalize_recovers_normal_form():
    rng = np.random.default_rng(32)
    for _ in range(20):
        th = rng.uniform(0.3, 3.0)
        A = block_rotation(3, (th,))
        U = haar_rotation(rng, 3)
        A = U @ A @ U.T
        a = rng.uniform(-2, 2, 3)
        a = a + U[:, 2] * (1.0 - U[:, 2] @ a)  # ensure an E component
        g = normalize(A, a)
        assert np.linalg.norm(g.A @ g.a - g.a) <= 1e-9
        # conjugation convention: translating by shift carries the original
        # word to the normal form
        n = 4
        raw = MoebiusWord((Translation(a), Orthogonal(A)), n)
        tau = MoebiusWord((Translation(g.shift),), n)
        assert (tau * raw * tau.inverse()).agrees_with(g.as_word())


def test_normalize_rejects_nonparabolic():
    th = 2.0 * math.pi / 6.0
    A = block_rotation(2, (th,))
    with pytest.raises(NotParabolic):
        normalize(A, np.array([0.7, -0.2]))  # E is trivial here


def test_u_i_matches_orbit_definition():
    # independent oracle: u_i must equal c |g^i(v) - v| computed by iteration
    rng = np.random.default_rng(33)
    params = MargulisParams(0.37)
    for _ in range(25):
        n = int(rng.integers(4, 7))
        k_max = (n - 2) // 2  # planes fitting beside the translation axis
        angles = tuple(rng.uniform(0.2, 3.0, int(rng.integers(1, k_max + 1))))
        g = random_screw(rng, n, angles)
        v = rng.uniform(-20, 20, n - 1)
        disp = orbit_displacements(g, v, 40)
        for i in (1, 2, 7, 40):
            assert u_i(g, params, v, i) == pytest.approx(
                params.c * disp[i - 1], rel=1e-10)


def test_boundary_function_matches_orbit_minimum():
    rng = np.random.default_rng(34)
    params = MargulisParams(0.25)
    for _ in range(25):
        n = int(rng.integers(4, 7))
        k_max = (n - 2) // 2
        angles = tuple(rng.uniform(0.2, 3.0, int(rng.integers(1, k_max + 1))))
        g = random_screw(rng, n, angles)
        v = rng.uniform(-15, 15, n - 1)
        ev = boundary_function(g, params, v)
        assert ev.exact
        count = max(ev.truncation_index, ev.attained_index) + 5
        disp = params.c * orbit_displacements(g, v, count)
        j = int(np.argmin(disp[:ev.truncation_index]))
        assert ev.value == pytest.approx(float(disp[j]), rel=1e-10)
        assert ev.attained_index == j + 1


def test_truncation_certificate():
    rng = np.random.default_rng(35)
    params = MargulisParams(0.4)
    for _ in range(10):
        g = random_screw(rng, 5, (2.0 * math.pi * GOLDEN, ))
        v = rng.uniform(-30, 30, 4)
        ev = boundary_function(g, params, v)
        assert ev.exact
        assert 1 <= ev.attained_index <= ev.truncation_index
        # the linear lower bound at the next index is at or above the minimum
        nxt = ev.truncation_index + 1
        assert params.c * nxt * g.translation_norm >= ev.value - 1e-12
        assert u_i(g, params, v, ev.attained_index) == pytest.approx(ev.value)
        for i in range(1, ev.truncation_index + 1):
            assert u_i(g, params, v, i) >= ev.value - 1e-12


def test_pure_translation_boundary():
    rng = np.random.default_rng(36)
    params = MargulisParams(0.8)
    g = random_screw(rng, 3, (), a_norm=1.7)
    for v in (np.zeros(2), np.array([100.0, -3.0])):
        ev = boundary_function(g, params, v)
        assert ev.value == pytest.approx(params.c * 1.7, rel=1e-14)
        assert ev.attained_index == 1
        assert ev.truncation_index == 1
        assert ev.exact


def test_budget_exhaustion_gives_upper_bound():
    rng = np.random.default_rng(37)
    params = MargulisParams(0.1)
    g = random_screw(rng, 4, (2.0 * math.pi * GOLDEN,))
    v = rng.uniform(-1, 1, 3) * 1e5
    small = boundary_function(g, params, v, budget=3)
    assert not small.exact
    assert small.truncation_index == 3
    assert small.value == pytest.approx(
        min(u_i(g, params, v, i) for i in (1, 2, 3)), rel=1e-12)
    full = boundary_function(g, params, v)
    assert full.exact
    assert full.value <= small.value + 1e-12


def test_radial_envelope_dominates():
    rng = np.random.default_rng(38)
    params = MargulisParams(0.3)
    g = random_screw(rng, 6, (1.1, 2.2))
    for _ in range(10):
        v = rng.uniform(-10, 10, 5)
        r = g.w_perp_norm(v)
        for i in (1, 3, 9):
            assert u_tilde(g, params, r, i) >= u_i(g, params, v, i) - 1e-10
        tilde = boundary_tilde(g, params, r)
        ev = boundary_function(g, params, v)
        assert tilde.value >= ev.value - 1e-10


def test_masses_consistent_with_kernel_split():
    rng = np.random.default_rng(39)
    for _ in range(10):
        g = random_screw(rng, 6, (0.9, 2.4))
        v = rng.uniform(-5, 5, 5)
        m = g.masses(v)
        assert math.hypot(*m) == pytest.approx(g.w_perp_norm(v), rel=1e-10)


def test_membership():
    rng = np.random.default_rng(40)
    params = MargulisParams(0.5)
    g = random_screw(rng, 4, (2.0,))
    v = rng.uniform(-3, 3, 3)
    b = boundary_function(g, params, v).value
    above = in_margulis_region(g, params, HPoint(v, 1.5 * b))
    below = in_margulis_region(g, params, HPoint(v, 0.5 * b))
    assert above.inside and above.margin == pytest.approx(0.5 * b)
    assert not below.inside and below.margin == pytest.approx(-0.5 * b)


def test_word_view_matches_action():
    rng = np.random.default_rng(41)
    g = random_screw(rng, 5, (1.3,))
    w = g.as_word()
    v = rng.uniform(-2, 2, 4)
    assert np.allclose(w.apply_boundary(v).v, g.apply(v))
    x = HPoint(v, 2.3)
    assert g.apply_upper(x).t == 2.3
    assert np.allclose(w.apply_upper(x).v, g.apply_upper(x).v)
