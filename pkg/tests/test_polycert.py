"""Tests for barrier slices, root functions, resultants, and the
certified positivity layer."""

import math
import random
from fractions import Fraction

import pytest

from spin7flow.aw_algebra import AWParams
from spin7flow.errors import (DegenerateRootError, DomainAnomalyError,
                              InvalidRequestError)
from spin7flow import polycert as pc
from spin7flow.ratpoly import (RatPoly, random_nonnegativity_audit,
                               univariate_gcd)

F = Fraction
PARAMS = [AWParams(1, 0), AWParams(1, 1), AWParams(3, 2), AWParams(17, 5)]
RAY_CASES = [AWParams(1, 0), AWParams(29, 1), AWParams(17, 5),
             AWParams(3, 2), AWParams(7, 6), AWParams(1, 1)]


# ---------------------------------------------------------------------------
# barriers


@pytest.mark.parametrize("p", PARAMS, ids=lambda p: f"{p.k},{p.l}")
def test_barrier_q_vanishes_at_cone_corner(p):
    poly = pc.barrier(p, "Q")
    corner = (F(0), F(1, 3), F(1, 3), F(6 * p.delta, p.k + p.l))
    assert poly.evaluate(corner) == 0


def test_barrier_a_origin_value():
    poly = pc.barrier(AWParams(1, 1), "A")
    assert poly.evaluate((0, 0, 0, 5)) == 2
    assert poly.evaluate((0, 0, 0, F(1, 7))) == 2


def test_barrier_p_vanishes_on_conserved_ray_point():
    poly = pc.barrier(AWParams(1, 1), "P")
    assert poly.evaluate((F(2, 7), F(1, 7), F(1, 7), 21)) == 0


def test_barrier_unknown_kind():
    with pytest.raises(InvalidRequestError):
        pc.barrier(AWParams(1, 1), "Z")


def test_barrier_accepts_pairs():
    assert pc.barrier((3, 2), "Q") == pc.barrier(AWParams(3, 2), "Q")


# ---------------------------------------------------------------------------
# slices


def test_line_slices_are_parameter_free():
    base = pc.line_slices()
    for p in PARAMS:
        assert pc.line_slices(p) == base


def test_line_slice_closed_forms():
    q1, q2 = pc.line_slices()
    names = pc.LINE_SLICE_VARIABLES
    a = RatPoly.variable(names, "alpha")
    b = RatPoly.variable(names, "beta")
    u = RatPoly.variable(names, "u")
    assert q1 == (F(3, 4) * b * u ** 2 - (2 + F(3, 2) * a * b) * u
                  + F(3, 4) * a ** 2 * b - 2 * a + 1)
    assert q2 == (F(9, 8) * b ** 2 * u ** 4 - 2 * u ** 2
                  - (12 * a + 2) * u + 2 * a ** 2 - 2 * a + 2)


def test_q1_constant_term_display():
    a, b = F(1, 4), F(1, 3)
    poly = pc.slice(AWParams(3, 2), "q1", a, b)
    assert poly.evaluate((0,)) == F(3, 4) * a * a * b - 2 * a + 1


def test_q1_at_two_thirds_display():
    a, b = F(2, 5), F(3, 7)
    got = pc.slice(AWParams(1, 1), "q1", a, b).evaluate((F(2, 3),))
    assert got == (-F(1, 3) - 2 * a + b / 3 - a * b
                   + F(3, 4) * a * a * b)


def test_q2_at_zero_display():
    a, b = F(2, 5), F(3, 7)
    got = pc.slice(AWParams(1, 1), "q2", a, b).evaluate((0,))
    assert got == 2 * a * a - 2 * a + 2


def test_p1_at_zero_is_one():
    got = pc.slice(AWParams(3, 2), "p1", F(2, 5), F(3, 7),
                   delta=F(1, 2))
    assert got.evaluate((0,)) == 1


def test_p2_leading_coefficient_display():
    p = AWParams(3, 2)
    a, b, d = F(2, 5), F(3, 7), F(1, 2)
    lead = pc.slice(p, "p2", a, b, delta=d).univariate_coefficients()[4]
    rho = p.rho
    assert lead == (18 * (1 + rho) ** 2 * a * a * b * b * d * d
                    + 18 * rho * rho * b * b * d * d
                    + 18 * a * a * d * d)


def test_p1_at_half_closed_form():
    for p in (AWParams(1, 1), AWParams(3, 2), AWParams(17, 5),
              AWParams(1, 0)):
        rho = p.rho
        for (a, b, d) in ((F(2, 5), F(3, 7), F(1, 2)),
                          (F(1, 3), F(1, 4), F(4, 5)), (1, 1, 1)):
            got = pc.slice(p, "p1", a, b, delta=d).evaluate((F(1, 2),))
            linear = (-F(3, 4) * (1 + rho) * a * b * d
                      - (1 - F(3, 4) * d) * a
                      - (1 - F(3, 4) * rho * d) * b)
            assert got == linear
    # The variant with squared alpha, beta, delta in the first term
    # differs at a generic point, which pins the closed form down.
    p = AWParams(3, 2)
    rho = p.rho
    a, b, d = F(2, 5), F(3, 7), F(1, 2)
    squared = (-F(3, 4) * (1 + rho) * a * a * b * b * d * d
               - (1 - F(3, 4) * d) * a - (1 - F(3, 4) * rho * d) * b)
    assert pc.slice(p, "p1", a, b, delta=d).evaluate((F(1, 2),)) \
        != squared


def test_slice_argument_validation():
    p = AWParams(1, 1)
    with pytest.raises(InvalidRequestError):
        pc.slice(p, "q1", F(1, 2), F(1, 2), delta=1)
    with pytest.raises(InvalidRequestError):
        pc.slice(p, "p1", F(1, 2), F(1, 2))
    with pytest.raises(InvalidRequestError):
        pc.slice(p, "zz", 0, 0)
    with pytest.raises(InvalidRequestError):
        pc.slice(p, "q1", 0.5, 1)


@pytest.mark.parametrize("p", PARAMS, ids=lambda p: f"{p.k},{p.l}")
def test_slice_consistency_with_barrier_substitution(p):
    rng = random.Random(17)
    for _ in range(12):
        a = F(rng.randint(0, 31), 62)
        b = F(rng.randint(1, 32), 32)
        u = F(rng.randint(0, 20), rng.randint(1, 30) + 1)
        split = F(rng.randint(0, 16), 17) * u
        z4 = F(6 * p.delta, p.k + p.l) * b
        direct = pc.barrier(p, "Q").evaluate((a, u - split, split, z4))
        assert pc.slice(p, "q1", a, b).evaluate((u,)) == direct
        direct = pc.barrier(p, "A").evaluate((a, u - split, split, z4))
        assert pc.slice(p, "q2", a, b).evaluate((u,)) == direct
        d = F(rng.randint(1, 16), 16)
        z1 = F(rng.randint(0, 10), rng.randint(1, 20) + 1)
        z4 = F(6 * p.delta, p.k) * d
        point = (z1, a * z1, b * z1, z4)
        direct = pc.barrier(p, "P").evaluate(point)
        assert pc.slice(p, "p1", a, b, delta=d).evaluate((z1,)) == direct
        direct = pc.barrier(p, "B").evaluate(point)
        assert pc.slice(p, "p2", a, b, delta=d).evaluate((z1,)) == direct


# ---------------------------------------------------------------------------
# root functions


def test_root_values_at_anchor_points():
    assert pc.root_fn(AWParams(1, 1), "omega", (0, 1)) == \
        pytest.approx(2 / 3, abs=1e-15)
    assert pc.root_fn(AWParams(1, 1), "zeta", (0, 1)) == \
        pytest.approx(2 / 3, abs=1e-15)
    assert pc.root_fn(AWParams(3, 2), "xi", (1, 0, 1)) == \
        pytest.approx(1 / 3, abs=1e-15)
    assert pc.root_fn(AWParams(3, 2), "sigma", (1, 0, 1)) == \
        pytest.approx(1 / 3, abs=1e-15)


def test_root_values_are_exact_rationals_at_anchors():
    assert pc.implicit_derivatives(AWParams(1, 1), "omega",
                                   (0, 1))[()] == F(2, 3)
    assert pc.implicit_derivatives(AWParams(1, 1), "zeta",
                                   (0, 1))[()] == F(2, 3)
    assert pc.implicit_derivatives(AWParams(3, 2), "xi",
                                   (1, 0, 1))[()] == F(1, 3)
    assert pc.implicit_derivatives(AWParams(3, 2), "sigma",
                                   (1, 0, 1))[()] == F(1, 3)


def test_omega_quadratic_surd_value():
    got = pc.root_fn(AWParams(1, 1), "omega", (F(1, 2), 1))
    assert got == pytest.approx((11 - 4 * math.sqrt(7)) / 6, abs=1e-15)


def test_sigma_absent_returns_none():
    assert pc.root_fn(AWParams(1, 1), "sigma", (0, 0, 1)) is None


def test_omega_negative_discriminant_is_domain_anomaly():
    with pytest.raises(DomainAnomalyError):
        pc.root_fn(AWParams(1, 1), "omega", (0, 2))


def test_root_fn_validation():
    with pytest.raises(InvalidRequestError):
        pc.root_fn(AWParams(1, 1), "nu", (0, 1))
    with pytest.raises(InvalidRequestError):
        pc.root_fn(AWParams(1, 1), "omega", (0, 1, 1))
    with pytest.raises(InvalidRequestError):
        pc.root_fn(AWParams(1, 1), "omega", (0.0, 1.0))


# ---------------------------------------------------------------------------
# implicit derivatives


def test_omega_first_and_second_partials():
    d = pc.implicit_derivatives(AWParams(1, 1), "omega", (0, 1))
    assert d[("alpha",)] == -3
    assert d[("beta",)] == F(1, 3)
    assert d[("alpha", "alpha")] == 24


def test_zeta_first_and_second_partials():
    d = pc.implicit_derivatives(AWParams(1, 1), "zeta", (0, 1))
    assert d[("alpha",)] == -3
    assert d[("beta",)] == F(2, 15)
    assert d[("alpha", "alpha")] == F(141, 5)


def test_xi_gradient():
    d = pc.implicit_derivatives(AWParams(3, 2), "xi", (1, 0, 1))
    assert (d[("alpha",)], d[("beta",)], d[("delta",)]) == \
        (F(-1, 6), F(-1, 2), F(1, 6))


def test_sigma_gradient_and_delta_partial():
    d = pc.implicit_derivatives(AWParams(3, 2), "sigma", (1, 0, 1))
    assert (d[("alpha",)], d[("beta",)]) == (F(-1, 6), F(-1, 2))
    assert d[("delta",)] == F(1, 15)


def test_order_one_omits_second_partials():
    d = pc.implicit_derivatives(AWParams(1, 1), "omega", (0, 1),
                                order=1)
    assert set(d) == {(), ("alpha",), ("beta",)}
    with pytest.raises(InvalidRequestError):
        pc.implicit_derivatives(AWParams(1, 1), "omega", (0, 1),
                                order=3)


def test_degenerate_root_raises():
    with pytest.raises(DegenerateRootError):
        pc.implicit_derivatives(AWParams(1, 1), "omega", (0, F(4, 3)))


def test_missing_root_raises():
    with pytest.raises(InvalidRequestError):
        pc.implicit_derivatives(AWParams(1, 1), "sigma", (0, 0, 1))


@pytest.mark.parametrize("p", [AWParams(1, 1), AWParams(3, 2),
                               AWParams(17, 5), AWParams(29, 1)],
                         ids=lambda p: f"{p.k},{p.l}")
def test_root_gap_hessian_determinant(p):
    det = pc.root_gap_hessian_det(p)
    assert det == F(19 * p.k ** 2 - p.k * p.l - p.l ** 2,
                    300 * p.k ** 2)


def test_root_gap_hessian_reference_values():
    assert pc.root_gap_hessian_det(AWParams(1, 1)) == F(17, 300)
    assert pc.root_gap_hessian_det(AWParams(3, 2)) == F(161, 2700)


# ---------------------------------------------------------------------------
# resultants and recorded expansions


def test_line_resultant_matches_recorded_form():
    assert pc.line_resultant() == pc.printed_line_resultant()


def test_line_resultant_values():
    r = pc.line_resultant()
    assert r.evaluate((0, 1)) == 0
    assert r.evaluate((0, F(1, 2))) == F(135, 256)


def test_line_resultant_gcd_oracle():
    r = pc.line_resultant()
    q1, q2 = pc.line_slices()
    rng = random.Random(23)
    points = [(F(rng.randint(0, 100), 200), F(rng.randint(1, 64), 64))
              for _ in range(200)]
    points.append((F(0), F(1)))
    zero_hits = 0
    for (a, b) in points:
        value = r.evaluate((a, b))
        c1 = pc.slice(None, "q1", a, b).univariate_coefficients()
        c2 = pc.slice(None, "q2", a, b).univariate_coefficients()
        common = len(univariate_gcd(c1, c2)) > 1
        assert (value == 0) == common
        zero_hits += value == 0
    assert zero_hits >= 1


def test_rtilde_matches_recorded_expansion():
    for p in (AWParams(1, 1), AWParams(3, 2)):
        assert pc.rtilde(p) == pc.printed_ray_expansion(p)


def test_rtilde_corner_values():
    rt = pc.rtilde(AWParams(1, 1))
    assert rt.evaluate((1, 0, 1)) == 0
    assert rt.evaluate((0, 1, 1)) == 0
    rt = pc.rtilde(AWParams(3, 2))
    assert rt.evaluate((1, 0, 1)) == 0
    assert rt.evaluate((0, 1, 1)) == F(32, 9)


def test_rtilde_delta_constant_part_vanishes_at_origin():
    for p in (AWParams(1, 1), AWParams(3, 2)):
        part = pc.rtilde(p).coefficient_of("delta", 0)
        assert part.evaluate((0, 0, 0)) == 0


def test_rtilde_alpha_face_vanishes_when_l_zero():
    rt = pc.rtilde(AWParams(1, 0))
    names = ("beta", "delta")
    face = rt.compose(names, {
        "alpha": F(0),
        "beta": RatPoly.variable(names, "beta"),
        "delta": RatPoly.variable(names, "delta"),
    })
    assert face.is_zero
    rt = pc.rtilde(AWParams(3, 2))
    face = rt.compose(names, {
        "alpha": F(0),
        "beta": RatPoly.variable(names, "beta"),
        "delta": RatPoly.variable(names, "delta"),
    })
    assert not face.is_zero


def test_boundary_zero_bookkeeping():
    assert pc.stated_boundary_zeros(AWParams(3, 2)) == \
        ((F(1), F(0), F(1)),)
    assert pc.stated_boundary_zeros(AWParams(1, 1)) == \
        ((F(1), F(0), F(1)), (F(0), F(1), F(1)))
    report = pc.boundary_zero_report(AWParams(1, 1))
    values = report["values"]
    assert values[(F(1), F(0), F(1))] == 0
    assert values[(F(0), F(1), F(1))] == 0
    assert values[(F(1), F(1), F(0))] == 648
    assert report["notes"]
    report = pc.boundary_zero_report(AWParams(1, 0))
    assert values != report["values"]
    assert report["values"][(F(1), F(1), F(0))] == 216
    assert any("alpha = 0 face" in note for note in report["notes"])


# ---------------------------------------------------------------------------
# certification drivers


def test_certify_line_resultant():
    cert = pc.certify_line_resultant()
    assert cert.status == "NonNegative"
    assert cert.boxes_processed >= 1
    data = cert.to_json_dict()
    assert data["status"] == "NonNegative"
    assert data["exclusions"] == [{"center": ["0/1", "1/1"],
                                   "radius": "1/100"}]


@pytest.mark.parametrize("p", RAY_CASES, ids=lambda p: f"{p.k},{p.l}")
def test_certify_ray_resultant(p):
    cert = pc.certify_ray_resultant(p)
    assert cert.status == "NonNegative"
    assert cert.max_depth <= 40
    assert len(cert.exclusion_balls) == len(pc.stated_boundary_zeros(p))


def test_certified_line_box_random_audit():
    r = pc.line_resultant()
    worst, point = random_nonnegativity_audit(
        r, pc.LINE_PARAMETER_DOMAIN, 100000, seed=2024)
    assert worst >= 0
    assert worst == r.evaluate(point)


def test_certified_ray_box_random_audit():
    rt = pc.rtilde(AWParams(3, 2))
    worst, point = random_nonnegativity_audit(
        rt, pc.RAY_PARAMETER_DOMAIN, 10000, seed=2024)
    assert worst >= 0
    assert worst == rt.evaluate(point)


# ---------------------------------------------------------------------------
# interlacing grids


def test_omega_never_exceeds_zeta_on_grid():
    center = (F(0), F(1))
    radius = pc.DEFAULT_EXCLUSION_RADIUS
    equalities = []
    min_gap_outside = None
    for i in range(32):
        a = F(i, 62)
        for j in range(1, 33):
            b = F(j, 32)
            omega = pc.root_fn(None, "omega", (a, b))
            zeta = pc.root_fn(None, "zeta", (a, b))
            assert omega is not None and zeta is not None
            gap = zeta - omega
            assert gap >= -1e-12
            in_ball = ((a - center[0]) ** 2 + (b - center[1]) ** 2
                       <= radius ** 2)
            if gap < 1e-9:
                equalities.append((a, b, in_ball))
            elif not in_ball:
                if min_gap_outside is None or gap < min_gap_outside:
                    min_gap_outside = gap
    assert equalities == [(F(0), F(1), True)]
    assert min_gap_outside > 1e-4


@pytest.mark.parametrize("p", [AWParams(3, 2), AWParams(1, 1)],
                         ids=lambda p: f"{p.k},{p.l}")
def test_xi_never_exceeds_sigma_on_grid(p):
    radius = pc.DEFAULT_EXCLUSION_RADIUS
    equalities = []
    min_gap_outside = None
    checked = 0
    for i in range(16):
        a = F(i, 15)
        for j in range(16):
            b = F(j, 15)
            if a < b:
                continue
            for m in range(1, 17):
                d = F(m, 16)
                sigma = pc.root_fn(p, "sigma", (a, b, d))
                if sigma is None:
                    continue
                xi = pc.root_fn(p, "xi", (a, b, d))
                checked += 1
                gap = sigma - xi
                assert gap >= -1e-12
                near_corner = ((a - 1) ** 2 + b ** 2 + (d - 1) ** 2
                               <= radius ** 2)
                if gap < 1e-9:
                    equalities.append((a, b, d, near_corner))
                elif not near_corner:
                    if min_gap_outside is None or gap < min_gap_outside:
                        min_gap_outside = gap
    assert checked > 1900
    assert equalities == [(F(1), F(0), F(1), True)]
    assert min_gap_outside > 1e-4
