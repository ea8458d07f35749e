import math

import numpy as np
import pytest

from geolab import splitting
from geolab.errors import OrthogonalTangentPoint, PathSearchExhausted
from geolab.semispace import inner
from geolab.splitting import (
    AMBIENT,
    beta_closed_form,
    boost_chart,
    bound_scan,
    circle_curve,
    diamond_check,
    level_chart,
    level_flow,
    null_ruled,
    parabola_curve,
)


# ---------------------------------------------------------------------------
# Level flow


def test_level_flow_axis_trajectory():
    # x1 = 0 is a fixed line of the flow: beta = 1 identically and
    # A = 1 / cosh^2(tau) in closed form
    res = level_flow(0.0, (-5.0, 5.0), samples=201)
    assert np.abs(res.x1).max() <= 1e-12
    assert np.abs(res.beta - 1.0).max() <= 1e-9
    assert np.abs(res.A - 1.0 / np.cosh(res.taus) ** 2).max() <= 1e-7
    assert res.cross_max <= 1e-9


@pytest.mark.parametrize("x0", [0.3, 1.0, 2.5])
def test_level_flow_invariants(x0):
    res = level_flow(x0, (-4.0, 4.0), samples=161)
    # stays on the surface x2^2 = x1^2 + t^2 + 1
    on_surf = res.x2**2 - res.x1**2 - res.t**2 - 1.0
    assert np.abs(on_surf).max() <= 1e-10
    # orthogonality of the product frame
    assert res.cross_max <= 1e-8
    # extracted beta matches the closed form
    assert np.abs(res.beta - res.beta_closed).max() <= 1e-8
    # both coefficients stay positive (the splitting stays Lorentzian)
    assert res.beta.min() > 0 and res.A.min() > 0
    # seeded slice: tau = 0 is the identity with unit variational factor
    i0 = int(np.argmin(np.abs(res.taus)))
    assert res.x1[i0] == pytest.approx(x0, abs=1e-12)
    assert res.J[i0] == pytest.approx(1.0, abs=1e-12)


def test_level_flow_requires_seeded_slice():
    with pytest.raises(ValueError):
        level_flow(1.0, (1.0, 3.0))


def test_beta_blowup_along_moving_witness():
    # beta is unbounded on the surface: along x1 = cosh(tau) it grows like
    # (1 + 2 cosh^2) / 3 and passes 10^3 before tau = 4.4
    tau = 4.4
    b = beta_closed_form(math.cosh(tau), tau)
    assert b == pytest.approx((1.0 + 2.0 * math.cosh(tau) ** 2) / 3.0, rel=1e-12)
    assert b > 1e3
    assert beta_closed_form(math.cosh(4.0), 4.0) < b  # still growing


# ---------------------------------------------------------------------------
# Split charts


def test_boost_chart_metric():
    ch = boost_chart()
    for x in (-2.0, 0.0, 0.7, 3.0):
        for tau in (-1.5, 0.0, 2.0):
            cross, da, db = ch.metric_defect(x, tau)
            # central differences at step 1e-6 have ~1e-8 roundoff floor
            assert cross <= 1e-7
            assert da <= 1e-7
            assert db <= 1e-7


def test_boost_chart_is_static():
    # the boost splitting coefficients do not depend on tau
    ch = boost_chart()
    for x in (0.0, 1.3, -2.1):
        a0, b0 = ch.A(x, 0.0), ch.beta(x, 0.0)
        for tau in np.linspace(-3, 3, 7):
            assert abs(ch.A(x, tau) - a0) <= 1e-12
            assert abs(ch.beta(x, tau) - b0) <= 1e-12


def test_boost_chart_closed_forms():
    ch = boost_chart()
    for x in (0.0, 0.5, 2.0):
        assert ch.A(x, 0.0) == pytest.approx((1 + 2 * x**2) / (1 + x**2), rel=1e-14)
        assert ch.beta(x, 0.0) == pytest.approx(1 + x**2, rel=1e-14)
        # embed lands on the surface
        p = ch.embed(x, 1.1)
        assert p[1] ** 2 - p[0] ** 2 - p[2] ** 2 == pytest.approx(1.0, abs=1e-12)


def test_level_chart_matches_flow():
    ch = level_chart()
    assert ch.A(0.0, 3.0) == pytest.approx(1.0 / math.cosh(3.0) ** 2, rel=1e-3)
    assert ch.beta(0.0, 2.0) == pytest.approx(1.0, abs=1e-6)
    p = ch.embed(1.0, 1.5)
    assert p[1] ** 2 - p[0] ** 2 - p[2] ** 2 == pytest.approx(1.0, abs=1e-6)


def test_bound_scan_boost():
    ch = boost_chart()
    # modest window: both coefficients bounded, beta positive
    scan = bound_scan(ch, (-3.0, 3.0), (-3.0, 3.0), grid=13)
    assert scan.flags["A_bounded_below"]
    assert scan.flags["beta_bounded_above"]
    assert scan.flags["beta_positive"]
    assert scan.A_inf == pytest.approx(1.0, abs=1e-12)  # at x = 0
    assert scan.beta_sup == pytest.approx(10.0, abs=1e-12)  # 1 + 3^2
    assert scan.witnesses["beta_sup"][0] in (-3.0, 3.0)
    # wide window: beta = 1 + x^2 escapes any cap
    wide = bound_scan(ch, (-40.0, 40.0), (-1.0, 1.0), grid=9)
    assert not wide.flags["beta_bounded_above"]


def test_bound_scan_level_chart():
    scan = bound_scan(level_chart(), (-1.0, 1.0), (-2.0, 2.0), grid=5)
    assert scan.flags["beta_positive"]
    # A dips below the floor as tau grows (A ~ 1/cosh^2 near the axis)
    deep = bound_scan(level_chart(), (-0.5, 0.5), (-6.0, 6.0), grid=5)
    assert not deep.flags["A_bounded_below"]


# ---------------------------------------------------------------------------
# Null-ruled hypersurfaces


def test_null_ruled_circle_rejected():
    # the circle has tangents orthogonal to any axis direction; for
    # v = (1, 0) the degenerate points are (+-1, 0)
    with pytest.raises(OrthogonalTangentPoint) as exc:
        null_ruled(circle_curve(), [1.0, 0.0])
    assert np.abs(np.abs(exc.value.witness[0]) - 1.0) <= 1e-12


def test_null_ruled_circle_tilted_ruling():
    # a generic ruling direction misses the sampled orthogonal points
    phi = 0.3
    surf = null_ruled(circle_curve(), [math.cos(phi), math.sin(phi)])
    for i in (0, 31, 100, 200):
        nl = surf.normal(i)
        assert inner(AMBIENT, nl, nl) > 0  # timelike hypersurface
        assert abs(inner(AMBIENT, nl, surf.ruling)) <= 1e-12
    assert abs(inner(AMBIENT, surf.ruling, surf.ruling)) <= 1e-12


def test_null_ruled_parabola():
    surf = null_ruled(parabola_curve(), [1.0, 0.0])
    # ruling lines stay on the surface: point(i, t) - point(i, 0) = t (v, 1)
    d = surf.point(5, 2.0) - surf.point(5, 0.0)
    assert np.allclose(d, 2.0 * surf.ruling)
    for i in (0, 64, 128, 255):
        nl = surf.normal(i)
        assert inner(AMBIENT, nl, nl) > 0
        assert abs(inner(AMBIENT, nl, surf.ruling)) <= 1e-12


# ---------------------------------------------------------------------------
# Diamond path classification


def test_diamond_trivial_pair():
    c = circle_curve()
    res = diamond_check(c, [0.0, 1.0], c.points[7], c.points[7])
    assert res.classification == "vanishes"


def test_diamond_equal_heights_circle():
    # theta and pi - theta have the same height for v = (0, 1); the level
    # segment between them kills <alpha', v>
    c = circle_curve(m=256)
    p, q = c.points[10], c.points[118]
    assert p[1] == pytest.approx(q[1], abs=1e-12)
    res = diamond_check(c, [0.0, 1.0], p, q)
    assert res.classification == "vanishes"


def test_diamond_circle_monotone_arc():
    # endpoints in the right half: the short arc has monotone height
    c = circle_curve(m=256)
    res = diamond_check(c, [0.0, 1.0], c.points[20], c.points[40])
    assert res.classification == "constant_sign"


def test_diamond_parabola_classes():
    c = parabola_curve(m=256)
    v = [0.0, 1.0]
    # same side of the vertex: monotone height
    res = diamond_check(c, v, c.points[150], c.points[220])
    assert res.classification == "constant_sign"
    # straddling the vertex at distinct heights: sign must change
    res2 = diamond_check(c, v, c.points[100], c.points[200])
    assert res2.classification == "mixed"


def test_diamond_endpoint_off_curve():
    c = circle_curve()
    with pytest.raises(PathSearchExhausted):
        diamond_check(c, [0.0, 1.0], [5.0, 5.0], c.points[0])
