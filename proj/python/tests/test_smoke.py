import math

import numpy as np
import pytest

import pebill as pb


def test_worked_reflection():
    ell = pb.Ellipsoid([2.0, 1.0])
    sig = pb.Signature(1, 1)
    r = pb.billiard_map(pb.RayState([0.0, 1.0], [1.0, -1.0]), ell, sig)
    np.testing.assert_allclose(r.x, [1.6, -0.6], rtol=1e-14)
    np.testing.assert_allclose(r.v, [5.0, 5.0], rtol=1e-14)
    assert pb.joachimsthal(r, ell) == pytest.approx(-1.0)
    assert pb.inner(r.v, r.v, sig) == pytest.approx(0.0, abs=1e-12)


def test_errors_carry_a_kind():
    ell = pb.Ellipsoid([2.0, 1.0])
    with pytest.raises(pb.PebillError) as info:
        pb.advance_to_boundary(pb.RayState([0.0, 1.0], [1.0, 0.0]), ell)
    assert info.value.kind == "NotInward"


def test_null_orbit_conserves_h():
    ell = pb.Ellipsoid([3.0, 2.0, 1.0])
    sig = pb.Signature(2, 1)
    start = pb.sample_null_ray(ell, sig, 3)
    orbit = pb.run_orbit(start, 200, ell, sig)
    assert orbit["abort"] is None
    h = np.asarray(orbit["H"])
    assert np.max(np.abs(h / h[0] - 1.0)) < 1e-10
    assert orbit["x"].shape == (201, 3)
    assert all(len(l) == 1 for l in orbit["lambdas"])
    np.testing.assert_allclose(orbit["F"].sum(axis=1), 0.0, atol=1e-9)


def test_tangency_of_vertical_line():
    ell = pb.Ellipsoid([2.0, 1.0])
    lams = pb.tangency_parameters(pb.RayState([1.0, 0.0], [0.0, 1.0]), ell, pb.Signature(2, 0))
    assert lams == pytest.approx([-3.0])


def test_integrability_witnesses():
    ell = pb.Ellipsoid([3.0, 2.0, 1.0])
    sig = pb.Signature(2, 1)
    assert pb.sum_rule_check(ell, sig, 2000, 1) < 1e-12
    assert pb.max_bracket(ell, sig, 500, 1) < 1e-10
    assert pb.max_bracket(ell, sig, 100, 1, wrong_sign=True) > 1e-3


def test_accelerating_table():
    pts = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
    table = pb.build_accelerating_table(pts, [-1.0, 2.0, -1.0, 2.0])
    poly = pb.NullPolygon()
    poly.points = [np.array(p) for p in pts]
    poly.params = [table.parameter_of(np.array(p)) for p in pts]
    poly.slopes = [table.slope(s) for s in poly.params]
    assert pb.acceleration_factor(poly) == pytest.approx(4.0, rel=1e-8)
    assert pb.simulate_speed(table, poly, 5) == pytest.approx(1024.0, rel=1e-6)
    assert table.min_curvature() > 0.0


def test_ellipse_oval_map_is_antipodal():
    e = pb.OvalCurve.ellipse(2.0, 1.0)
    s = e.parameter_of(np.array([1.6, -0.6]))
    np.testing.assert_allclose(e.point(pb.oval_map(e, s)), [-1.6, 0.6], atol=1e-14)
    orbit = pb.find_periodic_orbit(e, 2, 0.5)
    assert pb.acceleration_factor(orbit) == pytest.approx(1.0)
    assert abs(pb.return_map_derivative(e, orbit)) == pytest.approx(1.0, rel=1e-8)
    assert math.isfinite(orbit.params[0])
