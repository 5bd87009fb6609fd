from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frontflow import domain, forcing


def test_domain_geometry():
    d = domain.Domain(2, 1.0, 10, margin=1)
    assert d.spacing == pytest.approx(0.2)
    assert np.allclose(d.axes()[0], np.linspace(-0.9, 0.9, 10))
    assert d.points().shape == (10, 10, 2)


@pytest.mark.parametrize("args", [(1, 1.0, 10), (2, 0.0, 10), (2, 1.0, 4), (2, 1.0, 10, 5)])
def test_domain_rejects(args):
    with pytest.raises(domain.DomainError):
        domain.Domain(*args)


def test_parse_set_union():
    s = domain.parse_set("ball 0 0 0.5 + box 0.2 -0.1 0.9 0.1 + polygon 0 -1 0.1 -0.8 -0.1 -0.8", 2)
    assert len(s.parts) == 3
    assert s.contains(np.array([0.8, 0.0]))
    assert s.contains(np.array([0.0, -0.85]))
    assert not s.contains(np.array([-0.8, 0.0]))
    lo, hi = s.bounds()
    assert np.allclose(lo, [-0.5, -1.0])
    assert np.allclose(hi, [0.9, 0.5])


@pytest.mark.parametrize("text", ["", "ball 0 0", "ball 0 0 -1", "box 1 1 0 0", "polygon 0 0 1 1", "torus 1", "ball a b c", "ball 0 0 1 +"])
def test_parse_set_errors(text):
    with pytest.raises(domain.DomainError):
        domain.parse_set(text, 2)


@given(x=st.floats(-2, 2), y=st.floats(-2, 2))
def test_signed_distance_sign_matches_membership(x, y):
    s = domain.parse_set("ball 0.1 0 0.5 + box -1 -0.2 0 0.2 + polygon 0 1 0.5 1.5 -0.5 1.5", 2)
    p = np.array([x, y])
    sd = float(s.sdist(p))
    if abs(sd) > 1e-9:
        assert (sd > 0) == bool(s.contains(p))


def test_polygon_signed_distance_exact():
    s = domain.parse_set("box -1 -1 1 1", 2)
    p = domain.regular_polygon(4, np.sqrt(2), phase=np.pi / 4)
    for q in ([0, 0], [0.5, 0.2], [2, 0], [2, 3]):
        assert float(p.sdist(np.array(q, float))) == pytest.approx(float(s.sdist(np.array(q, float))), abs=1e-12)


def test_check_inside():
    d = domain.Domain(2, 1.0, 100, margin=4)
    domain.check_inside(domain.parse_set("ball 0 0 0.9", 2), d)
    with pytest.raises(domain.DomainError, match="margin"):
        domain.check_inside(domain.parse_set("ball 0 0 0.97", 2), d)


def test_forcing_kinds():
    assert forcing.zero().time_factor(3.0) == 0.0
    assert forcing.constant(2.0).on_grid(None, 0.0) == 2.0
    tt = forcing.time_table([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
    assert tt.time_factor(0.5) == pytest.approx(1.0)
    assert tt.time_factor(5.0) == 0.0
    assert tt.sup_norm() == 2.0
    sep = forcing.separable([1.0, 2.0, 0.0], [0.0], [3.0])
    assert not sep.time_only
    pts = np.array([[0.5, 7.0]])
    assert np.allclose(sep.on_grid(pts, 0.0), 3.0 * (1.0 + 1.0))
    assert sep.sup_norm(extent=1.0) == pytest.approx(9.0)
    assert forcing.separable([2.0, 0.0, 0.0], [0.0], [1.5]).time_only
    gs = forcing.grid_sequence([np.zeros((2, 2)), np.ones((2, 2))])
    assert gs.on_grid(None, 0.0, 5).sum() == 4.0


@given(t0=st.floats(-1, 3), dt=st.floats(0.01, 3))
def test_time_integral_matches_quadrature(t0, dt):
    tt = forcing.time_table([0.0, 0.5, 2.0], [1.0, -2.0, 3.0])
    grid = np.linspace(t0, t0 + dt, 20001)
    ref = np.trapezoid(np.interp(grid, tt.breakpoints, tt.values), grid)
    assert tt.time_integral(t0, t0 + dt) == pytest.approx(ref, abs=1e-6)


@pytest.mark.parametrize(
    "build",
    [
        lambda: forcing.time_table([0.0, 0.0], [1.0, 2.0]),
        lambda: forcing.time_table([0.0], [1.0, 2.0]),
        lambda: forcing.separable([1.0], [0.0], [1.0]),
        lambda: forcing.grid_sequence([]),
        lambda: forcing.ForcingSpec("wind"),
        lambda: forcing.separable([1.0, 1.0, 0.0], [0.0], [1.0]).time_integral(0.0, 1.0),
        lambda: forcing.constant(1.0).time_average(1.0, 1.0),
    ],
)
def test_forcing_errors(build):
    with pytest.raises(forcing.ForcingError):
        build()
