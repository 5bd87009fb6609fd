from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frontflow import norms

vec2 = st.tuples(st.floats(-10, 10), st.floats(-10, 10)).map(np.array)
HEX = [[1, 0], [0.5, 0.8], [-0.5, 0.8], [-1, 0], [-0.5, -0.8], [0.5, -0.8]]
ALL = [
    norms.euclidean(),
    norms.pnorm(1.0),
    norms.pnorm(4.0),
    norms.pnorm(np.inf),
    norms.ellipse([[4.0, 1.0], [1.0, 1.0]]),
    norms.polygon(HEX),
]


def test_values():
    x = np.array([3.0, -4.0])
    assert norms.norm_eval(norms.euclidean(), x) == pytest.approx(5.0)
    assert norms.norm_eval(norms.pnorm(1.0), x) == pytest.approx(7.0)
    assert norms.norm_eval(norms.pnorm(np.inf), x) == pytest.approx(4.0)
    assert norms.norm_eval(norms.pnorm(4.0), x) == pytest.approx((81 + 256) ** 0.25)
    assert norms.norm_eval(norms.ellipse([[4.0, 0.0], [0.0, 1.0]]), x) == pytest.approx(np.sqrt(36 + 16))


def test_polygon_gauge_is_one_on_boundary():
    desc = norms.polygon(HEX)
    v = np.array(HEX, dtype=float)
    assert np.allclose(norms.norm_eval(desc, v), 1.0)
    mid = 0.5 * (v + np.roll(v, -1, axis=0))
    assert np.allclose(norms.norm_eval(desc, mid), 1.0)


def test_square_polygon_matches_max_norm():
    desc = norms.polygon([[1, 1], [-1, 1], [-1, -1], [1, -1]])
    x = np.random.default_rng(0).normal(size=(100, 2))
    assert np.allclose(norms.norm_eval(desc, x), np.abs(x).max(axis=1))


def test_vectorised_shapes():
    x = np.ones((3, 5, 2))
    assert norms.norm_eval(norms.pnorm(3.0), x).shape == (3, 5)


def test_large_entries_do_not_overflow():
    assert np.isfinite(norms.norm_eval(norms.pnorm(8.0), [1e300, 1e300]))


@pytest.mark.parametrize("desc", ALL, ids=lambda d: d.label)
@given(x=vec2, y=vec2, t=st.floats(-5, 5))
def test_norm_axioms(desc, x, y, t):
    n = lambda v: float(norms.norm_eval(desc, v))  # noqa: E731
    assert n(x + y) <= n(x) + n(y) + 1e-9 * (1 + n(x) + n(y))
    assert n(t * x) == pytest.approx(abs(t) * n(x), rel=1e-9, abs=1e-12)
    assert n(-x) == pytest.approx(n(x), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("desc", ALL, ids=lambda d: d.label)
def test_equivalence_constant_bounds(desc):
    c = norms.equivalence_constant(desc)
    u = norms.unit_circle(2000)
    vals = norms.norm_eval(desc, u)
    assert c >= 1.0
    assert np.all(vals <= c * (1 + 1e-12))
    assert np.all(vals >= 1.0 / c * (1 - 1e-12))


def test_equivalence_constant_pnorm_3d():
    assert norms.equivalence_constant(norms.pnorm(1.0, 3)) == pytest.approx(np.sqrt(3.0))


@pytest.mark.parametrize(
    "build",
    [
        lambda: norms.pnorm(0.5),
        lambda: norms.ellipse([[1.0, 0.0], [0.0, -1.0]]),
        lambda: norms.ellipse([[1.0, 0.5], [0.0, 1.0]]),
        lambda: norms.polygon([[1, 0], [0, 1], [-1, 0]]),
        lambda: norms.polygon([[2, 0], [0, 1], [-1, 0], [0, -1]]),
        lambda: norms.from_config("circle", 2),
        lambda: norms.from_config("polygon", 3, vertices=HEX),
        lambda: norms.from_config("ellipse", 2, matrix=[1.0, 0.0, 1.0]),
        lambda: norms.euclidean(1),
    ],
)
def test_invalid_norms(build):
    with pytest.raises(norms.NormError):
        build()


def test_dimension_mismatch():
    with pytest.raises(norms.NormError):
        norms.norm_eval(norms.euclidean(3), [1.0, 2.0])


def test_from_config():
    assert norms.from_config("pnorm", 3, q=4.0).q == 4.0
    assert norms.from_config("ellipse", 2, matrix=[2.0, 0.0, 0.0, 1.0]).matrix.shape == (2, 2)
    assert norms.from_config("polygon", 2, vertices=HEX).kind == "polygon"
