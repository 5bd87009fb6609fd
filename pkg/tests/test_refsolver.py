from __future__ import annotations

import math

import numpy as np
import pytest

from frontflow import anisotropy, domain, forcing, geometry, norms, refsolver


@pytest.fixture(scope="module")
def eucl():
    return anisotropy.build_direction_table(norms.euclidean(), 1.5, 256)


def test_init_levelset_is_clamped_signed_distance():
    d = domain.Domain(2, 1.0, 40, margin=2)
    f = refsolver.init_levelset(d, domain.parse_set("ball 0 0 0.5", 2), 0.2)
    r = np.linalg.norm(d.points(), axis=-1)
    assert np.allclose(f.values, np.clip(0.5 - r, -0.2, 0.2))
    with pytest.raises(refsolver.RefSolverError):
        refsolver.init_levelset(d, domain.parse_set("ball 0 0 0.5", 2), 0.0)
    with pytest.raises(refsolver.RefSolverError):
        refsolver.init_levelset(domain.Domain(3, 1.0, 10, 1), domain.parse_set("ball 0 0 0 0.5", 3), 0.2)


def test_shrinking_circle_matches_law(eucl):
    d = domain.Domain(2, 1.2, 96, margin=2)
    f = refsolver.init_levelset(d, domain.parse_set("ball 0 0 1", 2), 6 * d.spacing)
    mu, c = eucl.mu[0], anisotropy.c_const(2, 1.5)
    t = 0.5 / (4 * mu * c)
    out = refsolver.pde_run(f, eucl, forcing.zero(), t)
    assert out.time == pytest.approx(t)
    r = geometry.radius_stats(geometry.extract_front(out))[1]
    assert r == pytest.approx(math.sqrt(0.5), rel=5e-3)


def test_forcing_expands_straight_front_at_mobility_speed(eucl):
    # a half-plane x < 0 moves right at speed mu * g (no curvature)
    d = domain.Domain(2, 1.0, 50, margin=2)
    f = refsolver.init_levelset(d, domain.parse_set("box -0.9 -0.9 0 0.9", 2), 0.3)
    vals = np.clip(-d.points()[..., 0], -0.3, 0.3)
    f = f.with_values(vals)
    out = refsolver.pde_run(f, eucl, forcing.constant(2.0), 0.25)
    row = out.values[:, 25]
    x = d.axes()[0]
    x0 = np.interp(0.0, -row, x)
    assert x0 == pytest.approx(2.0 * eucl.mu[0] * 0.25, abs=0.1 * d.spacing)


def test_negative_forcing_shrinks(eucl):
    d = domain.Domain(2, 1.0, 50, margin=2)
    f = refsolver.init_levelset(d, domain.parse_set("ball 0 0 0.6", 2), 0.3)
    grow = refsolver.pde_run(f, eucl, forcing.constant(3.0), 0.05)
    shrink = refsolver.pde_run(f, eucl, forcing.constant(-3.0), 0.05)
    still = refsolver.pde_run(f, eucl, forcing.zero(), 0.05)
    a0 = geometry.extract_front(still).area
    assert geometry.extract_front(grow).area > a0 > geometry.extract_front(shrink).area
    assert geometry.extract_front(refsolver.pde_run(f, eucl, forcing.constant(30.0), 0.02)).area > geometry.extract_front(f).area


def test_cfl_guard(eucl):
    d = domain.Domain(2, 1.0, 40, margin=2)
    f = refsolver.init_levelset(d, domain.parse_set("ball 0 0 0.5", 2), 0.2)
    lim = refsolver.cfl_limit(eucl, d.spacing)
    with pytest.raises(refsolver.RefSolverError, match="stability"):
        refsolver.pde_step(f, eucl, forcing.zero(), 1.5 * lim)
    assert refsolver.cfl_limit(eucl, d.spacing, 1000.0) < lim


def test_run_by_steps_and_callback(eucl):
    d = domain.Domain(2, 1.0, 40, margin=2)
    f = refsolver.init_levelset(d, domain.parse_set("ball 0 0 0.5", 2), 0.2)
    seen = []
    out = refsolver.pde_run(f, eucl, forcing.zero(), 0.0, dt=1e-4, n_steps=5, callback=lambda fl, k: seen.append(k))
    assert seen == [1, 2, 3, 4, 5]
    assert out.time == pytest.approx(5e-4)
    assert np.all(np.abs(out.values) <= 0.2)
