from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from frontflow import anisotropy, norms


def beta_form(k, b):
    x = (k + 1.0) / b
    return special.beta(x, 1.0 - x) / b


def test_constants_frozen():
    assert anisotropy.c_const(2, 1.5) == pytest.approx(2.068751, rel=1e-6)
    assert anisotropy.c_const(3, 1.0) == 1.0
    assert anisotropy.lambda_const(2, 1.0) == pytest.approx(0.826993, rel=1e-6)
    assert anisotropy.lambda_const(2, 1.5) == pytest.approx(0.871026, rel=1e-6)
    assert anisotropy.mobility_mu(norms.euclidean(), 1.5, [1, 0]) == pytest.approx(0.2177566, rel=1e-6)
    assert anisotropy.mobility_mu(norms.euclidean(), 1.0, [0, 1]) == pytest.approx(0.2067483, rel=1e-6)


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("alpha", [1.1, 1.5, 1.9])
def test_constants_match_beta(n, alpha):
    assert anisotropy.c_const(n, alpha) == pytest.approx(beta_form(n, n + alpha), rel=1e-12)
    assert anisotropy.c_const_quad(n, alpha) == pytest.approx(beta_form(n, n + alpha), rel=1e-9)
    assert anisotropy.lambda_const(n, alpha) == pytest.approx(1 / beta_form(n - 2, n + alpha), rel=1e-12)


def test_invalid_alpha():
    with pytest.raises(anisotropy.AnisotropyError):
        anisotropy.c_const(2, 2.0)
    with pytest.raises(anisotropy.AnisotropyError):
        anisotropy.mobility_mu(norms.euclidean(), 1.5, [0.0, 0.0])


def test_euclidean_3d_mobility_and_matrix():
    # hyperplane circle of length 2 pi; A = C * pi (I - e e^T)
    desc = norms.euclidean(3)
    p = np.array([0.0, 0.0, 2.0])
    mu = anisotropy.mobility_mu(desc, 1.5, p)
    assert mu == pytest.approx(1.0 / (2 * beta_form(1, 4.5) * 2 * math.pi), rel=1e-9)
    a = anisotropy.anisotropy_matrix(desc, 1.5, p)
    expect = anisotropy.c_const(3, 1.5) * math.pi * np.diag([1.0, 1.0, 0.0])
    assert np.allclose(a, expect, rtol=1e-9, atol=1e-12)


def test_curvature_operator_on_sphere():
    # u = -|x|^2/2 has M = -I: F = -tr(A)
    desc = norms.euclidean(2)
    f = anisotropy.curvature_operator(-np.eye(2), [1.0, 0.0], desc=desc, alpha=1.5)
    assert f == pytest.approx(-2.0 * anisotropy.c_const(2, 1.5))
    with pytest.raises(anisotropy.AnisotropyError):
        anisotropy.curvature_operator(np.eye(2), [1.0, 0.0])


@pytest.mark.parametrize("desc", [norms.pnorm(4.0), norms.ellipse([[3.0, 1.0], [1.0, 1.0]]), norms.polygon([[1, 0], [0.6, 0.9], [-0.4, 0.7], [-1, 0], [-0.6, -0.9], [0.4, -0.7]])], ids=lambda d: d.kind)
@given(ang=st.floats(0, 2 * math.pi), r=st.floats(0.1, 10))
def test_two_dimensional_characterisation(desc, ang, r):
    p = r * np.array([math.cos(ang), math.sin(ang)])
    phi = anisotropy.mobility_norm_phi(desc, 1.5, p)
    rot = float(norms.norm_eval(desc, [-p[1], p[0]]))
    assert phi == pytest.approx(anisotropy.char_constant_2d(1.5) * rot, rel=1e-10)


@pytest.mark.parametrize("desc", [norms.pnorm(4.0), norms.ellipse([[3.0, 1.0], [1.0, 1.0]])], ids=lambda d: d.kind)
def test_direction_table(desc, tmp_path):
    tab = anisotropy.build_direction_table(desc, 1.5, 256)
    assert tab.n_dirs == 256
    for k in (0, 17, 100):
        d = tab.dirs[k]
        assert tab.mu[k] == pytest.approx(anisotropy.mobility_mu(desc, 1.5, d), rel=1e-9)
        assert np.allclose(tab.amat[k], anisotropy.anisotropy_matrix(desc, 1.5, d), rtol=1e-8, atol=1e-12)
    mu, a = tab.interp(tab.angles[:5])
    assert np.allclose(mu, tab.mu[:5])
    assert np.allclose(a, tab.tangent_coef[:5])
    tab.to_csv(tmp_path / "t.csv")
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 257
    with pytest.raises(anisotropy.AnisotropyError):
        anisotropy.build_direction_table(desc, 1.5, 16)


def test_phi_dual_matches_bruteforce_and_support():
    tab = anisotropy.build_direction_table(norms.pnorm(4.0), 1.5, 512)
    x = np.random.default_rng(3).normal(size=(200, 2))
    assert np.allclose(anisotropy.phi_dual(x, tab), anisotropy.phi_dual_bruteforce(x, tab), rtol=1e-12)
    # Wulff vertices lie on the unit sphere of phi_dual, and <x, theta> <= Phi(theta) Phi°(x)
    assert np.allclose(anisotropy.phi_dual(tab.wulff_vertices, tab), 1.0, atol=1e-9)
    lhs = x @ tab.dirs.T
    rhs = anisotropy.phi_dual(x, tab)[:, None] * tab.phi[None, :]
    assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-15)


def test_wulff_of_euclidean_is_disk():
    tab = anisotropy.build_direction_table(norms.euclidean(), 1.5, 256)
    lo, hi = anisotropy.wulff_radius_range(tab)
    mu = anisotropy.mobility_mu(norms.euclidean(), 1.5, [1, 0])
    assert lo == pytest.approx(mu, rel=1e-3)
    assert hi == pytest.approx(mu, rel=1e-3)
    b = anisotropy.wulff_boundary(2.0, tab)
    assert b.area == pytest.approx(math.pi * (2 * mu) ** 2, rel=1e-3)
