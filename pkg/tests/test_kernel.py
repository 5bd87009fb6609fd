from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from frontflow import kernel, norms, quadrature


@given(h=st.floats(1e-8, 0.18))
def test_sigma_alpha1_inverts_h(h):
    s = kernel.sigma_of_h(1.0, h)
    assert 0 < s < math.exp(-0.5)
    assert s * s * abs(math.log(s)) == pytest.approx(h, rel=1e-10)
    assert kernel.beta_of_h(1.0, h) == pytest.approx(s * abs(math.log(s)), rel=1e-12)


@given(alpha=st.floats(1.01, 1.99), h=st.floats(1e-6, 1.0))
def test_sigma_power_law(alpha, h):
    assert kernel.sigma_of_h(alpha, h) == pytest.approx(h ** (alpha / 2), rel=1e-12)
    assert kernel.beta_of_h(alpha, h) == pytest.approx(math.sqrt(h), rel=1e-12)
    assert kernel.scheme_params(alpha, h).width == pytest.approx(math.sqrt(h), rel=1e-10)


@pytest.mark.parametrize("alpha,h", [(2.0, 0.1), (0.9, 0.1), (1.5, 0.0), (1.0, 0.2), (1.5, -1.0)])
def test_invalid_scalings(alpha, h):
    with pytest.raises(kernel.KernelError):
        kernel.sigma_of_h(alpha, h)


# frozen from the Beta-function route: 2 pi * (pi/3.5)/sin(2 pi/3.5), 4 pi * (pi/4)/sin(3 pi/4)
@pytest.mark.parametrize("n,alpha,mass", [(2, 1.5, 5.784813), (3, 1.0, 13.957728)])
def test_kernel_mass_frozen(n, alpha, mass):
    assert kernel.kernel_mass_closed(n, alpha) == pytest.approx(mass, rel=1e-6)
    assert kernel.kernel_mass(norms.euclidean(n), alpha) == pytest.approx(mass, rel=1e-6)


def test_kernel_mass_is_h_independent_by_direct_quadrature():
    desc = norms.pnorm(3.0)
    for h in (0.01, 0.001):
        p = kernel.scheme_params(1.5, h)
        f = lambda r, th: r * kernel.kernel_value(desc, p, [r * math.cos(th), r * math.sin(th)])  # noqa: E731
        val, _ = integrate.dblquad(f, 0, 2 * math.pi, 0, np.inf, epsrel=1e-9)
        assert val == pytest.approx(kernel.kernel_mass(desc, 1.5), rel=1e-6)


def test_angular_mass_scales_with_ellipse_determinant():
    # int_{S^1} (x^T M x)^{-1} = 2 pi / sqrt(det M)
    m = np.array([[4.0, 1.0], [1.0, 2.0]])
    assert kernel.angular_mass(norms.ellipse(m), 2.0) == pytest.approx(2 * math.pi / math.sqrt(np.linalg.det(m)), rel=1e-9)


@pytest.mark.parametrize("desc", [norms.euclidean(), norms.pnorm(4.0), norms.ellipse([[2.0, 0.3], [0.3, 1.0]])], ids=lambda d: d.kind)
def test_sampled_kernel(desc):
    p = kernel.scheme_params(1.5, 0.0064)
    kt = kernel.sample_kernel_grid(desc, p, 0.01)
    v = kt.values
    assert np.array_equal(v, v[::-1, ::-1])
    assert np.all(v > 0)
    # the truncation tail is below the requested fraction (up to the midpoint-rule error)
    assert kt.tail_mass <= 1e-3 * kt.total_mass * 1.05
    assert kt.tail_bound <= 1e-3 * kt.total_mass * (1 + 1e-9)
    assert v.sum() == pytest.approx(kt.total_mass, rel=2e-3)


def test_tail_bound_dominates_true_tail():
    desc = norms.euclidean()
    p = kernel.scheme_params(1.5, 0.01)
    for r in (0.5, 1.0, 4.0):
        true, _ = integrate.quad(lambda t: 2 * math.pi * t * p.sigma / (p.sigma ** (3.5 / 1.5) + t**3.5), r, np.inf)
        assert true <= kernel.tail_bound(desc, p, r)
        # and is tight for large radii
        assert true >= 0.8 * kernel.tail_bound(desc, p, r) if r >= 4.0 else True


def test_coarse_grid_refused():
    p = kernel.scheme_params(1.5, 0.0064)
    with pytest.raises(kernel.KernelError, match="too coarse"):
        kernel.sample_kernel_grid(norms.euclidean(), p, 0.05)


def test_memory_guard():
    p = kernel.scheme_params(1.5, 0.0064)
    with pytest.raises(kernel.KernelError, match="MiB"):
        kernel.sample_kernel_grid(norms.euclidean(3), p, 0.01, max_bytes=1024)


def test_kernel_value_peak():
    p = kernel.scheme_params(1.5, 0.01)
    assert kernel.kernel_value(norms.euclidean(), p, [0.0, 0.0]) == pytest.approx(p.sigma ** (1 - 3.5 / 1.5))
    assert quadrature.sphere_area(2) == pytest.approx(2 * math.pi)
