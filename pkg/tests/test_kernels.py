import math

import mpmath as mp
import numpy as np
import pytest

from schottkylab.kernels import (
    RadialTestFunction,
    heat,
    heat_kernel,
    resolvent,
    resolvent_kernel,
)


def test_resolvent_legendre_closed_form():
    # r_{1/2}(d) = (1/4 pi) log((cosh d + 1)/(cosh d - 1))
    d = np.array([0.3, 0.9, 1.7, 3.2, 6.0])
    vals = resolvent_kernel(0.5, d)
    exact = np.log((np.cosh(d) + 1) / (np.cosh(d) - 1)) / (4 * math.pi)
    assert np.max(np.abs(vals - exact) / exact) < 1e-10


def test_resolvent_against_legendre_Q():
    # r_lambda(d) = (1/2 pi) Q_{lambda - 1/2}(cosh d)
    mp.mp.dps = 30
    for lam in (0.75, 1.0, 1.6):
        for d in (0.7, 2.0, 4.5):
            mine = float(resolvent_kernel(lam, d)[0])
            oracle = float(mp.re(mp.legenq(lam - 0.5, 0, mp.cosh(d)))) / (2 * math.pi)
            assert mine == pytest.approx(oracle, rel=1e-10)


def test_heat_mass_is_one():
    for t in (0.5, 1.0, 2.0):
        x, w = np.polynomial.legendre.leggauss(500)
        hi = 12.0 + 14.0 * t
        rho = 0.5 * hi * (x + 1)
        wr = 0.5 * hi * w
        mass = float(np.sum(wr * heat_kernel(t, rho) * 2 * math.pi * np.sinh(rho)))
        assert mass == pytest.approx(1.0, abs=1e-8)


def test_heat_tail_monotone():
    t = 1.0
    vals = heat_kernel(t, np.array([5.0, 6.0, 7.0]))
    assert vals[0] > vals[1] > vals[2] > 0


def test_transform_pair_consistency():
    # h(xi) = Integral g(u) e^{-i xi u} du; g is even and smooth on [0, oo)
    # (the resolvent g has a corner at 0), so integrate the half line
    from scipy.integrate import simpson

    for f in (heat(0.5), heat(2.0), resolvent(0.8), resolvent(1.3)):
        u = np.linspace(0.0, 80.0, 32001)
        g = f.geodesic_transform(u)
        for xi in (0.0, 0.5, 1.0, 2.0):
            h_num = 2.0 * float(simpson(g * np.cos(xi * u), x=u))
            h = float(f.spectral_transform(np.array([xi]))[0])
            assert abs(h_num - h) < 1e-8
        # g positive (before double-precision underflow) and even
        mid = np.linspace(-20.0, 20.0, 801)
        assert np.all(f.geodesic_transform(mid) > 0)
        assert np.allclose(g, f.geodesic_transform(-u), rtol=0, atol=0)


def test_transforms_closed_forms():
    f = heat(1.0)
    assert float(f.geodesic_transform(2.0)) == pytest.approx(
        math.exp(-0.25) * math.exp(-1.0) / math.sqrt(4 * math.pi), rel=1e-15)
    assert float(f.spectral_transform(1.0)) == pytest.approx(
        math.exp(-1.25), rel=1e-15)
    r = resolvent(1.0)
    assert float(r.geodesic_transform(2.0)) == pytest.approx(
        math.exp(-2.0) / 2.0, rel=1e-15)
    assert float(r.spectral_transform(2.0)) == pytest.approx(0.2, rel=1e-15)


def test_kernel_positivity_and_cut():
    f = heat(1.0)
    d = np.linspace(0.0, 9.0, 40)
    assert np.all(f.kernel(d) > 0)
    cut = f.kernel_tail_cut(1e-10)
    assert float(f.kernel(cut)[0]) <= 1e-10
    assert float(f.kernel(cut - 0.5)[0]) > 1e-10


def test_invalid_parameters():
    with pytest.raises(ValueError):
        RadialTestFunction("heat", -1.0)
    with pytest.raises(ValueError):
        RadialTestFunction("resolvent", -0.2)
    with pytest.raises(ValueError):
        RadialTestFunction("gaussian", 1.0)
    with pytest.raises(ValueError):
        resolvent_kernel(1.0, np.array([0.0]))
    with pytest.raises(ValueError):
        heat_kernel(1.0, np.array([-0.5]))


def test_heat_kernel_matches_highprecision_quadrature():
    # independent evaluation of the defining integral (tanh-sinh handles the
    # inverse-square-root endpoint) in high precision
    mp.mp.dps = 30
    t, d = 1.0, 1.5
    c = mp.sqrt(2) * mp.e ** (-t / 4) / (4 * mp.pi * t) ** mp.mpf(1.5)
    oracle = c * mp.quadts(
        lambda s: s * mp.e ** (-s * s / (4 * t)) / mp.sqrt(mp.cosh(s) - mp.cosh(d)),
        [d, d + 0.5, d + 30])
    assert float(heat_kernel(t, d)[0]) == pytest.approx(float(oracle), rel=1e-9)
