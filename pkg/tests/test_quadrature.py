import math

import numpy as np
import pytest

from schottkylab.errors import TailDominates
from schottkylab.geometry import polar_point
from schottkylab.kernels import resolvent
from schottkylab.orbits import build_orbit_cache, batch_orbit_sums
from schottkylab.quadrature import _DomainFrame, domain_quadrature


def test_cylinder_ball_area(cylinder):
    # the radius-1 ball around i fits inside the collar: area 2 pi (cosh 1 - 1)
    res = domain_quadrature(cylinder, lambda z: np.ones_like(np.real(z)), 1.0,
                            rel_tol=1e-11, tail_tol=math.inf)
    assert res.value == pytest.approx(2 * math.pi * (math.cosh(1.0) - 1.0), rel=1e-12)


def test_zero_integrand(thin2):
    res = domain_quadrature(thin2, lambda z: np.zeros_like(np.real(z)), 3.0,
                            rel_tol=1e-9, tail_tol=math.inf)
    assert res.value == 0.0
    assert res.tail_estimate == 0.0


def test_domain_restriction_against_membership(thin2):
    # ray exit radii agree with a brute-force membership scan
    frame = _DomainFrame(thin2, thin2.base_point)
    phis = np.linspace(0.0, 2 * math.pi, 41)
    stars = frame.exit_radius(phis, 6.0)
    rho = np.linspace(1e-3, 6.0, 1200)
    for phi, star in zip(phis, stars):
        pts = polar_point(rho, np.full_like(rho, phi))
        inside = np.array([thin2.in_fundamental_domain(complex(z)) for z in pts])
        if star >= 6.0:
            assert inside.all()
        else:
            crossings = np.nonzero(~inside)[0]
            assert len(crossings) > 0
            first_exit = rho[crossings[0]]
            assert first_exit == pytest.approx(star, abs=6.0 / 1200 + 1e-9)
            # once out, never back in (single exit per ray)
            assert (~inside[crossings[0]:]).all()


def test_partial_cap_area(thin2):
    # radius 3 reaches past the nearest wall (distance ~2.8), so the
    # domain-restricted ball is strictly smaller than the full ball
    res = domain_quadrature(thin2, lambda z: np.ones_like(np.real(z)), 3.0,
                            rel_tol=1e-10, tail_tol=math.inf)
    full = 2 * math.pi * (math.cosh(3.0) - 1.0)
    assert 0.7 * full < res.value < full - 1e-6


def test_tail_dominates_raised(thin2):
    f = resolvent(0.75)
    cache = build_orbit_cache(thin2, 30.0)

    def integrand(zs):
        return batch_orbit_sums(cache, zs, f.kernel, 25.0, group=thin2)

    with pytest.raises(TailDominates):
        domain_quadrature(thin2, integrand, 4.0, rel_tol=1e-7, tail_tol=1e-12)


def test_base_point_must_be_interior(thin2):
    with pytest.raises(ValueError):
        _DomainFrame(thin2, 1.0 + 0.05j)
