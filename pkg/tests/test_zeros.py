import math

import numpy as np
import pytest

from schottkylab.zeros import (
    Rect,
    _det_factory,
    circle_winding,
    enrich_with_residues,
    residue_check,
    winding_number,
    zero_search,
)
from schottkylab.zeta import TRIVIAL, determinant_eval


def test_rect_validation():
    with pytest.raises(ValueError):
        Rect(0.0, 0.0, -1.0, 1.0)
    r = Rect(-1.0, 1.0, -1.0, 1.0)
    assert r.contains(0.5 + 0.5j)
    assert not r.contains(2.0 + 0j)


def test_winding_of_polynomial():
    def fn(z):
        vals = (z - 0.2) ** 2 * (z + 0.4 - 0.1j)
        return vals, None

    loop = [1.5 * np.exp(2j * math.pi * k / 16) for k in range(16)]
    assert winding_number(fn, loop) == 3
    assert circle_winding(fn, 0.2, 0.3) == 2
    assert circle_winding(fn, -0.4 + 0.1j, 0.3) == 1
    assert circle_winding(fn, 5.0, 0.5) == 0


def test_cylinder_zero_set(cylinder, cyl_table):
    # zeros at lambda = -1/2 - k + i pi m (length 2), each of order 2
    zeros = zero_search(cylinder, TRIVIAL, Rect(-0.8, -0.2, -3.5, 3.5),
                        grid=(3, 8), table=cyl_table)
    locs = sorted((round(z.location.imag, 4), z.order) for z in zeros)
    assert [o for _, o in locs] == [2, 2, 2]
    assert locs[0][0] == pytest.approx(-math.pi, abs=1e-4)
    assert locs[1][0] == pytest.approx(0.0, abs=1e-4)
    assert locs[2][0] == pytest.approx(math.pi, abs=1e-4)
    for z in zeros:
        assert z.location.real == pytest.approx(-0.5, abs=1e-6)
    # Newton refinement leaves |d_N| below 1e-10 at the zero
    for z in zeros:
        exp = determinant_eval(cylinder, TRIVIAL, z.location, N=12, table=cyl_table)
        assert abs(exp.values[0]) <= 1e-10


def test_empty_rect(cylinder, cyl_table):
    zeros = zero_search(cylinder, TRIVIAL, Rect(0.2, 0.8, -0.4, 0.4),
                        grid=(3, 3), table=cyl_table)
    assert zeros == []


def test_total_winding_bookkeeping(thin2, thin_table):
    rect = Rect(-0.45, -0.05, -1.1, 1.1)
    zeros = zero_search(thin2, TRIVIAL, rect, grid=(5, 8), table=thin_table)
    fn = _det_factory(thin2, TRIVIAL, 12, thin_table)
    from schottkylab.zeros import _cell_loop

    total = winding_number(fn, _cell_loop(rect.re_min, rect.re_max,
                                          rect.im_min, rect.im_max, 48))
    assert total == sum(z.order for z in zeros)
    assert len(zeros) >= 3
    # leading zero sits at delta - 1/2 on the real axis
    from schottkylab.zeta import critical_exponent

    ce = critical_exponent(thin2, table=thin_table)
    lead = min(zeros, key=lambda z: abs(z.location))
    assert lead.location.imag == pytest.approx(0.0, abs=1e-10)
    assert lead.location.real == pytest.approx(ce.delta_classical - 0.5, abs=1e-9)


def test_cylinder_residue(cylinder, cyl_table):
    out = residue_check(cylinder, TRIVIAL, -0.5, 0.22, table=cyl_table)
    assert out["nearest_integer"] == 2
    assert out["defect"] <= 1e-10
    assert out["ord_mu"] == 2
    assert out["ord_minus_mu"] == 0
    assert out["count_matches"]


def test_residue_of_empty_circle(cylinder, cyl_table):
    out = residue_check(cylinder, TRIVIAL, 0.8 + 0.3j, 0.1, table=cyl_table)
    assert abs(out["residue"]) <= 1e-6
    assert out["nearest_integer"] == 0


def test_enrich_with_residues(thin2, thin_table):
    zeros = zero_search(thin2, TRIVIAL, Rect(-0.4, -0.2, -0.2, 0.2),
                        grid=(3, 3), table=thin_table)
    assert len(zeros) == 1
    enriched = enrich_with_residues(thin2, TRIVIAL, zeros, 0.1, table=thin_table)
    assert enriched[0].integer_defect <= 1e-6
    assert round(enriched[0].residue_of_L.real) == enriched[0].order


def test_contour_through_zero_detected():
    from schottkylab.errors import ContourThroughZero

    def fn(z):
        return np.asarray(z) - 1.0, None  # zero at 1, sitting on the loop

    loop = [0.0 + 0j, 1.0 + 0j, 1.0 + 1j, 0.0 + 1j]
    with pytest.raises(ContourThroughZero):
        winding_number(fn, loop)
