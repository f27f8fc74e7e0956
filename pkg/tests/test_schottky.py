import json
import math

import pytest

from schottkylab.errors import InputError, NonHyperbolicGenerator, OverlappingIntervals
from schottkylab.schottky import (
    IntervalPair,
    build_schottky,
    cylinder_template,
    load_group,
    load_group_document,
    save_group,
    symmetric_template,
)


def test_cylinder_template_trace():
    g = cylinder_template(2.0)
    assert g.rank == 1
    assert g.generators[0].trace == pytest.approx(2 * math.cosh(1.0), rel=1e-15)
    assert g.generators[0].translation_length() == pytest.approx(2.0, abs=1e-12)
    assert all(item["passed"] for item in g.validation)


def test_symmetric_template_validates():
    g = symmetric_template(2, centers=[1.0, 3.0], half_width=0.3)
    assert g.rank == 2
    assert all(item["passed"] for item in g.validation)
    # pairing: generator maps minus-interval endpoints onto plus endpoints
    for gen, pair in zip(g.generators, g.intervals):
        imgs = sorted([gen.apply_real(pair.minus[0]), gen.apply_real(pair.minus[1])])
        assert imgs[0] == pytest.approx(pair.plus[0], abs=1e-12)
        assert imgs[1] == pytest.approx(pair.plus[1], abs=1e-12)


def test_touching_intervals_rejected():
    # half-width 1.0 makes neighbouring intervals touch at 2.5: not Schottky
    with pytest.raises(OverlappingIntervals):
        symmetric_template(2, centers=[1.5, 3.5], half_width=1.0)


def test_non_hyperbolic_generator_rejected():
    with pytest.raises(NonHyperbolicGenerator):
        build_schottky(1, [[math.cos(0.2), -math.sin(0.2), math.sin(0.2), math.cos(0.2)]],
                       [{"minus": [-2.0, -1.0], "plus": [1.0, 2.0]}])


def test_letters_and_targets():
    g = symmetric_template(2, centers=[1.0, 3.0], half_width=0.2)
    assert g.letters() == (-2, -1, 1, 2)
    assert g.letter_target(1) == g.intervals[0].plus
    assert g.letter_target(-1) == g.intervals[0].minus
    assert g.letter_forbidden(2) == g.intervals[1].minus
    w = g.word_matrix((1, 2, -1))
    expect = g.letter_matrix(1) * g.letter_matrix(2) * g.letter_matrix(-1)
    assert abs(w.a - expect.a) < 1e-12


def test_membership():
    g = cylinder_template(2.0)
    assert g.in_fundamental_domain(1j)
    assert not g.in_fundamental_domain(1.0 + 0.2j)


def test_document_roundtrip(tmp_path):
    g = symmetric_template(2, centers=[1.0, 3.0], half_width=0.12)
    path = tmp_path / "group.json"
    save_group(g, path, meta={"note": "roundtrip"})
    doc = json.loads(path.read_text())
    # reals are decimal strings in the document
    assert isinstance(doc["generators"][0][0], str)
    g2 = load_group(path)
    assert g2.content_hash() == g.content_hash()
    assert g2.intervals == g.intervals


def test_hash_independent_of_template_tag():
    g1 = symmetric_template(2, centers=[1.0, 3.0], half_width=0.12)
    g2 = build_schottky(
        2,
        [gen.as_array().ravel().tolist() for gen in g1.generators],
        [{"minus": list(p.minus), "plus": list(p.plus)} for p in g1.intervals],
    )
    assert g1.template is not None and g2.template is None
    assert g1.content_hash() == g2.content_hash()


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(InputError):
        load_group(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_group(bad)
    with pytest.raises(InputError):
        load_group_document({"rank": 1})


def test_fixture_files_load():
    cyl = load_group("cylinder.json")
    thin = load_group("thin2.json")
    assert cyl.rank == 1 and thin.rank == 2
    assert thin.template["kind"] == "symmetric"


def test_interval_pair_type():
    p = IntervalPair(minus=(-2.0, -1.0), plus=(1.0, 2.0))
    assert p.minus[1] < p.plus[0]
