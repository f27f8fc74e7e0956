import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schottkylab.errors import CapacityExceeded
from schottkylab.geometry import geodesic_length_from_trace
from schottkylab.words import (
    canonical_necklace,
    count_cyclic_strings,
    count_reduced_words,
    cyclic_reduce,
    enumerate_classes,
    invert_word,
    is_cyclically_reduced,
    min_rotation,
    necklace_count,
    necklaces,
    reduce_word,
    word_key,
)

letters = st.integers(min_value=-2, max_value=2).filter(lambda x: x != 0)


def reduced_words(max_size=10):
    return st.lists(letters, min_size=1, max_size=max_size).map(reduce_word).filter(len)


def test_reduce_and_invert():
    assert reduce_word((1, -1)) == ()
    assert reduce_word((1, 2, -2, -1, 2)) == (2,)
    assert invert_word((1, 2, -1)) == (1, -2, -1)
    assert cyclic_reduce((1, 2, -1)) == (2,)
    assert cyclic_reduce((2, 1, -2, -1)) == (2, 1, -2, -1)


@given(reduced_words())
@settings(max_examples=200, deadline=None)
def test_invert_is_involution(word):
    assert invert_word(invert_word(word)) == word
    assert reduce_word(word + invert_word(word)) == ()


@given(reduced_words(8), st.integers(min_value=0, max_value=7))
@settings(max_examples=300, deadline=None)
def test_necklace_rotation_invariance(word, k):
    word = cyclic_reduce(word)
    if not word:
        return
    k = k % len(word)
    rotated = word[k:] + word[:k]
    assert canonical_necklace(rotated) == canonical_necklace(word)


@given(reduced_words(8))
@settings(max_examples=300, deadline=None)
def test_min_rotation_matches_bruteforce(word):
    word = cyclic_reduce(word)
    if not word:
        return
    rots = [word[i:] + word[:i] for i in range(len(word))]
    best = min(rots, key=lambda w: word_key(w, 2))
    assert min_rotation(word, 2) == best


def test_counting_formulas():
    # reduced words: 2r (2r-1)^(n-1)
    assert count_reduced_words(2, 1) == 4
    assert count_reduced_words(2, 4) == 4 * 27
    # enumerated necklaces match the Burnside count
    for n in range(1, 9):
        assert len(necklaces(2, n)) == necklace_count(2, n)
        assert len(necklaces(1, n)) == necklace_count(1, n) == 2
    # cyclic strings: closed non-backtracking walks
    assert count_cyclic_strings(2, 2) == 12
    for w in necklaces(2, 5):
        assert is_cyclically_reduced(w)


def test_cylinder_class_table(cylinder):
    table = enumerate_classes(cylinder, 3)
    words = [r.word for r in table.records]
    assert sorted(words, key=len) == [(-1,), (1,), (-1, -1), (1, 1),
                                      (-1, -1, -1), (1, 1, 1)]
    sq = next(r for r in table.records if r.word == (1, 1))
    assert sq.primitive_root == (1,)
    assert sq.power == 2
    assert sq.length == pytest.approx(4.0, abs=1e-12)
    assert sq.primitive_length == pytest.approx(2.0, abs=1e-12)


def test_rank2_low_order_counts(thin2):
    table = enumerate_classes(thin2, 1)
    assert len(table.records) == 4
    assert all(r.is_primitive for r in table.records)


def test_brute_force_equivalence(thin2):
    # dedup of all reduced words of length <= 4 into canonical necklaces
    table = enumerate_classes(thin2, 4)
    brute = set()

    def grow(word):
        if word:
            red = cyclic_reduce(word)
            if red:
                brute.add(canonical_necklace(red))
        if len(word) == 4:
            return
        for a in (-2, -1, 1, 2):
            if word and a == -word[-1]:
                continue
            grow(word + (a,))

    grow(())
    assert {r.word for r in table.records} == brute
    assert len(table.records) == sum(necklace_count(2, n) for n in range(1, 5))


def test_power_length_identity(thin2):
    table = enumerate_classes(thin2, 6)
    by_word = {r.word: r for r in table.records}
    for rec in table.records:
        if rec.power == 1:
            continue
        root = by_word[canonical_necklace(rec.primitive_root)]
        assert rec.length == pytest.approx(rec.power * root.length, abs=1e-9)


def test_inverse_classes_listed_separately(thin2):
    table = enumerate_classes(thin2, 5)
    by_word = {r.word: r for r in table.records}
    for rec in table.records:
        inv = by_word[canonical_necklace(invert_word(rec.word))]
        assert inv.length == pytest.approx(rec.length, abs=1e-9)
        assert inv.sign == rec.sign
        assert inv.primitive_length == pytest.approx(rec.primitive_length, abs=1e-9)


def test_min_length_bound(thin2):
    table = enumerate_classes(thin2, 4)
    shortest = min(r.length for r in table.records)
    gen_min = min(g.translation_length() for g in thin2.generators)
    assert shortest >= gen_min - 1e-12


def test_length_from_derivative_multiplier(thin2):
    table = enumerate_classes(thin2, 4)
    for rec in table.records[:60]:
        m = thin2.word_matrix(rec.word)
        _, att = m.fixed_points()
        ell = -math.log(m.derivative_at(att))
        assert ell == pytest.approx(rec.length, abs=1e-9)


def test_records_sorted_deterministically(thin2):
    table = enumerate_classes(thin2, 5)
    keys = [(r.length, word_key(r.word, 2)) for r in table.records]
    assert keys == sorted(keys)


def test_sign_follows_trace(thin2):
    table = enumerate_classes(thin2, 3)
    mixed = [r for r in table.records if r.sign < 0]
    assert mixed, "thin2 should contain negative-trace classes"
    for rec in table.records:
        tr = thin2.word_matrix(rec.word).trace
        assert rec.sign == (1 if tr >= 0 else -1)
        assert rec.length == pytest.approx(geodesic_length_from_trace(tr), abs=1e-9)


def test_capacity_budget(thin2):
    with pytest.raises(CapacityExceeded):
        enumerate_classes(thin2, 12, budget=10)
