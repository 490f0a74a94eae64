"""Word algebra: products, cancellation, derivation, homomorphisms, rendering."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmze.words import (
    NCPolynomial,
    WordAlgebraError,
    letter,
    parse_word,
    poly,
    poly_from_json,
    poly_to_json,
    render_word,
    word,
)


def a(j, inv=False):
    return letter("a1inv", j, inv)


def b(j):
    return letter("b", j)


def test_concatenation_product():
    p = poly((1, word(a(1)))) * poly((1, word(a(2))))
    assert p == poly((1, word(a(1), a(2))))


def test_inverse_cancellation():
    p = poly((1, word(a(1, True)))) * poly((1, word(a(1), a(2))))
    assert p == poly((1, word(a(2))))
    q = poly((1, word(a(1)))) * poly((1, word(a(1, True))))
    assert q == NCPolynomial.one()


def test_bilinear_noncommutative_product():
    p = poly((1, word(a(1))), (1, word(a(2))))
    q = poly((1, word(a(1))), (-1, word(a(2))))
    expect = poly(
        (1, word(a(1), a(1))),
        (-1, word(a(1), a(2))),
        (1, word(a(2), a(1))),
        (-1, word(a(2), a(2))),
    )
    assert p * q == expect


def test_derive_single_letter_and_identity():
    assert poly((1, word(a(1)))).derive() == poly((1, word(a(2))))
    assert NCPolynomial.one().derive() == NCPolynomial.zero()


def test_derive_leibniz_on_word():
    p = poly((1, word(a(1), a(2))))
    assert p.derive() == poly((1, word(a(2), a(2))), (1, word(a(1), a(3))))


def test_derive_rejects_inverse_letters():
    with pytest.raises(WordAlgebraError):
        poly((1, word(a(1, True)))).derive()


def test_substitute_matrix_power():
    m = np.array([[1.0, 2.0], [0.5, -1.0]], dtype=complex)
    p = poly((1, word(a(1), a(1))))
    out = p.substitute({a(1): m})
    assert np.allclose(out, m @ m)


def test_substitute_inverse_pair_gives_identity():
    m = np.array([[2.0, 1.0], [1.0, 1.0]], dtype=complex)
    p = poly((1, word(a(1), a(1, True))))
    out = p.substitute({a(1): m, a(1, True): np.linalg.inv(m)})
    assert np.allclose(out, np.eye(2))


def test_substitute_missing_image():
    with pytest.raises(WordAlgebraError):
        poly((1, word(a(1)))).substitute({})


def test_substitute_dimension_mismatch():
    p = poly((1, word(a(1), a(2))))
    with pytest.raises(WordAlgebraError):
        p.substitute({a(1): np.eye(2, dtype=complex), a(2): np.eye(3, dtype=complex)})


def test_abelianize_kills_commutators():
    p = poly((1, word(a(1), a(2))), (-1, word(a(2), a(1))))
    assert p.abelianize() == {}


def test_zero_odd_letters_vanish():
    w = word(letter("a2inv", 1))
    assert NCPolynomial({w: 1}) == NCPolynomial.zero()
    assert NCPolynomial({word(letter("a2inv", 2)): 1})


def test_conflicting_alphabet_variants_rejected():
    with pytest.raises(WordAlgebraError):
        word(letter("a1inv", 1), letter("a2inv", 2))
    with pytest.raises(WordAlgebraError):
        poly((1, word(letter("a", 2)))) * poly((1, word(letter("a1inv", 1))))


def test_grade_and_length():
    w = word(a(1), a(2), a(4), a(4))
    assert w.length == 4
    assert w.grade == 11
    assert word(a(1, True)).grade == -1


# -- property tests ---------------------------------------------------------

_letters = st.builds(a, st.integers(min_value=1, max_value=3))
_words = st.lists(_letters, min_size=0, max_size=3).map(lambda ls: word(*ls))
_polys = st.lists(
    st.tuples(st.integers(-3, 3).filter(bool), _words), min_size=1, max_size=4
).map(lambda pairs: poly(*pairs))


@settings(max_examples=60, deadline=None)
@given(_polys, _polys, _polys)
def test_associativity(p, q, r):
    assert (p * q) * r == p * (q * r)


@settings(max_examples=60, deadline=None)
@given(_polys, _polys)
def test_leibniz(p, q):
    assert (p * q).derive() == p.derive() * q + p * q.derive()


@settings(max_examples=60, deadline=None)
@given(_polys)
def test_derive_shifts_grade_by_one(p):
    grades = {w.grade for w in p.terms}
    for w in p.derive().terms:
        assert w.grade - 1 in grades


@settings(max_examples=40, deadline=None)
@given(_polys, _polys)
def test_substitute_polynomial_homomorphism(p, q):
    images = {
        a(j): poly((1, word(b(j), b(1)))) if j > 1 else poly((2, word(b(1))))
        for j in (1, 2, 3)
    }
    lhs = (p * q).substitute(images)
    rhs = p.substitute(images) * q.substitute(images)
    assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(_polys, _polys)
def test_substitute_matrix_homomorphism(p, q):
    rng = np.random.default_rng(7)
    images = {a(j): rng.normal(size=(3, 3)) + 0j for j in (1, 2, 3)}
    lhs = (p * q).substitute(images)
    rhs = p.substitute(images) @ q.substitute(images)
    assert np.linalg.norm(lhs - rhs) < 1e-12 * max(1.0, np.linalg.norm(lhs))


# -- rendering --------------------------------------------------------------

def test_render_and_parse_word():
    w = word(a(1), a(1, True), a(2))  # cancels to a2
    assert render_word(w) == "a2"
    w2 = word(a(2), a(1, True))
    assert render_word(w2) == "a2a1^-1"
    assert parse_word("a2a1^-1", ["a1inv", "b"]) == w2


def test_render_sorted_by_grade_length_lex():
    p = poly((1, word(a(2))), (1, word(a(1), a(1))), (Fraction(3, 2), word(a(1))))
    assert p.render() == "+3/2·a1 +1·a2 +1·a1a1"


def test_json_round_trip():
    p = poly(
        (Fraction(-1, 3), word(b(2), a(1, True))),
        (2, word(a(1), a(2))),
    )
    text = poly_to_json(p, ["a1inv", "b"])
    assert poly_from_json(text) == p


def test_identity_word_renders_I():
    assert render_word(word()) == "I"
    assert parse_word("I", ["a1inv"]) == word()
