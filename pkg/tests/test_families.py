"""Polynomial families: published fixtures, dual routes, combinatorial oracles."""

import itertools
import math
from fractions import Fraction

import pytest

from cmze.families import (
    OrderLimitError,
    bell_commutative,
    bell_commutative_recurrence,
    bell_partial_commutative,
    bipartition_commutative,
    bipartition_commutative_recurrence,
    compositions,
    kappa,
    multinomial,
    nc_bell_type1,
    nc_bell_type1_partial,
    nc_bell_type1_recurrence,
    nc_bell_type2,
    nc_bell_type2_partial,
    nc_bell_type2_recurrence,
    nc_bipartition,
    nc_bipartition_recurrence,
)
from cmze.words import NCPolynomial, letter, parse_word, word


def P(text):
    return parse_word(text, ["a", "b"])


def coeff(p, text):
    return p.coefficient(P(text))


# -- commutative Bell -------------------------------------------------------

def test_bell_published_list():
    assert bell_commutative(0) == {(): Fraction(1)}
    assert bell_commutative(1) == {(1,): Fraction(1)}
    assert bell_commutative(2) == {(1, 1): Fraction(1), (2,): Fraction(1)}
    assert bell_commutative(3) == {
        (1, 1, 1): Fraction(1),
        (1, 2): Fraction(3),
        (3,): Fraction(1),
    }
    assert bell_commutative(4) == {
        (1, 1, 1, 1): Fraction(1),
        (1, 1, 2): Fraction(6),
        (1, 3): Fraction(4),
        (2, 2): Fraction(3),
        (4,): Fraction(1),
    }


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        yield [[first]] + part


def test_partial_bell_against_set_partition_oracle():
    # B_{n,k} = sum over partitions of {1..n} into k blocks of prod x_{|block|}
    for n in range(1, 7):
        for k in range(1, n + 1):
            expected = {}
            for part in _set_partitions(list(range(n))):
                if len(part) != k:
                    continue
                mono = tuple(sorted(len(bl) for bl in part))
                expected[mono] = expected.get(mono, Fraction(0)) + 1
            assert bell_partial_commutative(n, k) == expected, (n, k)


def test_bell_3_2_fixture():
    assert bell_partial_commutative(3, 2) == {(1, 2): Fraction(3)}


def test_bell_routes_agree():
    for n in range(11):
        assert bell_commutative(n) == bell_commutative_recurrence(n)


# -- noncommutative Bell, type I ---------------------------------------------

def test_type1_published_values():
    b3 = nc_bell_type1(3)
    assert b3 == NCPolynomial(
        {
            P("a1a1a1"): 1,
            P("a1a2"): 2,
            P("a2a1"): 1,
            P("a3"): 1,
        }
    )
    b4 = nc_bell_type1(4)
    assert coeff(b4, "a1a1a2") == 3
    assert coeff(b4, "a2a1a1") == 1
    assert coeff(b4, "a1a2a1") == 2
    assert coeff(b4, "a2a2") == 3
    assert coeff(b4, "a1a3") == 3
    assert coeff(b4, "a3a1") == 1


def test_type1_bell_number_census():
    # all letters -> 1 turns B~_n into the n-th Bell number
    for n in range(1, 8):
        total = sum(nc_bell_type1(n).terms.values())
        bell_number = sum(1 for _ in _set_partitions(list(range(n))))
        assert total == bell_number


def test_type1_binomial_recurrence():
    # B~_{n+1} = sum_k C(n,k) B~_k a_{n-k+1}
    for n in range(7):
        acc = NCPolynomial.zero()
        for k in range(n + 1):
            tail = NCPolynomial.from_word(word(letter("a", n - k + 1)))
            acc = acc + (nc_bell_type1(k) * tail).scale(math.comb(n, k))
        assert acc == nc_bell_type1(n + 1)


# -- type II ------------------------------------------------------------------

def test_type2_published_values():
    b3 = nc_bell_type2(3)
    assert coeff(b3, "a1a2") == Fraction(3, 2)
    assert coeff(b3, "a2a1") == Fraction(3, 2)
    assert coeff(b3, "a1a1a1") == 1
    assert coeff(b3, "a3") == 1
    assert nc_bell_type2(1) == NCPolynomial({P("a1"): 1})
    b4 = nc_bell_type2(4)
    assert coeff(b4, "a2a2") == 3
    assert coeff(b4, "a1a3") == 2
    assert coeff(b4, "a3a1") == 2
    assert coeff(b4, "a2a1a1") == 2


# -- bipartition ---------------------------------------------------------------

def test_bipartition_published_values():
    p3 = nc_bipartition(3)
    assert p3 == NCPolynomial(
        {
            parse_word("b1b1b1", ["b"]): 1,
            parse_word("b1b2", ["b"]): -1,
            parse_word("b2b1", ["b"]): -1,
            parse_word("b3", ["b"]): 1,
        }
    )
    p4 = nc_bipartition(4)
    assert p4.coefficient(parse_word("b1b2b1", ["b"])) == 1
    assert p4.coefficient(parse_word("b2b2", ["b"])) == -1
    assert p4.coefficient(parse_word("b1b1b1b1", ["b"])) == -1


def test_bipartition_all_ones_telescopes_to_zero():
    ones = {letter("b", j): NCPolynomial.one() for j in range(1, 7)}
    for n in range(2, 7):
        assert nc_bipartition(n).substitute(ones) == NCPolynomial.zero()


def test_commutative_bipartition_published_values():
    assert bipartition_commutative(3) == {
        (1, 1, 1): Fraction(1),
        (1, 2): Fraction(-2),
        (3,): Fraction(1),
    }
    assert bipartition_commutative(4) == {
        (1, 1, 1, 1): Fraction(-1),
        (1, 1, 2): Fraction(3),
        (1, 3): Fraction(-2),
        (2, 2): Fraction(-1),
        (4,): Fraction(1),
    }


# -- route equivalence and structure -------------------------------------------

@pytest.mark.parametrize("n", range(11))
def test_noncommutative_routes_agree(n):
    assert nc_bell_type1(n) == nc_bell_type1_recurrence(n)
    assert nc_bipartition(n) == nc_bipartition_recurrence(n)
    for k in range(n + 1):
        assert nc_bell_type2_partial(n, k) == nc_bell_type2_recurrence(n, k)
    assert bipartition_commutative(n) == bipartition_commutative_recurrence(n)


@pytest.mark.parametrize("n", range(1, 11))
def test_abelianization_collapses(n):
    def as_cpoly(p):
        return {
            tuple(l[1] for l in mono): c for mono, c in p.abelianize().items()
        }

    assert as_cpoly(nc_bell_type1(n)) == bell_commutative(n)
    assert as_cpoly(nc_bell_type2(n)) == bell_commutative(n)
    assert as_cpoly(nc_bipartition(n, alphabet="b")) == {
        m: c for m, c in bipartition_commutative(n).items()
    }


@pytest.mark.parametrize("n", range(1, 9))
def test_word_census(n):
    # 2^{n-1} words, shared across the three families, all nonzero
    w1 = set(nc_bell_type1(n).terms)
    w2 = set(nc_bell_type2(n).terms)
    assert len(w1) == 2 ** (n - 1)
    assert w1 == w2
    wp = {tuple(l.index for l in w) for w in nc_bipartition(n).terms}
    assert wp == {tuple(l.index for l in w) for w in w1}


def test_partial_grading_by_length():
    for n in range(1, 8):
        for k in range(1, n + 1):
            part = nc_bell_type1_partial(n, k)
            assert all(len(w) == k and w.grade == n for w in part.terms)


# -- coefficients --------------------------------------------------------------

def test_kappa_values():
    assert kappa((1, 2)) == Fraction(2, 3)
    assert kappa((2, 1)) == Fraction(1, 3)
    assert kappa((1, 2)) + kappa((2, 1)) == 1


def test_multinomial_value():
    assert multinomial((1, 1, 2)) == 12


@pytest.mark.parametrize("n", range(1, 9))
def test_kappa_partition_of_unity(n):
    # the sum runs over the whole symmetric group, repeats included
    for comp in compositions(n):
        assert sum(kappa(p) for p in itertools.permutations(comp)) == 1


def test_compositions_colex_deterministic():
    assert compositions(4, 2) == [(3, 1), (2, 2), (1, 3)]
    assert compositions(3) == [(1, 1, 1), (2, 1), (1, 2), (3,)]


def test_kappa_multinomial_reject_bad_input():
    with pytest.raises(ValueError):
        kappa(())
    with pytest.raises(ValueError):
        multinomial(())


def test_order_guards():
    with pytest.raises(OrderLimitError):
        bell_commutative(-1)
    with pytest.raises(OrderLimitError):
        nc_bell_type1(13)


def test_order_cap_override(monkeypatch):
    monkeypatch.setenv("CMZE_MAX_ORDER", "14")
    assert nc_bell_type1(13)


# -- Faa di Bruno cross-check ---------------------------------------------------

def _compose_series(g, h, order):
    """Coefficients of g(h(t)) with h(0) = 0; inputs are derivative lists."""
    hp = [h[n] / Fraction(math.factorial(n)) for n in range(order + 1)]
    powers = [[Fraction(1)] + [Fraction(0)] * order]
    for _ in range(order):
        prev = powers[-1]
        nxt = [Fraction(0)] * (order + 1)
        for i, ci in enumerate(prev):
            if ci == 0:
                continue
            for j in range(1, order + 1 - i):
                nxt[i + j] += ci * hp[j]
        powers.append(nxt)
    out = [Fraction(0)] * (order + 1)
    for k in range(order + 1):
        gk = g[k] / Fraction(math.factorial(k))
        for idx in range(order + 1):
            out[idx] += gk * powers[k][idx]
    return [out[n] * math.factorial(n) for n in range(order + 1)]


def test_faa_di_bruno_cross_check():
    import random

    rnd = random.Random(11)
    order = 8
    for _ in range(3):
        g = [Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(order + 1)]
        h = [Fraction(0)] + [
            Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(order)
        ]
        composed = _compose_series(g, h, order)
        for n in range(1, order + 1):
            acc = Fraction(0)
            for k in range(1, n + 1):
                bell = bell_partial_commutative(n, k)
                val = Fraction(0)
                for mono, c in bell.items():
                    term = c
                    for i in mono:
                        term *= h[i]
                    val += term
                acc += g[k] * val
            assert acc == composed[n], n
