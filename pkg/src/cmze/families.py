"""The five graded polynomial families, each built by two independent routes.

Commutative polynomials are represented as dictionaries mapping sorted index
multisets to exact rational coefficients, e.g. ``x_1^2 x_2`` is the key
``(1, 1, 2)``.  Noncommutative families return `NCPolynomial` values over a
configurable alphabet.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction
from typing import Dict, Iterator, List, Sequence, Tuple

from .words import NCPolynomial, Word, letter

__all__ = [
    "OrderLimitError",
    "max_order",
    "compositions",
    "multinomial",
    "kappa",
    "bell_commutative",
    "bell_commutative_recurrence",
    "bell_partial_commutative",
    "nc_bell_type1",
    "nc_bell_type1_partial",
    "nc_bell_type1_recurrence",
    "nc_bell_type2",
    "nc_bell_type2_partial",
    "nc_bell_type2_recurrence",
    "nc_bipartition",
    "nc_bipartition_partial",
    "nc_bipartition_recurrence",
    "bipartition_commutative",
    "bipartition_partial_commutative",
    "bipartition_commutative_recurrence",
    "family_polynomial",
    "CPoly",
]

DEFAULT_MAX_ORDER = 12

#: Commutative polynomial: sorted index multiset -> coefficient.
CPoly = Dict[Tuple[int, ...], Fraction]


class OrderLimitError(ValueError):
    """Requested order is negative or exceeds the configured cap."""


def max_order() -> int:
    raw = os.environ.get("CMZE_MAX_ORDER")
    if raw is None:
        return DEFAULT_MAX_ORDER
    return int(raw)


def _check_order(n: int, k: int = 0) -> None:
    if n < 0:
        raise OrderLimitError(f"order must be nonnegative, got {n}")
    if n > max_order():
        raise OrderLimitError(
            f"order {n} exceeds the cap {max_order()} (set CMZE_MAX_ORDER to raise it)"
        )
    if not 0 <= k <= max(n, 1):
        raise OrderLimitError(f"partial index k={k} outside 0..{n}")


def compositions(n: int, k: int | None = None) -> List[Tuple[int, ...]]:
    """Ordered positive compositions of ``n`` (into exactly ``k`` parts if given).

    Returned in colexicographic order so that serialization is reproducible.
    """
    if n == 0:
        return [()] if k in (None, 0) else []
    if k == 0:
        return []
    out: List[Tuple[int, ...]] = []

    def rec(rest: int, prefix: Tuple[int, ...]):
        if rest == 0:
            if k is None or len(prefix) == k:
                out.append(prefix)
            return
        if k is not None and len(prefix) >= k:
            return
        for part in range(1, rest + 1):
            rec(rest - part, prefix + (part,))

    rec(n, ())
    out.sort(key=lambda c: tuple(reversed(c)))
    return out


def multinomial(comp: Sequence[int]) -> int:
    """n!/(j_1! ... j_k!) for the composition (j_1, ..., j_k)."""
    if not comp:
        raise ValueError("empty composition")
    n = sum(comp)
    val = math.factorial(n)
    for j in comp:
        if j < 1:
            raise ValueError("composition parts must be positive")
        val //= math.factorial(j)
    return val


def kappa(comp: Sequence[int]) -> Fraction:
    """(j_1 j_2 ... j_k) / (j_1 (j_1+j_2) ... (j_1+...+j_k)); sums to 1 over S_k."""
    if not comp:
        raise ValueError("empty composition")
    num = 1
    den = 1
    run = 0
    for j in comp:
        if j < 1:
            raise ValueError("composition parts must be positive")
        num *= j
        run += j
        den *= run
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# commutative Bell polynomials
# ---------------------------------------------------------------------------

def _j_sequences(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """All (j_1..j_{n-k+1}) with sum j = k and sum i*j_i = n."""
    top = n - k + 1

    def rec(i: int, left_count: int, left_weight: int, prefix: Tuple[int, ...]):
        if i > top:
            if left_count == 0 and left_weight == 0:
                yield prefix
            return
        max_j = min(left_count, left_weight // i)
        for j in range(max_j + 1):
            yield from rec(i + 1, left_count - j, left_weight - i * j, prefix + (j,))

    yield from rec(1, k, n, ())


def bell_partial_commutative(n: int, k: int) -> CPoly:
    """Partial Bell polynomial B_{n,k} in x_1..x_{n-k+1}."""
    _check_order(n, k)
    if n == 0 and k == 0:
        return {(): Fraction(1)}
    out: CPoly = {}
    for js in _j_sequences(n, k):
        coeff = Fraction(math.factorial(n))
        mono: List[int] = []
        for i, j in enumerate(js, start=1):
            if j == 0:
                continue
            coeff /= math.factorial(j) * math.factorial(i) ** j
            mono.extend([i] * j)
        key = tuple(sorted(mono))
        out[key] = out.get(key, Fraction(0)) + coeff
    return out


def bell_commutative(n: int) -> CPoly:
    """Complete Bell polynomial B_n = sum_k B_{n,k}; B_0 = 1."""
    _check_order(n)
    if n == 0:
        return {(): Fraction(1)}
    out: CPoly = {}
    for k in range(1, n + 1):
        for mono, c in bell_partial_commutative(n, k).items():
            out[mono] = out.get(mono, Fraction(0)) + c
    return out


def bell_commutative_recurrence(n: int) -> CPoly:
    """Second route: B_{m+1} = sum_k C(m,k) B_{m-k} x_{k+1}."""
    _check_order(n)
    seq: List[CPoly] = [{(): Fraction(1)}]
    for m in range(n):
        nxt: CPoly = {}
        for k in range(m + 1):
            binom = math.comb(m, k)
            for mono, c in seq[m - k].items():
                key = tuple(sorted(mono + (k + 1,)))
                nxt[key] = nxt.get(key, Fraction(0)) + c * binom
        seq.append(nxt)
    return seq[n]


# ---------------------------------------------------------------------------
# noncommutative families (closed forms over compositions)
# ---------------------------------------------------------------------------

def _word_of(comp: Sequence[int], alphabet: str) -> Word:
    return Word(tuple(letter(alphabet, j) for j in comp))


def _closed_form(n: int, k: int, alphabet: str, weight) -> NCPolynomial:
    if n == 0 and k == 0:
        return NCPolynomial.one()
    if k == 0:
        return NCPolynomial.zero()
    acc = {}
    for comp in compositions(n, k):
        acc[_word_of(comp, alphabet)] = weight(comp)
    return NCPolynomial(acc)


def nc_bell_type1_partial(n: int, k: int, alphabet: str = "a") -> NCPolynomial:
    _check_order(n, k)
    return _closed_form(n, k, alphabet, lambda c: kappa(c) * multinomial(c))


def nc_bell_type1(n: int, alphabet: str = "a") -> NCPolynomial:
    _check_order(n)
    if n == 0:
        return NCPolynomial.one()
    acc = NCPolynomial.zero()
    for k in range(1, n + 1):
        acc = acc + nc_bell_type1_partial(n, k, alphabet)
    return acc


def nc_bell_type1_recurrence(n: int, alphabet: str = "a") -> NCPolynomial:
    """Second route: repeated application of (a_1 + derivation)."""
    _check_order(n)
    a1 = NCPolynomial.from_word(_word_of((1,), alphabet))
    p = NCPolynomial.one()
    for _ in range(n):
        p = a1 * p + p.derive()
    return p


def nc_bell_type2_partial(n: int, k: int, alphabet: str = "a") -> NCPolynomial:
    _check_order(n, k)
    return _closed_form(
        n, k, alphabet, lambda c: Fraction(multinomial(c), math.factorial(len(c)))
    )


def nc_bell_type2(n: int, alphabet: str = "a") -> NCPolynomial:
    _check_order(n)
    if n == 0:
        return NCPolynomial.one()
    acc = NCPolynomial.zero()
    for k in range(1, n + 1):
        acc = acc + nc_bell_type2_partial(n, k, alphabet)
    return acc


def nc_bell_type2_recurrence(n: int, k: int, alphabet: str = "a") -> NCPolynomial:
    """Second route: peel the last letter, B^_{n,k} = (1/k) sum_j C(n,j) B^_{n-j,k-1} a_j."""
    _check_order(n, k)
    if k == 0:
        return NCPolynomial.one() if n == 0 else NCPolynomial.zero()
    acc = NCPolynomial.zero()
    for j in range(1, n - k + 2):
        prev = nc_bell_type2_recurrence(n - j, k - 1, alphabet)
        tail = NCPolynomial.from_word(_word_of((j,), alphabet))
        acc = acc + (prev * tail).scale(Fraction(math.comb(n, j), k))
    return acc


def nc_bipartition_partial(n: int, k: int, alphabet: str = "b") -> NCPolynomial:
    _check_order(n, k)
    sign = Fraction((-1) ** (k + 1))
    return _closed_form(n, k, alphabet, lambda c: sign)


def nc_bipartition(n: int, alphabet: str = "b") -> NCPolynomial:
    _check_order(n)
    if n == 0:
        return NCPolynomial.one()
    acc = NCPolynomial.zero()
    for k in range(1, n + 1):
        acc = acc + nc_bipartition_partial(n, k, alphabet)
    return acc


def nc_bipartition_recurrence(n: int, alphabet: str = "b") -> NCPolynomial:
    """Second route: P~_n = sum_{k<n} (-1)^{delta_{k0}+1} b_{n-k} P~_k."""
    _check_order(n)
    seq: List[NCPolynomial] = [NCPolynomial.one()]
    for m in range(1, n + 1):
        acc = NCPolynomial.zero()
        for k in range(m):
            head = NCPolynomial.from_word(_word_of((m - k,), alphabet))
            term = head * seq[k]
            acc = acc + (term if k == 0 else -term)
        seq.append(acc)
    return seq[n]


def bipartition_partial_commutative(n: int, k: int) -> CPoly:
    """Commutative collapse of the bipartition partial polynomial."""
    _check_order(n, k)
    if n == 0 and k == 0:
        return {(): Fraction(1)}
    out: CPoly = {}
    sign = Fraction((-1) ** (k + 1))
    for comp in compositions(n, k):
        key = tuple(sorted(comp))
        out[key] = out.get(key, Fraction(0)) + sign
    return {key: c for key, c in out.items() if c != 0}


def bipartition_commutative(n: int) -> CPoly:
    _check_order(n)
    if n == 0:
        return {(): Fraction(1)}
    out: CPoly = {}
    for k in range(1, n + 1):
        for mono, c in bipartition_partial_commutative(n, k).items():
            out[mono] = out.get(mono, Fraction(0)) + c
    return {key: c for key, c in out.items() if c != 0}


def bipartition_commutative_recurrence(n: int) -> CPoly:
    """Second route: P_n = b_n - sum_{k=1}^{n-1} b_k P_{n-k}."""
    _check_order(n)
    seq: List[CPoly] = [{(): Fraction(1)}]
    for m in range(1, n + 1):
        acc: CPoly = {(m,): Fraction(1)}
        for k in range(1, m):
            for mono, c in seq[m - k].items():
                key = tuple(sorted(mono + (k,)))
                acc[key] = acc.get(key, Fraction(0)) - c
        seq.append({key: c for key, c in acc.items() if c != 0})
    return seq[n]


_FAMILIES = {
    "ncbell1": nc_bell_type1,
    "ncbell2": nc_bell_type2,
    "bipart": nc_bipartition,
}

_PARTIALS = {
    "ncbell1": nc_bell_type1_partial,
    "ncbell2": nc_bell_type2_partial,
    "bipart": nc_bipartition_partial,
}


def family_polynomial(
    kind: str, n: int, k: int = -1, alphabet: str = "a"
) -> NCPolynomial:
    """Uniform access to the noncommutative families by name."""
    if kind not in _FAMILIES:
        raise ValueError(f"unknown family {kind!r}; choose from {sorted(_FAMILIES)}")
    if k < 0:
        return _FAMILIES[kind](n, alphabet)
    return _PARTIALS[kind](n, k, alphabet)
