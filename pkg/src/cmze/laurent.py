"""Sparse commutative Laurent polynomials with exact rational coefficients.

Variables are identified by integer subscripts (the moment subscripts of the
scalar theory); exponents may be negative.  Only monomial division is ever
needed, so no general polynomial quotient is provided.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Tuple

__all__ = ["LaurentPoly"]

Mono = Tuple[Tuple[int, int], ...]  # sorted ((var, exponent), ...), exponents != 0


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    acc: Dict[int, int] = dict(m1)
    for v, e in m2:
        acc[v] = acc.get(v, 0) + e
        if acc[v] == 0:
            del acc[v]
    return tuple(sorted(acc.items()))


class LaurentPoly:
    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, Fraction] | None = None):
        clean: Dict[Mono, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                key = tuple(sorted((v, e) for v, e in m if e != 0))
                clean[key] = clean.get(key, Fraction(0)) + c
                if clean[key] == 0:
                    del clean[key]
        self.terms = clean

    @staticmethod
    def zero() -> "LaurentPoly":
        return LaurentPoly()

    @staticmethod
    def const(c) -> "LaurentPoly":
        return LaurentPoly({(): Fraction(c)})

    @staticmethod
    def var(v: int, power: int = 1, coeff=1) -> "LaurentPoly":
        return LaurentPoly({((v, power),): Fraction(coeff)})

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return LaurentPoly(out)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) - c
        return LaurentPoly(out)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({m: -c for m, c in self.terms.items()})

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        out: Dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return LaurentPoly(out)

    def scale(self, c) -> "LaurentPoly":
        c = Fraction(c)
        return LaurentPoly({m: cv * c for m, cv in self.terms.items()})

    def div_mono(self, v: int, power: int, coeff=1) -> "LaurentPoly":
        """Divide by coeff * var_v^power (always exact for Laurent terms)."""
        inv = ((v, -power),) if power else ()
        c = Fraction(1, 1) / Fraction(coeff)
        return LaurentPoly(
            {_mono_mul(m, inv): cv * c for m, cv in self.terms.items()}
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def evaluate(self, values: Mapping[int, complex]) -> complex:
        total = 0j
        for m, c in self.terms.items():
            prod = complex(c)
            for v, e in m:
                prod *= values[v] ** e
            total += prod
        return total

    def evaluate_exact(self, values: Mapping[int, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            prod = c
            for v, e in m:
                base = Fraction(values[v])
                prod *= base**e
            total += prod
        return total

    def render(self, symbol: str = "g") -> str:
        if not self.terms:
            return "0"
        def mono_key(m: Mono):
            return (sum(e for _, e in m), m)
        chunks = []
        for m in sorted(self.terms, key=mono_key):
            c = self.terms[m]
            sign = "+" if c > 0 else "-"
            mag = abs(c)
            coeff = (
                f"{mag.numerator}"
                if mag.denominator == 1
                else f"{mag.numerator}/{mag.denominator}"
            )
            factors = "".join(
                f"{symbol}{v}" + (f"^{e}" if e != 1 else "") for v, e in m
            )
            chunks.append(f"{sign}{coeff}" + (f"·{factors}" if factors else ""))
        return " ".join(chunks)

    def to_jsonable(self):
        return [
            {"monomial": {str(v): e for v, e in m}, "coeff": [c.numerator, c.denominator]}
            for m, c in sorted(self.terms.items())
        ]

    def __repr__(self):
        return f"LaurentPoly({self.render()})"
