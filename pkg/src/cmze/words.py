"""Exact arithmetic in free associative word algebras over graded alphabets.

Words are ordered strings of letters drawn from one or more alphabets.  Each
alphabet may designate one letter index as invertible; the corresponding
inverse letters cancel eagerly against their partners so that equality of
polynomials reduces to dictionary equality.  Coefficients are exact rationals
(`fractions.Fraction`); nothing in this module touches floating point except
`substitute` with matrix images.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "WordAlgebraError",
    "AlphabetSpec",
    "Letter",
    "Word",
    "NCPolynomial",
    "ALPHABETS",
    "letter",
    "word",
    "poly",
    "one",
    "zero",
    "render_word",
    "parse_word",
    "poly_to_json",
    "poly_from_json",
]


class WordAlgebraError(ValueError):
    """Raised for malformed letters, words, or incompatible operands."""


@dataclass(frozen=True)
class AlphabetSpec:
    """Static description of one alphabet.

    ``invertible_index`` is 0 when no letter has an inverse, otherwise the
    grade (1 or 2) of the single letter that does.  ``zero_odd`` marks
    alphabets whose odd-graded letters are identically zero, in which case
    only index 2 may be invertible.  ``graded`` distinguishes the indexed
    families from singleton marker letters (grade 0, index fixed to 1).
    """

    name: str
    invertible_index: int = 0
    zero_odd: bool = False
    graded: bool = True
    render: str = "{name}{j}"

    def __post_init__(self):
        if self.invertible_index not in (0, 1, 2):
            raise WordAlgebraError(
                f"invertible_index must be 0, 1 or 2, got {self.invertible_index}"
            )
        if self.zero_odd and self.invertible_index not in (0, 2):
            raise WordAlgebraError("zero-odd alphabets may only invert index 2")

    def render_letter(self, index: int, inverse: bool) -> str:
        if not self.graded:
            return self.name
        base = self.render.format(name=self.name, j=index)
        if not inverse:
            return base
        if self.name in ("m", "PB") and index == 1:
            return "INV"
        if self.name == "m" and index == 2:
            return "INV2"
        return base + "^-1"


#: Alphabets used throughout the package.  "a" and "b" are the generic graded
#: alphabets; "m" holds projected-generator moment letters (rendered PL{j}P);
#: "QL" and "PB" are the orthogonal-derivative and projected-series alphabets
#: of the time-dependent expansion; "Ls"/"Lt" are the singleton markers for
#: the two time-carrying letters.
ALPHABETS: Dict[str, AlphabetSpec] = {
    "a": AlphabetSpec("a"),
    "a1inv": AlphabetSpec("a", invertible_index=1),
    "a2inv": AlphabetSpec("a", invertible_index=2, zero_odd=True),
    "b": AlphabetSpec("b"),
    "b_even": AlphabetSpec("b", zero_odd=True),
    "m": AlphabetSpec("m", invertible_index=1, render="PL{j}P"),
    "m_even": AlphabetSpec(
        "m", invertible_index=2, zero_odd=True, render="PL{j}P"
    ),
    "QL": AlphabetSpec("QL", render="QL{j}"),
    "PB": AlphabetSpec("PB", invertible_index=1, render="PB{j}"),
    "Ls": AlphabetSpec("PLs", graded=False),
    "Lt": AlphabetSpec("QLt", graded=False),
}


@dataclass(frozen=True, order=True)
class Letter:
    """One alphabet symbol; ``inverse`` only on the designated index.

    ``alphabet`` stores the registry key (e.g. "a1inv"), not the display name.
    """

    alphabet: str
    index: int
    inverse: bool = False


def letter(alphabet: str, index: int = 1, inverse: bool = False) -> Letter:
    """Validated `Letter` constructor; ``alphabet`` is a registry key."""
    spec = ALPHABETS.get(alphabet)
    if spec is None:
        raise WordAlgebraError(f"unknown alphabet {alphabet!r}")
    if spec.graded and index < 1:
        raise WordAlgebraError("letter index must be >= 1")
    if not spec.graded and index != 1:
        raise WordAlgebraError(f"alphabet {alphabet!r} has a single letter")
    if inverse and index != spec.invertible_index:
        raise WordAlgebraError(
            f"alphabet {alphabet!r} has no inverse for index {index}"
        )
    return Letter(alphabet, index, inverse)


def _spec(l: Letter) -> AlphabetSpec:
    return ALPHABETS[l.alphabet]


def letter_grade(l: Letter) -> int:
    spec = _spec(l)
    if not spec.graded:
        return 0
    return -l.index if l.inverse else l.index


class Word(tuple):
    """Canonical (inverse-cancelled) sequence of letters.

    The empty word is the algebra identity.  Words over zero-odd alphabets
    that contain an odd letter collapse to the zero element, signalled by the
    sentinel ``Word.ZERO``.
    """

    ZERO: "Word" = None  # set below

    def __new__(cls, letters: Iterable[Letter] = ()):
        seq = list(letters)
        names: Dict[str, str] = {}
        for l in seq:
            spec = _spec(l)
            prev = names.setdefault(spec.name, l.alphabet)
            if prev != l.alphabet:
                raise WordAlgebraError(
                    f"conflicting alphabet variants in one word: {prev!r} vs {l.alphabet!r}"
                )
            if spec.zero_odd and spec.graded and l.index % 2 == 1 and not l.inverse:
                return Word.ZERO if Word.ZERO is not None else tuple.__new__(cls, ())
        # eager cancellation of adjacent inverse pairs
        out: list = []
        for l in seq:
            if out:
                p = out[-1]
                if (
                    p.alphabet == l.alphabet
                    and p.index == l.index
                    and p.inverse != l.inverse
                ):
                    out.pop()
                    continue
            out.append(l)
        return tuple.__new__(cls, out)

    @property
    def grade(self) -> int:
        return sum(letter_grade(l) for l in self)

    @property
    def length(self) -> int:
        return len(self)

    def __mul__(self, other: "Word") -> "Word":
        if self is Word.ZERO or other is Word.ZERO:
            return Word.ZERO
        return Word(tuple.__add__(self, other))


Word.ZERO = tuple.__new__(Word, (object(),))  # unique non-iterable-safe sentinel


def word(*letters: Letter) -> Word:
    return Word(letters)


_Coeff = Union[int, Fraction]


class NCPolynomial:
    """Formal rational-linear combination of words."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[Word, _Coeff]] = None):
        clean: Dict[Word, Fraction] = {}
        if terms:
            for w, c in terms.items():
                if w is Word.ZERO:
                    continue
                c = Fraction(c)
                if c == 0:
                    continue
                if not isinstance(w, Word):
                    w = Word(w)
                    if w is Word.ZERO:
                        continue
                clean[w] = clean.get(w, Fraction(0)) + c
                if clean[w] == 0:
                    del clean[w]
        self.terms = clean

    # -- constructors -------------------------------------------------
    @staticmethod
    def from_word(w: Word, c: _Coeff = 1) -> "NCPolynomial":
        return NCPolynomial({w: Fraction(c)})

    @staticmethod
    def one() -> "NCPolynomial":
        return NCPolynomial({Word(): Fraction(1)})

    @staticmethod
    def zero() -> "NCPolynomial":
        return NCPolynomial()

    # -- ring operations ----------------------------------------------
    def __add__(self, other: "NCPolynomial") -> "NCPolynomial":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) + c
        return NCPolynomial(out)

    def __sub__(self, other: "NCPolynomial") -> "NCPolynomial":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) - c
        return NCPolynomial(out)

    def __neg__(self) -> "NCPolynomial":
        return NCPolynomial({w: -c for w, c in self.terms.items()})

    def scale(self, c: _Coeff) -> "NCPolynomial":
        c = Fraction(c)
        return NCPolynomial({w: cv * c for w, cv in self.terms.items()})

    def __mul__(self, other: "NCPolynomial") -> "NCPolynomial":
        out: Dict[Word, Fraction] = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 * w2
                if w is Word.ZERO:
                    continue
                out[w] = out.get(w, Fraction(0)) + c1 * c2
        return NCPolynomial(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, NCPolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- structure ------------------------------------------------------
    def coefficient(self, w: Word) -> Fraction:
        return self.terms.get(w, Fraction(0))

    def words(self) -> Sequence[Word]:
        return list(self.terms)

    def max_grade(self) -> int:
        return max((w.grade for w in self.terms), default=0)

    def has_inverse_letters(self) -> bool:
        return any(l.inverse for w in self.terms for l in w)

    def graded_part(self, n: int) -> "NCPolynomial":
        return NCPolynomial({w: c for w, c in self.terms.items() if w.grade == n})

    def length_part(self, k: int) -> "NCPolynomial":
        return NCPolynomial({w: c for w, c in self.terms.items() if len(w) == k})

    # -- derivation -----------------------------------------------------
    def derive(self) -> "NCPolynomial":
        """Graded derivation: each letter index is raised by one, Leibniz-wise."""
        out: Dict[Word, Fraction] = {}
        for w, c in self.terms.items():
            for i, l in enumerate(w):
                if l.inverse:
                    raise WordAlgebraError("derivation is undefined on inverse letters")
                if not _spec(l).graded:
                    raise WordAlgebraError(
                        "derivation is undefined on time-marker letters"
                    )
                nw = Word(w[:i] + (letter(l.alphabet, l.index + 1),) + w[i + 1 :])
                if nw is Word.ZERO:
                    continue
                out[nw] = out.get(nw, Fraction(0)) + c
        return NCPolynomial(out)

    # -- homomorphisms ----------------------------------------------------
    def substitute(self, images: Mapping[Letter, object]):
        """Extend a letter map multiplicatively; unital.

        Images may all be `NCPolynomial` (result is an `NCPolynomial`) or all
        square `numpy` matrices of one dimension (result is a matrix, with the
        identity word mapping to the identity matrix).
        """
        matrix_mode = None
        dim = None
        for img in images.values():
            is_mat = isinstance(img, np.ndarray)
            if matrix_mode is None:
                matrix_mode = is_mat
            elif matrix_mode != is_mat:
                raise WordAlgebraError("mixed polynomial and matrix images")
            if is_mat:
                if img.ndim != 2 or img.shape[0] != img.shape[1]:
                    raise WordAlgebraError("matrix images must be square")
                if dim is None:
                    dim = img.shape[0]
                elif dim != img.shape[0]:
                    raise WordAlgebraError("matrix images must share one dimension")
        if not self.terms:
            if matrix_mode:
                return np.zeros((dim, dim), dtype=complex)
            return NCPolynomial.zero()
        if matrix_mode:
            acc = np.zeros((dim, dim), dtype=complex)
            for w, c in self.terms.items():
                m = np.eye(dim, dtype=complex)
                for l in w:
                    if l not in images:
                        raise WordAlgebraError(f"no image for letter {render_letter(l)}")
                    m = m @ images[l]
                acc += complex(c) * m
            return acc
        acc_p = NCPolynomial.zero()
        for w, c in self.terms.items():
            m_p = NCPolynomial.one()
            for l in w:
                if l not in images:
                    raise WordAlgebraError(f"no image for letter {render_letter(l)}")
                m_p = m_p * images[l]
            acc_p = acc_p + m_p.scale(c)
        return acc_p

    def abelianize(self) -> Dict[tuple, Fraction]:
        """Collapse to a commutative polynomial keyed by sorted letter multisets."""
        out: Dict[tuple, Fraction] = {}
        for w, c in self.terms.items():
            key = tuple(sorted((l.alphabet, l.index, l.inverse) for l in w))
            out[key] = out.get(key, Fraction(0)) + c
            if out[key] == 0:
                del out[key]
        return out

    # -- rendering --------------------------------------------------------
    def render(self) -> str:
        if not self.terms:
            return "0"
        keys = sorted(self.terms, key=_word_sort_key)
        chunks = []
        for w in keys:
            c = self.terms[w]
            sign = "+" if c > 0 else "-"
            mag = abs(c)
            coeff = f"{mag.numerator}" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            chunks.append(f"{sign}{coeff}·{render_word(w)}")
        return " ".join(chunks)

    def __repr__(self):
        return f"NCPolynomial({self.render()})"


def one() -> NCPolynomial:
    return NCPolynomial.one()


def zero() -> NCPolynomial:
    return NCPolynomial.zero()


def poly(*pairs: Tuple[_Coeff, Word]) -> NCPolynomial:
    acc: Dict[Word, Fraction] = {}
    for c, w in pairs:
        acc[w] = acc.get(w, Fraction(0)) + Fraction(c)
    return NCPolynomial(acc)


def render_letter(l: Letter) -> str:
    return _spec(l).render_letter(l.index, l.inverse)


def render_word(w: Word) -> str:
    if len(w) == 0:
        return "I"
    return "".join(render_letter(l) for l in w)


def _word_sort_key(w: Word):
    return (w.grade, len(w), tuple(render_letter(l) for l in w))


# Token patterns tried in order; INV aliases are resolved against the
# alphabets present in the enclosing registry.
_TOKEN_RE = re.compile(
    r"INV2|INV|PLs|QLt|PL(\d+)P(\^-1)?|QL(\d+)|PB(\d+)(\^-1)?|a(\d+)(\^-1)?|b(\d+)(\^-1)?"
)


def parse_word(text: str, registry: Sequence[str] = ("a1inv", "b")) -> Word:
    """Parse the canonical space-free rendering of a word.

    ``registry`` lists alphabet keys in scope; it decides which concrete
    alphabet plain ``a``/``b``/``m`` tokens belong to (e.g. ``a1inv`` versus
    ``a2inv``) and what ``INV`` abbreviates.
    """
    by_name: Dict[str, str] = {}
    for key in registry:
        by_name[ALPHABETS[key].name] = key
    if text == "I":
        return Word()
    letters = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise WordAlgebraError(f"cannot tokenize {text[pos:]!r}")
        tok = m.group(0)
        if tok == "INV":
            key = by_name.get("m") or by_name.get("PB")
            if key is None:
                raise WordAlgebraError("INV used outside a moment/PB registry")
            letters.append(letter(key, ALPHABETS[key].invertible_index, True))
        elif tok == "INV2":
            key = by_name.get("m")
            if key is None or ALPHABETS[key].invertible_index != 2:
                raise WordAlgebraError("INV2 requires the even moment alphabet")
            letters.append(letter(key, 2, True))
        elif tok == "PLs":
            letters.append(letter(by_name["PLs"], 1))
        elif tok == "QLt":
            letters.append(letter(by_name["QLt"], 1))
        elif tok.startswith("PL"):
            idx = int(m.group(1))
            letters.append(letter(by_name["m"], idx, m.group(2) is not None))
        elif tok.startswith("QL"):
            letters.append(letter(by_name["QL"], int(m.group(3))))
        elif tok.startswith("PB"):
            idx = int(m.group(4))
            letters.append(letter(by_name["PB"], idx, m.group(5) is not None))
        elif tok.startswith("a"):
            idx = int(m.group(6))
            letters.append(letter(by_name["a"], idx, m.group(7) is not None))
        else:
            idx = int(m.group(8))
            letters.append(letter(by_name["b"], idx, m.group(9) is not None))
        pos = m.end()
    return Word(letters)


def poly_to_json(p: NCPolynomial, registry: Sequence[str]) -> str:
    keys = sorted(p.terms, key=_word_sort_key)
    payload = {
        "registry": list(registry),
        "terms": [
            {
                "word": render_word(w),
                "coeff": [p.terms[w].numerator, p.terms[w].denominator],
            }
            for w in keys
        ],
    }
    return json.dumps(payload, indent=None)


def poly_from_json(text: str) -> NCPolynomial:
    payload = json.loads(text)
    registry = payload["registry"]
    acc: Dict[Word, Fraction] = {}
    for item in payload["terms"]:
        w = parse_word(item["word"], registry)
        num, den = item["coeff"]
        acc[w] = acc.get(w, Fraction(0)) + Fraction(num, den)
    return NCPolynomial(acc)
