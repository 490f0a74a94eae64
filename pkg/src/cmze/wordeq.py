"""Recursive solvers for the graded word equations behind the kernel expansions.

The central object is the triangular system

    Q^b_m             = f_0
    Q^b_{n+m}         = sum_{k=1}^n f_k Q^a_{n,k}          (n >= 1)

solved for the ladder ``f_k`` inside the free algebra extended by the
designated inverse letter (grade 1 in Case 1, grade 2 with vanishing odd
letters in Case 2).  The same machinery specialised to moment letters yields
the operator coefficient ladders of the time-independent expansion; a
mixed-alphabet variant produces the time-dependent pair of ladders.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .families import (
    bell_partial_commutative,
    family_polynomial,
    max_order,
    nc_bell_type1,
    nc_bell_type2_partial,
)
from .laurent import LaurentPoly
from .words import (
    ALPHABETS,
    NCPolynomial,
    Word,
    WordAlgebraError,
    letter,
    render_word,
    word,
)

__all__ = [
    "WordEquationProblem",
    "solve_words",
    "back_substitution_residual",
    "laurent_fk",
    "operator_F",
    "corollary_F_prime",
    "time_dependent_FG",
    "td_back_substitution_residual",
    "knm_scalar",
    "render_knm",
]


@dataclass(frozen=True)
class WordEquationProblem:
    """One instance of the triangular word equation.

    ``coefficient_side`` places the unknowns left ("left", the default) or
    right of the known partial polynomials, matching the two ansatz
    placements that occur in practice.
    """

    qb: str
    qa: str
    m: int = 0
    case: int = 1
    order: int = 4
    coefficient_side: str = "left"
    qa_alphabet: str = ""
    qb_alphabet: str = ""

    def __post_init__(self):
        if self.case not in (1, 2):
            raise ValueError("case must be 1 or 2")
        if self.coefficient_side not in ("left", "right"):
            raise ValueError("coefficient_side must be 'left' or 'right'")
        if self.m < 0:
            raise ValueError("offset m must be nonnegative")
        if self.case == 2 and self.m % 2:
            raise ValueError("case 2 requires an even offset m")
        if self.order > max_order():
            raise ValueError(f"order {self.order} exceeds cap {max_order()}")
        if not self.qa_alphabet:
            object.__setattr__(
                self, "qa_alphabet", "a1inv" if self.case == 1 else "a2inv"
            )
        if not self.qb_alphabet:
            object.__setattr__(self, "qb_alphabet", "b" if self.case == 1 else "b_even")
        spec = ALPHABETS[self.qa_alphabet]
        want = 1 if self.case == 1 else 2
        if spec.invertible_index != want:
            raise ValueError(
                f"case {self.case} needs an alphabet with invertible index {want}"
            )
        if self.case == 2 and not spec.zero_odd:
            raise ValueError("case 2 requires vanishing odd letters")


def _qa_partial(problem: WordEquationProblem, n: int, k: int) -> NCPolynomial:
    return family_polynomial(problem.qa, n, k, alphabet=problem.qa_alphabet)


def _qb(problem: WordEquationProblem, n: int) -> NCPolynomial:
    return family_polynomial(problem.qb, n, alphabet=problem.qb_alphabet)


def solve_words(problem: WordEquationProblem) -> List[NCPolynomial]:
    """Solve the triangular system up to grade ``problem.order``.

    Returns the ladder ``[f_0, f_1, ...]``; in Case 2 entry ``f_k`` is pinned
    by the grade-2k equation, so the ladder has ``order // 2`` unknowns.
    """
    inv_idx = 1 if problem.case == 1 else 2
    inv = letter(problem.qa_alphabet, inv_idx, True)
    step = 1 if problem.case == 1 else 2
    ladder: List[NCPolynomial] = [_qb(problem, problem.m)]
    for n in range(1, problem.order + 1):
        rhs_known = NCPolynomial.zero()
        k_new = n // step
        for k in range(1, n + 1):
            if k == k_new and n == k_new * step:
                continue
            fk = ladder[k] if k < len(ladder) else None
            if fk is None:
                continue
            qa = _qa_partial(problem, n, k)
            rhs_known = rhs_known + (
                fk * qa if problem.coefficient_side == "left" else qa * fk
            )
        target = _qb(problem, n + problem.m) - rhs_known
        if problem.case == 2 and n % 2 == 1:
            if target:
                raise WordAlgebraError(
                    f"odd-order inconsistency at grade {n}: residual {target.render()}"
                )
            continue
        lead_word = Word(tuple(letter(problem.qa_alphabet, inv_idx) for _ in range(k_new)))
        lead = _qa_partial(problem, n, k_new).coefficient(lead_word)
        if lead == 0:
            raise WordAlgebraError(
                f"leading word {render_word(lead_word)} missing at grade {n}"
            )
        inv_power = NCPolynomial.from_word(Word((inv,) * k_new))
        if problem.coefficient_side == "left":
            f_new = (target * inv_power).scale(Fraction(1) / lead)
        else:
            f_new = (inv_power * target).scale(Fraction(1) / lead)
        ladder.append(f_new)
    return ladder


def back_substitution_residual(
    problem: WordEquationProblem, ladder: Sequence[NCPolynomial], n: int
) -> NCPolynomial:
    """Residual of the grade-n equation; zero for a correct ladder."""
    if n == 0:
        return ladder[0] - _qb(problem, problem.m)
    acc = NCPolynomial.zero()
    for k in range(1, n + 1):
        if k >= len(ladder):
            continue
        qa = _qa_partial(problem, n, k)
        fk = ladder[k]
        acc = acc + (fk * qa if problem.coefficient_side == "left" else qa * fk)
    return _qb(problem, n + problem.m) - acc


# ---------------------------------------------------------------------------
# scalar Laurent ladder
# ---------------------------------------------------------------------------

def _moment_ladder(max_index: int, skew: bool) -> List[LaurentPoly]:
    """mu_0..mu_{max_index} from the orthogonal-splitting recurrence."""
    def gamma(j: int) -> LaurentPoly:
        if skew and j % 2 == 0:
            return LaurentPoly.zero()
        return LaurentPoly.var(j)

    mus: List[LaurentPoly] = [gamma(0)]
    for n in range(1, max_index + 1):
        acc = gamma(n)
        for k in range(1, n + 1):
            acc = acc - mus[k - 1] * gamma(n - k)
        mus.append(acc)
    return mus


def _bell_in_gammas(n: int, k: int, skew: bool) -> LaurentPoly:
    """B_{n,k} with x_i -> gamma_{i-1} (odd-subscript-only in the skew branch)."""
    out = LaurentPoly.zero()
    for mono, c in bell_partial_commutative(n, k).items():
        if skew and any((i - 1) % 2 == 0 for i in mono):
            continue
        term = LaurentPoly.const(c)
        for i in mono:
            term = term * LaurentPoly.var(i - 1)
        out = out + term
    return out


def laurent_fk(order: int, skew: bool = False) -> List[LaurentPoly]:
    """Kernel-composition derivatives f_0..f_order as exact Laurent polynomials.

    Non-skew: the grade-n matching equation is divided by gamma_0^n.  Skew:
    all even-subscript moments vanish, the matching runs over even grades
    only, and gamma_1 carries the only negative powers.
    """
    if order > max_order():
        raise ValueError(f"order {order} exceeds cap {max_order()}")
    top = order + 1 if not skew else 2 * order + 1
    mus = _moment_ladder(top, skew)
    ladder: List[LaurentPoly] = [mus[1]]
    if not skew:
        for n in range(1, order + 1):
            acc = mus[n + 1]
            for k in range(1, n):
                acc = acc - ladder[k] * _bell_in_gammas(n, k, skew=False)
            ladder.append(acc.div_mono(0, n))
        return ladder
    for n in range(1, order + 1):
        grade = 2 * n
        acc = mus[grade + 1]
        for k in range(1, n):
            acc = acc - ladder[k] * _bell_in_gammas(grade, k, skew=True)
        lead = bell_partial_commutative(grade, n).get(tuple([2] * n))
        ladder.append(acc.div_mono(1, n, coeff=lead))
    return ladder


# ---------------------------------------------------------------------------
# operator ladders (time-independent)
# ---------------------------------------------------------------------------

def operator_F(order: int) -> List[NCPolynomial]:
    """Kernel coefficient operators F_0..F_order over the moment alphabet.

    Both sides of the defining equation live on the same letters PL^jP, so
    the generic solver runs with identified alphabets and offset 2.
    """
    problem = WordEquationProblem(
        qb="bipart",
        qa="ncbell2",
        m=2,
        case=1,
        order=order,
        coefficient_side="left",
        qa_alphabet="m",
        qb_alphabet="m",
    )
    return solve_words(problem)


def operator_F_problem(order: int) -> WordEquationProblem:
    return WordEquationProblem(
        qb="bipart",
        qa="ncbell2",
        m=2,
        case=1,
        order=order,
        coefficient_side="left",
        qa_alphabet="m",
        qb_alphabet="m",
    )


def corollary_F_prime(order: int) -> List[NCPolynomial]:
    """Skew variant: odd moment letters vanish and PL^2P carries the inverse.

    Entry k of the returned ladder is pinned by the grade-2k equation, so
    ``order`` counts ladder entries, not grades.
    """
    problem = corollary_F_prime_problem(order)
    return solve_words(problem)


def corollary_F_prime_problem(order: int) -> WordEquationProblem:
    return WordEquationProblem(
        qb="bipart",
        qa="ncbell2",
        m=2,
        case=2,
        order=2 * order,
        coefficient_side="left",
        qa_alphabet="m_even",
        qb_alphabet="m_even",
    )


# ---------------------------------------------------------------------------
# time-dependent ladders
# ---------------------------------------------------------------------------

_PLS = letter("Ls", 1)
_QLT = letter("Lt", 1)
_INV = letter("PB", 1, True)


def _bell1_QL(n: int, negate: bool) -> NCPolynomial:
    p = nc_bell_type1(n, alphabet="QL")
    if not negate:
        return p
    flipped = {w: c * (-1) ** len(w) for w, c in p.terms.items()}
    return NCPolynomial(flipped)


def _bell2_PB(n: int, k: int) -> NCPolynomial:
    return nc_bell_type2_partial(n, k, alphabet="PB")


def time_dependent_FG(order: int) -> Tuple[List[NCPolynomial], List[NCPolynomial]]:
    """The two mixed-alphabet ladders of the time-dependent expansion.

    The F ladder solves, grade by grade,

        PLs · B~_n(QL_1..QL_n) = sum_k B^_{n,k}(PB_1..) · F_k

    (unknown on the right), the G ladder the mirrored system

        B~_m(-QL_1..-QL_m) · QLt = sum_k G_k · B^_{m,k}(PB_1..)

    (unknown on the left).  Division is by the invertible letter PB_1.
    """
    if order > max_order():
        raise ValueError(f"order {order} exceeds cap {max_order()}")
    pls = NCPolynomial.from_word(word(_PLS))
    qlt = NCPolynomial.from_word(word(_QLT))
    F: List[NCPolynomial] = [pls]
    G: List[NCPolynomial] = [qlt]
    for n in range(1, order + 1):
        inv_n = NCPolynomial.from_word(Word((_INV,) * n))
        target_f = pls * _bell1_QL(n, negate=False)
        for k in range(1, n):
            target_f = target_f - _bell2_PB(n, k) * F[k]
        F.append(inv_n * target_f)
        target_g = _bell1_QL(n, negate=True) * qlt
        for k in range(1, n):
            target_g = target_g - G[k] * _bell2_PB(n, k)
        G.append(target_g * inv_n)
    return F, G


def td_back_substitution_residual(
    F: Sequence[NCPolynomial], G: Sequence[NCPolynomial], n: int
) -> Tuple[NCPolynomial, NCPolynomial]:
    """Residuals of the grade-n F and G equations (both zero when correct)."""
    pls = NCPolynomial.from_word(word(_PLS))
    qlt = NCPolynomial.from_word(word(_QLT))
    lhs_f = pls * _bell1_QL(n, negate=False)
    lhs_g = _bell1_QL(n, negate=True) * qlt
    rhs_f = NCPolynomial.zero()
    rhs_g = NCPolynomial.zero()
    for k in range(1, n + 1):
        rhs_f = rhs_f + _bell2_PB(n, k) * F[k]
        rhs_g = rhs_g + G[k] * _bell2_PB(n, k)
    return lhs_f - rhs_f, lhs_g - rhs_g


# ---------------------------------------------------------------------------
# scalar bracket table
# ---------------------------------------------------------------------------

def _pb_bracket(j: int) -> str:
    """Rank-1 rendering of the projected-series letter PB_j."""
    if j == 1:
        return "<L1v,v>"
    p = nc_bell_type1(j, alphabet="QL")
    chunks = []
    for w in sorted(p.terms, key=lambda w: (len(w), tuple(l.index for l in w))):
        c = p.terms[w]
        sign = "+" if c > 0 else "-"
        mag = abs(c)
        coeff = "" if mag == 1 else f"{mag}"
        chunks.append(sign + coeff + "".join(f"L{l.index}" for l in w))
    inner = "".join(chunks).lstrip("+")
    return f"<({inner})v,v>"


def knm_scalar(n: int, m: int) -> Dict[tuple, Fraction]:
    """Rank-1 scalar coefficients: normalized terms of <F_n(s) G_m(t) v, v>.

    Key: (main bracket letter tuple, extra scalar factors, power of <L1 v,v>
    in the denominator); value: exact rational coefficient.
    """
    F, G = time_dependent_FG(max(n, m))
    prod = F[n] * G[m]
    table: Dict[tuple, Fraction] = {}
    for w, c in prod.terms.items():
        main: List[str] = []
        extras: List[str] = []
        inv_pow = 0
        for l in w:
            if l.alphabet == "PB":
                if l.inverse:
                    inv_pow += 1
                elif l.index == 1:
                    inv_pow -= 1
                else:
                    extras.append(_pb_bracket(l.index))
            elif l.alphabet == "Ls":
                main.append("L(s)")
            elif l.alphabet == "Lt":
                main.append("QL(t)")
            else:
                main.append(f"QL{l.index}")
        key = (tuple(main), tuple(sorted(extras)), inv_pow)
        table[key] = table.get(key, Fraction(0)) + c
    return {k: v for k, v in table.items() if v != 0}


def render_knm(table: Dict[tuple, Fraction]) -> str:
    chunks = []
    for (main, extras, inv_pow), c in sorted(table.items()):
        sign = "+" if c > 0 else "-"
        mag = abs(c)
        coeff = "" if mag == 1 else (
            f"{mag.numerator}·" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}·"
        )
        bracket = "<" + "".join(main) + "v,v>"
        num = bracket + "".join(extras)
        if inv_pow > 0:
            den = "<L1v,v>" + (f"^{inv_pow}" if inv_pow > 1 else "")
            chunks.append(f"{sign}{coeff}{num}/{den}")
        elif inv_pow < 0:
            chunks.append(f"{sign}{coeff}{num}<L1v,v>^{-inv_pow}")
        else:
            chunks.append(f"{sign}{coeff}{num}")
    return " ".join(chunks) if chunks else "0"
