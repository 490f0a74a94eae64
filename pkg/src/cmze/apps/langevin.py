"""Memory-kernel coefficients for the underdamped Langevin tagged particle.

`langevin_coeffs` evaluates the published closed-form coefficient list for
the momentum autocorrelation kernel.  `KolmogorovOracle` provides the exact
alternative: for a harmonic potential the backward operator preserves total
polynomial degree in (q, p), so its matrix on the monomial basis is finite
and every equilibrium moment is a rational number.  The oracle fixes the
interpretation of the closed forms empirically (see tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

from ..wordeq import laurent_fk

__all__ = ["GLEInputs", "langevin_coeffs", "KolmogorovOracle"]


@dataclass
class GLEInputs:
    mass: float
    friction: float
    beta: float
    d2V: float = 0.0  # <d^2 V>
    d3V: float = 0.0  # <d^3 V>
    dV_d2V: float = 0.0  # <dV * d^2 V>

    def __post_init__(self):
        if self.mass <= 0 or self.friction <= 0 or self.beta <= 0:
            raise ValueError("mass, friction, and beta must be positive")


def langevin_coeffs(g: GLEInputs) -> Tuple[float, float, float, float]:
    """(streaming rate, f_0, f_1, f_2) from the published closed forms."""
    m, ga = g.mass, g.friction
    omega = -ga / m
    f0 = -g.d2V / m
    f1 = 0.0
    f2 = (
        (-1.0 / m**2 + 1.0 / ga - 1.0 / m) * g.d2V
        + (2.0 / (m * ga) + 1.0 / ga**2) * g.d2V**2
        + (m / ga**2) * g.dV_d2V
        + (1.0 / (m * ga)) * g.d3V
        + 2.0 * ga**2 / m**2
        - ga / m**2
    )
    return omega, f0, f1, f2


Poly2 = Dict[Tuple[int, int], Fraction]  # (q-power, p-power) -> coefficient


class KolmogorovOracle:
    """Exact moments of the harmonic Langevin backward operator.

    Works on the monomial basis q^a p^b; the operator maps total degree
    a + b into itself (or lower), so repeated application and Gibbs averaging
    are exact rational arithmetic.
    """

    def __init__(self, mass, spring, friction, beta):
        self.m = Fraction(mass)
        self.k = Fraction(spring)
        self.ga = Fraction(friction)
        self.beta = Fraction(beta)

    def apply(self, poly: Poly2) -> Poly2:
        out: Poly2 = {}

        def add(key, val):
            if val == 0:
                return
            out[key] = out.get(key, Fraction(0)) + val
            if out[key] == 0:
                del out[key]

        for (a, b), c in poly.items():
            if a >= 1:
                add((a - 1, b + 1), c * a / self.m)
            if b >= 1:
                add((a + 1, b - 1), -c * b * self.k)
                add((a, b), -c * b * self.ga / self.m)
            if b >= 2:
                add((a, b - 2), c * b * (b - 1) * self.ga / self.beta)
        return out

    def moment(self, a: int, b: int) -> Fraction:
        """Gibbs average <q^a p^b> (Gaussian, factorized)."""
        if a % 2 or b % 2:
            return Fraction(0)

        def dfact(n):
            v = Fraction(1)
            while n > 1:
                v *= n
                n -= 2
            return v

        return (
            dfact(a - 1) * (1 / (self.beta * self.k)) ** (a // 2)
            * dfact(b - 1) * (self.m / self.beta) ** (b // 2)
        )

    def average(self, poly: Poly2) -> Fraction:
        return sum((c * self.moment(a, b) for (a, b), c in poly.items()), Fraction(0))

    def gammas(self, order: int) -> Dict[int, Fraction]:
        """gamma_n = <K^{n+1} p, p>/<p^2> for n = 0..order."""
        p_var: Poly2 = {(0, 1): Fraction(1)}
        norm = self.moment(0, 2)
        out: Dict[int, Fraction] = {}
        cur = dict(p_var)
        for n in range(order + 1):
            cur = self.apply(cur)
            prod = {(a, b + 1): c for (a, b), c in cur.items()}
            out[n] = self.average(prod) / norm
        return out

    def kernel_ladder(self, order: int) -> List[Fraction]:
        """Exact composition coefficients f_0..f_order via the Laurent ladder."""
        gs = self.gammas(order + 1)
        ladder = laurent_fk(order, skew=False)
        return [f.evaluate_exact(gs) for f in ladder]
