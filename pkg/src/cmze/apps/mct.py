"""Static-moment assembly for the density-fluctuation memory equation.

The two-observable projection (density fluctuation, longitudinal current)
turns the expansion coefficients into 2x2 diagonal matrices whose nonzero
entries are the ``omega`` coefficients consumed by `solve_mct`.  Everything
here is a direct function of equal-time moments; the generic operator-ladder
substitution reproduces the same matrices and, in particular, the vanishing
of the first-order coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..wordeq import operator_F
from ..words import letter

__all__ = ["MCTInputs", "mct_coeffs", "moment_matrices", "omega_ladder"]


@dataclass
class MCTInputs:
    q: float
    S: float
    N: float
    m: float
    kBT: float
    jdot_sq: float  # <(d/dt j)_{-q} (d/dt j)_q>
    jddot_sq: float = 0.0  # <(d^2/dt^2 j)_{-q} (d^2/dt^2 j)_q>

    def __post_init__(self):
        if self.S <= 0:
            raise ValueError("static structure factor must be positive")
        if self.q == 0:
            raise ValueError("the streaming matrix is singular at q = 0")


def mct_coeffs(inp: MCTInputs) -> Tuple[float, float, np.ndarray]:
    """(omega_0^2, omega_2^2, streaming matrix) from the static moments."""
    q, S, N, m, kBT = inp.q, inp.S, inp.N, inp.m, inp.kBT
    i_omega = np.array(
        [[0.0, -1j * abs(q)], [-1j * abs(q) * kBT / (m * S), 0.0]], dtype=complex
    )
    w0 = -(m / (N * kBT)) * inp.jdot_sq + q**2 * kBT / (m * S)
    w2 = -(m**2 * S / (q**2 * kBT**2 * N)) * (
        inp.jddot_sq - (m / (N * kBT)) * inp.jdot_sq**2
    )
    return w0, w2, i_omega


def moment_matrices(inp: MCTInputs, order: int = 4) -> List[np.ndarray]:
    """D_1..D_order for the two-observable projection.

    Off-diagonal odd moments follow from stationarity (odd time derivatives of
    autocorrelations vanish; cross moments integrate by parts).
    """
    if order > 4:
        raise ValueError("static inputs provided up to the fourth moment")
    q, S, N, m, kBT = abs(inp.q), inp.S, inp.N, inp.m, inp.kBT
    _, _, D1 = mct_coeffs(inp)
    D2 = np.diag(
        [-(q**2) * kBT / (m * S), -(m / (N * kBT)) * inp.jdot_sq]
    ).astype(complex)
    # sign fixed by the stated cross moment <j_{-q}, drho-dot_q> = -i|q| N kBT / m
    D3 = np.array(
        [
            [0.0, 1j * q * inp.jdot_sq * m / (N * kBT)],
            [1j * q * inp.jdot_sq / (N * S), 0.0],
        ],
        dtype=complex,
    )
    D4 = np.diag(
        [q**2 * inp.jdot_sq / (N * S), inp.jddot_sq * m / (N * kBT)]
    ).astype(complex)
    return [D1, D2, D3, D4][:order]


def omega_ladder(inp: MCTInputs, order: int = 2) -> List[np.ndarray]:
    """Coefficient matrices from the generic operator ladder substitution."""
    ds = moment_matrices(inp, 4)
    images = {letter("m", j + 1): ds[j] for j in range(4)}
    images[letter("m", 1, True)] = np.linalg.inv(ds[0])
    return [f.substitute(images) for f in operator_F(order)]
