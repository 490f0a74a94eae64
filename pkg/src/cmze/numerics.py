"""Volterra integro-differential solvers for self-consistent memory kernels.

All solvers integrate

    dC/dt = A C(t) + int_0^t K(s) C(t-s) ds

on a uniform grid with composite-trapezoid memory quadrature and a one-step
explicit predictor followed by a single trapezoidal corrector (second order).
The kernel K may be a fixed sample array or a state-dependent function of the
running trajectory, which is what makes the equation self-consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

__all__ = [
    "BlowupError",
    "Trajectory",
    "KernelExpansion",
    "solve_given_kernel",
    "solve_scalar_cmze",
    "solve_matrix_cmze",
    "MCTParams",
    "solve_mct",
    "kernel_from_resummation",
    "ResummedKernel",
]

BLOWUP_LIMIT = 1e6


class BlowupError(RuntimeError):
    def __init__(self, step: int, value: float):
        super().__init__(
            f"trajectory exceeded {BLOWUP_LIMIT:.0e} at step {step} (|C| = {value:.3e})"
        )
        self.step = step


@dataclass
class Trajectory:
    """Uniform-grid samples; C(0) is stored exactly as supplied."""

    h: float
    values: np.ndarray
    derivative: Optional[np.ndarray] = None

    @property
    def times(self) -> np.ndarray:
        return self.h * np.arange(len(self.values))

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == 3

    def entry(self, i: int = 0, j: int = 0) -> np.ndarray:
        return self.values[:, i, j] if self.is_matrix else self.values


@dataclass
class KernelExpansion:
    """Self-consistent kernel description consumed by the CMZE solvers.

    ``mode`` selects how K(s) is built from the running trajectory:
    ``power_series`` evaluates sum_n coeff_n (C(s)-C0)^n / n! (scalar or
    matrix coefficients), ``pade`` and ``orthogonal`` wrap scalar resummed
    evaluators, ``given_samples`` uses a fixed sample array.
    """

    mode: str = "power_series"
    omega: Union[complex, np.ndarray] = 0.0
    coefficients: Sequence = ()
    c0: Union[complex, np.ndarray] = 1.0
    kernel_samples: Optional[np.ndarray] = None
    evaluator: Optional[Callable] = None

    def __post_init__(self):
        if self.mode not in ("power_series", "given_samples", "pade", "orthogonal"):
            raise ValueError(f"unknown kernel mode {self.mode!r}")


def _norm(x) -> float:
    return float(np.max(np.abs(x)))


def _volterra_run(
    A,
    c0,
    h: float,
    steps: int,
    kernel_of_state: Callable,
    matrix: bool,
):
    """Shared predictor-corrector trapezoid loop.

    ``kernel_of_state(value)`` maps one trajectory sample to one kernel
    sample; kernel history is rebuilt from corrected values only.
    """
    shape = c0.shape if matrix else ()
    C = np.empty((steps + 1,) + shape, dtype=complex)
    K = np.empty_like(C)
    C[0] = c0
    K[0] = kernel_of_state(C[0])

    if matrix:
        def conv(j, Cbuf, Kbuf):
            # int_0^{t_j} K(s) C(t_j - s) ds, trapezoid in s
            if j == 0:
                return np.zeros(shape, dtype=complex)
            acc = 0.5 * (Kbuf[0] @ Cbuf[j] + Kbuf[j] @ Cbuf[0])
            if j > 1:
                acc += np.einsum("tij,tjk->ik", Kbuf[1:j], Cbuf[j - 1 : 0 : -1])
            return h * acc

        def rhs(j, Cbuf, Kbuf):
            return A @ Cbuf[j] + conv(j, Cbuf, Kbuf)

    else:
        def conv(j, Cbuf, Kbuf):
            if j == 0:
                return 0.0 + 0j
            acc = 0.5 * (Kbuf[0] * Cbuf[j] + Kbuf[j] * Cbuf[0])
            if j > 1:
                acc += np.dot(Kbuf[1:j], Cbuf[j - 1 : 0 : -1])
            return h * acc

        def rhs(j, Cbuf, Kbuf):
            return A * Cbuf[j] + conv(j, Cbuf, Kbuf)

    for n in range(steps):
        d_n = rhs(n, C, K)
        C[n + 1] = C[n] + h * d_n  # predictor
        K[n + 1] = kernel_of_state(C[n + 1])
        d_p = rhs(n + 1, C, K)
        C[n + 1] = C[n] + 0.5 * h * (d_n + d_p)  # corrector
        K[n + 1] = kernel_of_state(C[n + 1])
        v = _norm(C[n + 1])
        if not np.isfinite(v) or v > BLOWUP_LIMIT:
            raise BlowupError(n + 1, v)
    return C


def solve_given_kernel(
    omega,
    kernel_samples,
    h: float,
    steps: int,
    c0=None,
) -> Trajectory:
    """Linear reference solve with a fixed kernel sampled on the same grid."""
    if isinstance(kernel_samples, Trajectory):
        kernel_samples = kernel_samples.values
    kernel_samples = np.asarray(kernel_samples, dtype=complex)
    if len(kernel_samples) < steps + 1:
        raise ValueError("kernel samples do not cover the grid")
    matrix = kernel_samples.ndim == 3
    if c0 is None:
        c0 = np.eye(kernel_samples.shape[1], dtype=complex) if matrix else 1.0 + 0j
    c0 = np.asarray(c0, dtype=complex) if matrix else complex(c0)
    A = np.asarray(omega, dtype=complex) if matrix else complex(omega)
    C = np.zeros((steps + 1,) + (kernel_samples.shape[1:] if matrix else ()), dtype=complex)
    K = kernel_samples[: steps + 1]
    C[0] = c0
    if matrix:
        def conv(j, Cbuf):
            if j == 0:
                return np.zeros_like(c0)
            acc = 0.5 * (K[0] @ Cbuf[j] + K[j] @ Cbuf[0])
            if j > 1:
                acc += np.einsum("tij,tjk->ik", K[1:j], Cbuf[j - 1 : 0 : -1])
            return h * acc
        def rhs(j, Cbuf):
            return A @ Cbuf[j] + conv(j, Cbuf)
    else:
        def conv(j, Cbuf):
            if j == 0:
                return 0.0 + 0j
            acc = 0.5 * (K[0] * Cbuf[j] + K[j] * Cbuf[0])
            if j > 1:
                acc += np.dot(K[1:j], Cbuf[j - 1 : 0 : -1])
            return h * acc
        def rhs(j, Cbuf):
            return A * Cbuf[j] + conv(j, Cbuf)

    for n in range(steps):
        d_n = rhs(n, C)
        C[n + 1] = C[n] + h * d_n
        d_p = rhs(n + 1, C)
        C[n + 1] = C[n] + 0.5 * h * (d_n + d_p)
        v = _norm(C[n + 1])
        if not np.isfinite(v) or v > BLOWUP_LIMIT:
            raise BlowupError(n + 1, v)
    return Trajectory(h, C)


def _scalar_kernel_fn(kernel: KernelExpansion) -> Callable:
    if kernel.mode == "power_series":
        coeffs = [complex(c) for c in kernel.coefficients]
        c0 = complex(kernel.c0)

        def fn(value):
            x = value - c0
            acc = 0j
            fact = 1.0
            p = 1.0 + 0j
            for n, cn in enumerate(coeffs):
                if n > 0:
                    fact *= n
                    p *= x
                acc += cn * p / fact
            return acc

        return fn
    if kernel.mode in ("pade", "orthogonal"):
        if kernel.evaluator is None:
            raise ValueError(f"{kernel.mode} kernel needs an evaluator")
        c0 = complex(kernel.c0)
        return lambda value: kernel.evaluator(value - c0)
    raise ValueError("scalar CMZE needs a state-dependent kernel mode")


def solve_scalar_cmze(kernel: KernelExpansion, h: float, steps: int) -> Trajectory:
    """Self-consistent scalar solve; C(0) = 1 unless overridden in ``kernel.c0``."""
    fn = _scalar_kernel_fn(kernel)
    C = _volterra_run(
        complex(kernel.omega), complex(kernel.c0), h, steps, fn, matrix=False
    )
    return Trajectory(h, C)


def solve_matrix_cmze(kernel: KernelExpansion, h: float, steps: int) -> Trajectory:
    """Self-consistent matrix solve with coefficient matrices on the left."""
    if kernel.mode != "power_series":
        raise ValueError("matrix CMZE supports the power_series mode")
    coeffs = [np.asarray(c, dtype=complex) for c in kernel.coefficients]
    if not coeffs:
        raise ValueError("matrix CMZE needs at least one coefficient matrix")
    r = coeffs[0].shape[0]
    for c in coeffs:
        if c.shape != (r, r):
            raise ValueError("coefficient matrices must share one square shape")
    c0 = np.asarray(kernel.c0, dtype=complex)
    if np.isscalar(kernel.c0) or c0.ndim == 0:
        c0 = np.eye(r, dtype=complex)
    A = np.asarray(kernel.omega, dtype=complex)
    fact = [math.factorial(n) for n in range(len(coeffs))]

    def fn(value):
        x = value - c0
        acc = np.zeros((r, r), dtype=complex)
        p = np.eye(r, dtype=complex)
        for n, cn in enumerate(coeffs):
            if n > 0:
                p = p @ x
            acc += cn @ p / fact[n]
        return acc

    C = _volterra_run(A, c0, h, steps, fn, matrix=True)
    return Trajectory(h, C)


# ---------------------------------------------------------------------------
# second-order memory equation (mode-coupling form)
# ---------------------------------------------------------------------------

@dataclass
class MCTParams:
    """Static inputs of the density-fluctuation memory equation."""

    q: float
    S: float
    N: float
    m: float
    kBT: float

    def __post_init__(self):
        if self.S <= 0:
            raise ValueError("static structure factor must be positive")
        if self.q == 0:
            raise ValueError("q must be nonzero")

    @property
    def restoring(self) -> float:
        return self.q**2 * self.kBT / (self.m * self.S)


def solve_mct(
    omega0_sq: float,
    omega2_sq: float,
    params: MCTParams,
    h: float,
    steps: int,
) -> Trajectory:
    """Integrate the five-term second-order memory equation for F(q, t).

    The equation is treated as a first-order system in (F, dF/dt); the second
    derivative entering the memory integrand is evaluated from the equation
    itself, never by differencing.  Initial data: F(0) = N S(q), F'(0) = 0.
    """
    p = params
    w2 = p.restoring
    c_lin = omega0_sq + 0.5 * omega2_sq
    c_dd = omega2_sq * p.m / (p.q**2 * p.kBT)
    c_d2 = 0.5 * omega2_sq * p.m / (p.q**2 * p.S * p.kBT)
    c_dd2 = 0.5 * omega2_sq * p.m**2 * p.N**2 / (p.q**4 * p.kBT**2)

    F = np.zeros(steps + 1)
    Fd = np.zeros(steps + 1)
    Fdd = np.zeros(steps + 1)
    mem = np.zeros(steps + 1)  # memory integrand coefficient m(s)
    F[0] = p.N * p.S
    Fd[0] = 0.0

    def integrand_coeff(j):
        return c_lin + c_dd * Fdd[j] + c_d2 * Fd[j] ** 2 - c_dd2 * Fdd[j] ** 2

    def convolution(j):
        # int_0^{t_j} m(s) F'(t_j - s) ds
        if j == 0:
            return 0.0
        acc = 0.5 * (mem[0] * Fd[j] + mem[j] * Fd[0])
        if j > 1:
            acc += np.dot(mem[1:j], Fd[j - 1 : 0 : -1])
        return h * acc

    def accel(j):
        return -w2 * F[j] + convolution(j)

    Fdd[0] = accel(0)
    mem[0] = integrand_coeff(0)
    for n in range(steps):
        # predictor (Euler on the first-order system)
        F[n + 1] = F[n] + h * Fd[n]
        Fd[n + 1] = Fd[n] + h * Fdd[n]
        Fdd[n + 1] = accel(n + 1)
        mem[n + 1] = integrand_coeff(n + 1)
        # corrector (trapezoid)
        F[n + 1] = F[n] + 0.5 * h * (Fd[n] + Fd[n + 1])
        Fd[n + 1] = Fd[n] + 0.5 * h * (Fdd[n] + Fdd[n + 1])
        Fdd[n + 1] = accel(n + 1)
        mem[n + 1] = integrand_coeff(n + 1)
        if not np.isfinite(F[n + 1]) or abs(F[n + 1]) > BLOWUP_LIMIT:
            raise BlowupError(n + 1, abs(F[n + 1]))
    return Trajectory(h, F.astype(complex), derivative=Fd.astype(complex))


# ---------------------------------------------------------------------------
# resummation of the scalar power series
# ---------------------------------------------------------------------------

def _chebyshev_coeffs(n: int) -> List[Fraction]:
    """Monomial coefficients of T_n as exact rationals."""
    prev = [Fraction(1)]
    if n == 0:
        return prev
    cur = [Fraction(0), Fraction(1)]
    for _ in range(n - 1):
        nxt = [Fraction(0)] * (len(cur) + 1)
        for i, c in enumerate(cur):
            nxt[i + 1] += 2 * c
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return cur


def _legendre_coeffs(n: int) -> List[Fraction]:
    prev = [Fraction(1)]
    if n == 0:
        return prev
    cur = [Fraction(0), Fraction(1)]
    for k in range(1, n):
        nxt = [Fraction(0)] * (len(cur) + 1)
        for i, c in enumerate(cur):
            nxt[i + 1] += Fraction(2 * k + 1, k + 1) * c
        for i, c in enumerate(prev):
            nxt[i] -= Fraction(k, k + 1) * c
        prev, cur = cur, nxt
    return cur


class ResummedKernel:
    """Callable kernel evaluator with exact coefficient bookkeeping."""

    def __init__(self, mode: str, numerator, denominator=None, weights=None, basis=""):
        self.mode = mode
        self.numerator = numerator
        self.denominator = denominator
        self.weights = weights
        self.basis = basis

    def __call__(self, x):
        if self.mode == "pade":
            num = sum(complex(a) * x**k for k, a in enumerate(self.numerator))
            den = sum(complex(b) * x**k for k, b in enumerate(self.denominator))
            return num / den
        acc = 0j
        table = _chebyshev_coeffs if self.basis == "chebyshev" else _legendre_coeffs
        for n, w in enumerate(self.weights):
            pn = sum(complex(c) * x**k for k, c in enumerate(table(n)))
            acc += complex(w) * pn
        return acc

    def taylor(self, order: int) -> List[Fraction]:
        """Exact power-series re-expansion (coefficients of x^k, k <= order)."""
        if self.mode == "pade":
            a = list(self.numerator) + [Fraction(0)] * (order + 1)
            b = list(self.denominator) + [Fraction(0)] * (order + 1)
            c: List[Fraction] = []
            for k in range(order + 1):
                v = a[k] - sum(b[j] * c[k - j] for j in range(1, k + 1))
                c.append(v / b[0])
            return c
        table = _chebyshev_coeffs if self.basis == "chebyshev" else _legendre_coeffs
        out = [Fraction(0)] * (order + 1)
        for n, w in enumerate(self.weights):
            for k, cc in enumerate(table(n)):
                if k <= order:
                    out[k] += Fraction(w) * cc
        return out


def kernel_from_resummation(
    f_coefficients: Sequence, mode: str, order_num: int = 0, order_den: int = 0,
    basis: str = "chebyshev",
) -> ResummedKernel:
    """Reorganize the truncated kernel power series.

    ``f_coefficients`` are the derivative values f_0..f_N, so the power-series
    coefficients are c_k = f_k / k!.  Pade of type [m/n] solves the standard
    exact linear system on c; the orthogonal mode performs an exact basis
    change onto Chebyshev or Legendre polynomials.
    """
    cs = [Fraction(f) / math.factorial(k) for k, f in enumerate(f_coefficients)]
    if mode == "pade":
        m, n = order_num, order_den
        if m + n > len(cs) - 1:
            raise ValueError("pade orders exceed the available series order")

        def cget(k):
            return cs[k] if 0 <= k < len(cs) else Fraction(0)

        # solve sum_j b_j c_{m+i-j} = -c_{m+i}, i = 1..n, b_0 = 1, exactly
        rows = [[cget(m + i - j) for j in range(1, n + 1)] for i in range(1, n + 1)]
        rhs = [-cget(m + i) for i in range(1, n + 1)]
        bs = [Fraction(1)] + _solve_exact(rows, rhs)
        as_ = [
            sum(bs[j] * cget(k - j) for j in range(min(k, n) + 1))
            for k in range(m + 1)
        ]
        return ResummedKernel("pade", as_, bs)
    if mode == "orthogonal":
        if basis not in ("chebyshev", "legendre"):
            raise ValueError(f"unknown basis {basis!r}")
        table = _chebyshev_coeffs if basis == "chebyshev" else _legendre_coeffs
        N = len(cs) - 1
        weights = [Fraction(0)] * (N + 1)
        rem = list(cs)
        for n in range(N, -1, -1):
            pn = table(n)
            w = rem[n] / pn[n]
            weights[n] = w
            for k, cc in enumerate(pn):
                rem[k] -= w * cc
        return ResummedKernel("orthogonal", None, weights=weights, basis=basis)
    raise ValueError(f"unknown resummation mode {mode!r}")


def _solve_exact(rows: List[List[Fraction]], rhs: List[Fraction]) -> List[Fraction]:
    """Exact Gaussian elimination; raises on a singular system."""
    n = len(rows)
    A = [list(map(Fraction, r)) + [Fraction(v)] for r, v in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            raise ValueError("singular resummation system")
        A[col], A[pivot] = A[pivot], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[r][n] for r in range(n)]
