"""Finite-dimensional ground truth for every symbolic identity.

A system is a complex generator G on C^d with a Hermitian positive-definite
metric and an M-orthonormal projection basis U (rank r).  Everything the
symbolic modules claim about projected semigroups, moments, and kernel
expansions is checked here by dense linear algebra: e^{tG} and e^{tQG} via
`scipy.linalg.expm`, moments by repeated application of G, restricted
operators as r x r matrices in the U-basis.

Matrix convention: the restriction of a P-sandwiched operator X to Ran(P) is
mat(X) = U* M X U, so composing "apply Y, then X" multiplies in word order,
mat(X) @ mat(Y).  Kernel expansions therefore carry the coefficient matrix on
the left of the correlation powers; tests lock this in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .words import Letter, NCPolynomial, WordAlgebraError, letter

__all__ = [
    "OperatorSystem",
    "random_system",
    "moments",
    "scalar_gammas",
    "exact_correlation",
    "exact_kernel",
    "dyson_split_residual",
    "verify_bipartition_identity",
    "verify_kernel_expansion",
    "moment_images",
    "substitute_moments",
]


@dataclass
class OperatorSystem:
    generator: np.ndarray
    metric: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        d = self.generator.shape[0]
        if self.generator.shape != (d, d):
            raise ValueError("generator must be square")
        if self.metric.shape != (d, d):
            raise ValueError("metric must match the generator dimension")
        if self.basis.ndim != 2 or self.basis.shape[0] != d:
            raise ValueError("basis must be d x r")
        if np.linalg.cond(self.metric) > 1e12:
            raise ValueError("metric is ill-conditioned")
        gram = self.basis.conj().T @ self.metric @ self.basis
        if np.linalg.norm(gram - np.eye(self.rank)) > 1e-12 * max(1.0, self.dim):
            raise ValueError("basis is not metric-orthonormal")

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def projection(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T @ self.metric

    def restrict(self, X: np.ndarray) -> np.ndarray:
        """r x r matrix of PXP on Ran(P) in the U-basis."""
        return self.basis.conj().T @ self.metric @ X @ self.basis


def _orthonormalize(metric: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    out = []
    for j in range(vecs.shape[1]):
        v = vecs[:, j].astype(complex)
        for u in out:
            v = v - (u.conj() @ metric @ v) * u
        nrm = np.sqrt((v.conj() @ metric @ v).real)
        if nrm < 1e-10:
            raise ValueError("projection basis is numerically degenerate")
        out.append(v / nrm)
    return np.stack(out, axis=1)


def random_system(
    dim: int,
    rank: int,
    seed: int,
    skew: bool = False,
    unit_scale: bool = False,
    identity_metric: bool = True,
) -> OperatorSystem:
    """Seeded test system; ``skew`` gives a real antisymmetric generator (all
    even-subscript scalar moments vanish exactly)."""
    rng = np.random.default_rng(seed)
    if skew:
        A = rng.normal(size=(dim, dim))
        G = A - A.T
        G = G.astype(complex)
    else:
        G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    if unit_scale:
        G = G / np.linalg.norm(G, 2)
    if identity_metric:
        M = np.eye(dim, dtype=complex)
    else:
        B = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        M = B @ B.conj().T / dim + np.eye(dim)
    if skew:
        vecs = rng.normal(size=(dim, rank)).astype(complex)
    else:
        vecs = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    U = _orthonormalize(M, vecs)
    return OperatorSystem(G, M, U)


def moments(sys: OperatorSystem, N: int) -> List[np.ndarray]:
    """D_1..D_N with D_n = mat(P G^n P); scalar rank gives gamma_{n-1}."""
    if N > 16:
        raise ValueError("moment order capped at 16 for conditioning")
    out = []
    X = sys.basis.copy()
    for _ in range(N):
        X = sys.generator @ X
        out.append(sys.basis.conj().T @ sys.metric @ X)
    return out


def scalar_gammas(sys: OperatorSystem, N: int) -> Dict[int, complex]:
    """gamma_{n} = <G^{n+1}u, u> for n = -1..N-1 (rank-1 systems)."""
    if sys.rank != 1:
        raise ValueError("scalar moments need a rank-1 projection")
    ds = moments(sys, N)
    out = {-1: 1.0 + 0j}
    for n, D in enumerate(ds):
        out[n] = complex(D[0, 0])
    return out


def exact_correlation(sys: OperatorSystem, h: float, M: int) -> "Trajectory":
    """C(t_k) = mat(P e^{t_k G} P) for t_k = k h, k = 0..M."""
    from .numerics import Trajectory

    _guard_horizon(sys.generator, h * M)
    E = expm(h * sys.generator)
    out = np.empty((M + 1, sys.rank, sys.rank), dtype=complex)
    S = np.eye(sys.dim, dtype=complex)
    for k in range(M + 1):
        out[k] = sys.restrict(S)
        if k < M:
            S = S @ E
    return Trajectory(h, out)


def exact_kernel(sys: OperatorSystem, h: float, M: int) -> "Trajectory":
    """K(t_k) = mat(P G e^{t_k QG} Q G P) on the same grid."""
    from .numerics import Trajectory

    QG = (np.eye(sys.dim) - sys.projection) @ sys.generator
    _guard_horizon(QG, h * M)
    E = expm(h * QG)
    right = (np.eye(sys.dim) - sys.projection) @ sys.generator @ sys.basis
    left = sys.basis.conj().T @ sys.metric @ sys.generator
    out = np.empty((M + 1, sys.rank, sys.rank), dtype=complex)
    S = np.eye(sys.dim, dtype=complex)
    for k in range(M + 1):
        out[k] = left @ S @ right
        if k < M:
            S = S @ E
    return Trajectory(h, out)


def _guard_horizon(G: np.ndarray, T: float) -> None:
    if np.linalg.norm(G, 2) * abs(T) > 1e3:
        raise ValueError("requested horizon is numerically unsafe (norm*T > 1e3)")


def dyson_split_residual(sys: OperatorSystem, t: float, h: float) -> float:
    """Residual of e^{tG} = e^{tQG} + int_0^t e^{(t-s)G} P G e^{sQG} ds.

    Simpson quadrature, so the residual reflects the identity rather than the
    integration rule.
    """
    P = sys.projection
    Q = np.eye(sys.dim) - P
    QG = Q @ sys.generator
    n = max(2, int(round(t / h)))
    if n % 2:
        n += 1
    hs = t / n
    acc = np.zeros((sys.dim, sys.dim), dtype=complex)
    for j in range(n + 1):
        s = j * hs
        term = expm((t - s) * sys.generator) @ P @ sys.generator @ expm(s * QG)
        if j in (0, n):
            weight = 1.0
        else:
            weight = 4.0 if j % 2 else 2.0
        acc += weight * term
    acc *= hs / 3.0
    lhs = expm(t * sys.generator)
    rhs = expm(t * QG) + acc
    return float(np.linalg.norm(lhs - rhs, 2))


# ---------------------------------------------------------------------------
# symbolic-to-matrix bridge
# ---------------------------------------------------------------------------

def moment_images(sys: OperatorSystem, max_index: int) -> Dict[Letter, np.ndarray]:
    """Images of the moment letters: PL^jP -> D_j, inverse letter -> D_1^{-1}.

    Also covers the even-alphabet variant (inverse of the grade-2 letter) and
    the plain b-alphabet used by the bipartition fixtures.
    """
    ds = moments(sys, max_index)
    images: Dict[Letter, np.ndarray] = {}
    for key in ("m", "m_even", "b", "b_even"):
        for j in range(1, max_index + 1):
            try:
                images[letter(key, j)] = ds[j - 1]
            except WordAlgebraError:
                continue
    smallest = np.linalg.svd(ds[0], compute_uv=False)[-1]
    if smallest > 1e-12:
        images[letter("m", 1, True)] = np.linalg.inv(ds[0])
    if max_index >= 2:
        s2 = np.linalg.svd(ds[1], compute_uv=False)[-1]
        if s2 > 1e-12:
            images[letter("m_even", 2, True)] = np.linalg.inv(ds[1])
    return images


def substitute_moments(p: NCPolynomial, sys: OperatorSystem) -> np.ndarray:
    max_index = 1
    for w in p.terms:
        for l in w:
            if not l.inverse:
                max_index = max(max_index, l.index)
    return p.substitute(moment_images(sys, max_index))


def verify_bipartition_identity(sys: OperatorSystem, n: int) -> float:
    """|| P~_n(D_1..D_n) - mat(P G (QG)^{n-1} P) ||_F."""
    if n < 1 or n > 10:
        raise ValueError("n must be in 1..10")
    from .families import nc_bipartition

    sym = substitute_moments(nc_bipartition(n, alphabet="b"), sys)
    Q = np.eye(sys.dim) - sys.projection
    X = sys.generator @ sys.basis
    for _ in range(n - 1):
        X = sys.generator @ (Q @ X)
    direct = sys.basis.conj().T @ sys.metric @ X
    return float(np.linalg.norm(sym - direct))


def verify_kernel_expansion(
    sys: OperatorSystem,
    ladder: Sequence[NCPolynomial],
    N: int,
    t_max: float,
    samples: int = 9,
) -> Tuple[float, float]:
    """Compare the exact kernel with the order-N truncated expansion.

    Returns ``(max_deviation, fitted_power)`` where the fitted power is the
    log-log slope of the deviation near t = 0; an order-N ladder should give
    a slope of about N + 1.
    """
    even_ladder = any(
        l.alphabet == "m_even" for f in ladder[: N + 1] for w in f.terms for l in w
    )
    pivot_order = 2 if even_ladder else 1
    ds = moments(sys, pivot_order)
    smallest = np.linalg.svd(ds[pivot_order - 1], compute_uv=False)[-1]
    if smallest < 1e-8:
        raise ValueError("the pivot moment matrix is numerically singular")
    mats = [substitute_moments(f, sys) for f in ladder[: N + 1]]
    ts = np.geomspace(t_max / 64.0, t_max, samples)
    devs = []
    fact = [1.0]
    for n in range(1, N + 1):
        fact.append(fact[-1] * n)
    for t in ts:
        C = sys.restrict(expm(t * sys.generator))
        Chat = C - np.eye(sys.rank)
        QG = (np.eye(sys.dim) - sys.projection) @ sys.generator
        K = (
            sys.basis.conj().T
            @ sys.metric
            @ sys.generator
            @ expm(t * QG)
            @ (np.eye(sys.dim) - sys.projection)
            @ sys.generator
            @ sys.basis
        )
        approx = np.zeros_like(K)
        power = np.eye(sys.rank, dtype=complex)
        for n, Fn in enumerate(mats):
            if n > 0:
                power = power @ Chat
            approx += Fn @ power / fact[n]
        devs.append(np.linalg.norm(K - approx))
    devs = np.array(devs)
    scale = max(np.linalg.norm(mats[0]), 1e-30)
    usable = devs > 1e-12 * scale
    if usable.sum() >= 3:
        slope = np.polyfit(np.log(ts[usable]), np.log(devs[usable]), 1)[0]
    else:
        slope = float("inf")
    return float(devs.max()), float(slope)
