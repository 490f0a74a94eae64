"""Single-band Hubbard chain: moment matrices, exact diagonalization, solvers.

Matrix orientation is column-evolved throughout: C(t)[i, j] = (c_i | c_j(t))
with the anticommutator inner product, so moment matrices compose in word
order and iG^R(t) is the transpose of C(t) (equal for uniform densities).

The closed-form moment entries follow the tight-binding structure: diagonal
and hopping contributions are assembled from the one-particle hopping matrix
T and its powers, which reduces to the familiar constant-diagonal entries on
chains long enough that next-nearest paths are unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..numerics import Trajectory
from ..oplab import OperatorSystem
from ..wordeq import laurent_fk, operator_F
from ..words import letter

__all__ = [
    "HubbardParams",
    "hopping_matrix",
    "hubbard_frequency_and_moments",
    "hubbard_scalar_coeffs",
    "hubbard_omega01",
    "EDOracle",
    "hubbard_operator_space_system",
    "deconvolve_kernel",
    "kbe_second_born",
]


@dataclass
class HubbardParams:
    sites: int
    eps0: float = 0.0
    mu: float = 0.0
    hop: float = 1.0
    U: float = 0.0
    densities: Optional[Sequence[float]] = None  # <n_{i,sigma-bar}> per site
    boundary: str = "periodic"
    beta: float = 1.0
    pair_densities: Optional[Dict[Tuple[int, int], float]] = None

    def __post_init__(self):
        if self.sites < 2:
            raise ValueError("need at least two sites")
        if self.boundary not in ("periodic", "open"):
            raise ValueError("boundary must be periodic or open")
        if self.densities is None:
            self.densities = [0.5] * self.sites
        if len(self.densities) != self.sites:
            raise ValueError("one density per site required")
        for d in self.densities:
            if not 0.0 <= d <= 1.0:
                raise ValueError("densities must lie in [0, 1]")

    def pair_density(self, i: int, j: int) -> float:
        if self.pair_densities and (i, j) in self.pair_densities:
            return self.pair_densities[(i, j)]
        if self.pair_densities and (j, i) in self.pair_densities:
            return self.pair_densities[(j, i)]
        return self.densities[i] * self.densities[j]


def hopping_matrix(p: HubbardParams) -> np.ndarray:
    N = p.sites
    T = np.zeros((N, N))
    for i in range(N):
        for d in (-1, 1):
            j = i + d
            if p.boundary == "periodic":
                T[i, j % N] += p.hop
            elif 0 <= j < N:
                T[i, j] += p.hop
    return T


def hubbard_frequency_and_moments(
    p: HubbardParams, order: int = 3
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Streaming matrix and closed-form moment matrices D_1..D_order.

    D_1 and D_2 are exact for any chain; D_3 uses the nearest-neighbour pair
    correlators (product approximation unless supplied).
    """
    if order > 3:
        raise ValueError("closed forms stop at order 3; use the ED oracle instead")
    N = p.sites
    e = p.eps0 - p.mu
    T = hopping_matrix(p)
    T2 = T @ T
    nd = np.diag(p.densities)
    U = p.U
    omega = e * np.eye(N) + T + U * nd

    # D_1 = -i Omega
    D1 = -1j * omega
    # D_2: the interacting square of the frequency (n^2 = n as an operator)
    D2 = -(
        e**2 * np.eye(N)
        + 2 * U * e * nd
        + U**2 * nd
        + T2
        + 2 * e * T
        + U * (nd @ T + T @ nd)
    ).astype(complex)
    out = [D1, D2.astype(complex)]
    if order >= 3:
        dens = np.asarray(p.densities, dtype=float)
        single = np.linalg.matrix_power(e * np.eye(N) + T, 3)
        # two-hop paths weighted by the densities they touch
        W2 = np.zeros((N, N))
        for i in range(N):
            for j in range(N):
                W2[i, j] = sum(
                    T[i, b] * T[b, j] * (dens[i] + dens[b] + dens[j])
                    for b in range(N)
                )
        W1 = T * (dens[:, None] + dens[None, :])
        W1b = np.array(
            [
                [
                    T[i, j] * (dens[i] + dens[j] + p.pair_density(i, j))
                    if i != j
                    else 0.0
                    for j in range(N)
                ]
                for i in range(N)
            ]
        )
        D3 = 1j * (
            single
            + 3 * U * e**2 * nd
            + 3 * U**2 * e * nd
            + U**3 * nd
            + U * W2
            + 3 * U * e * W1
            + U**2 * W1b
        )
        out.append(D3.astype(complex))
    return omega.astype(complex), out[:order]


def hubbard_scalar_coeffs(p: HubbardParams) -> Tuple[float, complex, complex]:
    """Streaming frequency and the first two scalar kernel coefficients.

    Evaluated from the on-site moments through the commutative Laurent ladder;
    requires uniform densities and an invertible first moment.
    """
    if max(p.densities) - min(p.densities) > 1e-9:
        raise ValueError("closed scalar coefficients assume a uniform density")
    omega_mat, ds = hubbard_frequency_and_moments(p, 3)
    i = p.sites // 2
    gammas = {-1: 1.0 + 0j, 0: ds[0][i, i], 1: ds[1][i, i], 2: ds[2][i, i]}
    if abs(gammas[0]) < 1e-12:
        raise ValueError("frequency (eps0 - mu) + U<n> must be nonzero")
    fk = laurent_fk(1, skew=False)
    f0 = fk[0].evaluate(gammas)
    f1 = fk[1].evaluate(gammas)
    return float(omega_mat[i, i].real), f0, f1


def hubbard_omega01(p: HubbardParams, moments_: Optional[List[np.ndarray]] = None):
    """Zeroth and first kernel coefficient matrices from the operator ladder."""
    if moments_ is None:
        _, moments_ = hubbard_frequency_and_moments(p, 3)
    D1, D2, D3 = moments_
    smallest = np.linalg.svd(D1, compute_uv=False)[-1]
    if smallest < 1e-8:
        raise ValueError("D_1 is numerically singular; the ladder needs U >> t")
    images = {
        letter("m", 1): D1,
        letter("m", 2): D2,
        letter("m", 3): D3,
        letter("m", 1, True): np.linalg.inv(D1),
    }
    F = operator_F(1)
    omega0 = F[0].substitute(images)
    omega1 = F[1].substitute(images)
    return omega0, omega1


# ---------------------------------------------------------------------------
# exact diagonalization
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _ladder_ops(n_sites: int) -> Tuple[np.ndarray, ...]:
    """Jordan-Wigner annihilation operators, orbital order (0u, 0d, 1u, ...)."""
    n_orb = 2 * n_sites
    sz = np.array([[1.0, 0.0], [0.0, -1.0]])
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>
    eye = np.eye(2)
    ops = []
    for k in range(n_orb):
        factors = [sz] * k + [sm] + [eye] * (n_orb - k - 1)
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        ops.append(op)
    return tuple(ops)


class EDOracle:
    """Full-Fock-space ground truth for chains of up to four sites."""

    def __init__(self, p: HubbardParams):
        if p.sites > 4:
            raise ValueError("exact diagonalization capped at four sites")
        self.p = p
        n = p.sites
        self.c = list(_ladder_ops(n))
        self.cdag = [op.conj().T for op in self.c]
        self.n_op = [self.cdag[k] @ self.c[k] for k in range(2 * n)]
        T = hopping_matrix(p)
        dim = 4**n
        H = np.zeros((dim, dim))
        for i in range(n):
            for s in (0, 1):
                H += (p.eps0 - p.mu) * self.n_op[2 * i + s]
            H += p.U * (self.n_op[2 * i] @ self.n_op[2 * i + 1])
        for i in range(n):
            for j in range(n):
                if T[i, j] != 0:
                    for s in (0, 1):
                        H += T[i, j] * (self.cdag[2 * i + s] @ self.c[2 * j + s])
        self.H = H
        self.evals, self.evecs = np.linalg.eigh(H)
        w = np.exp(-p.beta * (self.evals - self.evals.min()))
        self.rho = (self.evecs * (w / w.sum())) @ self.evecs.conj().T

    def orbital(self, site: int, spin: int = 0) -> np.ndarray:
        return self.c[2 * site + spin]

    def average(self, X: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ X))

    def inner(self, A: np.ndarray, B: np.ndarray) -> complex:
        """(A|B) = <[A^dag, B]_+>."""
        Ad = A.conj().T
        return self.average(Ad @ B + B @ Ad)

    def densities(self) -> List[float]:
        # <n_{i,sigma-bar}> with sigma-bar = down when the tracked spin is up
        return [self.average(self.n_op[2 * i + 1]).real for i in range(self.p.sites)]

    def pair_densities(self) -> Dict[Tuple[int, int], float]:
        out = {}
        for i in range(self.p.sites):
            for j in range(self.p.sites):
                if i != j:
                    out[(i, j)] = self.average(
                        self.n_op[2 * i + 1] @ self.n_op[2 * j + 1]
                    ).real
        return out

    def liouville(self, X: np.ndarray) -> np.ndarray:
        """iL X = i [H, X]."""
        return 1j * (self.H @ X - X @ self.H)

    def moments(self, order: int) -> List[np.ndarray]:
        """D_n[i, j] = (c_i | (iL)^n c_j) for the tracked (up) spin."""
        n = self.p.sites
        out = []
        evolved = [self.orbital(j) for j in range(n)]
        for _ in range(order):
            evolved = [self.liouville(X) for X in evolved]
            D = np.empty((n, n), dtype=complex)
            for i in range(n):
                for j in range(n):
                    D[i, j] = self.inner(self.orbital(i), evolved[j])
            out.append(D)
        return out

    def evolve(self, X: np.ndarray, t: float) -> np.ndarray:
        ph = np.exp(1j * self.evals * t)
        V = self.evecs
        inner = V.conj().T @ X @ V
        return V @ (ph[:, None] * inner * ph.conj()[None, :]) @ V.conj().T

    def _spectral_pairs(self, seeds: Sequence[np.ndarray]) -> np.ndarray:
        """Weights w[i, j, (a, b)] with (c_i | seed_j(t)) = sum w e^{i(E_a - E_b)t}."""
        n = self.p.sites
        V = self.evecs
        dim = V.shape[0]
        weights = np.empty((n, len(seeds), dim * dim), dtype=complex)
        for i in range(n):
            ci = self.orbital(i)
            W = self.rho @ ci.conj().T + ci.conj().T @ self.rho
            Wt = (V.conj().T @ W @ V).T
            for j, X in enumerate(seeds):
                Xe = V.conj().T @ X @ V
                weights[i, j] = (Wt * Xe).reshape(-1)
        return weights

    def _grid_eval(self, weights: np.ndarray, h: float, steps: int) -> np.ndarray:
        n = self.p.sites
        dim = self.evecs.shape[0]
        freq = (self.evals[:, None] - self.evals[None, :]).reshape(-1)
        out = np.empty((steps + 1, n, n), dtype=complex)
        flat = weights.reshape(n * weights.shape[1], -1)
        for k in range(steps + 1):
            ph = np.exp(1j * freq * (k * h))
            out[k] = (flat @ ph).reshape(n, n)
        return out

    def correlation(self, h: float, steps: int) -> np.ndarray:
        """C(t)[i, j] = (c_i | c_j(t)); iG^R(t) = C(t)^T."""
        seeds = [self.orbital(j) for j in range(self.p.sites)]
        return self._grid_eval(self._spectral_pairs(seeds), h, steps)

    def correlation_derivative(self, h: float, steps: int) -> np.ndarray:
        """Exact dC/dt on the grid (evolving iL c_j)."""
        seeds = [self.liouville(self.orbital(j)) for j in range(self.p.sites)]
        return self._grid_eval(self._spectral_pairs(seeds), h, steps)


def hubbard_operator_space_system(p: HubbardParams) -> OperatorSystem:
    """The Mori formalism as a dense `OperatorSystem` on operator space.

    Vectorizes the 4^N-dimensional operator algebra (column stacking), equips
    it with the anticommutator metric, and projects onto the tracked-spin
    annihilation operators.  Feasible for two sites (256-dimensional space);
    gives first-principles access to e^{tQL} and the exact memory kernel.
    """
    if p.sites > 2:
        raise ValueError("operator-space construction capped at two sites")
    ed = EDOracle(p)
    dim = 4**p.sites
    eye = np.eye(dim)
    L_super = 1j * (np.kron(eye, ed.H) - np.kron(ed.H.T, eye))
    rho = ed.rho
    # metric of (A|B) = Tr(rho (A^dag B + B A^dag)) on vec(X) = X.flatten('F')
    M = np.kron(rho.T, eye) + np.kron(eye, rho)
    M = 0.5 * (M + M.conj().T)
    basis = np.stack(
        [ed.orbital(j).flatten(order="F") for j in range(p.sites)], axis=1
    )
    # (c_i | c_j) = delta_ij already; orthonormal in M
    return OperatorSystem(L_super.astype(complex), M.astype(complex), basis)


def deconvolve_kernel(
    omega_stream: np.ndarray,
    C: np.ndarray,
    Cdot: np.ndarray,
    h: float,
    K0: np.ndarray,
) -> np.ndarray:
    """Recover kernel samples from dC/dt = A C + int K C via the trapezoid rule.

    ``K0`` must be supplied exactly (the quadrature carries no information
    about it at t = 0); here it is the zeroth kernel coefficient D_2 - D_1^2.
    """
    steps = len(C) - 1
    n = C.shape[1]
    K = np.zeros_like(C)
    K[0] = K0
    C0_inv = np.linalg.inv(C[0])
    for k in range(1, steps + 1):
        acc = 0.5 * K[0] @ C[k]
        for j in range(1, k):
            acc += K[j] @ C[k - j]
        rhs = Cdot[k] - omega_stream @ C[k] - h * acc
        K[k] = (2.0 / h) * rhs @ C0_inv
    return K


# ---------------------------------------------------------------------------
# second-Born reference solver
# ---------------------------------------------------------------------------

def kbe_second_born(p: HubbardParams, h: float, steps: int) -> Trajectory:
    """Self-consistent second-order-self-energy reference run.

    The equation i dG/dt = H_0 G + int Sigma(t-s) G(s) ds is integrated in the
    normalized variable C = iG with the entrywise self-energy rebuilt from the
    running trajectory each step:

        Sigma_ij(tau) = U^2 G_ij(tau) G_ij(tau) conj(G_ij(tau)).
    """
    N = p.sites
    T = hopping_matrix(p)
    H0 = (p.eps0 - p.mu) * np.eye(N) + T + p.U * np.diag(p.densities)
    A = -1j * H0
    C = np.zeros((steps + 1, N, N), dtype=complex)
    S = np.zeros_like(C)  # -i * Sigma(t_k), ready to convolve against C
    C[0] = np.eye(N)

    def sigma_of(value: np.ndarray) -> np.ndarray:
        G = -1j * value  # G^R sample from C = iG^R
        return -1j * (p.U**2) * (G * G * np.conj(G))

    S[0] = sigma_of(C[0])

    def conv(k):
        if k == 0:
            return np.zeros((N, N), dtype=complex)
        acc = 0.5 * (S[0] @ C[k] + S[k] @ C[0])
        if k > 1:
            acc += np.einsum("tij,tjk->ik", S[1:k], C[k - 1 : 0 : -1])
        return h * acc

    def rhs(k):
        return A @ C[k] + conv(k)

    for n in range(steps):
        d_n = rhs(n)
        C[n + 1] = C[n] + h * d_n
        S[n + 1] = sigma_of(C[n + 1])
        d_p = rhs(n + 1)
        C[n + 1] = C[n] + 0.5 * h * (d_n + d_p)
        S[n + 1] = sigma_of(C[n + 1])
        v = float(np.max(np.abs(C[n + 1])))
        if not np.isfinite(v) or v > 1e6:
            from ..numerics import BlowupError

            raise BlowupError(n + 1, v)
    return Trajectory(h, C)
