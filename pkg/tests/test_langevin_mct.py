"""Stochastic-particle and liquid-dynamics coefficient assembly."""

from fractions import Fraction

import numpy as np
import pytest

from cmze.apps.langevin import GLEInputs, KolmogorovOracle, langevin_coeffs
from cmze.apps.mct import MCTInputs, mct_coeffs, omega_ladder
from cmze.numerics import KernelExpansion, MCTParams, solve_mct, solve_scalar_cmze


# -- Langevin ------------------------------------------------------------------

def test_langevin_published_low_orders():
    g = GLEInputs(mass=2.0, friction=0.5, beta=1.0, d2V=3.0)
    omega, f0, f1, f2 = langevin_coeffs(g)
    assert omega == -0.25
    assert f0 == -1.5  # -<d^2 V>/m
    assert f1 == 0.0


def test_langevin_rejects_nonpositive():
    with pytest.raises(ValueError):
        GLEInputs(mass=0.0, friction=1.0, beta=1.0)


def test_kolmogorov_oracle_low_moments_exact():
    o = KolmogorovOracle(mass=2, spring=3, friction=Fraction(1, 2), beta=1)
    gs = o.gammas(3)
    m, k, ga = Fraction(2), Fraction(3), Fraction(1, 2)
    assert gs[0] == -ga / m
    assert gs[1] == -k / m + ga**2 / m**2
    assert gs[2] == 2 * ga * k / m**2 - ga**3 / m**3
    assert gs[3] == k**2 / m**2 - 3 * k * ga**2 / m**3 + ga**4 / m**4


def test_kolmogorov_oracle_matches_displayed_f0_f1():
    o = KolmogorovOracle(mass=2, spring=3, friction=Fraction(1, 2), beta=1)
    lad = o.kernel_ladder(2)
    g = GLEInputs(mass=2.0, friction=0.5, beta=1.0, d2V=3.0)
    _, f0, f1, _ = langevin_coeffs(g)
    assert float(lad[0]) == f0
    assert float(lad[1]) == f1 == 0.0


def test_harmonic_memory_kernel_is_constant():
    # the harmonic tagged particle has an exactly constant kernel: every
    # composition coefficient above f_0 vanishes (the displayed quadratic
    # coefficient is inconsistent with this oracle; see the ledger)
    for params in [(2, 3, Fraction(1, 2), 1), (1, 1, 2, 3), (5, 2, Fraction(3, 4), 2)]:
        o = KolmogorovOracle(*params)
        lad = o.kernel_ladder(4)
        assert lad[0] == -o.k / o.m
        assert all(v == 0 for v in lad[1:])


def test_harmonic_gle_run_reproduces_damped_oscillator():
    # with the oracle ladder the memory equation is the damped oscillator
    o = KolmogorovOracle(mass=1, spring=1, friction=Fraction(1, 2), beta=1)
    lad = [float(v) for v in o.kernel_ladder(2)]
    k = KernelExpansion(omega=float(-o.ga / o.m), coefficients=lad)
    h, M = 1e-3, 2000
    tr = solve_scalar_cmze(k, h, M)
    # analytic: C'' + (ga/m) C' + (k/m) C = 0, C(0)=1, C'(0)=Omega
    ga, sp, m = 0.5, 1.0, 1.0
    w = np.sqrt(sp / m - (ga / (2 * m)) ** 2)
    t = tr.times
    expect = np.exp(-ga * t / (2 * m)) * (np.cos(w * t) - ga / (2 * m * w) * np.sin(w * t))
    assert np.max(np.abs(tr.values.real - expect)) < 1e-4


# -- mode-coupling -----------------------------------------------------------------

INP = MCTInputs(q=1.3, S=0.8, N=10.0, m=1.5, kBT=0.9, jdot_sq=4.0, jddot_sq=11.0)


def test_mct_published_zero_entries():
    w0, w2, iom = mct_coeffs(INP)
    oms = omega_ladder(INP, 2)
    # omega_0^1 = omega_2^1 = 0: upper diagonal entries vanish
    assert abs(oms[0][0, 0]) < 1e-12
    assert abs(oms[2][0, 0]) < 1e-12


def test_mct_streaming_matrix():
    _, _, iom = mct_coeffs(INP)
    assert iom[0, 0] == 0 and iom[1, 1] == 0
    assert iom[0, 1] == -1j * abs(INP.q)
    assert iom[1, 0] == -1j * abs(INP.q) * INP.kBT / (INP.m * INP.S)


def test_mct_omega0_from_ladder():
    w0, _, _ = mct_coeffs(INP)
    oms = omega_ladder(INP, 0)
    assert abs(oms[0][1, 1] - w0) < 1e-12


def test_mct_omega1_cancellation():
    oms = omega_ladder(INP, 1)
    assert np.max(np.abs(oms[1])) < 1e-12


def test_mct_omega2_matches_closed_form():
    _, w2, _ = mct_coeffs(INP)
    oms = omega_ladder(INP, 2)
    assert abs(oms[2][1, 1] - w2) < 1e-12
    assert np.max(np.abs(oms[2] - np.diag(np.diag(oms[2])))) < 1e-12


def test_mct_equipartition_degenerate_case():
    # <(dj/dt)^2> tuned so the zeroth coefficient vanishes
    q, S, N, m, kBT = 1.1, 0.7, 5.0, 1.2, 0.8
    jdot = (q**2 * kBT / (m * S)) * (N * kBT / m)
    inp = MCTInputs(q=q, S=S, N=N, m=m, kBT=kBT, jdot_sq=jdot)
    w0, _, _ = mct_coeffs(inp)
    assert abs(w0) < 1e-12


def test_mct_invalid_inputs():
    with pytest.raises(ValueError):
        MCTInputs(q=0.0, S=1.0, N=1.0, m=1.0, kBT=1.0, jdot_sq=1.0)
    with pytest.raises(ValueError):
        MCTInputs(q=1.0, S=-0.2, N=1.0, m=1.0, kBT=1.0, jdot_sq=1.0)


def test_mct_full_pipeline_stable():
    w0, w2, _ = mct_coeffs(
        MCTInputs(q=1.2, S=0.9, N=1.1, m=1.3, kBT=0.8, jdot_sq=0.7, jddot_sq=0.5)
    )
    params = MCTParams(q=1.2, S=0.9, N=1.1, m=1.3, kBT=0.8)
    tr = solve_mct(w0, w2, params, 2e-3, 1500)
    assert np.all(np.isfinite(tr.values.real))
    assert tr.values[0] == params.N * params.S
