"""Tests for ensembles: closed-form moments and quenched/annealed averages."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.linalg import expm

from bracketflow.ensembles import (
    ThermalParams,
    annealed_average_G,
    annealed_average_mc,
    figure_defaults,
    mean_cos_theta,
    mean_hamiltonian,
    quenched_average_G,
    quenched_average_mc,
    sweep_temperature,
    thermal_expectation,
)
from bracketflow.hermitian_core import SIGMA_X, SIGMA_Z, ReferenceFrame, from_bloch


def fig_params(beta):
    return figure_defaults(beta=beta)


def expectation_oracle(O, H, beta):
    """tr(O e^{-beta H}) / tr(e^{-beta H}) via scipy's matrix exponential."""
    w = expm(-beta * np.asarray(H, dtype=complex))
    return float((np.trace(O @ w) / np.trace(w)).real)


# ------------------------------------------------------------ mean_cos_theta

def test_mean_cos_theta_limits():
    assert abs(mean_cos_theta(1e-9, 1.0)) < 1e-9
    assert mean_cos_theta(1e4, 1.0) == pytest.approx(-1.0, abs=1e-3)
    assert mean_cos_theta(1e8, 1.0) == pytest.approx(-1.0, abs=1e-7)


def test_mean_cos_theta_quadrature_oracle():
    for y in (0.3, 2.0, 7.5, 20.0):
        a = 0.5 * y
        num, _ = quad(lambda x: x * np.exp(-a * x), -1, 1)
        den, _ = quad(lambda x: np.exp(-a * x), -1, 1)
        assert mean_cos_theta(y, 1.0) == pytest.approx(num / den, abs=1e-12)


def test_mean_cos_theta_value_at_2():
    assert mean_cos_theta(1.0, 2.0) == pytest.approx(-0.3130352855, abs=1e-9)


def test_mean_cos_theta_series_continuity():
    # the series branch joins the closed form smoothly at the threshold
    below = mean_cos_theta(0.99e-6, 1.0)
    above = mean_cos_theta(1.01e-6, 1.0)
    # step of 2e-8 in y moves the value by ~ y'/6 = 3e-9; the closed-form
    # branch adds cancellation noise of order 1e-10
    assert abs(below - above) < 1e-8


def test_mean_cos_theta_rejects_nonpositive():
    with pytest.raises(ValueError):
        mean_cos_theta(0.0, 1.0)


# ---------------------------------------------------------- mean_hamiltonian

def test_mean_hamiltonian_strong_coupling_limit():
    p = ThermalParams(beta=1.0, frame=ReferenceFrame(v=0.0, mu=2.0, lam=1e8),
                      nu=1.0, u0=0.5)
    expected = 0.5 * np.diag([0.5 - 1.0, 0.5 + 1.0])
    assert np.abs(mean_hamiltonian(p) - expected).max() < 1e-7


def test_mean_hamiltonian_weak_coupling_limit():
    p = ThermalParams(beta=1.0, frame=ReferenceFrame(v=0.0, mu=2.0, lam=1e-9),
                      nu=1.0, u0=2.0)
    assert np.abs(mean_hamiltonian(p) - np.eye(2)).max() < 1e-9


def test_mean_hamiltonian_value():
    p = ThermalParams(beta=1.0, frame=ReferenceFrame(v=0.0, mu=2.0, lam=1.0),
                      nu=1.0)
    c = mean_cos_theta(1.0, 2.0)
    assert np.allclose(mean_hamiltonian(p), 0.5 * np.diag([c, -c]))
    assert c == pytest.approx(-0.3130353, abs=1e-7)


def test_mean_hamiltonian_commutes_with_g():
    p = fig_params(1.0)
    mh = mean_hamiltonian(p)
    g = p.frame.matrix()
    assert np.abs(mh @ g - g @ mh).max() < 1e-12


# ------------------------------------------------------- thermal_expectation

def test_thermal_expectation_infinite_temperature():
    rng = np.random.default_rng(40)
    for n in (2, 3):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        o = 0.5 * (a + a.conj().T)
        h = np.diag(rng.standard_normal(n)).astype(complex)
        assert thermal_expectation(o, h, 0.0) == pytest.approx(
            float(np.trace(o).real) / n, abs=1e-12)


def test_thermal_expectation_two_level_energy():
    # O = H = sigma_z: <H> = -tanh(beta), from the two-level partition sum
    for beta in (0.2, 1.0, 3.0):
        val = thermal_expectation(SIGMA_Z, SIGMA_Z, beta)
        assert val == pytest.approx(-np.tanh(beta), abs=1e-12)


def test_thermal_expectation_bloch_vs_expm_oracle():
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = rng.standard_normal(3)
        n /= np.linalg.norm(n)
        p = rng.standard_normal(3)
        p /= np.linalg.norm(p)
        H = from_bloch(rng.uniform(-1, 1), rng.uniform(0.1, 3), n)
        O = from_bloch(rng.uniform(-2, 2), rng.uniform(0.1, 3), p)
        beta = rng.uniform(0, 4)
        assert thermal_expectation(O, H, beta) == pytest.approx(
            expectation_oracle(O, H, beta), abs=1e-10)


def test_thermal_expectation_angle_formula():
    # O = G = sigma_z, H with Bloch angle theta and nu = 2
    for theta in (0.4, 1.3, 2.8):
        n = np.array([np.sin(theta), 0.0, np.cos(theta)])
        H = from_bloch(0.0, 2.0, n)
        beta = 0.8
        assert thermal_expectation(SIGMA_Z, H, beta) == pytest.approx(
            -np.tanh(beta) * np.cos(theta), abs=1e-12)


def test_thermal_expectation_3x3_vs_expm():
    rng = np.random.default_rng(42)
    for _ in range(20):
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = 0.5 * (a + a.conj().T)
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        o = 0.5 * (b + b.conj().T)
        beta = rng.uniform(0, 3)
        assert thermal_expectation(o, h, beta) == pytest.approx(
            expectation_oracle(o, h, beta), abs=1e-9)


def test_thermal_expectation_validation():
    with pytest.raises(ValueError):
        thermal_expectation(SIGMA_Z, SIGMA_Z, -1.0)
    with pytest.raises(ValueError):
        thermal_expectation(np.eye(2), np.eye(3), 1.0)


# ------------------------------------------------------- closed-form averages

def test_averages_vanish_at_beta_zero():
    p = fig_params(0.0)
    assert quenched_average_G(p) == 0.0
    assert annealed_average_G(p) == 0.0


def test_figure_plateaus():
    p = fig_params(1e6)
    assert quenched_average_G(p) == pytest.approx(
        1.0 / np.tanh(10.0) - 0.1, abs=1e-9)
    assert quenched_average_G(p) == pytest.approx(0.9000000041, abs=1e-9)
    assert quenched_average_G(p) < 1.0
    assert annealed_average_G(p) == pytest.approx(1.0, abs=1e-9)


def test_averages_at_beta_5():
    p = fig_params(5.0)
    assert quenched_average_G(p) == pytest.approx(
        np.tanh(2.5) * 0.9000000041, abs=1e-7)
    assert annealed_average_G(p) == pytest.approx(np.tanh(2.25), abs=1e-9)


def test_averages_equal_first_derivative_at_zero():
    p0 = fig_params(0.0)
    h = 1e-6
    ph = fig_params(h)
    dq = (quenched_average_G(ph) - quenched_average_G(p0)) / h
    da = (annealed_average_G(ph) - annealed_average_G(p0)) / h
    assert abs(dq - da) / abs(dq) < 1e-6
    # common analytic slope: (mu/4) beta nu (coth(lam mu/2) - 2/(lam mu))
    slope = 0.25 * 2.0 * 1.0 * (1.0 / np.tanh(10.0) - 0.1)
    assert dq == pytest.approx(slope, rel=1e-5)


def test_averages_strong_coupling_limit():
    # lam -> infinity: both equal the plain two-level value mu/2 tanh(beta nu/2)
    # (the 2/(lam mu) correction must drop below the 1e-6 tolerance)
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=1e7)
    for beta in (0.5, 2.0):
        p = ThermalParams(beta=beta, frame=frame, nu=1.0)
        target = 0.5 * 2.0 * np.tanh(0.5 * beta)
        assert quenched_average_G(p) == pytest.approx(target, abs=1e-6)
        assert annealed_average_G(p) == pytest.approx(target, abs=1e-6)


def test_averages_bounded_by_half_mu():
    rng = np.random.default_rng(43)
    for _ in range(100):
        frame = ReferenceFrame(v=0.0, mu=rng.uniform(0.1, 5),
                               lam=rng.uniform(0.01, 100))
        p = ThermalParams(beta=rng.uniform(0, 50), frame=frame,
                          nu=rng.uniform(0.1, 5))
        assert abs(quenched_average_G(p)) <= 0.5 * frame.mu + 1e-12
        assert abs(annealed_average_G(p)) <= 0.5 * frame.mu + 1e-12


def test_v_offset_enters_additively():
    base = ThermalParams(beta=2.0, frame=ReferenceFrame(v=0.0, mu=2.0, lam=3.0),
                         nu=1.0)
    shifted = ThermalParams(beta=2.0,
                            frame=ReferenceFrame(v=0.8, mu=2.0, lam=3.0),
                            nu=1.0)
    assert quenched_average_G(shifted) - quenched_average_G(base) == \
        pytest.approx(0.4, abs=1e-12)
    assert annealed_average_G(shifted) - annealed_average_G(base) == \
        pytest.approx(0.4, abs=1e-12)


# --------------------------------------------------------------- Monte Carlo

def test_quenched_mc_identity_observable():
    p = fig_params(5.0)
    mean, se = quenched_average_mc(np.eye(2), p, n_samples=1000, seed=1)
    assert mean == pytest.approx(1.0, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)


def test_quenched_mc_beta_zero():
    p = fig_params(0.0)
    rng = np.random.default_rng(44)
    a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    o = 0.5 * (a + a.conj().T)
    mean, se = quenched_average_mc(o, p, n_samples=1000, seed=2)
    assert mean == pytest.approx(float(np.trace(o).real) / 2, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)


def test_quenched_mc_matches_closed_form():
    p = fig_params(5.0)
    g = p.frame.matrix()
    mean, se = quenched_average_mc(g, p, n_samples=100_000, seed=3)
    assert abs(mean - quenched_average_G(p)) < 3 * se


def test_quenched_mc_deterministic():
    p = fig_params(2.0)
    g = p.frame.matrix()
    assert quenched_average_mc(g, p, 5000, seed=4) == \
        quenched_average_mc(g, p, 5000, seed=4)


def test_quenched_mc_u0_drops_out():
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=3.0)
    p0 = ThermalParams(beta=2.0, frame=frame, nu=1.0, u0=0.0)
    p1 = ThermalParams(beta=2.0, frame=frame, nu=1.0, u0=5.0)
    g = frame.matrix()
    m0, _ = quenched_average_mc(g, p0, 2000, seed=5)
    m1, _ = quenched_average_mc(g, p1, 2000, seed=5)
    assert m0 == pytest.approx(m1, abs=1e-12)


def test_annealed_mc_closed_form_mean_h():
    p = fig_params(5.0)
    g = p.frame.matrix()
    assert annealed_average_mc(g, p) == pytest.approx(
        annealed_average_G(p), abs=1e-12)
    assert annealed_average_mc(np.eye(2), p) == pytest.approx(1.0, abs=1e-12)


def test_annealed_mc_sampled_mean_h():
    p = fig_params(5.0)
    g = p.frame.matrix()
    val = annealed_average_mc(g, p, n_samples=200_000, seed=6,
                              use_mc_mean_h=True)
    assert abs(val - annealed_average_G(p)) < 5e-3
    with pytest.raises(ValueError):
        annealed_average_mc(g, p, n_samples=0, use_mc_mean_h=True)


# ------------------------------------------------------------ temperature sweep

def test_sweep_temperature_shape_and_tails():
    p = fig_params(1.0)
    curve = sweep_temperature(p, 0.01, 10.0, 50)
    assert len(curve.temperatures) == 50
    assert np.all(np.diff(curve.temperatures) > 0)
    # T -> 0 plateaus
    assert curve.quenched[0] == pytest.approx(0.9000000041, abs=1e-6)
    assert curve.annealed[0] == pytest.approx(1.0, abs=1e-6)
    # T -> infinity decay
    assert abs(curve.quenched[-1]) < 0.1
    assert abs(curve.annealed[-1]) < 0.1
    # annealed dominates quenched at every finite temperature (tanh concavity)
    assert np.all(curve.annealed >= curve.quenched - 1e-12)


def test_sweep_temperature_validation():
    p = fig_params(1.0)
    with pytest.raises(ValueError):
        sweep_temperature(p, 1.0, 0.5, 10)
    with pytest.raises(ValueError):
        sweep_temperature(p, 0.1, 1.0, 1)


def test_thermal_params_validation():
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=1.0)
    with pytest.raises(ValueError):
        ThermalParams(beta=-1.0, frame=frame, nu=1.0)
    with pytest.raises(ValueError):
        ThermalParams(beta=1.0, frame=frame, nu=0.0)
