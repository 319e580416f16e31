"""Tests for thermalization: SDE steps, ensembles, equilibrium sampling."""

import numpy as np
import pytest
from scipy.integrate import quad

from bracketflow.hermitian_core import ReferenceFrame
from bracketflow.thermalization import (
    EnsembleStats,
    Interpretation,
    SdeParams,
    sample_equilibrium,
    sde_step_spherical,
    sde_step_x,
    simulate_ensemble,
    simulate_path,
)

COV = Interpretation.COVARIANT_ITO
LIT = Interpretation.LITERAL_COORDINATE


def make_params(lam_mu, nu=1.0, interpretation=COV):
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=lam_mu / 2.0)
    return SdeParams(frame=frame, nu=nu, interpretation=interpretation)


def quadrature_mean_x(a):
    """<x> under e^{-a x} dx on [-1, 1], by quadrature."""
    num, _ = quad(lambda x: x * np.exp(-a * x), -1, 1)
    den, _ = quad(lambda x: np.exp(-a * x), -1, 1)
    return num / den


# --------------------------------------------------------------- sde_step_x

def test_step_x_pole_repulsion():
    params = make_params(2.0, nu=1.0)
    dt = 1e-4
    # at x = +-1 the omega and diffusion factors vanish; drift is -4 nu x dt
    assert sde_step_x(1.0, params, dt, (0.0, 0.0)) == pytest.approx(
        1.0 - 4.0 * dt)
    assert sde_step_x(-1.0, params, dt, (0.0, 0.0)) == pytest.approx(
        -1.0 + 4.0 * dt)


def test_step_x_zero_drift_at_origin_when_omega_zero():
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=1e-12)
    params = SdeParams(frame=frame, nu=1.0)
    assert sde_step_x(0.0, params, 1e-4, (0.0, 0.0)) == pytest.approx(
        0.0, abs=1e-15)


def test_step_x_drift_value():
    # omega = 20, x = 0, zero noise: dx = -omega dt
    params = make_params(20.0, nu=0.5)  # omega = lam*nu*mu = 10*0.5*2 = 10
    params = SdeParams(frame=ReferenceFrame(v=0.0, mu=2.0, lam=10.0), nu=1.0)
    dt = 1e-4
    assert sde_step_x(0.0, params, dt, (0.0, 0.0)) == pytest.approx(-20.0 * dt)


def test_step_x_literal_vs_covariant_curvature():
    dt = 1e-4
    x = 0.5
    d_cov = sde_step_x(x, make_params(2.0, interpretation=COV), dt, (0, 0)) - x
    d_lit = sde_step_x(x, make_params(2.0, interpretation=LIT), dt, (0, 0)) - x
    # difference is exactly the extra -2 nu x dt curvature drift
    assert d_cov - d_lit == pytest.approx(-2.0 * 1.0 * x * dt)


def test_step_x_clamps():
    params = make_params(2.0)
    assert sde_step_x(0.99, params, 1.0, (10.0, 10.0)) <= 1.0
    with pytest.raises(ValueError):
        sde_step_x(0.0, params, -1e-3, (0.0, 0.0))


# -------------------------------------------------------- sde_step_spherical

def test_step_spherical_equator_drift():
    # at theta = pi/2 the cot correction vanishes: both readings agree
    dt = 1e-4
    for interp in (COV, LIT):
        params = make_params(2.0, interpretation=interp)
        theta, _ = sde_step_spherical(np.pi / 2, 0.0, params, dt, (0.0, 0.0))
        assert theta - np.pi / 2 == pytest.approx(params.omega * dt)


def test_step_spherical_literal_deterministic_flow():
    # zero noise, literal: theta' = omega sin(theta)
    params = make_params(2.0, interpretation=LIT)
    dt = 1e-5
    for theta0 in (0.3, 1.2, 2.7):
        theta, _ = sde_step_spherical(theta0, 0.0, params, dt, (0.0, 0.0))
        assert theta - theta0 == pytest.approx(
            params.omega * np.sin(theta0) * dt)


def test_step_spherical_phi_update():
    # dphi at theta = pi/2 with draws (a, b): -sqrt(2 nu dt) (a - b)
    params = make_params(2.0, nu=1.5)
    dt = 1e-4
    a, b = 0.7, -0.2
    _, phi = sde_step_spherical(np.pi / 2, 1.0, params, dt, (a, b))
    assert phi == pytest.approx(1.0 - np.sqrt(2 * 1.5 * dt) * (a - b))


def test_step_spherical_reflection_and_wrap():
    params = make_params(2.0)
    theta, phi = sde_step_spherical(0.01, 6.2, params, 1e-2, (-5.0, -5.0))
    assert 1e-6 <= theta <= np.pi - 1e-6
    assert 0.0 <= phi < 2 * np.pi


# --------------------------------------------------------- simulate_ensemble

def test_ensemble_deterministic_given_seed():
    params = make_params(2.0)
    kwargs = dict(theta0=np.pi / 2, phi0=0.0, params=params,
                  t_end=0.5, dt=1e-3, n_paths=64, seed=42)
    s1 = simulate_ensemble(**kwargs)
    s2 = simulate_ensemble(**kwargs)
    assert s1.mean_cos_theta == s2.mean_cos_theta
    assert s1.std_error == s2.std_error
    assert np.array_equal(s1.histogram_counts, s2.histogram_counts)


def test_ensemble_histogram_counts_sum():
    params = make_params(2.0)
    stats = simulate_ensemble(np.pi / 2, 0.0, params, 0.2, 1e-3, 100, seed=1)
    assert stats.histogram_counts.sum() == stats.n_paths == 100
    assert isinstance(stats, EnsembleStats)


def test_ensemble_zero_noise_limit_tracks_closed_form():
    # nu tiny: paths ride the deterministic flow cos(theta_t) = tanh(c0 - wt)
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=1.0)
    params = SdeParams(frame=frame, nu=1e-8)
    t_end, dt = 0.5, 1e-4
    theta0 = np.pi / 3
    stats = simulate_ensemble(theta0, 0.0, params, t_end, dt, 8, seed=5)
    omega = params.omega
    expected = np.tanh(np.arctanh(np.cos(theta0)) - omega * t_end)
    assert abs(stats.mean_cos_theta - expected) < 10 * dt * omega + 1e-3


def test_ensemble_equilibrium_mean_small():
    # one modest equilibrium run; the full 3-regime sweep lives in acceptance
    params = make_params(2.0)
    rate = max(params.omega, params.nu)
    stats = simulate_ensemble(np.pi / 2, 0.0, params, 20.0 / rate,
                              1e-3 / rate, 2000, seed=7)
    target = quadrature_mean_x(1.0)  # a = lam*mu/2 = 1
    assert target == pytest.approx(1.0 - 1.0 / np.tanh(1.0), abs=1e-12)
    assert abs(stats.mean_cos_theta - target) < 4 * stats.std_error


def test_ensemble_theta_formulation_agrees():
    params = make_params(2.0)
    rate = max(params.omega, params.nu)
    common = dict(theta0=np.pi / 2, phi0=0.0, params=params,
                  t_end=10.0 / rate, dt=1e-3 / rate, n_paths=1500, seed=9)
    sx = simulate_ensemble(use_x_formulation=True, **common)
    st = simulate_ensemble(use_x_formulation=False, **common)
    pooled = np.hypot(sx.std_error, st.std_error)
    assert abs(sx.mean_cos_theta - st.mean_cos_theta) < 4 * pooled


def test_literal_and_covariant_distinguishable():
    # lam*mu = 2: the two readings settle on different stationary laws
    rate = 2.0
    kwargs = dict(theta0=np.pi / 2, phi0=0.0, t_end=20.0 / rate,
                  dt=1e-3 / rate, n_paths=4000, seed=11)
    s_cov = simulate_ensemble(params=make_params(2.0, interpretation=COV),
                              **kwargs)
    s_lit = simulate_ensemble(params=make_params(2.0, interpretation=LIT),
                              **kwargs)
    pooled = np.hypot(s_cov.std_error, s_lit.std_error)
    assert abs(s_cov.mean_cos_theta - s_lit.mean_cos_theta) > 6 * pooled
    # literal stationary law is e^{-a cos theta} d theta; check its own mean
    num, _ = quad(lambda t: np.cos(t) * np.exp(-np.cos(t)), 0, np.pi)
    den, _ = quad(lambda t: np.exp(-np.cos(t)), 0, np.pi)
    assert abs(s_lit.mean_cos_theta - num / den) < 4 * s_lit.std_error


def test_ensemble_validation():
    params = make_params(2.0)
    with pytest.raises(ValueError):
        simulate_ensemble(0.5, 0.0, params, 1.0, 1e-3, 0, seed=0)
    with pytest.raises(ValueError):
        simulate_ensemble(0.5, 0.0, params, 1.0, -1e-3, 10, seed=0)
    with pytest.raises(ValueError):
        SdeParams(frame=ReferenceFrame(v=0.0, mu=2.0, lam=1.0), nu=-1.0)


# ------------------------------------------------------------ simulate_path

def test_single_path_reproducible_and_consistent():
    params = make_params(2.0)
    t1 = simulate_path(np.pi / 2, 0.0, params, 0.2, 1e-3, seed=3)
    t2 = simulate_path(np.pi / 2, 0.0, params, 0.2, 1e-3, seed=3)
    for a, b in zip(t1, t2):
        assert np.array_equal(a, b)
    ts, thetas, phis, xs = t1
    assert np.abs(xs - np.cos(thetas)).max() < 1e-12
    assert np.all((phis >= 0) & (phis < 2 * np.pi))
    assert np.all(np.diff(ts) > 0)


# -------------------------------------------------------- sample_equilibrium

def test_sample_equilibrium_uniform_limit():
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=1e-12)
    params = SdeParams(frame=frame, nu=1.0)
    samples = sample_equilibrium(params, 200_000, seed=100)
    x = np.cos(samples[:, 0])
    assert abs(x.mean()) < 3.0 * x.std(ddof=1) / np.sqrt(len(x))
    # uniform x has variance 1/3
    assert x.var() == pytest.approx(1.0 / 3.0, abs=5e-3)


def test_sample_equilibrium_concentrates_for_large_a():
    params = make_params(200.0)  # a = 100
    x = np.cos(sample_equilibrium(params, 10_000, seed=101)[:, 0])
    assert x.mean() < -0.98
    assert x.min() >= -1.0


def test_sample_equilibrium_mean_and_variance_vs_quadrature():
    params = make_params(2.0)  # a = 1
    x = np.cos(sample_equilibrium(params, 1_000_000, seed=102)[:, 0])
    target_mean = quadrature_mean_x(1.0)
    assert target_mean == pytest.approx(-0.3130353, abs=1e-7)
    se = x.std(ddof=1) / np.sqrt(len(x))
    assert abs(x.mean() - target_mean) < 3 * se
    num, _ = quad(lambda t: t * t * np.exp(-t), -1, 1)
    den, _ = quad(lambda t: np.exp(-t), -1, 1)
    target_var = num / den - target_mean**2
    assert abs(x.var(ddof=1) - target_var) < 5 * se  # loose second-moment check


def test_sample_equilibrium_phi_uniform():
    params = make_params(2.0)
    phi = sample_equilibrium(params, 100_000, seed=103)[:, 1]
    assert np.all((phi >= 0) & (phi < 2 * np.pi))
    assert abs(phi.mean() - np.pi) < 3 * phi.std(ddof=1) / np.sqrt(len(phi))


def test_sample_equilibrium_validation():
    with pytest.raises(ValueError):
        sample_equilibrium(make_params(2.0), 0, seed=0)
