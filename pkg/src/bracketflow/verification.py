"""Cross-module verification suite.

Each check returns a CheckResult and is independent of the others; the
CLI `verify` command and the acceptance test module both run these.
Tolerances are fixed here, not configurable.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import bracket_flow as bf
from . import ensembles as ens
from . import fokker_planck as fp
from . import thermalization as th
from .hermitian_core import (
    SIGMA_X,
    SIGMA_Z,
    ReferenceFrame,
    hermitian,
    to_bloch,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        name, passed, detail = fn(*args, **kwargs)
        return CheckResult(name=name, passed=passed, detail=detail,
                           seconds=time.perf_counter() - t0)
    return wrapper


def random_hermitian(rng, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (a + a.conj().T)
    return hermitian(scale * h / np.linalg.norm(h, 2))


def random_hermitian_gapped(rng, n: int, min_gap: float = 0.6) -> np.ndarray:
    """Random Hermitian with eigenvalues in [-1, 1] and a guaranteed gap."""
    eigs = np.linspace(-1.0, 1.0, n) + rng.uniform(-0.1, 0.1, n) * min_gap
    q, _ = np.linalg.qr(rng.standard_normal((n, n)) +
                        1j * rng.standard_normal((n, n)))
    return hermitian(q @ np.diag(eigs) @ q.conj().T)


@_timed
def check_isospectrality():
    """Criterion 1: eigenvalue drift of the RK4 flow."""
    traj = bf.integrate_flow(SIGMA_X, SIGMA_Z, lam=0.5,
                             variant=bf.FlowVariant.PURE_DOUBLE_BRACKET,
                             t_end=5.0, dt=5e-4, sample_every=200)
    drift2 = float(np.abs(traj.eigenvalues - traj.eigenvalues[0]).max())
    rng = np.random.default_rng(11)
    h4 = random_hermitian(rng, 4, scale=2.0)
    g4 = random_hermitian(rng, 4, scale=2.0)
    dt4 = 1e-3 / (0.5 * np.linalg.norm(h4) * np.linalg.norm(g4))
    traj4 = bf.integrate_flow(h4, g4, lam=0.5,
                              variant=bf.FlowVariant.PURE_DOUBLE_BRACKET,
                              t_end=2.0, dt=min(dt4, 1e-3), sample_every=500)
    drift4 = float(np.abs(traj4.eigenvalues - traj4.eigenvalues[0]).max())
    ok = drift2 < 1e-9 and drift4 < 1e-7
    return ("isospectrality", ok,
            f"2x2 drift {drift2:.2e} (< 1e-9), 4x4 drift {drift4:.2e} (< 1e-7)")


@_timed
def check_closed_form_agreement():
    """Criterion 2: RK4 vs explicit solution, and the asymptotic diagonal."""
    lam = 0.5  # omega = lam * 2 * 2 = 2
    traj = bf.integrate_flow(SIGMA_X, SIGMA_Z, lam=lam,
                             variant=bf.FlowVariant.PURE_DOUBLE_BRACKET,
                             t_end=8.0, dt=5e-4, sample_every=100)
    devs = [np.abs(s - bf.closed_form_2x2(SIGMA_X, SIGMA_Z, lam, t)).max()
            for t, s in zip(traj.times, traj.states)]
    max_dev = float(np.max(devs))
    final_dev = float(np.abs(traj.states[-1] - np.diag([-1.0, 1.0])).max())
    ok = max_dev < 1e-6 and final_dev < 1e-6
    return ("closed-form agreement", ok,
            f"max entry dev {max_dev:.2e} (< 1e-6), "
            f"asymptote dev {final_dev:.2e} (< 1e-6)")


@_timed
def check_commutator_decay():
    """Criterion 3: commutator decay, monotone tr(HG), and the exact rate."""
    lam = 0.5
    omega = 2.0
    dt = 5e-4
    sample_every = 10
    traj = bf.integrate_flow(SIGMA_X, SIGMA_Z, lam=lam,
                             variant=bf.FlowVariant.PURE_DOUBLE_BRACKET,
                             t_end=10.0 / omega, dt=dt,
                             sample_every=sample_every)
    decay = traj.comm_norm_sq[-1] / traj.comm_norm_sq[0]
    slack = 1e-12
    mono_comm = bool(np.all(np.diff(traj.comm_norm_sq) <= slack))
    mono_trhg = bool(np.all(np.diff(traj.tr_hg) <= slack))
    i = len(traj.times) // 2
    h_s = traj.times[i + 1] - traj.times[i]
    fd = (traj.tr_hg[i + 1] - traj.tr_hg[i - 1]) / (2.0 * h_s)
    exact = -lam * traj.comm_norm_sq[i]
    rel = abs(fd - exact) / abs(exact)
    ok = decay < 1e-8 and mono_comm and mono_trhg and rel < 1e-4
    return ("commutator decay + Lyapunov", ok,
            f"decay {decay:.2e} (< 1e-8), monotone comm={mono_comm}, "
            f"trHG={mono_trhg}, d/dt tr(HG) rel err {rel:.2e} (< 1e-4)")


@_timed
def check_gradient_flow_identity():
    """Criterion 4: metric/potential drift equals the reduced vector field."""
    rng = np.random.default_rng(4)
    max_dev = 0.0
    max_fd = 0.0
    h = 1e-5
    for _ in range(1000):
        theta = rng.uniform(0.01, np.pi - 0.01)
        phi = rng.uniform(0.0, 2.0 * np.pi)
        lam = rng.uniform(0.1, 5.0)
        nu = rng.uniform(0.1, 5.0)
        mu = rng.uniform(0.1, 5.0)
        frame = ReferenceFrame(v=rng.uniform(-2, 2), mu=mu, lam=lam)
        gd = bf.gradient_drift(theta, phi, frame, nu)
        vf = bf.bloch_vector_field(theta, phi, frame, nu,
                                   bf.FlowVariant.PURE_DOUBLE_BRACKET)
        omega = lam * nu * mu
        scale = max(1.0, omega)
        max_dev = max(max_dev,
                      abs(gd.dtheta - vf[0]) / scale, abs(gd.dphi - vf[1]))
        fd_grad = (bf.potential_on_sphere(theta + h, frame) -
                   bf.potential_on_sphere(theta - h, frame)) / (2.0 * h)
        fd_drift = -0.5 * lam * nu * 4.0 * fd_grad
        max_fd = max(max_fd, abs(fd_drift - gd.dtheta) / scale)
    ok = max_dev < 1e-10 and max_fd < 100.0 * h**2
    return ("gradient-flow identity", ok,
            f"max drift dev {max_dev:.2e} (< 1e-10), "
            f"max FD dev {max_fd:.2e} (< {100.0 * h**2:.0e})")


@_timed
def check_fp_stationarity():
    """Criterion 5: second-order residual decay and dV normalization."""
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=1.0)  # lambda*mu = 2, a = 1
    params = th.SdeParams(frame=frame, nu=1.0)
    residuals = []
    for m in (101, 201, 401):
        theta = fp.make_grid(fp.GridVariable.THETA, m)
        vals = np.exp(-params.a * np.cos(theta))
        grid = fp.DensityGrid(fp.GridVariable.THETA, theta, vals,
                              fp.Measure.COORDINATE).normalized()
        residuals.append(fp.stationarity_residual(grid, params))
    r1 = residuals[0] / residuals[1]
    r2 = residuals[1] / residuals[2]
    from scipy.integrate import quad
    total, _ = quad(lambda t: fp.stationary_density(t, frame)
                    * 0.25 * np.sin(t) * 2.0 * np.pi, 0.0, np.pi,
                    epsabs=1e-12, epsrel=1e-12)
    ok = (3.5 < r1 < 4.5) and (3.5 < r2 < 4.5) and abs(total - 1.0) < 1e-8
    return ("FP stationarity", ok,
            f"refinement ratios {r1:.2f}, {r2:.2f} (4 +- 0.5), "
            f"dV normalization {total:.12f} (1 +- 1e-8)")


@_timed
def check_sde_equilibrium(quick: bool = False):
    """Criterion 6: ensemble mean and histogram vs the canonical density."""
    n_paths = 2000 if quick else 10_000
    details = []
    ok = True
    for lam_mu, seed in ((0.5, 101), (2.0, 102), (20.0, 103)):
        frame = ReferenceFrame(v=0.0, mu=2.0, lam=lam_mu / 2.0)
        params = th.SdeParams(frame=frame, nu=1.0)
        rate = max(params.omega, params.nu)
        stats_out = th.simulate_ensemble(
            theta0=np.pi / 2, phi0=0.0, params=params,
            t_end=20.0 / rate, dt=1e-3 / rate, n_paths=n_paths, seed=seed)
        target = ens.mean_cos_theta(frame.lam, frame.mu)
        z = (stats_out.mean_cos_theta - target) / stats_out.std_error
        p_val = _chi_square_vs_exponential(stats_out, params.a)
        this_ok = abs(z) < 3.0 and p_val > 0.001
        ok = ok and this_ok
        details.append(f"lam*mu={lam_mu}: z={z:+.2f}, chi2 p={p_val:.3g}")
    return ("SDE equilibrium", ok, "; ".join(details))


def _chi_square_vs_exponential(stats_out: th.EnsembleStats, a: float) -> float:
    """Chi-square p-value of the final-x histogram against exp(-a x) dx.

    Bins with expected count below 5 are merged into their neighbor.
    """
    edges = stats_out.histogram_edges
    counts = stats_out.histogram_counts.astype(float)
    n = counts.sum()
    if a < 1e-12:
        probs = np.diff(edges) / 2.0
    else:
        cdf = np.exp(-a * edges)
        probs = (cdf[:-1] - cdf[1:])
        probs = probs / probs.sum()
    expected = probs * n
    # merge low-expectation bins from the right (the thin tail)
    merged_counts, merged_expected = [], []
    acc_c = acc_e = 0.0
    for c, e in zip(counts, expected):
        acc_c += c
        acc_e += e
        if acc_e >= 5.0:
            merged_counts.append(acc_c)
            merged_expected.append(acc_e)
            acc_c = acc_e = 0.0
    if acc_e > 0 and merged_expected:
        merged_counts[-1] += acc_c
        merged_expected[-1] += acc_e
    mc = np.array(merged_counts)
    me = np.array(merged_expected)
    me = me * (mc.sum() / me.sum())
    chi2 = float(np.sum((mc - me) ** 2 / me))
    dof = max(1, len(mc) - 1)
    return float(stats.chi2.sf(chi2, dof))


@_timed
def check_figure2_closed_forms():
    """Criterion 7: plateau values and beta -> 0 behavior of both averages."""
    frame = ReferenceFrame(v=0.0, mu=2.0, lam=10.0)
    big_beta = ens.ThermalParams(beta=1e6, frame=frame, nu=1.0)
    q_plateau = ens.quenched_average_G(big_beta)
    a_plateau = ens.annealed_average_G(big_beta)
    q_target = 1.0 / np.tanh(10.0) - 0.1
    zero = ens.ThermalParams(beta=0.0, frame=frame, nu=1.0)
    q0 = ens.quenched_average_G(zero)
    a0 = ens.annealed_average_G(zero)
    h = 1e-6
    ph = ens.ThermalParams(beta=h, frame=frame, nu=1.0)
    dq = (ens.quenched_average_G(ph) - q0) / h
    da = (ens.annealed_average_G(ph) - a0) / h
    rel = abs(dq - da) / abs(dq)
    ok = (abs(q_plateau - q_target) < 1e-6 and q_plateau < 1.0
          and abs(a_plateau - 1.0) < 1e-6
          and q0 == 0.0 and a0 == 0.0 and rel < 1e-6)
    return ("Figure-2 closed forms", ok,
            f"quenched plateau {q_plateau:.10f} (target {q_target:.10f}), "
            f"annealed plateau {a_plateau:.10f}, slope rel dev {rel:.2e}")


@_timed
def check_quenched_mc(quick: bool = False):
    """Criterion 8: Monte Carlo quenched average vs the closed form."""
    rng = np.random.default_rng(8)
    n = 20_000 if quick else 100_000
    n_tuples = 6 if quick else 12
    worst = 0.0
    ok = True
    for k in range(n_tuples):
        beta = rng.uniform(0.1, 5.0)
        lam = rng.uniform(0.2, 5.0)
        mu = rng.uniform(0.5, 3.0)
        nu = rng.uniform(0.5, 3.0)
        frame = ReferenceFrame(v=0.0, mu=mu, lam=lam)
        p = ens.ThermalParams(beta=beta, frame=frame, nu=nu)
        G = frame.matrix()
        mc, se = ens.quenched_average_mc(G, p, n_samples=n, seed=800 + k)
        target = ens.quenched_average_G(p)
        z = abs(mc - target) / se
        worst = max(worst, z)
        ok = ok and z < 3.0
    return ("quenched MC vs closed form", ok,
            f"{n_tuples} tuples, n = {n}, worst |z| = {worst:.2f} (< 3)")


@_timed
def check_unitary_modified():
    """Criterion 9: spectrum preservation and the phi_t = phi_0 + mu t drift."""
    lam = 0.25  # nu = 2, mu = 2 -> omega = 1
    mu = 2.0
    traj = bf.integrate_flow(SIGMA_X, SIGMA_Z, lam=lam,
                             variant=bf.FlowVariant.UNITARY_MODIFIED,
                             t_end=2.0, dt=2e-4, sample_every=10)
    drift = float(np.abs(traj.eigenvalues - traj.eigenvalues[0]).max())
    phis = np.unwrap([to_bloch(s).phi for s in traj.states])
    phi_dev = float(np.abs(phis - phis[0] - mu * traj.times).max())
    thetas = np.linspace(0.1, np.pi - 0.1, 10)
    frame = ReferenceFrame(v=0.0, mu=mu, lam=lam)
    dphis = [bf.bloch_vector_field(t, 0.3, frame, 2.0,
                                   bf.FlowVariant.UNITARY_MODIFIED)[1]
             for t in thetas]
    field_ok = bool(np.allclose(dphis, mu, atol=1e-15))
    ok = drift < 1e-9 and phi_dev < 1e-6 and field_ok
    return ("unitary-modified flow", ok,
            f"eig drift {drift:.2e} (< 1e-9), phi dev {phi_dev:.2e} (< 1e-6), "
            f"dphi/dt == mu: {field_ok}")


@_timed
def check_anti_sorting(quick: bool = False):
    """Criterion 10: converged diagonal minimizes tr(HG) over all pairings."""
    n_seeds = 5 if quick else 10
    ok = True
    failures = []
    for n in (3, 4):
        for seed in range(n_seeds):
            rng = np.random.default_rng(1000 * n + seed)
            h0 = random_hermitian_gapped(rng, n)
            g = np.diag(np.linspace(1.0, -1.0, n) +
                        rng.uniform(-0.05, 0.05, n)).astype(complex)
            report = bf.anti_sorting_check(h0, g, lam=2.0, max_time=120.0)
            if not (report.converged and report.anti_sorted):
                ok = False
                failures.append(f"N={n} seed={seed}")
    detail = "all pairings anti-sorted" if ok else "failed: " + ", ".join(failures)
    return ("N-dim anti-sorting", ok, f"{2 * n_seeds} cases; {detail}")


def run_all(quick: bool = False) -> list[CheckResult]:
    return [
        check_isospectrality(),
        check_closed_form_agreement(),
        check_commutator_decay(),
        check_gradient_flow_identity(),
        check_fp_stationarity(),
        check_sde_equilibrium(quick=quick),
        check_figure2_closed_forms(),
        check_quenched_mc(quick=quick),
        check_unitary_modified(),
        check_anti_sorting(quick=quick),
    ]
