"""Deterministic double-bracket dynamics.

Fixed-step RK4 integration of dH/dt = -lambda [H, [H, G]] (optionally with
the unitary term -i[H, G] added), the explicit 2x2 solution, the reduction
to the Bloch sphere, the gradient-flow structure of the reduced dynamics,
and trajectory diagnostics.

Sign convention for the Lyapunov functions: along the flow tr(H_t G) is
monotone non-increasing and tr(H_t - G)^2 is monotone non-DEcreasing, with
d/dt tr(H_t G) = -lambda tr X^2 <= 0 where X = i[H, G].  The diagnostics
report asserts this self-consistent version.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .hermitian_core import (
    ReferenceFrame,
    commutator,
    commutator_norm_sq,
    eigenvalues,
    hermitian,
    is_degenerate,
    to_bloch,
    trace_distance_sq,
)

EIGENVALUE_DRIFT_ABORT = 1e-3


class FlowVariant(enum.Enum):
    PURE_DOUBLE_BRACKET = "pure"
    UNITARY_MODIFIED = "unitary"


class StepInstabilityError(RuntimeError):
    """Eigenvalue drift exceeded the abort threshold; reduce dt."""


class DegenerateFlowError(ValueError):
    """Closed form undefined for degenerate H0 or G (fixed point of the flow)."""


@dataclass(frozen=True)
class Trajectory:
    """Decimated samples of an integrated flow with per-sample diagnostics."""

    times: np.ndarray            # (m,), strictly increasing, starts at 0
    states: np.ndarray           # (m, N, N) complex Hermitian
    eigenvalues: np.ndarray      # (m, N) ascending per sample
    tr_hg: np.ndarray            # (m,) tr(H_t G)
    trace_dist_sq: np.ndarray    # (m,) tr(H_t - G)^2
    comm_norm_sq: np.ndarray     # (m,) tr([G,H]^dag [G,H])


@dataclass(frozen=True)
class DiagnosticsReport:
    eig_drift_max: float
    trace_drift: float
    det_drift: float
    tr_hg: np.ndarray
    tr_hg_non_increasing: bool
    trace_dist_sq: np.ndarray
    trace_dist_sq_non_decreasing: bool
    final_comm_norm_sq: float
    note: str = ("monotonicity convention: tr(H_t G) non-increasing and "
                 "tr(H_t - G)^2 non-decreasing along the flow, consistent "
                 "with d/dt tr(H_t G) = -lambda tr X^2")


@dataclass(frozen=True)
class AntiSortingReport:
    converged: bool
    anti_sorted: bool
    final_comm_norm: float
    limit_diagonal: np.ndarray
    best_pairing_diagonal: np.ndarray
    tr_hg_final: float
    tr_hg_min: float


def _rhs(H: np.ndarray, G: np.ndarray, lam: float, variant: FlowVariant) -> np.ndarray:
    K = H @ G - G @ H
    out = -lam * (H @ K - K @ H)
    if variant is FlowVariant.UNITARY_MODIFIED:
        # Unitary precession oriented so the azimuth drifts at +mu in the
        # standard spherical convention (phi_t = phi_0 + mu t).
        out = out + 1j * K
    return out


def integrate_flow(H0, G, lam: float, variant: FlowVariant, t_end: float,
                   dt: float, sample_every: int = 1,
                   check_stability: bool = True) -> Trajectory:
    """Integrate the (optionally unitary-modified) double-bracket flow.

    Classical RK4 with fixed step dt; samples are stored every
    ``sample_every`` steps (plus the initial and final states).
    """
    H = hermitian(H0)
    Gm = hermitian(G)
    if H.shape != Gm.shape:
        raise ValueError(f"dimension mismatch: {H.shape} vs {Gm.shape}")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")

    n_steps = int(round(t_end / dt))
    times = [0.0]
    states = [H.copy()]
    eig0 = eigenvalues(H)
    scale = max(1.0, float(np.abs(eig0).max()))

    for step in range(1, n_steps + 1):
        k1 = _rhs(H, Gm, lam, variant)
        k2 = _rhs(H + 0.5 * dt * k1, Gm, lam, variant)
        k3 = _rhs(H + 0.5 * dt * k2, Gm, lam, variant)
        k4 = _rhs(H + dt * k3, Gm, lam, variant)
        H = H + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        H = 0.5 * (H + H.conj().T)
        if step % sample_every == 0 or step == n_steps:
            times.append(step * dt)
            states.append(H.copy())
            if check_stability:
                drift = float(np.abs(eigenvalues(H) - eig0).max())
                if drift > EIGENVALUE_DRIFT_ABORT * scale:
                    raise StepInstabilityError(
                        f"eigenvalue drift {drift:.3e} at t = {step * dt:.4g}; "
                        f"reduce dt (currently {dt:.3e})")

    states = np.array(states)
    times = np.array(times)
    eigs = np.array([eigenvalues(s) for s in states])
    tr_hg = np.array([float(np.trace(s @ Gm).real) for s in states])
    tdist = np.array([trace_distance_sq(s, Gm) for s in states])
    cnorm = np.array([commutator_norm_sq(s, Gm) for s in states])
    return Trajectory(times=times, states=states, eigenvalues=eigs,
                      tr_hg=tr_hg, trace_dist_sq=tdist, comm_norm_sq=cnorm)


def _eigbasis_2x2(G: np.ndarray):
    """Unitary V whose first column is G's larger-eigenvalue eigenvector.

    In this basis G = diag((v + mu)/2, (v - mu)/2), i.e. g = (0, 0, 1).
    """
    b = to_bloch(G)
    if b.degenerate:
        raise DegenerateFlowError("G is degenerate")
    # Eigenvector of sigma.n for eigenvalue +1 (half-angle construction).
    c = np.cos(0.5 * b.theta)
    s = np.sin(0.5 * b.theta)
    phase = np.exp(1j * b.phi)
    v_plus = np.array([c, s * phase])
    v_minus = np.array([-s, c * phase])
    return np.column_stack([v_plus, v_minus]), b


def closed_form_2x2(H0, G, lam: float, t: float,
                    variant: FlowVariant = FlowVariant.PURE_DOUBLE_BRACKET) -> np.ndarray:
    """Explicit solution of the 2x2 flow at time t.

    Computed in the eigenbasis of G (larger eigenvalue mapped to the north
    pole), then transformed back:

        H_t = 1/2 [[u0 - nu tanh(w t - c0),  nu sech(w t - c0) e^{-i phi_t}],
                   [nu sech(w t - c0) e^{i phi_t},  u0 + nu tanh(w t - c0)]]

    with c0 = artanh(cos theta0), w = lambda*nu*mu, and phi_t = phi0
    (phi0 + mu*t for the unitary-modified variant).  Exact poles
    (|cos theta0| = 1) return the constant solution.
    """
    H0 = hermitian(H0)
    Gm = hermitian(G)
    if H0.shape != (2, 2) or Gm.shape != (2, 2):
        raise ValueError("closed form requires 2x2 matrices")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    V, bg = _eigbasis_2x2(Gm)
    h_tilde = V.conj().T @ H0 @ V
    b = to_bloch(h_tilde)
    if b.degenerate:
        raise DegenerateFlowError("H0 is degenerate")
    cos0 = np.clip(b.n[2], -1.0, 1.0)
    if abs(cos0) >= 1.0 - 1e-15:
        return H0.copy()
    omega = lam * b.nu * bg.nu
    c0 = np.arctanh(cos0)
    arg = omega * t - c0
    phi_t = b.phi + (bg.nu * t if variant is FlowVariant.UNITARY_MODIFIED else 0.0)
    th = np.tanh(arg)
    sech = 1.0 / np.cosh(arg)
    m = 0.5 * np.array([
        [b.u - b.nu * th, b.nu * sech * np.exp(-1j * phi_t)],
        [b.nu * sech * np.exp(1j * phi_t), b.u + b.nu * th],
    ])
    return V @ m @ V.conj().T


def inverse_metric(theta: float):
    """Inverse round-sphere metric components (g^theta_theta, g^phi_phi)."""
    s = np.sin(theta)
    return 4.0, 4.0 / s**2


def volume_weight(theta: float):
    """Fubini-Study area weight: dV = (1/4) sin(theta) dtheta dphi."""
    return 0.25 * np.sin(theta)


def bloch_vector_field(theta: float, phi: float, frame: ReferenceFrame,
                       nu: float, variant: FlowVariant):
    """(dtheta/dt, dphi/dt) of the reduced dynamics on the sphere.

    Pure flow: (omega sin theta, 0).  Unitary-modified: (omega sin theta, mu).
    """
    omega = frame.omega(nu)
    dtheta = omega * np.sin(theta)
    if variant is FlowVariant.UNITARY_MODIFIED:
        dphi = frame.mu * np.ones_like(dtheta) if np.ndim(dtheta) else frame.mu
    else:
        dphi = np.zeros_like(dtheta) if np.ndim(dtheta) else 0.0
    return dtheta, dphi


@dataclass(frozen=True)
class GradientDrift:
    dtheta: float
    dphi: float
    at_pole: bool = False


def potential_on_sphere(theta: float, frame: ReferenceFrame) -> float:
    """Expectation of G at the sphere point: G(theta, phi) = (v + mu cos theta)/2."""
    return 0.5 * (frame.v + frame.mu * np.cos(theta))


def gradient_drift(theta: float, phi: float, frame: ReferenceFrame,
                   nu: float) -> GradientDrift:
    """Drift from the metric/potential construction.

    dx^a = -1/2 lambda nu g^{ab} d_b G(theta, phi); identical to the pure
    double-bracket vector field.  At the poles the phi metric component is
    singular; (0, 0) is returned with the pole flag set.
    """
    s = np.sin(theta)
    if abs(s) < 1e-15:
        return GradientDrift(0.0, 0.0, at_pole=True)
    g_tt, g_pp = inverse_metric(theta)
    dG_dtheta = -0.5 * frame.mu * s
    dG_dphi = 0.0
    dtheta = -0.5 * frame.lam * nu * g_tt * dG_dtheta
    dphi = -0.5 * frame.lam * nu * g_pp * dG_dphi
    return GradientDrift(float(dtheta), float(dphi))


def flow_diagnostics(traj: Trajectory, G) -> DiagnosticsReport:
    """Conservation and monotonicity report for a stored trajectory."""
    if len(traj.times) == 0:
        raise ValueError("empty trajectory")
    Gm = hermitian(G)
    eig_drift = float(np.abs(traj.eigenvalues - traj.eigenvalues[0]).max())
    traces = np.array([float(np.trace(s).real) for s in traj.states])
    dets = np.array([float(np.linalg.det(s).real) for s in traj.states])
    tr_scale = max(1.0, abs(traces[0]))
    det_scale = max(1.0, abs(dets[0]))
    trace_drift = float(np.abs(traces - traces[0]).max()) / tr_scale
    det_drift = float(np.abs(dets - dets[0]).max()) / det_scale
    slack = 1e-10 * max(1.0, float(np.abs(traj.tr_hg).max()))
    non_inc = bool(np.all(np.diff(traj.tr_hg) <= slack))
    non_dec = bool(np.all(np.diff(traj.trace_dist_sq) >= -slack))
    return DiagnosticsReport(
        eig_drift_max=eig_drift,
        trace_drift=trace_drift,
        det_drift=det_drift,
        tr_hg=traj.tr_hg,
        tr_hg_non_increasing=non_inc,
        trace_dist_sq=traj.trace_dist_sq,
        trace_dist_sq_non_decreasing=non_dec,
        final_comm_norm_sq=float(traj.comm_norm_sq[-1]),
    )


def anti_sorting_check(H0, G, lam: float, max_time: float = 200.0,
                       comm_norm_tol: float = 1e-8) -> AntiSortingReport:
    """Check the N-dimensional fixed-point pairing.

    Integrates the pure flow until ||[H, G]|| < comm_norm_tol (or max_time)
    and reports whether the limiting diagonal pairs the eigenvalues of H0
    against those of the diagonal G in the tr(HG)-minimizing order, i.e.
    ascending against descending (verified against brute-force enumeration
    of all permutation pairings).
    """
    H = hermitian(H0)
    Gm = hermitian(G)
    n = H.shape[0]
    if n > 16:
        raise ValueError("anti-sorting check limited to dim <= 16")
    gdiag = np.diag(Gm)
    if float(np.abs(Gm - np.diag(gdiag)).max()) > 1e-12:
        raise ValueError("G must be diagonal")
    gdiag = gdiag.real
    if np.min(np.diff(np.sort(gdiag))) < 1e-9:
        raise ValueError("G must have distinct diagonal entries")
    if is_degenerate(H):
        raise ValueError("H0 must be nondegenerate")

    rate = lam * np.linalg.norm(H) * np.linalg.norm(Gm)
    dt = 0.05 / rate
    chunk = max(1, int(round(5.0 / (rate * dt))))
    t = 0.0
    converged = False
    while t < max_time:
        for _ in range(chunk):
            k1 = _rhs(H, Gm, lam, FlowVariant.PURE_DOUBLE_BRACKET)
            k2 = _rhs(H + 0.5 * dt * k1, Gm, lam, FlowVariant.PURE_DOUBLE_BRACKET)
            k3 = _rhs(H + 0.5 * dt * k2, Gm, lam, FlowVariant.PURE_DOUBLE_BRACKET)
            k4 = _rhs(H + dt * k3, Gm, lam, FlowVariant.PURE_DOUBLE_BRACKET)
            H = H + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            H = 0.5 * (H + H.conj().T)
            t += dt
        if np.sqrt(commutator_norm_sq(H, Gm)) < comm_norm_tol:
            converged = True
            break

    limit_diag = np.diag(H).real.copy()
    eig_h = eigenvalues(H0)
    best = None
    best_tr = np.inf
    for perm in itertools.permutations(range(n)):
        diag = eig_h[list(perm)]
        tr = float(np.dot(diag, gdiag))
        if tr < best_tr:
            best_tr = tr
            best = diag
    tr_final = float(np.dot(limit_diag, gdiag))
    anti_sorted = converged and bool(np.allclose(limit_diag, best, atol=1e-6))
    return AntiSortingReport(
        converged=converged,
        anti_sorted=anti_sorted,
        final_comm_norm=float(np.sqrt(commutator_norm_sq(H, Gm))),
        limit_diagonal=limit_diag,
        best_pairing_diagonal=np.asarray(best),
        tr_hg_final=tr_final,
        tr_hg_min=best_tr,
    )
