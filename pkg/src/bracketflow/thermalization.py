"""Stochastic thermalization on the invariant Bloch sphere.

Euler-Maruyama simulation of the thermalizing SDE

    dtheta = omega sin(theta) dt + sqrt(2 nu) (dW1 + dW2)
    dphi   = -(1/sin theta) sqrt(2 nu) (dW1 - dW2)

in two readings: the literal coordinate Ito SDE, and the covariant Ito
form that adds the curvature drift +2 nu cot(theta) dt (equivalently
-2 nu x dt in x = cos theta).  The covariant reading is the default: its
stationary law is the canonical density exp(-a cos theta) with respect to
the sphere area dV = (1/4) sin theta dtheta dphi, a = lambda*mu/2, which
is the convention behind every closed-form average downstream.

The x = cos(theta) formulation is the default simulation variable; its
diffusion sqrt(2 nu (1 - x^2)) vanishes at the poles, so no 1/sin(theta)
blow-up occurs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .hermitian_core import ReferenceFrame

THETA_REFLECT_EPS = 1e-6
_NOISE_CHUNK_STEPS = 200


class Interpretation(enum.Enum):
    COVARIANT_ITO = "covariant"
    LITERAL_COORDINATE = "literal"


@dataclass(frozen=True)
class SdeParams:
    """Frame, Bloch radius nu (= kappa^2), and the SDE reading."""

    frame: ReferenceFrame
    nu: float
    interpretation: Interpretation = Interpretation.COVARIANT_ITO

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")

    @property
    def omega(self) -> float:
        return self.frame.omega(self.nu)

    @property
    def a(self) -> float:
        """Exponent of the stationary density: a = lambda*mu/2 = omega/(2 nu)."""
        return 0.5 * self.frame.lam * self.frame.mu


@dataclass(frozen=True)
class EnsembleStats:
    n_paths: int
    t_end: float
    mean_cos_theta: float
    std_error: float
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    seed: int
    reflections: int = 0
    clamps: int = 0


def sde_step_x(x, params: SdeParams, dt: float, noise) -> float:
    """One Euler-Maruyama update of x = cos(theta); result clamped to [-1, 1].

    Covariant Ito: dx = [-omega (1-x^2) - 4 nu x] dt + sqrt(2 nu (1-x^2)) (dW1+dW2)
    Literal:       dx = [-omega (1-x^2) - 2 nu x] dt + sqrt(2 nu (1-x^2)) (dW1+dW2)
    with dWi = sqrt(dt) * normal draw.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n1, n2 = noise
    omega, nu = params.omega, params.nu
    one_m_x2 = 1.0 - np.asarray(x) ** 2
    curv = 4.0 if params.interpretation is Interpretation.COVARIANT_ITO else 2.0
    drift = -omega * one_m_x2 - curv * nu * x
    diff = np.sqrt(np.maximum(2.0 * nu * one_m_x2, 0.0))
    x_new = x + drift * dt + diff * np.sqrt(dt) * (n1 + n2)
    return np.clip(x_new, -1.0, 1.0)


def _reflect_theta(theta):
    lo, hi = THETA_REFLECT_EPS, np.pi - THETA_REFLECT_EPS
    reflected = (theta < lo) | (theta > hi)
    theta = np.where(theta < lo, 2.0 * lo - theta, theta)
    theta = np.where(theta > hi, 2.0 * hi - theta, theta)
    # A huge overshoot could escape in one reflection; fold once more.
    theta = np.clip(theta, lo, hi)
    return theta, reflected


def sde_step_spherical(theta, phi, params: SdeParams, dt: float, noise):
    """One Euler-Maruyama update of (theta, phi).

    Literal reading integrates the coordinate SDE verbatim; the covariant
    reading adds +2 nu cot(theta) dt to dtheta.  theta is reflected at
    [eps, pi - eps], phi wrapped into [0, 2 pi).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n1, n2 = noise
    omega, nu = params.omega, params.nu
    drift = omega * np.sin(theta)
    if params.interpretation is Interpretation.COVARIANT_ITO:
        drift = drift + 2.0 * nu / np.tan(theta)
    sq = np.sqrt(2.0 * nu * dt)
    theta_new = theta + drift * dt + sq * (n1 + n2)
    phi_new = phi - (1.0 / np.sin(theta)) * sq * (n1 - n2)
    theta_new, _ = _reflect_theta(theta_new)
    return theta_new, phi_new % (2.0 * np.pi)


def _path_generators(seed: int, n_paths: int):
    """Per-path substreams: seed + path index, scheduler independent."""
    return [np.random.default_rng(seed + i) for i in range(n_paths)]


def simulate_ensemble(theta0: float, phi0: float, params: SdeParams,
                      t_end: float, dt: float, n_paths: int, seed: int,
                      use_x_formulation: bool = True,
                      n_bins: int = 20) -> EnsembleStats:
    """Run n_paths independent paths and summarize cos(theta) at t_end.

    Deterministic given seed: each path draws its noise from its own
    substream (seed + path index) in time order, so the result does not
    depend on how paths are batched.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if dt <= 0 or t_end < 0:
        raise ValueError("invalid dt or t_end")
    n_steps = int(round(t_end / dt))
    gens = _path_generators(seed, n_paths)

    sqdt = np.sqrt(dt)
    omega, nu = params.omega, params.nu
    curv = 4.0 if params.interpretation is Interpretation.COVARIANT_ITO else 2.0
    clamps = 0
    reflections = 0

    if use_x_formulation:
        x = np.full(n_paths, np.cos(theta0))
    else:
        theta = np.full(n_paths, float(theta0))

    done = 0
    while done < n_steps:
        chunk = min(_NOISE_CHUNK_STEPS, n_steps - done)
        # (chunk, n_paths, 2), path-major draw order within each substream
        noise = np.empty((chunk, n_paths, 2))
        for i, g in enumerate(gens):
            noise[:, i, :] = g.standard_normal((chunk, 2))
        for k in range(chunk):
            n_sum = noise[k, :, 0] + noise[k, :, 1]
            if use_x_formulation:
                one_m_x2 = 1.0 - x * x
                drift = -omega * one_m_x2 - curv * nu * x
                x = x + drift * dt + np.sqrt(2.0 * nu * one_m_x2) * sqdt * n_sum
                out = (x < -1.0) | (x > 1.0)
                clamps += int(np.count_nonzero(out))
                np.clip(x, -1.0, 1.0, out=x)
            else:
                drift = omega * np.sin(theta)
                if params.interpretation is Interpretation.COVARIANT_ITO:
                    drift = drift + 2.0 * nu / np.tan(theta)
                theta = theta + drift * dt + np.sqrt(2.0 * nu) * sqdt * n_sum
                theta, refl = _reflect_theta(theta)
                reflections += int(np.count_nonzero(refl))
        done += chunk

    if not use_x_formulation:
        x = np.cos(theta)
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else 0.0
    counts, edges = np.histogram(x, bins=n_bins, range=(-1.0, 1.0))
    return EnsembleStats(n_paths=n_paths, t_end=n_steps * dt,
                         mean_cos_theta=mean, std_error=se,
                         histogram_edges=edges, histogram_counts=counts,
                         seed=seed, reflections=reflections, clamps=clamps)


def simulate_path(theta0: float, phi0: float, params: SdeParams,
                  t_end: float, dt: float, seed: int,
                  record_every: int = 1):
    """Single spherical-coordinate path with phi; returns (t, theta, phi, x) arrays."""
    if dt <= 0 or t_end < 0:
        raise ValueError("invalid dt or t_end")
    n_steps = int(round(t_end / dt))
    rng = np.random.default_rng(seed)
    theta, phi = float(theta0), float(phi0)
    ts, thetas, phis = [0.0], [theta], [phi]
    for step in range(1, n_steps + 1):
        theta, phi = sde_step_spherical(theta, phi, params, dt,
                                        rng.standard_normal(2))
        if step % record_every == 0 or step == n_steps:
            ts.append(step * dt)
            thetas.append(float(theta))
            phis.append(float(phi))
    ts = np.array(ts)
    thetas = np.array(thetas)
    phis = np.array(phis)
    return ts, thetas, phis, np.cos(thetas)


def sample_equilibrium(params: SdeParams, n_samples: int, seed: int) -> np.ndarray:
    """I.i.d. samples (theta, phi) from the canonical density.

    x = cos(theta) has density proportional to exp(-a x) on [-1, 1]
    (a = lambda*mu/2, the dV convention); phi is uniform.  Drawn by
    inverting the CDF; a below 1e-8 falls back to uniform x.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    a = params.a
    u = rng.random(n_samples)
    if a < 1e-8:
        x = 2.0 * u - 1.0
    else:
        # x = -(1/a) ln(e^a - u (e^a - e^{-a})), in overflow-safe form
        x = -1.0 - np.log1p(-u * (1.0 - np.exp(-2.0 * a))) / a
    x = np.clip(x, -1.0, 1.0)
    theta = np.arccos(x)
    phi = rng.random(n_samples) * 2.0 * np.pi
    return np.column_stack([theta, phi])
