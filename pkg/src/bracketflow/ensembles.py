"""Equilibrium statistical mechanics of Hamiltonians.

Closed-form canonical moments of the Bloch angle, the equilibrium mean
Hamiltonian, thermal expectations tr(O e^{-beta H})/tr(e^{-beta H}), and
quenched/annealed averages of observables, both in closed form and by
Monte Carlo over the equilibrium ensemble of Hamiltonians.

Conventions: the closed forms for the averages of G are the v = 0 case
(v enters only as the additive constant v/2, which the code adds back);
u0 shifts H by a multiple of the identity and drops out of both averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermitian_core import (
    ReferenceFrame,
    from_bloch,
    hermitian,
    jacobi_eigh,
    to_bloch,
)
from .thermalization import Interpretation, SdeParams, sample_equilibrium

_SERIES_THRESHOLD = 1e-6


@dataclass(frozen=True)
class ThermalParams:
    """Inverse temperature beta plus the ensemble parameters (lambda, v, mu, nu, u0)."""

    beta: float
    frame: ReferenceFrame
    nu: float
    u0: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.nu <= 0:
            raise ValueError("nu must be positive")


@dataclass(frozen=True)
class AverageCurve:
    temperatures: np.ndarray
    quenched: np.ndarray
    annealed: np.ndarray


def figure_defaults(beta: float = 1.0) -> ThermalParams:
    """The documented default parameter set: 1/lambda = 0.1, v = 0, nu = 1, mu = 2."""
    return ThermalParams(beta=beta, frame=ReferenceFrame(v=0.0, mu=2.0, lam=10.0),
                         nu=1.0)


def _coth_minus_2_over(y: float) -> float:
    """coth(y/2) - 2/y, with a series fallback near y = 0."""
    if y < _SERIES_THRESHOLD:
        return y / 6.0 - y**3 / 360.0
    return 1.0 / np.tanh(0.5 * y) - 2.0 / y


def mean_cos_theta(lam: float, mu: float) -> float:
    """Equilibrium mean of cos(theta): 2/(lambda mu) - coth(lambda mu / 2)."""
    y = lam * mu
    if y <= 0:
        raise ValueError("lambda * mu must be positive")
    return -_coth_minus_2_over(y)


def mean_hamiltonian(p: ThermalParams) -> np.ndarray:
    """Equilibrium mean Hamiltonian, diagonal in the G-basis:

        <H> = 1/2 diag(u0 + nu <cos theta>, u0 - nu <cos theta>).
    """
    c = mean_cos_theta(p.frame.lam, p.frame.mu)
    return 0.5 * np.diag([p.u0 + p.nu * c, p.u0 - p.nu * c]).astype(complex)


def thermal_expectation(O, H, beta: float) -> float:
    """Canonical expectation tr(O e^{-beta H}) / tr(e^{-beta H}).

    2x2 inputs use the Bloch closed form
        <O> = w/2 - (rho/2) tanh(beta nu / 2) (p . n)
    for O = (w I + rho sigma.p)/2, H = (u I + nu sigma.n)/2; larger
    matrices go through the Jacobi eigendecomposition.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    O = hermitian(O)
    H = hermitian(H)
    if O.shape != H.shape:
        raise ValueError(f"dimension mismatch: {O.shape} vs {H.shape}")
    if H.shape[0] == 2:
        bo = to_bloch(O)
        bh = to_bloch(H)
        pn = float(np.dot(bo.n, bh.n)) if not (bo.degenerate or bh.degenerate) else 0.0
        return 0.5 * bo.u - 0.5 * bo.nu * np.tanh(0.5 * beta * bh.nu) * pn
    w, V = jacobi_eigh(H)
    logits = -beta * (w - w.min())
    weights = np.exp(logits)
    weights /= weights.sum()
    diag_o = np.real(np.einsum("ij,jk,ki->i", V.conj().T, O, V))
    return float(np.dot(weights, diag_o))


def quenched_average_G(p: ThermalParams) -> float:
    """Closed-form quenched average of G (plus the exact v/2 offset):

        <G>_Q = mu/2 tanh(beta nu / 2) (coth(lambda mu / 2) - 2/(lambda mu)).
    """
    y = p.frame.lam * p.frame.mu
    core = 0.5 * p.frame.mu * np.tanh(0.5 * p.beta * p.nu) * _coth_minus_2_over(y)
    return float(core + 0.5 * p.frame.v)


def annealed_average_G(p: ThermalParams) -> float:
    """Closed-form annealed average of G (plus the exact v/2 offset):

        <G>_A = mu/2 tanh[beta nu / 2 (coth(lambda mu / 2) - 2/(lambda mu))].
    """
    y = p.frame.lam * p.frame.mu
    core = 0.5 * p.frame.mu * np.tanh(0.5 * p.beta * p.nu * _coth_minus_2_over(y))
    return float(core + 0.5 * p.frame.v)


def _hamiltonian_at(theta, phi, p: ThermalParams) -> np.ndarray:
    n = np.array([np.sin(theta) * np.cos(phi),
                  np.sin(theta) * np.sin(phi),
                  np.cos(theta)])
    return from_bloch(p.u0, p.nu, n)


def quenched_average_mc(O, p: ThermalParams, n_samples: int, seed: int):
    """Monte Carlo quenched average: thermal expectation per sampled H,
    then averaged over the equilibrium ensemble.  Returns (mean, std_error).
    """
    O = hermitian(O)
    if O.shape != (2, 2):
        raise ValueError("Monte Carlo averages are for 2x2 observables")
    sde = SdeParams(frame=p.frame, nu=p.nu,
                    interpretation=Interpretation.COVARIANT_ITO)
    samples = sample_equilibrium(sde, n_samples, seed)
    theta, phi = samples[:, 0], samples[:, 1]
    bo = to_bloch(O)
    # vectorized Bloch closed form: value = w/2 - (rho/2) tanh(beta nu/2) p.n
    n = np.column_stack([np.sin(theta) * np.cos(phi),
                         np.sin(theta) * np.sin(phi),
                         np.cos(theta)])
    pn = n @ bo.n
    vals = 0.5 * bo.u - 0.5 * bo.nu * np.tanh(0.5 * p.beta * p.nu) * pn
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    return mean, se


def annealed_average_mc(O, p: ThermalParams, n_samples: int = 0,
                        seed: int = 0, use_mc_mean_h: bool = False) -> float:
    """Annealed average: thermal expectation against the mean Hamiltonian.

    The closed-form <H> (mean_hamiltonian) is the default; with
    use_mc_mean_h the mean Hamiltonian is itself estimated from
    n_samples equilibrium draws.
    """
    O = hermitian(O)
    if use_mc_mean_h:
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1 to estimate <H>")
        sde = SdeParams(frame=p.frame, nu=p.nu,
                        interpretation=Interpretation.COVARIANT_ITO)
        samples = sample_equilibrium(sde, n_samples, seed)
        mats = [_hamiltonian_at(th, ph, p) for th, ph in samples]
        mean_h = hermitian(np.mean(mats, axis=0))
    else:
        mean_h = mean_hamiltonian(p)
    return thermal_expectation(O, mean_h, p.beta)


def sweep_temperature(p_base: ThermalParams, T_min: float, T_max: float,
                      n_points: int) -> AverageCurve:
    """Both closed-form averages of G on a log-spaced temperature grid."""
    if not (0 < T_min < T_max):
        raise ValueError("require 0 < T_min < T_max")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    temps = np.logspace(np.log10(T_min), np.log10(T_max), n_points)
    quenched = np.empty(n_points)
    annealed = np.empty(n_points)
    for i, T in enumerate(temps):
        p = ThermalParams(beta=1.0 / T, frame=p_base.frame, nu=p_base.nu,
                          u0=p_base.u0)
        quenched[i] = quenched_average_G(p)
        annealed[i] = annealed_average_G(p)
    return AverageCurve(temperatures=temps, quenched=quenched, annealed=annealed)
