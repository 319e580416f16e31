"""Density-level dynamics on the sphere's polar variable.

Canonical stationary densities, the literal theta-coordinate Fokker-Planck
operator used for the direct-substitution check, and conservative time
evolution of the covariant x = cos(theta) Fokker-Planck equation to
equilibrium on a 1-D grid.

Measure bookkeeping is explicit: a density can live with respect to the
coordinate measure (dtheta or dx) or the sphere volume dV = (1/4) sin(theta)
dtheta dphi.  Mixing the two silently is the classic mistake here, so the
grid type carries its convention.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .hermitian_core import ReferenceFrame
from .thermalization import SdeParams


class GridVariable(enum.Enum):
    THETA = "theta"
    X = "x"


class Measure(enum.Enum):
    COORDINATE = "coordinate"   # plain dtheta or dx
    VOLUME = "volume"           # sphere area dV (phi integrated out)


class FpStabilityError(RuntimeError):
    """Explicit stepping produced significantly negative densities; reduce dt."""


@dataclass(frozen=True)
class DensityGrid:
    """Nonnegative density values on a uniform grid, with its measure."""

    variable: GridVariable
    nodes: np.ndarray
    values: np.ndarray
    measure: Measure

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ValueError("nodes and values must be matching 1-D arrays")
        if len(nodes) < 3 or len(nodes) % 2 == 0:
            raise ValueError("grid must have an odd number of nodes, M >= 3")
        h = np.diff(nodes)
        if not np.allclose(h, h[0], rtol=1e-10, atol=1e-14):
            raise ValueError("grid must be uniform")
        if np.min(values) < -1e-12:
            raise ValueError("density values must be nonnegative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", np.maximum(values, 0.0))

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def quadrature_weights(self) -> np.ndarray:
        """Trapezoid weights for the declared measure, phi integrated out."""
        h = self.spacing
        w = np.full(len(self.nodes), h)
        w[0] = w[-1] = 0.5 * h
        if self.measure is Measure.VOLUME:
            if self.variable is GridVariable.THETA:
                # integral rho dV = (pi/2) * integral rho sin(theta) dtheta
                w = w * (0.5 * np.pi) * np.sin(self.nodes)
            else:
                w = w * (0.5 * np.pi)
        return w

    def integral(self) -> float:
        return float(np.dot(self.quadrature_weights(), self.values))

    def normalized(self) -> "DensityGrid":
        total = self.integral()
        if total <= 0:
            raise ValueError("cannot normalize a zero density")
        return replace(self, values=self.values / total)


def make_grid(variable: GridVariable, m: int) -> np.ndarray:
    """Uniform grid of m nodes (m odd): theta on [0, pi] or x on [-1, 1]."""
    if variable is GridVariable.THETA:
        return np.linspace(0.0, np.pi, m)
    return np.linspace(-1.0, 1.0, m)


def stationary_density(theta, frame: ReferenceFrame):
    """Canonical equilibrium density on the sphere, normalized against dV:

        rho(theta) = [lambda mu / (2 pi sinh(lambda mu / 2))]
                     * exp(-(lambda mu / 2) cos(theta)).
    """
    a = 0.5 * frame.lam * frame.mu
    pref = frame.lam * frame.mu / (2.0 * np.pi * np.sinh(a))
    return pref * np.exp(-a * np.cos(theta))


def canonical_density_general(G_values, lam: float, n_theta: int = 721,
                              n_phi: int = 72):
    """Pointwise exp(-lambda G(theta, phi)) normalized by its dV quadrature.

    Returns (density_function, partition_integral).  The quadrature is a
    tensor trapezoid rule on an (n_theta x n_phi) grid.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    g = np.asarray(G_values(tt, pp), dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("G_values must be finite on the sphere")
    integrand = np.exp(-lam * g) * 0.25 * np.sin(tt)
    z = float(np.trapezoid(np.trapezoid(integrand, phis, axis=1), thetas))

    def density(theta, phi):
        return np.exp(-lam * np.asarray(G_values(theta, phi), dtype=float)) / z

    return density, z


def fp_operator_theta(rho: DensityGrid, params: SdeParams) -> np.ndarray:
    """Literal theta-coordinate Fokker-Planck operator applied to rho:

        d rho/dt = -omega (cos(theta) + sin(theta) d_theta) rho
                   + 2 nu d_theta^2 rho

    for a phi-independent coordinate density.  Central second-order
    differences inside, one-sided second-order stencils at the ends.
    """
    if rho.variable is not GridVariable.THETA or rho.measure is not Measure.COORDINATE:
        raise ValueError("fp_operator_theta expects a coordinate density in theta")
    if len(rho.nodes) < 5:
        raise ValueError("grid too coarse (need M >= 5)")
    th = rho.nodes
    p = rho.values
    h = rho.spacing
    d1 = np.empty_like(p)
    d2 = np.empty_like(p)
    d1[1:-1] = (p[2:] - p[:-2]) / (2.0 * h)
    d2[1:-1] = (p[2:] - 2.0 * p[1:-1] + p[:-2]) / h**2
    d1[0] = (-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * h)
    d1[-1] = (3.0 * p[-1] - 4.0 * p[-2] + p[-3]) / (2.0 * h)
    d2[0] = (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) / h**2
    d2[-1] = (2.0 * p[-1] - 5.0 * p[-2] + 4.0 * p[-3] - p[-4]) / h**2
    omega, nu = params.omega, params.nu
    return -omega * (np.cos(th) * p + np.sin(th) * d1) + 2.0 * nu * d2


def _flux_matrix(x: np.ndarray, params: SdeParams) -> np.ndarray:
    """Dense generator L of the conservative x-space scheme, dp/dt = L p.

    Flux J = [-omega (1-x^2) - 4 nu x] p - d_x[2 nu (1-x^2) p], evaluated
    at half nodes with arithmetic-mean interpolation; zero flux through
    x = +-1 (the diffusion coefficient vanishes there).
    """
    m = len(x)
    h = x[1] - x[0]
    omega, nu = params.omega, params.nu
    xh = 0.5 * (x[:-1] + x[1:])
    adv = -omega * (1.0 - xh**2) - 4.0 * nu * xh       # advective speed at halves
    dcoef = 2.0 * nu * (1.0 - x**2)                    # D at nodes
    L = np.zeros((m, m))
    # J_{i+1/2} = adv_i * (p_i + p_{i+1})/2 - (D_{i+1} p_{i+1} - D_i p_i)/h
    for i in range(m - 1):
        row = np.zeros(m)
        row[i] = 0.5 * adv[i] + dcoef[i] / h
        row[i + 1] = 0.5 * adv[i] - dcoef[i + 1] / h
        # dp_i/dt -= J_{i+1/2}/h ; dp_{i+1}/dt += J_{i+1/2}/h
        L[i] -= row / h
        L[i + 1] += row / h
    return L


def evolve_fp_x(rho0: DensityGrid, params: SdeParams, t_end: float,
                dt: float | None = None,
                scheme: str = "explicit") -> DensityGrid:
    """Evolve a dV-measure density in x to time t_end (conservative form).

    The internal working variable is the dx-mass density p (integral
    p dx = 1); the result is returned in the input's volume convention,
    normalized.  Explicit stepping obeys dt <= 0.4 dx^2 / (2 nu) unless a
    smaller dt is given; scheme="crank-nicolson" lifts the restriction.
    """
    if rho0.variable is not GridVariable.X or rho0.measure is not Measure.VOLUME:
        raise ValueError("evolve_fp_x expects a dV-measure density in x")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    x = rho0.nodes
    h = rho0.spacing
    # convert dV density to dx density and normalize on the FV mass
    p = rho0.values * (0.5 * np.pi)
    p = p / (np.sum(p) * h)
    L = _flux_matrix(x, params)

    dt_cfl = 0.4 * h**2 / (2.0 * params.nu)
    if scheme == "explicit":
        # an explicit dt beyond the CFL bound is allowed to run: the
        # negative-density check below catches the instability and aborts
        step_dt = dt if dt is not None else dt_cfl
        n_steps = max(1, int(np.ceil(t_end / step_dt))) if t_end > 0 else 0
        step_dt = t_end / n_steps if n_steps else 0.0
        for _ in range(n_steps):
            p = p + step_dt * (L @ p)
            if np.min(p) < -1e-8:
                raise FpStabilityError(
                    f"negative density {np.min(p):.3e}; reduce dt "
                    f"(CFL bound is {dt_cfl:.3e})")
    elif scheme == "crank-nicolson":
        step_dt = dt if dt is not None else 10.0 * dt_cfl
        n_steps = max(1, int(np.ceil(t_end / step_dt))) if t_end > 0 else 0
        if n_steps:
            step_dt = t_end / n_steps
            eye = np.eye(len(x))
            lu = lu_factor(eye - 0.5 * step_dt * L)
            for _ in range(n_steps):
                p = lu_solve(lu, p + 0.5 * step_dt * (L @ p))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    values = np.maximum(p, 0.0) * (2.0 / np.pi)
    out = DensityGrid(variable=GridVariable.X, nodes=x, values=values,
                      measure=Measure.VOLUME)
    return out.normalized()


def stationary_density_x(x, params: SdeParams):
    """Equilibrium dV-measure density in x: (a / (2 sinh a)) e^{-a x} * (2/pi)."""
    a = params.a
    if a < 1e-8:
        p = np.full_like(np.asarray(x, dtype=float), 0.5)
    else:
        p = (a / (2.0 * np.sinh(a))) * np.exp(-a * np.asarray(x, dtype=float))
    return p * (2.0 / np.pi)


def stationarity_residual(rho: DensityGrid, params: SdeParams) -> float:
    """Max-norm of the applicable Fokker-Planck operator applied to rho.

    For x grids the flux-form residual is taken over interior cells: the
    two boundary cells are formally first-order (one-sided flux), while
    the interior is second-order, which is the convergence rate reported.
    """
    if rho.variable is GridVariable.THETA:
        return float(np.abs(fp_operator_theta(rho, params)).max())
    p = rho.values * (0.5 * np.pi) if rho.measure is Measure.VOLUME else rho.values
    L = _flux_matrix(rho.nodes, params)
    return float(np.abs((L @ p)[1:-1]).max())
