"""Exact algebra of Hermitian matrices.

Construction and Bloch/Pauli decomposition of 2x2 Hermitian matrices,
commutators, eigenvalues (closed form for 2x2, cyclic Jacobi for larger
matrices), and the scalar functionals monitored by the double-bracket flow.

All functions are pure and all returned arrays are freshly allocated, so
values can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Pauli matrices and the 2x2 identity, used throughout the package.
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# Tolerances shared by the constructors below.
HERMITICITY_TOL = 1e-12
UNIT_VECTOR_TOL = 1e-9
DEGENERACY_TOL = 1e-12

_JACOBI_MAX_SWEEPS = 100


class DimensionMismatchError(ValueError):
    """Raised when two matrices of different sizes are combined."""


class JacobiConvergenceError(RuntimeError):
    """Raised when the cyclic Jacobi iteration fails to converge."""


def hermitian(entries) -> np.ndarray:
    """Validate and return an N x N complex Hermitian matrix (N >= 2).

    Deviations from Hermiticity below ``HERMITICITY_TOL`` (relative to the
    largest entry) are absorbed by symmetrizing as (A + A^dag)/2; larger
    deviations are rejected so genuine bugs are not masked.
    """
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError("matrix dimension must be >= 2")
    scale = max(1.0, float(np.abs(a).max()))
    dev = float(np.abs(a - a.conj().T).max())
    if dev > HERMITICITY_TOL * scale:
        raise ValueError(f"matrix is not Hermitian (max |A - A^dag| = {dev:.3e})")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class BlochDecomposition:
    """(u, nu, n) representation of a 2x2 Hermitian matrix.

    H = u/2 * I + nu/2 * sigma . n, with theta/phi the spherical angles of
    the unit vector n.  ``degenerate`` flags nu below ``DEGENERACY_TOL``,
    in which case n defaults to (0, 0, 1).
    """

    u: float
    nu: float
    n: np.ndarray
    theta: float
    phi: float
    degenerate: bool = False


@dataclass(frozen=True)
class ReferenceFrame:
    """Decomposition of the reference Hamiltonian G plus the coupling lambda.

    G = v/2 * I + mu/2 * sigma . g with mu > 0 and |g| = 1; lam > 0 has
    dimension of inverse energy.  The relaxation rate omega = lam*nu*mu
    needs the companion Bloch radius nu of the flowing Hamiltonian.
    """

    v: float
    mu: float
    g: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    lam: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        g = np.asarray(self.g, dtype=float)
        if abs(np.linalg.norm(g) - 1.0) > UNIT_VECTOR_TOL:
            raise ValueError("g must be a unit vector")
        object.__setattr__(self, "g", g / np.linalg.norm(g))

    def omega(self, nu: float) -> float:
        """Relaxation rate omega = lambda * nu * mu."""
        return self.lam * nu * self.mu

    def matrix(self) -> np.ndarray:
        """The 2x2 matrix G = v/2 * I + mu/2 * sigma . g."""
        return from_bloch(self.v, self.mu, self.g)

    @classmethod
    def from_matrix(cls, G, lam: float) -> "ReferenceFrame":
        b = to_bloch(hermitian(G))
        if b.degenerate:
            raise ValueError("reference Hamiltonian must be nondegenerate (mu > 0)")
        return cls(v=b.u, mu=b.nu, g=b.n, lam=lam)


def from_bloch(u: float, nu: float, n) -> np.ndarray:
    """Build the 2x2 Hermitian matrix u/2 * I + nu/2 * sigma . n."""
    if nu < 0:
        raise ValueError("Bloch radius nu must be nonnegative")
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError("n must be a real 3-vector")
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > UNIT_VECTOR_TOL:
        raise ValueError(f"n must be a unit vector (|n| = {norm:.12f})")
    n = n / norm
    h = 0.5 * u * IDENTITY_2.copy()
    for ni, sigma in zip(n, PAULI):
        h += 0.5 * nu * ni * sigma
    return h


def to_bloch(H) -> BlochDecomposition:
    """Invert the Pauli representation of a 2x2 Hermitian matrix."""
    H = hermitian(H)
    if H.shape[0] != 2:
        raise DimensionMismatchError("Bloch decomposition requires a 2x2 matrix")
    u = float(np.trace(H).real)
    s = np.array([float(np.trace(sigma @ H).real) for sigma in PAULI])
    nu = float(np.linalg.norm(s))
    if nu < DEGENERACY_TOL:
        n = np.array([0.0, 0.0, 1.0])
        return BlochDecomposition(u=u, nu=nu, n=n, theta=0.0, phi=0.0,
                                  degenerate=True)
    n = s / nu
    theta = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
    phi = float(np.arctan2(n[1], n[0])) % (2.0 * np.pi)
    return BlochDecomposition(u=u, nu=nu, n=n, theta=theta, phi=phi)


def _check_same_dim(A: np.ndarray, B: np.ndarray):
    if A.shape != B.shape:
        raise DimensionMismatchError(f"dimension mismatch: {A.shape} vs {B.shape}")


def commutator(A, B) -> np.ndarray:
    """[A, B] = AB - BA; anti-Hermitian for Hermitian inputs."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    _check_same_dim(A, B)
    return A @ B - B @ A


def double_bracket_rhs(H, G, lam: float) -> np.ndarray:
    """Right side of the flow: -lambda [H, [H, G]].  Hermitian and traceless."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    H = np.asarray(H, dtype=complex)
    G = np.asarray(G, dtype=complex)
    _check_same_dim(H, G)
    K = H @ G - G @ H
    rhs = -lam * (H @ K - K @ H)
    return 0.5 * (rhs + rhs.conj().T)


def eigenvalues(H) -> np.ndarray:
    """Ascending real eigenvalues.

    2x2 matrices use the closed form (u +- nu)/2; larger matrices use
    cyclic Jacobi rotations iterated until the off-diagonal Frobenius
    norm drops below 1e-12.
    """
    H = hermitian(H)
    if H.shape[0] == 2:
        b = to_bloch(H)
        return np.array([0.5 * (b.u - b.nu), 0.5 * (b.u + b.nu)])
    w, _ = jacobi_eigh(H, compute_vectors=False)
    return w


def jacobi_eigh(H, compute_vectors: bool = True):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each sweep annihilates every off-diagonal pair (p, q) with an exact
    2x2 unitary rotation.  Returns (eigenvalues ascending, eigenvectors
    as columns) or (eigenvalues, None).  Adequate for desk-scale N <= 64.
    """
    A = hermitian(H).copy()
    n = A.shape[0]
    V = np.eye(n, dtype=complex) if compute_vectors else None
    tol = 1e-12
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                alpha = A[p, p].real
                gamma = A[q, q].real
                # Entries at roundoff level get zeroed, not rotated: the
                # rotation angle would be pure noise.
                if abs(b) <= np.finfo(float).eps * (abs(alpha) + abs(gamma)):
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                # Classic cancellation-free Jacobi angle for the real part,
                # with the phase of b folded into the rotation.
                phase = b / abs(b)
                tau = (gamma - alpha) / (2.0 * abs(b))
                if tau == 0.0:
                    t = 1.0
                else:
                    t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                R = np.array([[c, s * phase],
                              [-s * np.conj(phase), c]])
                rows = [p, q]
                A[rows, :] = R.conj().T @ A[rows, :]
                A[:, rows] = A[:, rows] @ R
                A[p, q] = 0.0
                A[q, p] = 0.0
                if V is not None:
                    V[:, rows] = V[:, rows] @ R
    else:
        raise JacobiConvergenceError(
            f"Jacobi iteration did not converge in {_JACOBI_MAX_SWEEPS} sweeps")
    w = np.diag(A).real
    order = np.argsort(w, kind="stable")
    if V is not None:
        return w[order], V[:, order]
    return w[order], None


def trace_distance_sq(H, G) -> float:
    """tr(H - G)^2, a nonnegative real."""
    H = np.asarray(H, dtype=complex)
    G = np.asarray(G, dtype=complex)
    _check_same_dim(H, G)
    D = H - G
    return float(np.trace(D @ D).real)


def commutator_norm_sq(H, G) -> float:
    """tr([G, H]^dag [G, H]) >= 0; zero iff H and G commute."""
    K = commutator(G, H)
    return float(np.trace(K.conj().T @ K).real)


def is_degenerate(H) -> bool:
    """True when the smallest eigenvalue gap is below the degeneracy threshold.

    The flow treats degenerate matrices as fixed points.
    """
    H = hermitian(H)
    if H.shape[0] == 2:
        return to_bloch(H).degenerate
    w = eigenvalues(H)
    scale = max(1.0, float(np.abs(w).max()))
    return bool(np.min(np.diff(w)) < DEGENERACY_TOL * scale)


def matrix_from_json(obj) -> np.ndarray:
    """Parse the CLI matrix literal: rows of [re, im] entry pairs."""
    a = np.asarray(obj, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ValueError("matrix literal must be rows of [re, im] pairs")
    return hermitian(a[..., 0] + 1j * a[..., 1])


def matrix_to_json(H) -> list:
    """Serialize a matrix as rows of [re, im] entry pairs."""
    H = np.asarray(H, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in H]


def bloch_from_json(obj) -> np.ndarray:
    """Parse the CLI Bloch literal {"u": ..., "nu": ..., "n": [x, y, z]}."""
    return from_bloch(float(obj["u"]), float(obj["nu"]), obj["n"])
