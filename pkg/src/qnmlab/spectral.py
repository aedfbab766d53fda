"""Chebyshev collocation of the Laplace-transformed operator.

The interval ``[0, 1]`` carries Chebyshev-Gauss-Lobatto nodes in ascending
order. No condition is imposed at the degenerate end ``x = 0``; the
collocation row there is the equation itself. The Dirichlet condition
replaces the row at ``x = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as C
from numpy.polynomial import Polynomial
from scipy.linalg import lapack

from ._numerics import as_frequency
from .errors import DomainError, NearSingularError, SingularBoundaryError
from .potential import PotentialSpec

__all__ = [
    "Discretization",
    "GridFunction",
    "make_disc",
    "assemble_Ls",
    "condition_estimate",
    "ResolventResult",
    "resolvent_solve",
    "collocation_pencil",
    "pencil_eigs",
    "qnf_collocation",
    "boundary_matrix_A",
    "boundary_matrix_B",
    "ShiftedProblemSpec",
    "boundary_rhs",
    "boundary_solve",
    "shifted_apply_poly",
]


@dataclass(frozen=True, eq=False)
class Discretization:
    n_nodes: int
    nodes: np.ndarray
    diff_matrix: np.ndarray
    int_matrix: np.ndarray

    @property
    def right(self) -> int:
        """Index of the node ``x = 1``."""
        return self.n_nodes - 1


def _cheb(N):
    """Differentiation matrix on ``t_j = cos(pi j / N)`` (negative-sum diagonal)."""
    t = np.cos(np.pi * np.arange(N + 1) / N)
    c = np.hstack([2.0, np.ones(N - 1), 2.0]) * (-1.0) ** np.arange(N + 1)
    T = np.tile(t, (N + 1, 1)).T
    dT = T - T.T
    D = np.outer(c, 1.0 / c) / (dT + np.eye(N + 1))
    D = D - np.diag(D.sum(axis=1))
    return D, t


def make_disc(n_nodes: int) -> Discretization:
    """Differentiation and right-integration matrices on ``n_nodes`` nodes."""
    if n_nodes < 8:
        raise DomainError("n_nodes must be at least 8")
    N = n_nodes - 1
    Dt, t = _cheb(N)
    # x = (1 - t)/2 runs from 0 to 1 as j increases
    x = 0.5 * (1.0 - t)
    x[0], x[-1] = 0.0, 1.0
    D = -2.0 * Dt

    z = 2.0 * x - 1.0
    V = C.chebvander(z, N)
    Vi = np.linalg.inv(V)
    # antiderivative G(z) = int_1^z; then int_x^1 g = -G(z)/2
    Icoef = np.zeros((N + 2, N + 1))
    for j in range(N + 1):
        e = np.zeros(N + 1)
        e[j] = 1.0
        Icoef[:, j] = C.chebint(e, lbnd=1.0)
    J = -0.5 * C.chebvander(z, N + 1) @ Icoef @ Vi
    J[-1, :] = 0.0
    for a in (x, D, J):
        a.setflags(write=False)
    return Discretization(n_nodes, x, D, J)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a discretization, vanishing at ``x = 1``."""

    values: np.ndarray
    disc: Discretization

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.disc.n_nodes,):
            raise DomainError(f"expected {self.disc.n_nodes} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise DomainError("grid function values must be finite")
        if abs(v[-1]) > 1e-12 * (1.0 + np.max(np.abs(v))):
            raise DomainError("grid function must vanish at x = 1")
        v = v.copy()
        v[-1] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_samples(cls, disc: Discretization, values) -> "GridFunction":
        """Build from arbitrary samples, overwriting the value at ``x = 1`` with 0."""
        v = np.array(values, dtype=complex)
        v[-1] = 0.0
        return cls(v, disc)

    @classmethod
    def from_function(cls, disc: Discretization, fn) -> "GridFunction":
        return cls.from_samples(disc, fn(disc.nodes))

    @property
    def nodes(self):
        return self.disc.nodes

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


# Resolvent -------------------------------------------------------------------

def _operator(w: PotentialSpec, s, disc: Discretization) -> np.ndarray:
    x, D = disc.nodes, disc.diff_matrix
    return D @ (x[:, None] ** 2 * D) + s * D - np.diag(w(x))


def assemble_Ls(w: PotentialSpec, s, disc: Discretization) -> np.ndarray:
    """Collocated ``d/dx(x^2 d/dx) + s d/dx - W`` with the Dirichlet row at ``x = 1``."""
    s = as_frequency(s)
    A = _operator(w, s, disc).astype(complex)
    A[-1, :] = 0.0
    A[-1, -1] = 1.0
    return A


def condition_estimate(A: np.ndarray) -> float:
    """LAPACK one-norm condition estimate; ``inf`` for an exactly singular matrix."""
    A = np.asarray(A)
    cplx = np.iscomplexobj(A)
    getrf, gecon = lapack.get_lapack_funcs(("getrf", "gecon"), (A,))
    anorm = np.linalg.norm(A, 1)
    lu, piv, info = getrf(A.astype(complex if cplx else float))
    if info > 0:
        return math.inf
    rcond, info = gecon(lu, anorm, norm="1")
    if rcond == 0:
        return math.inf
    return float(1.0 / rcond)


@dataclass(frozen=True)
class ResolventResult:
    u: GridFunction
    condition: float


def resolvent_solve(w: PotentialSpec, s, f, disc: Discretization,
                    max_condition: float = 1e12) -> ResolventResult:
    """Solve ``L_s u = f`` with ``u(1) = 0``.

    ``f`` may be a GridFunction or raw samples; its value at ``x = 1`` is
    replaced by the Dirichlet datum 0. A condition estimate above
    ``max_condition`` raises :class:`NearSingularError`, signalling a
    quasinormal frequency close to ``s``.
    """
    s = as_frequency(s)
    rhs = np.array(f.values if isinstance(f, GridFunction) else f, dtype=complex)
    if rhs.shape != (disc.n_nodes,):
        raise DomainError("right-hand side does not match the discretization")
    if not np.all(np.isfinite(rhs)):
        raise DomainError("right-hand side must be finite")
    rhs[-1] = 0.0
    A = assemble_Ls(w, s, disc)
    cond = condition_estimate(A)
    if cond > max_condition:
        raise NearSingularError(s, cond)
    u = np.linalg.solve(A, rhs)
    u[-1] = 0.0
    return ResolventResult(GridFunction(u, disc), cond)


# Eigenvalue formulation ----------------------------------------------------------

def collocation_pencil(w: PotentialSpec, disc: Discretization):
    """Real pencil ``(A, B)`` with ``A u = s B u`` equivalent to ``L_s u = 0``."""
    x, D = disc.nodes, disc.diff_matrix
    A = D @ (x[:, None] ** 2 * D) - np.diag(w(x))
    B = -D.copy()
    A[-1, :] = 0.0
    A[-1, -1] = 1.0
    B[-1, :] = 0.0
    return A, B


def pencil_eigs(w: PotentialSpec, n_nodes: int, vectors: bool = False):
    """Finite generalized eigenvalues (and optionally eigenvectors)."""
    disc = make_disc(n_nodes)
    A, B = collocation_pencil(w, disc)
    if vectors:
        ev, V = sla.eig(A, B)
    else:
        ev = sla.eig(A, B, right=False)
    keep = np.isfinite(ev)
    if vectors:
        return ev[keep], V[:, keep], disc
    return ev[keep]


def qnf_collocation(w: PotentialSpec, n_nodes: int, match_tol: float = 1e-6,
                    resolutions=None) -> list:
    """Eigenvalues present at ``n_nodes`` and ``2 n_nodes`` to within ``match_tol``.

    Returns frequencies sorted by modulus (ties by imaginary part).
    """
    if n_nodes < 32 and resolutions is None:
        raise DomainError("n_nodes must be at least 32")
    lo, hi = resolutions if resolutions is not None else (n_nodes, 2 * n_nodes)
    e1 = pencil_eigs(w, lo)
    e2 = pencil_eigs(w, hi)
    out = []
    for z in e1:
        if e2.size and np.min(np.abs(e2 - z)) < match_tol:
            out.append(complex(z))
    out.sort(key=lambda z: (abs(z), z.imag))
    return out


# Boundary system at x = 1 ----------------------------------------------------

def boundary_matrix_A(N: int) -> np.ndarray:
    """Tridiagonal integer matrix: diagonal ``2(n+1)``, superdiagonal 1,
    subdiagonal ``n(n+1) - N(N+1)`` in row ``n``."""
    if N < 1:
        raise DomainError("N must be at least 1")
    A = np.zeros((N, N), dtype=np.int64)
    for n in range(N):
        A[n, n] = 2 * (n + 1)
        if n + 1 < N:
            A[n, n + 1] = 1
        if n >= 1:
            A[n, n - 1] = n * (n + 1) - N * (N + 1)
    return A


def boundary_matrix_B(N: int) -> np.ndarray:
    """Upper bidiagonal integer matrix: diagonal ``n+1``, superdiagonal 1."""
    if N < 1:
        raise DomainError("N must be at least 1")
    B = np.zeros((N, N), dtype=np.int64)
    for n in range(N):
        B[n, n] = n + 1
        if n + 1 < N:
            B[n, n + 1] = 1
    return B


@dataclass(frozen=True)
class ShiftedProblemSpec:
    kappa: float
    N_shift: int
    lam: float

    def __post_init__(self):
        if not self.kappa >= 0:
            raise DomainError("kappa must be non-negative")
        if self.N_shift < 1:
            raise DomainError("N_shift must be at least 1")
        if not math.isfinite(self.lam):
            raise DomainError("lambda must be finite")


def boundary_rhs(spec: ShiftedProblemSpec, b, a_next) -> np.ndarray:
    """Right-hand side from ``b_n = f^{(n)}(1)``, ``n < N``, and ``a_{N+1} = u^{(N+1)}(1)``."""
    N = spec.N_shift
    b = np.asarray(b, dtype=complex)
    if len(b) < N:
        raise DomainError(f"need b_0..b_{N - 1}")
    v = b[:N].copy()
    v[-1] -= (spec.kappa + 1.0) * a_next
    return v


def boundary_solve(spec: ShiftedProblemSpec, s, v, N: int | None = None,
                   max_condition: float = 1e14) -> np.ndarray:
    """Solve ``(A_N + kappa B_N + (s+lambda) I) w = v`` for ``w = (a_1..a_N)``."""
    s = as_frequency(s)
    N = spec.N_shift if N is None else N
    if N != spec.N_shift:
        raise DomainError("N must equal the shift order of the problem")
    v = np.asarray(v, dtype=complex)
    if v.shape != (N,):
        raise DomainError(f"v must have length {N}")
    M = boundary_matrix_A(N) + spec.kappa * boundary_matrix_B(N) + (s + spec.lam) * np.eye(N)
    cond = condition_estimate(M.astype(complex))
    if cond > max_condition:
        raise SingularBoundaryError(s, spec.lam, cond)
    return np.linalg.solve(M, v)


def shifted_apply_poly(u_coeffs, spec: ShiftedProblemSpec, s) -> Polynomial:
    """Apply the shifted operator to a polynomial ``u`` (monomial coefficients).

    ``d/dx((kappa x + x^2) u') + s u' - N(N+1) u + lam sum_{i<N} (x-1)^i/i! u^{(i+1)}(1)``.
    """
    s = as_frequency(s)
    u = Polynomial(np.asarray(u_coeffs, dtype=complex))
    N = spec.N_shift
    du = u.deriv()
    out = (Polynomial([0.0, spec.kappa, 1.0]) * du).deriv() + s * du - N * (N + 1) * u
    shift = Polynomial([-1.0, 1.0])
    for i in range(N):
        out = out + spec.lam * u.deriv(i + 1)(1.0) / math.factorial(i) * shift**i
    return out
