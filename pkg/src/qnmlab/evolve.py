"""Time evolution along outgoing null slices.

The integrated form ``d/dt psi = A psi`` with
``A psi = psi'(1) - x^2 psi'(x) - int_x^1 W psi`` is discretised on the
collocation grid and advanced with classical RK4. The derivative
hierarchy at the degenerate end is integrated separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import as_frequency
from .errors import DomainError, EvolutionBlowUp
from .potential import PotentialSpec
from .spectral import Discretization, GridFunction

__all__ = [
    "GridFunction",
    "HierarchyState",
    "generator_matrix",
    "generator_apply",
    "direct_generator_matrix",
    "stable_dt",
    "default_dt",
    "evolve",
    "aretakis_hierarchy",
    "aretakis_exact",
    "EigenCheck",
    "eigenmode_check",
    "RingdownFit",
    "ringdown_fit",
    "gaussian_data",
]

BLOWUP_NORM = 1e12
RK4_STABILITY = 2.5


def generator_matrix(w: PotentialSpec, disc: Discretization) -> np.ndarray:
    """Matrix of ``psi -> psi'(1) - x^2 psi' - int_x^1 W psi``.

    The row at ``x = 1`` vanishes identically.
    """
    x, D, J = disc.nodes, disc.diff_matrix, disc.int_matrix
    G = np.tile(D[-1], (disc.n_nodes, 1)) - x[:, None] ** 2 * D - J * w(x)[None, :]
    G[-1, :] = D[-1] - x[-1] ** 2 * D[-1] - J[-1] * w(x[-1])
    return G


def direct_generator_matrix(w: PotentialSpec, disc: Discretization) -> np.ndarray:
    """``int_x^1 [d/dxi(xi^2 d/dxi) - W]`` assembled without integrating by parts."""
    x, D, J = disc.nodes, disc.diff_matrix, disc.int_matrix
    return J @ (D @ (x[:, None] ** 2 * D) - np.diag(w(x)))


def generator_apply(w: PotentialSpec, psi: GridFunction) -> GridFunction:
    return GridFunction(generator_matrix(w, psi.disc) @ psi.values, psi.disc)


def default_dt(disc: Discretization) -> float:
    """Heuristic step ``0.5 / n_nodes^2``."""
    return 0.5 / disc.n_nodes**2


def stable_dt(G: np.ndarray) -> float:
    """Largest step with ``dt * spectral_radius(G) <= 2.5`` (inside the RK4 region)."""
    rho = float(np.max(np.abs(np.linalg.eigvals(G))))
    return math.inf if rho == 0 else RK4_STABILITY / rho


def _rk4_step(G, y, h):
    k1 = G @ y
    k2 = G @ (y + 0.5 * h * k1)
    k3 = G @ (y + 0.5 * h * k2)
    k4 = G @ (y + h * k3)
    out = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    out[-1] = 0.0
    return out


def evolve(w: PotentialSpec, psi0: GridFunction, T: float, dt: float | None = None,
           snapshot_every: int = 1, check_stability: bool = True):
    """Integrate ``d/dt psi = A psi`` on ``[0, T]``.

    Parameters
    ----------
    dt : float, optional
        Time step; default ``0.5 / n_nodes^2``. Steps beyond the RK4
        stability bound of the assembled generator are rejected.
    snapshot_every : int
        Record every this many steps (the final state is always recorded).

    Returns
    -------
    list of (t, GridFunction)
    """
    if not T > 0:
        raise DomainError("T must be positive")
    disc = psi0.disc
    G = generator_matrix(w, disc)
    if dt is None:
        dt = default_dt(disc)
    if not dt > 0:
        raise DomainError("dt must be positive")
    if check_stability:
        bound = stable_dt(G)
        if dt > bound:
            raise DomainError(f"dt={dt:.3e} exceeds the RK4 stability bound {bound:.3e}")
    if snapshot_every < 1:
        raise DomainError("snapshot_every must be >= 1")
    n_full = int(math.floor(T / dt + 1e-9))
    rest = T - n_full * dt
    if rest < 1e-12 * max(1.0, T):
        rest = 0.0
    y = np.array(psi0.values, dtype=complex)
    traj = [(0.0, psi0)]
    t = 0.0
    steps = [dt] * n_full + ([rest] if rest > 0 else [])
    for i, h in enumerate(steps, start=1):
        y = _rk4_step(G, y, h)
        t = i * dt if i <= n_full else T
        nrm = float(np.linalg.norm(y))
        if not math.isfinite(nrm) or nrm > BLOWUP_NORM:
            raise EvolutionBlowUp(t, nrm, traj)
        if i % snapshot_every == 0 or i == len(steps):
            traj.append((t, GridFunction(y.copy(), disc)))
    return traj


# Derivative hierarchy at x = 0 ----------------------------------------------

@dataclass(frozen=True)
class HierarchyState:
    """Derivatives ``a_n = d^n psi/dx^n (t, 0)`` for ``n = 1..n_max``."""

    a: np.ndarray
    t: float
    rel_error: np.ndarray = field(default=None)


def aretakis_exact(n_max: int, t: float) -> np.ndarray:
    n = np.arange(1, n_max + 1)
    return np.array([math.factorial(k) * (-t) ** (k - 1) for k in n], dtype=float)


def aretakis_hierarchy(n_max: int, T: float, dt: float, snapshot_every: int = 1):
    """RK4 for ``da_1/dt = 0``, ``da_{n+1}/dt = -n(n+1) a_n`` with ``a(0) = e_1``.

    Each state carries the relative error against ``n! (-t)^{n-1}``
    (absolute error where the exact value vanishes).
    """
    if not 1 <= n_max <= 12:
        raise DomainError("n_max must be in 1..12")
    if not 0 < dt <= 1e-3:
        raise DomainError("dt must lie in (0, 1e-3]")
    if not T > 0:
        raise DomainError("T must be positive")
    M = np.zeros((n_max, n_max))
    for n in range(1, n_max):
        M[n, n - 1] = -n * (n + 1)
    a = np.zeros(n_max)
    a[0] = 1.0
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * T:
        raise DomainError("T must be an integer multiple of dt")

    def state(a, t):
        ex = aretakis_exact(n_max, t)
        err = np.where(ex != 0, np.abs(a - ex) / np.where(ex == 0, 1, np.abs(ex)), np.abs(a))
        return HierarchyState(a.copy(), t, err)

    out = [state(a, 0.0)]
    for i in range(1, n_steps + 1):
        k1 = M @ a
        k2 = M @ (a + 0.5 * dt * k1)
        k3 = M @ (a + 0.5 * dt * k2)
        k4 = M @ (a + dt * k3)
        a = a + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if i % snapshot_every == 0 or i == n_steps:
            out.append(state(a, i * dt))
    return out


# Validation against eigenpairs ------------------------------------------------

@dataclass(frozen=True)
class EigenCheck:
    deviation: float
    zero_input: bool = False

    def __float__(self):
        return self.deviation


def eigenmode_check(w: PotentialSpec, s, u: GridFunction, T: float,
                    dt: float | None = None, x_min: float = 0.1) -> EigenCheck:
    """Max over snapshots of ``||psi(t) e^{-st} - u|| / ||u||`` on nodes ``x >= x_min``."""
    s = as_frequency(s)
    mask = u.disc.nodes >= x_min
    ref = u.values[mask]
    nrm = np.linalg.norm(ref)
    if nrm == 0:
        return EigenCheck(0.0, True)
    traj = evolve(w, u, T, dt)
    dev = 0.0
    for t, psi in traj:
        d = np.linalg.norm(psi.values[mask] * np.exp(-s * t) - ref) / nrm
        dev = max(dev, float(d))
    return EigenCheck(dev, False)


@dataclass(frozen=True)
class RingdownFit:
    """Fitted frequencies with least-squares amplitudes at the first sample."""

    frequencies: list
    amplitudes: list
    rank: int
    rank_deficient: bool
    duration: float = 0.0

    def dominant(self, min_imag: float = 0.0) -> complex:
        """Frequency whose term is largest at the last sample, among ``|Im s| > min_imag``."""
        cand = [(abs(a) * np.exp(f.real * self.duration), f)
                for f, a in zip(self.frequencies, self.amplitudes) if abs(f.imag) > min_imag]
        if not cand:
            raise DomainError("no fitted frequency passes the selection")
        return max(cand, key=lambda c: c[0])[1]


def ringdown_fit(signal, n_modes: int, rank_tol: float = 1e-10) -> RingdownFit:
    """Matrix-pencil estimate of complex frequencies in ``sum_j c_j e^{s_j t}``.

    Parameters
    ----------
    signal : sequence of (t, value)
        Uniformly spaced samples, at least ``4 n_modes`` of them.
    rank_tol : float
        Singular values below ``rank_tol`` times the largest are discarded;
        if that leaves fewer than ``n_modes`` the fit is flagged.

    Returns
    -------
    RingdownFit
        Frequencies sorted by ``|Im s|`` (then by real part).
    """
    if n_modes < 1:
        raise DomainError("n_modes must be positive")
    t = np.array([p[0] for p in signal], dtype=float)
    y = np.array([p[1] for p in signal], dtype=complex)
    if len(t) < 4 * n_modes:
        raise DomainError(f"need at least {4 * n_modes} samples")
    h = np.diff(t)
    if np.any(h <= 0) or np.max(np.abs(h - h[0])) > 1e-9 * abs(h[0]):
        raise DomainError("samples must be uniformly spaced in increasing time")
    h0 = h[0]
    n = len(y)
    L = n // 2
    Y = np.array([y[i: i + L + 1] for i in range(n - L)])
    _, sv, Vh = np.linalg.svd(Y, full_matrices=False)
    rank = int(np.sum(sv > rank_tol * sv[0])) if sv[0] > 0 else 0
    m = min(n_modes, rank)
    if m == 0:
        return RingdownFit([], [], 0, True)
    Vr = Vh[:m].T
    V1, V2 = Vr[:-1], Vr[1:]
    z = np.linalg.eigvals(np.linalg.pinv(V1) @ V2)
    z = z.astype(complex)
    amps = np.linalg.lstsq(np.vander(z, n, increasing=True).T, y, rcond=None)[0]
    order = sorted(range(m), key=lambda i: (abs(np.log(z[i]).imag), np.log(z[i]).real))
    freqs = [complex(np.log(z[i]) / h0) for i in order]
    return RingdownFit(freqs, [complex(amps[i]) for i in order], rank, m < n_modes,
                       float(t[-1] - t[0]))


def gaussian_data(disc: Discretization, center: float, width: float) -> GridFunction:
    """``exp(-((x-c)/w)^2) - exp(-((1-c)/w)^2)``, vanishing at ``x = 1``."""
    if not width > 0:
        raise DomainError("width must be positive")
    x = disc.nodes
    g = np.exp(-(((x - center) / width) ** 2)) - math.exp(-(((1.0 - center) / width) ** 2))
    return GridFunction.from_samples(disc, g)
