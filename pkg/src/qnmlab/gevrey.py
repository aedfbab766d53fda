"""L2-based Gevrey seminorms and the Gevrey classification of exp(s/x).

Derivative data can overflow long before the factorial weights bring them
back into range, so oracles report ``log|d^n u|`` together with a phase and
every sum is carried out in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gammaln, logsumexp

from ._numerics import as_frequency
from .errors import DomainError, GevreyOracleError
from .series import CoeffSeq

__all__ = [
    "GevreySpec",
    "DerivativeOracle",
    "poly_oracle",
    "exp_oracle",
    "ws_oracle",
    "series_oracle",
    "seminorm",
    "log_seminorm",
    "boundary_seminorm",
    "x_norm",
    "XNorm",
    "classify_exp",
    "ExpClassification",
    "exp_derivative_poly",
    "quadrature",
    "default_panels",
]


@dataclass(frozen=True)
class GevreySpec:
    sigma: float
    k: int = 0
    l: int = 0
    N: int = 0
    M: int = 0
    quad_panels: int | None = None

    def __post_init__(self):
        # high derivatives of exp(s/x) data concentrate near 0; scale with M
        if self.quad_panels is None:
            object.__setattr__(self, "quad_panels", default_panels(self.M))
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError("sigma must be positive and finite")
        if self.k not in (0, 1, 2):
            raise DomainError("k must be 0, 1 or 2")
        if self.l not in (0, 1):
            raise DomainError("l must be 0 or 1")
        if self.N < 0 or self.M < self.N:
            raise DomainError("need 0 <= N <= M")
        if int(self.quad_panels) != self.quad_panels or self.quad_panels < 8:
            raise DomainError("quad_panels must be at least 8")


def default_panels(M: int) -> int:
    """Default panel count ``max(16, 4 (M + 1))``."""
    return max(16, 4 * (int(M) + 1))


class DerivativeOracle:
    """Derivatives ``d^n u/dx^n`` of a target function.

    Subclasses or instances supply ``eval(n, x)``; overflow-prone targets
    also override :meth:`log_table`.
    """

    def __init__(self, eval: Callable[[int, np.ndarray], np.ndarray]):
        self._eval = eval

    def eval(self, n: int, x) -> np.ndarray:
        return np.asarray(self._eval(n, np.asarray(x, dtype=float)), dtype=complex)

    def log_table(self, N: int, M: int, x) -> tuple[np.ndarray, np.ndarray]:
        """``(log|u^{(n)}(x)|, phase)`` for ``n = N..M``, shape ``(M-N+1, len(x))``."""
        x = np.asarray(x, dtype=float)
        vals = np.array([self.eval(n, x) for n in range(N, M + 1)])
        with np.errstate(divide="ignore", invalid="ignore"):
            la = np.log(np.abs(vals))
            ph = np.where(vals != 0, vals / np.where(vals == 0, 1, np.abs(vals)), 0)
        _check_finite(la, vals, N, x)
        return la, ph


def _check_finite(la, vals, N, x):
    bad = ~np.isfinite(vals) if vals is not None else np.isnan(la) | (la == np.inf)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise GevreyOracleError(N + int(i), float(x[j]))


# Oracles -----------------------------------------------------------------------

def poly_oracle(coeffs) -> DerivativeOracle:
    """Polynomial ``sum_j coeffs[j] x^j``."""
    p = Polynomial(np.asarray(coeffs, dtype=complex))

    def ev(n, x):
        return p.deriv(n)(x) if n <= p.degree() else np.zeros_like(x, dtype=complex)

    return DerivativeOracle(ev)


class _ExpOracle(DerivativeOracle):
    """``exp(s/x) - shift`` through ``x^2 f' = -s f`` differentiated n times."""

    def __init__(self, s, shift=0.0):
        self.s = as_frequency(s)
        self.shift = complex(shift)

    def eval(self, n, x):
        la, ph = self.log_table(n, n, x)
        with np.errstate(over="ignore"):
            return ph[0] * np.exp(la[0])

    def log_table(self, N, M, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("exp(s/x) derivatives are evaluated for x > 0")
        s = self.s
        nx = len(x)
        la = np.full((M - N + 1, nx), -np.inf)
        ph = np.zeros((M - N + 1, nx), dtype=complex)
        # f^{(n)} = b * exp(L), f^{(n-1)} = a * exp(L)
        L = s.real / x
        b = np.exp(1j * s.imag / x)
        a = np.zeros(nx, dtype=complex)
        for n in range(0, M + 1):
            if n >= N:
                if n == 0 and self.shift != 0:
                    v = b * np.exp(L) - self.shift
                    with np.errstate(divide="ignore"):
                        la[0] = np.log(np.abs(v))
                    ph[0] = np.where(v != 0, v / np.where(v == 0, 1, np.abs(v)), 0)
                else:
                    mag = np.abs(b)
                    with np.errstate(divide="ignore"):
                        la[n - N] = np.log(mag) + L
                    ph[n - N] = np.where(mag > 0, b / np.where(mag == 0, 1, mag), 0)
            if n == M:
                break
            nb = -((s + 2 * n * x) * b + n * (n - 1) * a) / x**2
            a, b = b, nb
            scale = np.maximum(np.abs(a), np.abs(b))
            scale = np.where(scale > 0, scale, 1.0)
            a, b = a / scale, b / scale
            L = L + np.log(scale)
        return la, ph


def exp_oracle(s) -> DerivativeOracle:
    """Derivatives of ``exp(s/x)``."""
    return _ExpOracle(s)


def ws_oracle(s) -> DerivativeOracle:
    """Derivatives of ``exp(s/x) - exp(s)``."""
    s = as_frequency(s)
    return _ExpOracle(s, shift=np.exp(s))


class _SeriesOracle(DerivativeOracle):
    """Resummed derivatives of ``sum_k H_k (1-x)^k``."""

    def __init__(self, H: CoeffSeq, x_min: float = 0.0):
        self.H = H
        self.x_min = x_min

    def eval(self, n, x):
        la, ph = self.log_table(n, n, x)
        with np.errstate(over="ignore"):
            return ph[0] * np.exp(la[0])

    def log_table(self, N, M, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x_min):
            raise DomainError(f"series oracle restricted to x >= {self.x_min}")
        k = self.H.indices()
        lh = self.H.log_abs()
        mh = self.H.mantissas
        phk = np.where(mh != 0, mh / np.where(mh == 0, 1, np.abs(mh)), 0)
        y = 1.0 - x
        with np.errstate(divide="ignore"):
            ly = np.log(np.abs(y))
        la = np.full((M - N + 1, len(x)), -np.inf)
        ph = np.zeros((M - N + 1, len(x)), dtype=complex)
        for n in range(N, M + 1):
            sel = (k >= n) & np.isfinite(lh)
            if not np.any(sel):
                continue
            kk = k[sel]
            base = lh[sel] + gammaln(kk + 1) - gammaln(kk - n + 1)
            sign = (-1) ** n
            p = kk - n
            # exponent (k-n) log|y| with y^0 = 1
            with np.errstate(invalid="ignore"):
                lt = base[:, None] + np.where(p[:, None] == 0, 0.0, p[:, None] * ly[None, :])
            phase = sign * phk[sel][:, None] * np.where(p[:, None] % 2 == 1, np.sign(y)[None, :], 1.0)
            top = np.max(lt, axis=0)
            top = np.where(np.isfinite(top), top, 0.0)
            tot = np.sum(phase * np.exp(lt - top[None, :]), axis=0)
            mag = np.abs(tot)
            with np.errstate(divide="ignore"):
                la[n - N] = np.log(mag) + top
            ph[n - N] = np.where(mag > 0, tot / np.where(mag == 0, 1, mag), 0)
        return la, ph


def series_oracle(H: CoeffSeq, x_min: float = 0.0) -> DerivativeOracle:
    """Derivatives of the series about ``x = 1`` with coefficients ``H``.

    Only meaningful inside the disc of convergence; ``x_min`` guards the
    sampling domain.
    """
    return _SeriesOracle(H, x_min)


class _ShiftedOracle(DerivativeOracle):
    """Derivative ``d/dx`` of another oracle."""

    def __init__(self, base: DerivativeOracle, shift: int = 1):
        self.base = base
        self.shift = shift

    def eval(self, n, x):
        return self.base.eval(n + self.shift, x)

    def log_table(self, N, M, x):
        return self.base.log_table(N + self.shift, M + self.shift, x)


# Quadrature and seminorms ------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def quadrature(panels: int, x_min: float = 0.0, grading: float = 3.0):
    """Composite 8-point Gauss-Legendre nodes and weights on ``[x_min, 1]``.

    Breakpoints are ``x_min + (1-x_min) (j/panels)^grading`` so that panels
    cluster at the left end, where derivatives of exp(s/x) concentrate.
    Polynomial integrands of degree up to 15 are integrated exactly on
    any panel layout.
    """
    t = (np.arange(panels + 1) / panels) ** grading
    br = x_min + (1.0 - x_min) * t
    a, b = br[:-1], br[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _log_weights(sigma, N, M, k, l, plus_one=False):
    n = np.arange(N, M + 1, dtype=float)
    lw = 2 * n * math.log(sigma) - 2 * gammaln(n + 1) - 2 * gammaln(n + 2)
    if k + l:
        base = n + 1 if plus_one else n
        with np.errstate(divide="ignore"):
            lw = lw + (k + l) * np.log(base)
    return lw


def log_seminorm(u: DerivativeOracle, spec: GevreySpec, x_min: float = 0.0,
                 plus_one: bool = False) -> float:
    """Logarithm of :func:`seminorm` (``-inf`` for a vanishing seminorm)."""
    x, w = quadrature(spec.quad_panels, x_min)
    la, _ = u.log_table(spec.N, spec.M, x)
    if np.any(np.isnan(la) | (la == np.inf)):
        i, j = np.argwhere(np.isnan(la) | (la == np.inf))[0]
        raise GevreyOracleError(spec.N + int(i), float(x[j]))
    lx = np.zeros_like(x) if spec.k == 0 else spec.k * np.log(x / spec.sigma)
    with np.errstate(divide="ignore"):
        integrand = 2.0 * la + lx[None, :] + np.log(w)[None, :]
    logI = logsumexp(integrand, axis=1)
    terms = _log_weights(spec.sigma, spec.N, spec.M, spec.k, spec.l, plus_one) + logI
    total = logsumexp(terms)
    return 0.5 * float(total)


def seminorm(u: DerivativeOracle, spec: GevreySpec, x_min: float = 0.0,
             plus_one: bool = False) -> float:
    """Partial Gevrey seminorm with indices ``N..M``.

    Each term is ``sigma^{2n} n^{k+l} / (n!^2 (n+1)!^2)`` times the
    integral of ``(x/sigma)^k |d^n u|^2`` over ``[x_min, 1]``; with
    ``plus_one`` the factor ``n^{k+l}`` becomes ``(n+1)^{k+l}``.
    """
    lv = log_seminorm(u, spec, x_min, plus_one)
    return math.exp(lv) if lv < 709 else math.inf


def _log_boundary_terms(u0: CoeffSeq, sigma, N, M, shift=0):
    idx = np.arange(N, M + 1)
    la = np.full(len(idx), -np.inf)
    src = u0.log_abs()
    for i, n in enumerate(idx):
        j = n + shift - u0.start_index
        if 0 <= j < len(u0):
            la[i] = src[j]
    lw = (2 * idx + 1) * math.log(sigma) - 2 * gammaln(idx + 1) - 2 * gammaln(idx + 2)
    return lw + 2 * la


def boundary_seminorm(u0_derivs: CoeffSeq, sigma: float, N: int, M: int) -> float:
    """``(sum_{n=N}^{M} sigma^{2n+1} |u^{(n)}(0)|^2 / (n!^2 (n+1)!^2))^{1/2}``.

    Derivatives missing from ``u0_derivs`` count as zero.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if N < 0 or M < N:
        raise DomainError("need 0 <= N <= M")
    total = 0.5 * float(logsumexp(_log_boundary_terms(u0_derivs, sigma, N, M)))
    return math.exp(total) if total < 709 else math.inf


@dataclass(frozen=True)
class XNorm:
    value: float
    tail: float
    pieces: tuple

    def __iter__(self):
        yield self.value
        yield self.tail


def x_norm(u: DerivativeOracle, u_boundary: CoeffSeq, sigma: float, M: int,
           quad_panels: int | None = None, x_min: float = 0.0) -> XNorm:
    """Truncated X-norm of ``u``: four seminorms of ``du/dx`` summed to index ``M``.

    Parameters
    ----------
    u : DerivativeOracle
        Must vanish at ``x = 1`` (checked to 1e-10).
    u_boundary : CoeffSeq
        Derivatives ``u^{(n)}(0)``; the boundary piece uses
        ``(du/dx)^{(n)}(0) = u^{(n+1)}(0)``.
    quad_panels : int, optional
        Defaults to :func:`default_panels` of ``M``.
    x_min : float
        Lower integration limit, for oracles only valid away from 0.

    Returns
    -------
    XNorm
        ``value``, the contribution of the ``n = M`` terms as ``tail``, and
        the four pieces.
    """
    u1 = complex(u.eval(0, np.array([1.0]))[0])
    if abs(u1) > 1e-10:
        raise DomainError(f"u(1) = {u1!r} violates the Dirichlet condition")
    du = _ShiftedOracle(u)
    if quad_panels is None:
        quad_panels = default_panels(M)
    pieces = []
    tails = []
    for k in (0, 1, 2):
        spec = GevreySpec(sigma, k, 0, 0, M, quad_panels)
        pieces.append(seminorm(du, spec, x_min))
        tails.append(log_seminorm(du, GevreySpec(sigma, k, 0, M, M, quad_panels), x_min))
    lb = _log_boundary_terms(u_boundary, sigma, 0, M, shift=1)
    pieces.append(math.exp(0.5 * float(logsumexp(lb))) if np.any(np.isfinite(lb)) else 0.0)
    tails.append(0.5 * float(lb[-1]))
    ltail = 0.5 * float(logsumexp(2 * np.array(tails)))
    tail = math.exp(ltail) if ltail < 709 else math.inf
    return XNorm(float(sum(pieces)), tail, tuple(pieces))


# Classification of exp(s/x) ----------------------------------------------------

@dataclass(frozen=True)
class ExpClassification:
    verdict: str
    slope: float
    n: np.ndarray
    log_g: np.ndarray


def _sup_grid(n_points=512):
    j = np.arange(1, n_points + 1)
    return 0.5 * (1.0 - np.cos(np.pi * j / n_points))


def classify_exp(s, sigma: float, n_max: int, n_points: int = 512) -> ExpClassification:
    """Trend test for ``sup_x sigma^n |d^n exp(s/x)| / n!^2``.

    ``log g_n`` is computed for ``n = 0..n_max`` on a Chebyshev-clustered
    grid in ``(0, 1]`` and a least-squares line in ``sqrt(n)`` is fitted to
    the last half. A positive slope is reported as ``"divergent"``,
    otherwise ``"bounded-trend"``.
    """
    s = as_frequency(s)
    if s.real >= 0:
        raise DomainError("classification is for Re s < 0")
    if n_max < 40:
        raise DomainError("n_max must be at least 40")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    x = _sup_grid(n_points)
    la, _ = _ExpOracle(s).log_table(0, n_max, x)
    n = np.arange(n_max + 1)
    log_g = la.max(axis=1) + n * math.log(sigma) - 2 * gammaln(n + 1)
    half = slice(n_max // 2, None)
    slope = float(np.polyfit(np.sqrt(n[half]), log_g[half], 1)[0])
    verdict = "divergent" if slope > 0 else "bounded-trend"
    return ExpClassification(verdict, slope, n, log_g)


def exp_derivative_poly(s, n: int, dps: int = 50):
    """Coefficients of ``Q_n`` with ``d^n exp(s/x) = Q_n(1/x) exp(s/x)``.

    Built from ``Q_{n+1}(y) = -y^2 (Q_n'(y) + s Q_n(y))`` in mpmath
    arithmetic; entry ``j`` multiplies ``y^j``.
    """
    with mpmath.workdps(dps):
        sm = mpmath.mpc(complex(as_frequency(s)))
        q = [mpmath.mpc(1)]
        for _ in range(n):
            d = [j * q[j] for j in range(1, len(q))] + [mpmath.mpc(0)]
            inner = [d[j] + sm * q[j] for j in range(len(q))]
            q = [mpmath.mpc(0), mpmath.mpc(0)] + [-c for c in inner]
        return q
