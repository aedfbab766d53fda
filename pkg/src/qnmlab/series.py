"""Power-series recurrences at both ends of the interval.

Coefficients are stored in a scaled form because they can grow
super-exponentially (Taylor data at the degenerate end grow like n!^2,
the expansion about x=1 grows like exp(2 sqrt(s k)) off the spectrum).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import mpmath
import numpy as np
from numpy.polynomial import Polynomial

from ._numerics import as_frequency
from .errors import DomainError
from .potential import PotentialSpec

__all__ = [
    "CoeffSeq",
    "leaver_coeffs",
    "leaver_row",
    "taylor_at_zero",
    "oracle_ws",
    "series_residual",
]

_LN2 = math.log(2.0)


def _split(z):
    """Write a finite complex ``z`` as ``m * 2**e`` with ``1 <= |m| < 2``."""
    a = abs(z)
    if a == 0.0:
        return 0j, 0
    _, e = math.frexp(a)  # a = f * 2**e with f in [0.5, 1)
    e -= 1
    return complex(z) / math.ldexp(1.0, e), e


@dataclass(frozen=True)
class CoeffSeq:
    """Sequence ``c_k = mantissas[i] * exp(log_scales[i])`` for ``k = start_index + i``.

    Nonzero mantissas have modulus in ``[1, 2)``; zeros are stored as
    mantissa 0 with log-scale 0.
    """

    mantissas: np.ndarray
    log_scales: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        m = np.asarray(self.mantissas, dtype=complex)
        e = np.asarray(self.log_scales, dtype=float)
        if m.shape != e.shape or m.ndim != 1:
            raise DomainError("mantissas and log_scales must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(e))):
            raise DomainError("CoeffSeq entries must be finite")
        object.__setattr__(self, "mantissas", m)
        object.__setattr__(self, "log_scales", e)

    @classmethod
    def from_values(cls, values, start_index: int = 0) -> "CoeffSeq":
        vals = np.asarray(values, dtype=complex)
        m = np.empty(len(vals), dtype=complex)
        e = np.empty(len(vals))
        for i, z in enumerate(vals):
            mi, ei = _split(z)
            m[i], e[i] = mi, ei * _LN2
        return cls(m, e, start_index)

    @classmethod
    def from_mp(cls, values, start_index: int = 0) -> "CoeffSeq":
        """Build from arbitrary-precision values without overflow."""
        m = np.zeros(len(values), dtype=complex)
        e = np.zeros(len(values))
        for i, z in enumerate(values):
            z = mpmath.mpc(z)
            if z == 0:
                continue
            ex = int(mpmath.floor(mpmath.log(abs(z), 2)))
            mant = complex(z / mpmath.mpf(2) ** ex)
            if abs(mant) >= 2.0:  # guard rounding in the floor
                mant /= 2.0
                ex += 1
            elif abs(mant) < 1.0:
                mant *= 2.0
                ex -= 1
            m[i], e[i] = mant, ex * _LN2
        return cls(m, e, start_index)

    def __len__(self):
        return len(self.mantissas)

    @property
    def stop_index(self) -> int:
        return self.start_index + len(self)

    def indices(self) -> np.ndarray:
        return np.arange(self.start_index, self.stop_index)

    def __getitem__(self, k: int) -> complex:
        i = k - self.start_index
        if not 0 <= i < len(self):
            raise IndexError(k)
        return complex(self.mantissas[i] * math.exp(self.log_scales[i]))

    def values(self) -> np.ndarray:
        """Unscaled values; entries overflow to inf when out of double range."""
        with np.errstate(over="ignore", invalid="ignore"):
            return self.mantissas * np.exp(self.log_scales)

    def log_abs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.mantissas)) + self.log_scales

    def scaled_values(self, log_ref: float | None = None) -> np.ndarray:
        """Values multiplied by ``exp(-log_ref)`` (default: the largest log-modulus)."""
        if log_ref is None:
            la = self.log_abs()
            finite = la[np.isfinite(la)]
            log_ref = float(finite.max()) if finite.size else 0.0
        with np.errstate(over="ignore", under="ignore"):
            return self.mantissas * np.exp(self.log_scales - log_ref)


# Expansion about x = 1 --------------------------------------------------------

def leaver_row(w_tilde, s, k):
    """Coefficients of one recurrence row.

    Returns ``c`` of length ``p + 3`` such that
    ``sum_m c[m] H_{k+2-m} = 0``.  Entries referring to ``H_j`` with
    ``j <= 0`` are zeroed.
    """
    p = len(w_tilde) - 1
    c = np.zeros(p + 3, dtype=complex)
    c[0] = (k + 2) * (k + 1)
    c[1] = -(k + 1) * (2 * (k + 1) + s)
    c[2] = k * (k + 1)
    c[2:] -= w_tilde
    for m in range(p + 3):
        if k + 2 - m <= 0:
            c[m] = 0.0
    return c


def leaver_coeffs(w: PotentialSpec, s, K: int, dps: int | None = None) -> CoeffSeq:
    """Coefficients ``H_0..H_K`` of ``u = sum_k H_k (1-x)^k`` with ``H_0=0, H_1=1``.

    Parameters
    ----------
    w : PotentialSpec
    s : complex
    K : int
        Highest index computed (``K >= 2``).
    dps : int, optional
        Decimal precision for an mpmath evaluation. Useful when the
        minimal solution has to be followed far into the tail, where
        double-precision roundoff excites the dominant branch. ``s`` may
        then be an mpmath number carrying more than double precision.
    """
    if K < 2:
        raise DomainError("K must be at least 2")
    wt = w.reflected_coeffs()
    p = len(wt) - 1
    if dps is not None:
        return _leaver_coeffs_mp(wt, s, K, dps)
    s = as_frequency(s)

    m = np.zeros(K + 1, dtype=complex)
    e = np.zeros(K + 1)
    m[1] = 1.0
    for k in range(K - 1):
        ref = e[k + 1]
        # right-hand side in units of exp(ref)
        acc = (k + 1) * (2 * (k + 1) + s) * m[k + 1]
        if k >= 1:
            acc -= k * (k + 1) * m[k] * math.exp(e[k] - ref)
        for l in range(min(p, k) + 1):
            j = k - l
            if j >= 1:
                acc += wt[l] * m[j] * math.exp(e[j] - ref)
        mi, ei = _split(acc / ((k + 2) * (k + 1)))
        m[k + 2] = mi
        e[k + 2] = ref + ei * _LN2 if mi != 0 else ref
    return CoeffSeq(m, e, 0)


def _leaver_coeffs_mp(wt, s, K, dps):
    with mpmath.workdps(dps):
        sm = mpmath.mpc(s) if isinstance(s, (mpmath.mpc, mpmath.mpf)) else mpmath.mpc(complex(s))
        wt_mp = [mpmath.mpf(float(c)) for c in wt]
        p = len(wt) - 1
        H = [mpmath.mpc(0)] * (K + 1)
        H[1] = mpmath.mpc(1)
        for k in range(K - 1):
            acc = (k + 1) * (2 * (k + 1) + sm) * H[k + 1] - k * (k + 1) * H[k]
            for l in range(min(p, k) + 1):
                if k - l >= 1:
                    acc += wt_mp[l] * H[k - l]
            H[k + 2] = acc / ((k + 2) * (k + 1))
        return CoeffSeq.from_mp(H, 0)


def series_residual(w: PotentialSpec, s, H: CoeffSeq, K: int) -> float:
    """Defect of the truncated series in the operator, by polynomial substitution.

    With ``y = 1 - x`` the operator reads
    ``d/dy((1-y)^2 du/dy) - s du/dy - W(1-y) u``.  The polynomial
    ``sum_{k<=K} H_k y^k`` is pushed through it and the largest coefficient
    of orders ``0..K-2`` is returned, relative to ``max |H_k|``.
    """
    s = as_frequency(s)
    if H.start_index > 0 or H.stop_index < K + 1:
        raise DomainError(f"need H_0..H_{K}; got indices {H.start_index}..{H.stop_index - 1}")
    coeffs = np.zeros(K + 1, dtype=complex)
    coeffs[H.start_index :] = H.scaled_values()[: K + 1 - H.start_index]
    u = Polynomial(coeffs)
    one_minus_y_sq = Polynomial([1.0, -2.0, 1.0])
    Wy = Polynomial(np.asarray(w.w_coeffs, dtype=float))(Polynomial([1.0, -1.0]))
    du = u.deriv()
    res = (one_minus_y_sq * du).deriv() - s * du - Wy * u
    rc = np.zeros(K - 1, dtype=complex)
    n = min(K - 1, len(res.coef))
    rc[:n] = res.coef[:n]
    return float(np.max(np.abs(rc))) if rc.size else 0.0


# Expansion about x = 0 --------------------------------------------------------

def taylor_at_zero(w: PotentialSpec, s, f_taylor, N: int, u0: complex = 0.0) -> CoeffSeq:
    """Derivatives ``u^{(n)}(0)``, ``n = 0..N``, forced by the degenerate end.

    Uses ``s u^{(n+1)}(0) = f^{(n)}(0) - n(n+1) u^{(n)}(0)
    + sum_j C(n,j) W^{(j)}(0) u^{(n-j)}(0)``.

    Parameters
    ----------
    f_taylor : CoeffSeq or array_like
        Source derivatives ``f^{(n)}(0)`` starting at ``n = 0``; missing
        entries are taken as zero.
    u0 : complex
        Seed ``u(0)``.
    """
    s = as_frequency(s)
    if s == 0:
        raise ZeroDivisionError("s = 0: the boundary relation at x = 0 degenerates")
    if N < 0:
        raise DomainError("N must be non-negative")
    if isinstance(f_taylor, CoeffSeq):
        f_seq = f_taylor
    else:
        f_seq = CoeffSeq.from_values(np.asarray(f_taylor, dtype=complex), 0)
    fm = f_seq.mantissas
    f0 = f_seq.start_index

    Wd = w.derivatives_at(0.0)
    p = len(Wd) - 1
    m = np.zeros(N + 1, dtype=complex)
    e = np.zeros(N + 1)
    m0, e0 = _split(complex(u0))
    m[0], e[0] = m0, e0 * _LN2
    for n in range(N):
        i = n - f0
        has_f = 0 <= i < len(f_seq) and fm[i] != 0
        ref = max(e[: n + 1].max(), f_seq.log_scales[i] if has_f else -np.inf)
        acc = -n * (n + 1) * m[n] * math.exp(e[n] - ref)
        for j in range(min(n, p) + 1):
            if Wd[j] != 0:
                acc += comb(n, j) * Wd[j] * m[n - j] * math.exp(e[n - j] - ref)
        if has_f:
            acc += fm[i] * math.exp(f_seq.log_scales[i] - ref)
        mi, ei = _split(acc / s)
        m[n + 1] = mi
        e[n + 1] = ref + ei * _LN2 if mi != 0 else 0.0
    return CoeffSeq(m, e, 0)


def oracle_ws(s, x):
    """Kernel solution ``exp(s/x) - exp(s)`` of the potential-free operator."""
    s = as_frequency(s)
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("oracle_ws is defined for x > 0")
    return np.exp(s / x) - np.exp(s)
