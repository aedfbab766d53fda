"""Quasinormal frequencies from the expansion about x = 1.

The coefficients ``H_k`` of ``u = sum H_k (1-x)^k`` obey a ``(p+3)``-term
recurrence. A frequency is accepted when the solution selected by
``H_0 = 0`` is the minimal (decaying) one, i.e. the dominant amplitude in
``H_k ~ k^{-3/4} (A+ exp(2 sqrt(sk)) + A- exp(-2 sqrt(sk)))`` vanishes.
Two formulations are provided: a continued fraction for the ratio
``H_2/H_1`` of the minimal solution, and a direct fit of ``A+``.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np

from ._numerics import as_frequency, sqrt_branch
from .errors import (
    BandReductionError,
    ContinuedFractionPoleError,
    DomainError,
    InsufficientDataError,
    WindowTooSmallError,
)
from .potential import PotentialSpec
from .regions import sector_angle_phi1
from .series import CoeffSeq, leaver_coeffs

__all__ = [
    "Method",
    "AsymFit",
    "QnfResult",
    "SectorExitWarning",
    "cf_ratio",
    "band_reduce",
    "dispersion",
    "asym_coeffs",
    "dominant_amplitude",
    "asym_depth",
    "branch_separation",
    "branch_corrections",
    "qnf_find",
    "qnf_scan",
    "polish_root",
    "polish_root_mp",
    "leaver_condition_check",
    "leaver_tail_slope",
]

PIVOT_FLOOR = 1e-300
MIN_SEPARATION = 30.0


class Method(str, enum.Enum):
    CONTINUED_FRACTION = "continued_fraction"
    ASYMPTOTIC = "asymptotic"
    COLLOCATION = "collocation"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        aliases = {"cf": cls.CONTINUED_FRACTION, "asym": cls.ASYMPTOTIC, "eig": cls.COLLOCATION}
        try:
            return aliases.get(name) or cls(name)
        except ValueError:
            raise DomainError(f"unknown method {name!r}; use cf or asym") from None


class SectorExitWarning(UserWarning):
    """Iterate left the sector where the series criterion is known to apply."""


@dataclass(frozen=True)
class AsymFit:
    a_plus: complex
    a_minus: complex
    window: tuple
    drift: float
    log_ratio: float = field(default=float("nan"))
    """``log(|A+|/|A-|)`` computed without overflow."""

    @property
    def ratio(self) -> float:
        return math.exp(self.log_ratio) if self.log_ratio < 700 else math.inf


@dataclass(frozen=True)
class QnfResult:
    s: complex
    method: Method
    residual: float
    iterations: int
    converged: bool = True

    def as_dict(self):
        return {
            "s_re": self.s.real,
            "s_im": self.s.imag,
            "residual": self.residual,
            "method": self.method.value,
            "iterations": self.iterations,
            "converged": self.converged,
        }


# Recurrence rows and band reduction -----------------------------------------
#
# These helpers are written against plain arithmetic so that ``s`` may be a
# Python complex, a numpy array of frequencies, or an mpmath number.

def _rows(wt, s, K):
    p = len(wt) - 1
    rows = []
    for k in range(K + 1):
        c = [0] * (p + 3)
        c[0] = (k + 2) * (k + 1)
        c[1] = -(k + 1) * (2 * (k + 1) + s)
        c[2] = k * (k + 1) - wt[0]
        for l in range(1, p + 1):
            c[2 + l] = -wt[l]
        for m in range(p + 3):
            if k + 2 - m <= 0:
                c[m] = 0
        rows.append(c)
    return rows


def _tiny(x):
    if isinstance(x, np.ndarray):
        return bool(np.any(np.abs(x) < PIVOT_FLOOR))
    return abs(x) < PIVOT_FLOOR


def _reduce(rows):
    width = len(rows[0])
    while width > 3:
        new = []
        for k, row in enumerate(rows):
            r = list(row[: width - 1])
            if k + 3 - width >= 1:
                piv = new[k - 1][width - 2]
                if _tiny(piv):
                    raise BandReductionError(
                        f"pivot underflow at k={k} while reducing width {width}"
                    )
                f = row[width - 1] / piv
                prev = new[k - 1]
                for m in range(1, width - 1):
                    r[m] = r[m] - f * prev[m - 1]
            new.append(r)
        rows = new
        width -= 1
    return rows


def _seed(s, K, sqrt):
    return 1 - sqrt(s / K) + (s / 2 - 0.75) / K


def _sweep(triples, r, K, s_for_error=None):
    for k in range(K - 1, 0, -1):
        a, b, c = triples[k]
        den = b + a * r
        if isinstance(den, np.ndarray):
            with np.errstate(divide="ignore", invalid="ignore"):
                r = -c / den
        else:
            if den == 0:
                raise ContinuedFractionPoleError(s_for_error, k)
            r = -c / den
    return r


def cf_ratio(w: PotentialSpec, s, K: int = 400) -> complex:
    """Ratio ``H_2/H_1`` of the minimal solution for a constant potential.

    Backward evaluation of the continued fraction from depth ``K``, seeded
    with the decaying large-k ratio.
    """
    s = as_frequency(s)
    if w.p != 0:
        raise DomainError("cf_ratio needs a constant potential (three-term recurrence)")
    if K < 50:
        raise DomainError("continued-fraction depth must be at least 50")
    w1 = w.w_coeffs[0]
    r = 1 - sqrt_branch(s / K) + (s / 2 - 0.75) / K
    for k in range(K - 1, 0, -1):
        den = (k + 1) * (2 * (k + 1) + s) - (k + 2) * (k + 1) * r
        if den == 0:
            raise ContinuedFractionPoleError(s, k)
        r = (k * (k + 1) - w1) / den
    return r


def band_reduce(w: PotentialSpec, s, K: int):
    """Three-term coefficients ``(alpha_k, beta_k, gamma_k)``, ``k = 0..K``.

    Row ``k`` reads ``alpha_k H_{k+2} + beta_k H_{k+1} + gamma_k H_k = 0`` and
    is obtained by eliminating lower-index terms with the previously reduced
    rows. Returns a complex array of shape ``(K+1, 3)``.
    """
    s = as_frequency(s)
    rows = _reduce(_rows(w.reflected_coeffs(), s, K))
    return np.array(rows, dtype=complex)


def dispersion(w: PotentialSpec, s, depth: int = 400):
    """``F(s) = r_1(s) - (2+s)/2``.

    ``r_1`` is ``H_2/H_1`` for the minimal solution of the reduced
    recurrence; ``(2+s)/2`` is the ratio forced by the first row with
    ``H_0 = 0``. Accepts a scalar or an array of frequencies; array input
    yields ``nan`` instead of raising at continued-fraction poles.
    """
    if depth < 50:
        raise DomainError("continued-fraction depth must be at least 50")
    if np.ndim(s) == 0:
        s = as_frequency(s)
        sqrt = sqrt_branch
    else:
        s = np.asarray(s, dtype=complex)
        sqrt = sqrt_branch
    triples = _reduce(_rows(w.reflected_coeffs(), s, depth))
    r1 = _sweep(triples, _seed(s, depth, sqrt), depth, s)
    return r1 - (2 + s) / 2


def _dispersion_mp(wt_mp, s, depth):
    triples = _reduce(_rows(wt_mp, s, depth))
    r1 = _sweep(triples, _seed(s, depth, mpmath.sqrt), depth, s)
    return r1 - (2 + s) / 2


def polish_root(w: PotentialSpec, s, dps: int = 50, depth: int = 800) -> complex:
    """Refine a root of the dispersion function in extended precision.

    Returns the root rounded to double precision. The working precision is
    kept so that forward recurrences at the returned value can be run with
    ``leaver_coeffs(..., dps=dps)``; see :func:`polish_root_mp`.
    """
    return complex(polish_root_mp(w, s, dps, depth))


def polish_root_mp(w: PotentialSpec, s, dps: int = 50, depth: int = 800):
    s = as_frequency(s)
    with mpmath.workdps(dps):
        wt = [mpmath.mpf(float(c)) for c in w.reflected_coeffs()]
        f = lambda z: _dispersion_mp(wt, z, depth)  # noqa: E731
        z0 = mpmath.mpc(s.real, s.imag)
        return mpmath.findroot(f, (z0, z0 * (1 + mpmath.mpf("1e-7"))), solver="secant",
                               tol=mpmath.mpf(10) ** (-2 * dps + 10), maxsteps=100)


# Asymptotic amplitudes -------------------------------------------------------

def branch_corrections(w: PotentialSpec | None, s, order: int = 2):
    """Coefficients ``[1, c1, c2]`` of ``1 + c1 k^-1/2 + c2 k^-1`` for both branches.

    Each branch of the recurrence behaves like
    ``k^{-3/4} exp(beta sqrt(k)) (1 + c1/sqrt(k) + c2/k + ...)`` with
    ``beta = +/- 2 sqrt(s)``. The corrections follow from expanding the
    recurrence in powers of ``k^-1/2``; they depend on the potential only
    through ``W(0)`` and ``sum_l l wt_l`` where ``wt`` are the coefficients
    of W in ``1 - x``.

    Returns a pair ``(plus, minus)`` of coefficient lists of length
    ``order + 1``.
    """
    if order not in (0, 1, 2):
        raise DomainError("correction order must be 0, 1 or 2")
    if order == 0:
        return [1.0], [1.0]
    if w is None:
        raise DomainError("branch corrections need the potential")
    wt = w.reflected_coeffs()
    S0 = float(np.sum(wt))
    S1 = float(np.sum(np.arange(len(wt)) * wt))
    s = as_frequency(s)
    out = []
    for beta in (2 * sqrt_branch(s), -2 * sqrt_branch(s)):
        b2 = beta * beta
        b4 = b2 * b2
        c1 = (b4 - 36.0 - 192.0 * S0) / (96.0 * beta)
        c2 = (
            b4 * b4
            - 384.0 * b4 * S0
            - 360.0 * b4
            + 9216.0 * b2 * (S0 + S1)
            + 36864.0 * S0 * S0
            - 4608.0 * S0
            - 2160.0
        ) / (18432.0 * b2)
        out.append([1.0, c1, c2][: order + 1])
    return out[0], out[1]


def _corr(c, k):
    return sum(cj * k ** (-0.5 * j) for j, cj in enumerate(c))


def _pair_amplitudes(H: CoeffSeq, sq, k, corr=([1.0], [1.0])):
    """Scaled 2x2 fit of the two branches to ``H_k, H_{k+1}``.

    Returns ``(log|A+|, phase+, log|A-|, phase-, cond)``.
    """
    i = k - H.start_index
    mk, mk1 = H.mantissas[i], H.mantissas[i + 1]
    if mk == 0:
        raise WindowTooSmallError(f"H_{k} vanishes; cannot form ratio")
    q = (mk1 / mk) * math.exp(H.log_scales[i + 1] - H.log_scales[i])
    cp, cm = corr
    Sp0, Sp1 = _corr(cp, k), _corr(cp, k + 1)
    Sm0, Sm1 = _corr(cm, k), _corr(cm, k + 1)
    shape = ((k + 1) / k) ** -0.75
    dphi = 2 * sq * (math.sqrt(k + 1) - math.sqrt(k))
    rho_p = shape * cmath.exp(dphi) * Sp1 / Sp0
    rho_m = shape * cmath.exp(-dphi) * Sm1 / Sm0
    M = np.array([[1.0, 1.0], [rho_p, rho_m]], dtype=complex)
    cond = np.linalg.cond(M)
    a_p = (q - rho_m) / (rho_p - rho_m)
    a_m = 1 - a_p
    # A(+/-) = a(+/-) H_k / phi(+/-)(k)
    logH = math.log(abs(mk)) + H.log_scales[i]
    phaseH = mk / abs(mk)
    e = 2 * sq * math.sqrt(k)
    base = logH + 0.75 * math.log(k)

    def part(a, sign, S):
        if a == 0 or S == 0:
            return -math.inf, 0j
        z = a / S
        return (base + math.log(abs(z)) - sign * e.real,
                (z / abs(z)) * phaseH * cmath.exp(-1j * sign * e.imag))

    lp, php = part(a_p, 1, Sp0)
    lm, phm = part(a_m, -1, Sm0)
    return lp, php, lm, phm, cond


def _from_log(l, ph):
    if l == -math.inf:
        return 0j
    if l > 709:
        return complex(math.inf, 0)
    return ph * math.exp(l)


def asym_coeffs(H: CoeffSeq, s, window, w: PotentialSpec | None = None,
                order: int = 0) -> AsymFit:
    """Branch amplitudes fitted pairwise over ``k_lo <= k < k_hi``.

    ``a_plus``/``a_minus`` are component-wise medians of the per-pair
    amplitudes. ``drift`` is the relative change, across the window, of the
    amplitude of the branch that carries ``H`` there, and ``log_ratio`` is
    ``log(|a_plus|/|a_minus|)``.

    With ``order > 0`` each branch carries the ``k^-1/2`` corrections from
    :func:`branch_corrections` (needs ``w``), which removes most of the
    slow variation of the amplitudes across the window.
    """
    s = as_frequency(s)
    k_lo, k_hi = int(window[0]), int(window[1])
    if k_lo < 10 or k_hi <= k_lo:
        raise DomainError("window must satisfy 10 <= k_lo < k_hi")
    if k_hi >= H.stop_index:
        raise DomainError(f"window end {k_hi} needs H_{k_hi}; sequence stops at {H.stop_index - 1}")
    sq = sqrt_branch(s)
    if sq.real <= 0:
        raise DomainError("asymptotic split needs Re sqrt(s) > 0 (s off the negative real axis)")
    corr = branch_corrections(w, s, order)
    logs_p, logs_m, ph_p, ph_m = [], [], [], []
    for k in range(k_lo, k_hi):
        lp, php, lm, phm, cond = _pair_amplitudes(H, sq, k, corr)
        if cond > 1e12:
            raise WindowTooSmallError(f"2x2 branch fit ill-conditioned at k={k} (cond {cond:.2e})")
        logs_p.append(lp)
        logs_m.append(lm)
        ph_p.append(php)
        ph_m.append(phm)
    logs_p, logs_m = np.array(logs_p), np.array(logs_m)
    # per-branch scale for the medians
    ref_p, ref_m = np.max(logs_p), np.max(logs_m)
    with np.errstate(under="ignore"):
        vp = np.array(ph_p) * np.exp(logs_p - ref_p)
        vm = np.array(ph_m) * np.exp(logs_m - ref_m)
    med_p = complex(np.median(vp.real), np.median(vp.imag))
    med_m = complex(np.median(vm.real), np.median(vm.imag))
    lmp = math.log(abs(med_p)) + ref_p if med_p != 0 else -math.inf
    lmm = math.log(abs(med_m)) + ref_m if med_m != 0 else -math.inf
    # the branch carrying H mid-window, compared by contribution not amplitude
    e_mid = 2.0 * sq.real * math.sqrt(0.5 * (k_lo + k_hi))
    dom = vp if lmp + e_mid >= lmm - e_mid else vm
    drift = float(abs(dom[-1] - dom[0]) / max(abs(dom[-1]), 1e-300))
    log_ratio = lmp - lmm if lmm > -math.inf else math.inf
    return AsymFit(
        a_plus=_from_log(lmp, med_p / abs(med_p) if med_p else 0j),
        a_minus=_from_log(lmm, med_m / abs(med_m) if med_m else 0j),
        window=(k_lo, k_hi),
        drift=drift,
        log_ratio=float(log_ratio),
    )


def branch_separation(s, K: int) -> float:
    """``4 Re sqrt(s K)``: log of the dominant/minimal ratio accumulated by index ``K``."""
    return 4.0 * sqrt_branch(as_frequency(s)).real * math.sqrt(K)


def asym_depth(s, target: float = 60.0, lo: int = 60, hi: int = 4000) -> int:
    """Index where the branches separate by ``exp(target)``: ``4 Re sqrt(s k) = target``."""
    re_sq = sqrt_branch(as_frequency(s)).real
    if re_sq <= 0:
        return hi
    return int(min(hi, max(lo, math.ceil((target / (4.0 * re_sq)) ** 2))))


def dominant_amplitude(w: PotentialSpec, s, K: int | None = None, dps: int | None = None) -> complex:
    """Objective for the amplitude method: ``A+`` fitted at the pair ``(K, K+1)``.

    ``H`` is normalised by ``H_1 = 1``, so ``A+`` is an analytic function of
    ``s`` vanishing exactly at the frequencies where ``H`` is minimal.
    Truncating the branch corrections leaks the decaying branch into ``A+``
    at a relative level of about ``exp(-4 Re sqrt(s K))``; the default
    ``K`` keeps that below ``exp(-60)``. The recurrence is run in extended
    precision so that the dominant part of ``H_K`` is resolved.
    """
    s = as_frequency(s)
    if K is None:
        K = asym_depth(s)
    if dps is None:
        dps = 30 + int(4 * sqrt_branch(s).real * math.sqrt(K) / math.log(10))
    H = leaver_coeffs(w, s, K + 1, dps=dps)
    lp, php, _, _, _ = _pair_amplitudes(H, sqrt_branch(s), K, branch_corrections(w, s, 2))
    return _from_log(lp, php)


# Root finding -----------------------------------------------------------------

def _secant(f, s0, s1, tol, max_iter):
    """Secant iteration; returns ``(best, |f(best)|, iterations, last_step)``."""
    f0, f1 = f(s0), f(s1)
    best = (abs(f1), s1) if abs(f1) < abs(f0) else (abs(f0), s0)
    it = 0
    step = abs(s1 - s0)
    while it < max_iter and best[0] >= tol:
        it += 1
        den = f1 - f0
        if den == 0 or not cmath.isfinite(den):
            break
        s2 = complex(s1 - f1 * (s1 - s0) / den)
        if not cmath.isfinite(s2):
            break
        step = abs(s2 - s1)
        s0, f0 = s1, f1
        s1 = s2
        f1 = f(s1)
        if not cmath.isfinite(f1):
            break
        if abs(f1) < best[0]:
            best = (abs(f1), s1)
    return complex(best[1]), float(best[0]), it, step


def qnf_find(
    w: PotentialSpec,
    seed,
    method="cf",
    tol: float = 1e-9,
    depth: int = 400,
    max_iter: int = 50,
    K_asym: int | None = None,
) -> QnfResult:
    """Secant iteration for a quasinormal frequency starting at ``seed``.

    ``method='cf'`` drives the dispersion function to zero; ``'asym'``
    drives the fitted dominant amplitude ``A+`` to zero (the fit index is
    fixed from the seed so the objective is smooth). If band reduction fails the
    amplitude method is used instead. Non-convergence is reported through
    ``converged=False`` together with the best iterate.
    """
    seed = as_frequency(seed)
    if seed == 0:
        raise DomainError("seed must be nonzero")
    method = Method.parse(method)
    if method is Method.COLLOCATION:
        raise DomainError("qnf_find supports cf and asym; use spectral.qnf_collocation")

    def f_cf(z):
        try:
            return complex(dispersion(w, z, depth))
        except ContinuedFractionPoleError:
            return complex(dispersion(w, z, depth + 1))

    K_fixed = K_asym if K_asym is not None else asym_depth(seed)

    def f_asym(z):
        return dominant_amplitude(w, z, K_fixed)

    f = f_cf
    if method is Method.CONTINUED_FRACTION:
        try:
            f_cf(seed)
        except BandReductionError:
            method, f = Method.ASYMPTOTIC, f_asym
    else:
        f = f_asym

    h = 1e-4 * max(1.0, abs(seed))
    root, res, it, step = _secant(f, seed, seed + h * (1 + 1j) / math.sqrt(2), tol, max_iter)
    converged = res < tol
    if method is Method.ASYMPTOTIC:
        # |A+| has no natural scale, so also require the iterates to have settled
        converged = converged and step < 1e-6 * max(1.0, abs(root))
    else:
        # near the negative real axis the branches do not separate by the
        # truncation depth and the continued fraction has not converged
        converged = converged and branch_separation(root, depth) >= MIN_SEPARATION
    phi1 = sector_angle_phi1()
    if converged and abs(cmath.phase(root)) >= phi1:
        warnings.warn(
            f"root {root} lies outside |arg s| < {phi1:.6f}; convergence theory does not cover it",
            SectorExitWarning,
            stacklevel=2,
        )
    return QnfResult(root, method, float(res), it, bool(converged))


def _abs_dispersion_row(args):
    w, row, depth = args
    with np.errstate(all="ignore"):
        return np.abs(dispersion(w, row, depth))


def _local_minima(A):
    n0, n1 = A.shape
    out = []
    for i in range(n0):
        for j in range(n1):
            v = A[i, j]
            if not np.isfinite(v):
                continue
            nb = A[max(i - 1, 0): i + 2, max(j - 1, 0): j + 2]
            nb = nb[np.isfinite(nb)]
            if v <= nb.min():
                out.append((i, j))
    return out


def qnf_scan(
    w: PotentialSpec,
    rect,
    grid=(40, 40),
    method="cf",
    tol: float = 1e-9,
    depth: int = 400,
    workers: int | None = None,
    dedup: float = 1e-6,
):
    """Locate roots in ``rect = (re0, re1, im0, im1)``.

    ``|F|`` is sampled on a ``grid[0]`` by ``grid[1]`` lattice, each local
    minimum seeds :func:`qnf_find`, and converged roots inside the
    rectangle are deduplicated and sorted by modulus. Rows of the lattice
    are evaluated in parallel when ``workers > 1``; the result does not
    depend on the worker count.
    """
    re0, re1, im0, im1 = map(float, rect)
    if not (re1 > re0 and im1 > im0):
        raise DomainError("rectangle must satisfy re0 < re1 and im0 < im1")
    n_re, n_im = int(grid[0]), int(grid[1])
    if n_re < 2 or n_im < 2:
        raise DomainError("grid needs at least 2 points per direction")
    res = np.linspace(re0, re1, n_re)
    ims = np.linspace(im0, im1, n_im)
    S = res[:, None] + 1j * ims[None, :]
    tasks = [(w, S[i], depth) for i in range(n_re)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            A = np.array(list(ex.map(_abs_dispersion_row, tasks)))
    else:
        A = np.array([_abs_dispersion_row(t) for t in tasks])

    found = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SectorExitWarning)
        for i, j in _local_minima(A):
            seed = S[i, j]
            if seed == 0:
                continue
            r = qnf_find(w, seed, method=method, tol=tol, depth=depth)
            z = r.s
            if not r.converged:
                continue
            if not (re0 <= z.real <= re1 and im0 <= z.imag <= im1):
                continue
            if any(abs(z - q.s) < dedup for q in found):
                continue
            found.append(r)
    found.sort(key=lambda q: (abs(q.s), q.s.imag, q.s.real))
    return found


# Boundedness criterion ---------------------------------------------------------

def leaver_tail_slope(H: CoeffSeq, s) -> float:
    """Least-squares slope of ``log|H_k| + 2 Re sqrt(s k)`` against ``sqrt(k)``
    over the last third of the nonzero coefficients."""
    s = as_frequency(s)
    if s.real >= 0:
        raise DomainError("the boundedness criterion is stated for Re s < 0")
    k = H.indices()
    la = H.log_abs()
    keep = (k >= 1) & np.isfinite(la)
    k, la = k[keep], la[keep]
    if len(k) < 60:
        raise InsufficientDataError(f"need at least 60 coefficients, got {len(k)}")
    sq = sqrt_branch(s)
    m = la + 2.0 * (sq * np.sqrt(k)).real
    tail = slice(len(k) - len(k) // 3, None)
    x = np.sqrt(k[tail].astype(float))
    slope = np.polyfit(x, m[tail], 1)[0]
    return float(slope)


def leaver_condition_check(H: CoeffSeq, s) -> bool:
    """True when ``|H_k exp(2 sqrt(s k))|`` shows a non-increasing tail trend."""
    return leaver_tail_slope(H, s) <= 0.0
