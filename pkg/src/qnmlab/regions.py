"""Admissibility regions in the complex frequency plane and sector angles.

All three defining sets are open and homogeneous: ``(s, sigma)`` and
``(lam*s, lam*sigma)`` are classified identically for ``lam > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import as_frequency
from .errors import DomainError

__all__ = [
    "RegionVerdict",
    "omega_member",
    "omega_grid",
    "phi0_residual",
    "phi1_residual",
    "sector_angle_phi0",
    "sector_angle_phi1",
    "sigma_interval",
]


@dataclass(frozen=True)
class RegionVerdict:
    in_omega1: bool
    in_omega2: bool
    in_omega3: bool

    @property
    def in_omega(self) -> bool:
        return self.in_omega1 and (self.in_omega2 or self.in_omega3)

    def as_dict(self):
        return {
            "in_omega1": self.in_omega1,
            "in_omega2": self.in_omega2,
            "in_omega3": self.in_omega3,
            "in_omega": self.in_omega,
        }


def _conditions(re, im, sigma):
    """Vectorised evaluation of the three strict inequality sets."""
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    mod = np.hypot(re, im)
    pos = sigma > 0

    o1 = pos & np.where(re <= 0, sigma < np.abs(im), sigma < mod)

    denom = mod + re
    with np.errstate(divide="ignore", invalid="ignore"):
        lower = np.where(denom > 0, -re * mod / (2.0 * denom), np.inf)
        ratio = np.where(mod > 0, re / mod, 0.0)
    o2 = pos & (sigma < denom) & (sigma > lower)

    q = sigma * (mod - sigma + re) - (sigma * (1.0 + ratio) + 0.5 * re) ** 2
    o3 = pos & (q > 0)
    return o1, o2, o3


def omega_member(s, sigma) -> RegionVerdict:
    """Classify ``s`` against the three regions at Gevrey parameter ``sigma``.

    Boundary points are not members. ``s = 0`` is rejected.
    """
    s = as_frequency(s)
    if s == 0:
        raise DomainError("s = 0 is excluded from every region")
    sigma = float(sigma)
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive and finite, got {sigma!r}")
    o1, o2, o3 = _conditions(s.real, s.imag, sigma)
    return RegionVerdict(bool(o1), bool(o2), bool(o3))


def omega_grid(re0, re1, im0, im1, n, sigma):
    """Membership table on an ``n`` by ``n`` grid of frequencies.

    Returns a list of ``(re, im, in1, in2, in3, in_omega)`` tuples with
    rows ordered by real part then imaginary part. The origin, if hit,
    is reported as a non-member.
    """
    if n < 1:
        raise DomainError("grid size must be positive")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    res = np.linspace(re0, re1, n)
    ims = np.linspace(im0, im1, n)
    R, I = np.meshgrid(res, ims, indexing="ij")
    o1, o2, o3 = _conditions(R, I, sigma)
    origin = (R == 0) & (I == 0)
    o1, o2, o3 = o1 & ~origin, o2 & ~origin, o3 & ~origin
    rows = []
    for i in range(n):
        for j in range(n):
            a, b, c = bool(o1[i, j]), bool(o2[i, j]), bool(o3[i, j])
            rows.append((R[i, j], I[i, j], a, b, c, a and (b or c)))
    return rows


# Sector angles -------------------------------------------------------------

def phi0_residual(phi):
    """Tangency condition of the ray ``arg s = phi`` with the third region.

    ``sin^4 phi - cos^2 phi (2 + 2 cos phi + cos^2 phi)``.
    """
    c = math.cos(phi)
    return math.sin(phi) ** 4 - c * c * (2.0 + 2.0 * c + c * c)


def _phi0_derivative(phi):
    c, s = math.cos(phi), math.sin(phi)
    # d/dphi of 1 - 4c^2 - 2c^3 (same function after using s^2 = 1 - c^2)
    return (8.0 * c + 6.0 * c * c) * s


def phi1_residual(phi):
    """``4 cos^4(phi/2) + cos phi``."""
    return 4.0 * math.cos(0.5 * phi) ** 4 + math.cos(phi)


def _phi1_derivative(phi):
    return -8.0 * math.cos(0.5 * phi) ** 3 * math.sin(0.5 * phi) - math.sin(phi)


def _bisect_newton(f, fp, a, b, width=1e-8, newton_steps=5):
    fa = f(a)
    fb = f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise ArithmeticError("root is not bracketed")
    while b - a > width:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
    x = 0.5 * (a + b)
    for _ in range(newton_steps):
        d = fp(x)
        if d == 0:
            break
        step = f(x) / d
        x -= step
        if abs(step) < 1e-16:
            break
    return x


def sector_angle_phi0() -> float:
    """Opening angle of the sector covered by the union of regions, in (pi/2, pi)."""
    return _bisect_newton(phi0_residual, _phi0_derivative, 0.5 * math.pi + 1e-9, math.pi - 1e-9)


def sector_angle_phi1() -> float:
    """Sector angle for the series-based theory, in (pi/2, pi)."""
    return _bisect_newton(phi1_residual, _phi1_derivative, 0.5 * math.pi + 1e-9, math.pi - 1e-9)


# Sigma intervals -----------------------------------------------------------

def sigma_interval(s, resolution: float):
    """Maximal open sigma-intervals on which ``s`` lies in the region.

    Sigma is scanned on ``(0, |s|)`` (the first region caps sigma below
    ``|s|``) with a step no larger than ``resolution / 4``; each sign
    change of membership is then refined by bisection.

    Returns a list of ``(lo, hi)`` pairs in increasing order.
    """
    s = as_frequency(s)
    if s == 0:
        raise DomainError("s = 0 is excluded from every region")
    if not resolution > 0:
        raise DomainError("resolution must be positive")
    mod = abs(s)
    n = max(64, int(math.ceil(4.0 * mod / resolution)))
    grid = mod * (np.arange(n) + 0.5) / n
    o1, o2, o3 = _conditions(s.real, s.imag, grid)
    inside = o1 & (o2 | o3)

    def member(sig):
        a, b, c = _conditions(s.real, s.imag, sig)
        return bool(a & (b | c))

    def refine(lo, hi, lo_in):
        # membership differs between lo and hi
        while hi - lo > resolution * 1e-3:
            m = 0.5 * (lo + hi)
            if member(m) == lo_in:
                lo = m
            else:
                hi = m
        return 0.5 * (lo + hi)

    out = []
    start = 0.0 if inside[0] else None
    for i in range(1, n):
        if inside[i] and not inside[i - 1]:
            start = refine(grid[i - 1], grid[i], False)
        elif inside[i - 1] and not inside[i]:
            out.append((start, refine(grid[i - 1], grid[i], True)))
            start = None
    if start is not None:
        out.append((start, mod))
    return out
