"""Polynomial potentials and the conjugation between radial and null coordinates.

A potential is stored through ``W(x) = x^-2 V(1/x) = sum_k W_k x^k``;
with ``V(r) = r^-2 sum_k V_k r^-k`` the coefficient lists coincide.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import comb
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as P

from ._numerics import as_frequency
from .errors import DomainError

__all__ = [
    "PotentialSpec",
    "w_from_v",
    "v_from_w",
    "load_potential",
    "conjugate_solution",
    "conjugate_source",
    "deconjugate_solution",
    "deconjugate_source",
    "radial_operator",
]


@dataclass(frozen=True)
class PotentialSpec:
    """Polynomial ``W(x) = sum_k w_coeffs[k] x^k``.

    Trailing zero coefficients are dropped so that ``p`` is the true degree
    (the zero potential keeps a single coefficient).
    """

    w_coeffs: tuple

    def __post_init__(self):
        coeffs = [float(c) for c in self.w_coeffs]
        if not coeffs:
            coeffs = [0.0]
        if not all(math.isfinite(c) for c in coeffs):
            raise DomainError("potential coefficients must be finite")
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs.pop()
        object.__setattr__(self, "w_coeffs", tuple(coeffs))

    @property
    def p(self) -> int:
        return len(self.w_coeffs) - 1

    def __call__(self, x):
        return P.polyval(x, self.w_coeffs)

    def taylor_at(self, x0: float) -> np.ndarray:
        """Coefficients ``W^{(l)}(x0)/l!`` for ``l = 0..p``."""
        c = np.asarray(self.w_coeffs)
        out = np.zeros_like(c)
        for j, cj in enumerate(c):
            for l in range(j + 1):
                out[l] += cj * comb(j, l) * x0 ** (j - l)
        return out

    def derivatives_at(self, x0: float) -> np.ndarray:
        """``W^{(l)}(x0)`` for ``l = 0..p``."""
        t = self.taylor_at(x0)
        return t * np.array([math.factorial(l) for l in range(len(t))], dtype=float)

    def reflected_coeffs(self) -> np.ndarray:
        """Coefficients of W in the variable ``y = 1 - x``."""
        t = self.taylor_at(1.0)
        return t * (-1.0) ** np.arange(len(t))

    def V(self, r):
        """Radial potential ``V(r) = r^-2 W(1/r)``."""
        r = np.asarray(r, dtype=float)
        return self(1.0 / r) / r**2


def w_from_v(v_coeffs) -> PotentialSpec:
    return PotentialSpec(tuple(v_coeffs))


def v_from_w(w: PotentialSpec) -> list:
    return list(w.w_coeffs)


def load_potential(path) -> PotentialSpec:
    """Read ``{"v_coeffs": [...]}`` or ``{"w_coeffs": [...]}`` from JSON."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise DomainError(f"potential file not found: {path}") from exc
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot parse potential file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DomainError(f"{path}: expected a JSON object")
    keys = {"v_coeffs", "w_coeffs"} & set(data)
    if len(keys) != 1:
        raise DomainError(f"{path}: exactly one of 'v_coeffs' or 'w_coeffs' is required")
    (key,) = keys
    coeffs = data[key]
    if not isinstance(coeffs, list) or not coeffs:
        raise DomainError(f"{path}: '{key}' must be a non-empty list of numbers")
    try:
        coeffs = [float(c) for c in coeffs]
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{path}: '{key}' must contain numbers only") from exc
    return PotentialSpec(tuple(coeffs))


# Conjugation maps ----------------------------------------------------------

def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("conjugation is defined for x > 0 only")
    return x


def conjugate_solution(w, s):
    """Return ``x -> exp(s/(2x)) w(1/x)``."""
    s = as_frequency(s)

    def u(x):
        x = _check_x(x)
        return np.exp(s / (2.0 * x)) * w(1.0 / x)

    return u


def conjugate_source(g, s):
    """Return ``x -> x^-2 exp(s/(2x)) g(1/x)``."""
    s = as_frequency(s)

    def f(x):
        x = _check_x(x)
        return np.exp(s / (2.0 * x)) * g(1.0 / x) / x**2

    return f


def deconjugate_solution(u, s):
    """Inverse of :func:`conjugate_solution`: ``r -> exp(-s r/2) u(1/r)``."""
    s = as_frequency(s)

    def w(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-s * r / 2.0) * u(1.0 / r)

    return w


def deconjugate_source(f, s):
    """Inverse of :func:`conjugate_source`."""
    s = as_frequency(s)

    def g(r):
        r = np.asarray(r, dtype=float)
        return np.exp(-s * r / 2.0) * f(1.0 / r) / r**2

    return g


def radial_operator(w_pot: PotentialSpec, s, fn, r, h=1e-3):
    """Central-difference application of ``w'' - (s^2/4 + V) w`` at ``r``."""
    s = as_frequency(s)
    r = np.asarray(r, dtype=float)
    d2 = (fn(r + h) - 2.0 * fn(r) + fn(r - h)) / h**2
    return d2 - (s * s / 4.0 + w_pot.V(r)) * fn(r)
