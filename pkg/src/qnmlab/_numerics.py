"""Small numerical helpers shared across modules."""

import cmath
import math

import numpy as np

from .errors import DomainError


def as_frequency(s):
    """Coerce ``s`` to a finite Python complex or raise DomainError."""
    try:
        z = complex(s)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"not a complex frequency: {s!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"frequency must be finite, got {s!r}")
    return z


def sqrt_branch(z):
    """Square root with non-negative real part.

    Agrees with the principal branch everywhere except on the negative real
    axis, where the principal branch already has zero real part.
    Works on scalars and numpy arrays.
    """
    if np.ndim(z) == 0:
        w = cmath.sqrt(complex(z))
        return -w if w.real < 0 else w
    w = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(w.real < 0, -w, w)


def log_factorial(n):
    """log(n!) for integer or array ``n``."""
    from scipy.special import gammaln

    return gammaln(np.asarray(n, dtype=float) + 1.0)


def logsumexp_complex(log_mags, phases):
    """Return (log|S|, S/|S|) for S = sum exp(log_mags) * phases.

    ``phases`` are complex numbers (not necessarily unit modulus); the
    magnitudes are carried separately to avoid overflow.
    """
    log_mags = np.asarray(log_mags, dtype=float)
    phases = np.asarray(phases, dtype=complex)
    ok = np.isfinite(log_mags) & (phases != 0)
    if not ok.any():
        return -np.inf, 0j
    top = log_mags[ok].max()
    total = np.sum(phases[ok] * np.exp(log_mags[ok] - top))
    if total == 0:
        return -np.inf, 0j
    return top + math.log(abs(total)), total / abs(total)


def fmt17(x):
    """Deterministic 17-significant-digit float formatting."""
    return format(float(x), ".17g")
