"""Special functions used by the Fisher-information formulas and outcome laws.

Only what the rest of the package needs: the principal branch of the Lambert W
function on the nonnegative real axis, a log-space Poisson mass function, and
the half-width Gaussian used for homodyne outcomes.

Gaussian convention
-------------------
:func:`gaussian_pdf_unit_halfwidth` is ``pi**-0.5 * exp(-(x - mu)**2)``, i.e. a
normal density with variance 1/2 (standard deviation ``1/sqrt(2)``). This is the
vacuum quadrature distribution for ``x = (a + a^dagger)/sqrt(2)`` and is *not*
the standard normal.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

__all__ = [
    "lambert_w0",
    "poisson_pmf",
    "log_poisson_pmf",
    "gaussian_pdf_unit_halfwidth",
]

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


def _w0_scalar(z: float) -> float:
    if z == 0.0:
        return 0.0
    # Initial guess: series near 0, asymptotic log form for large z.
    if z < 1.0:
        w = z * (1.0 - z + 1.5 * z * z)
    else:
        lz = math.log(z)
        w = lz - math.log(lz) if lz > 1.0 else 0.5 * lz + 0.5
    for _ in range(64):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        # Halley step
        step = f / (ew * wp1 - (wp1 + 1.0) * f / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-15 * max(1.0, abs(w)):
            break
    # One Newton polish step; cheap and removes the last ulp-level bias.
    ew = math.exp(w)
    w -= (w * ew - z) / (ew * (w + 1.0))
    return w


def lambert_w0(z):
    """Principal branch of the Lambert W function for ``z >= 0``.

    Solves ``w * exp(w) = z`` by Halley iteration. Accepts a scalar or an
    array-like and returns the same shape.

    Raises
    ------
    ValueError
        If any ``z`` is negative or not finite.
    """
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("lambert_w0 requires finite arguments")
    if np.any(arr < 0.0):
        raise ValueError("lambert_w0 is only defined here for z >= 0")
    if arr.ndim == 0:
        return _w0_scalar(float(arr))
    out = np.empty_like(arr)
    for idx, val in np.ndenumerate(arr):
        out[idx] = _w0_scalar(float(val))
    return out


def log_poisson_pmf(j, lam):
    """``log P(j; lam)`` with ``log P(j; 0) = 0`` for ``j == 0`` and ``-inf`` otherwise."""
    j = np.asarray(j)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0.0):
        raise ValueError("Poisson rate must be nonnegative")
    if np.any(j < 0):
        raise ValueError("Poisson counts must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            lam > 0.0,
            j * np.log(np.where(lam > 0.0, lam, 1.0)) - lam - gammaln(j + 1.0),
            np.where(j == 0, 0.0, -np.inf),
        )
    return out[()] if out.ndim == 0 else out


def poisson_pmf(j, lam):
    """Poisson mass ``exp(-lam) lam**j / j!`` evaluated in log space.

    Stays finite for large ``j`` and ``lam`` (rates of order 10**3 occur in
    photon-number sweeps).
    """
    out = np.exp(log_poisson_pmf(j, lam))
    return float(out) if np.ndim(out) == 0 else out


def gaussian_pdf_unit_halfwidth(x, mu):
    """``pi**-0.5 * exp(-(x - mu)**2)``: a normal density with variance 1/2."""
    d = np.asarray(x, dtype=float) - np.asarray(mu, dtype=float)
    out = _INV_SQRT_PI * np.exp(-d * d)
    return float(out) if np.ndim(out) == 0 else out
