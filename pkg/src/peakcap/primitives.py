"""Scalar primitives: Gaussian tail, truncated-distribution moments, ball volumes."""

from __future__ import annotations

import numpy as np
from scipy.special import erfc, gammaln

from .logdomain import LogValue

__all__ = [
    "q_function",
    "truncated_gaussian_variance",
    "truncated_exponential_mean",
    "log_unit_ball_volume",
]

_SQRT2 = np.sqrt(2.0)
_SQRT_HALF_PI = np.sqrt(np.pi / 2.0)


def q_function(x):
    """Upper-tail probability of a standard Gaussian.

    Evaluated through the complementary error function, which keeps full
    relative accuracy deep into the tail (needed because downstream code
    raises 1 - 2Q to powers in the thousands).
    """
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(x / _SQRT2)
    return float(out) if out.ndim == 0 else out


def truncated_gaussian_variance(z):
    """Variance of a standard Gaussian conditioned on |x| < z.

    Equals ``int_0^z x^2 e^{-x^2/2} dx / int_0^z e^{-x^2/2} dx``.  Both
    integrals have the closed forms ``sqrt(pi/2) erf(z/sqrt 2) - z e^{-z^2/2}``
    and ``sqrt(pi/2) erf(z/sqrt 2)``; the ratio cancels catastrophically for
    small z, where a series in z^2 takes over (uniform limit z^2/3).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("truncation point z must be positive")
    small = z < 0.03
    zs = np.where(small, 1.0, z)
    den = _SQRT_HALF_PI * (1.0 - erfc(zs / _SQRT2))
    closed = 1.0 - zs * np.exp(-zs * zs / 2.0) / den
    u = z * z
    series = u / 3.0 * (1.0 - 2.0 * u / 15.0 + 2.0 * u * u / 315.0 + 2.0 * u**3 / 4725.0)
    out = np.where(small, series, closed)
    return float(out) if out.ndim == 0 else out


def truncated_exponential_mean(w):
    """Mean of a unit-mean exponential conditioned on values below w.

    Closed form ``1 - w / (e^w - 1)``; a series (uniform limit w/2) covers
    the small-w cancellation.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise ValueError("truncation point w must be positive")
    small = w < 0.01
    big = w > 700.0
    ws = np.where(small | big, 1.0, w)
    closed = 1.0 - ws / np.expm1(ws)
    series = w / 2.0 - w * w / 12.0 + w**4 / 720.0
    out = np.where(small, series, np.where(big, 1.0, closed))
    return float(out) if out.ndim == 0 else out


def log_unit_ball_volume(d: int) -> LogValue:
    """Natural log of the volume of the d-dimensional unit ball."""
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    d = int(d)
    return LogValue(float(0.5 * d * np.log(np.pi) - gammaln(0.5 * d + 1.0)))
