"""Semianalytic volume bounds, power-efficiency factors and capacity curves.

The admissible-signal set in sample space is convex; its volume is the
angular average of r^d with r the radial distance to the surface.  Here the
radial distance along a direction with block maxima v is approximated by the
root-mean-square length L(v) of a peak-normalized vector, which makes the
computed volume a lower bound (dropping the randomness of the length can
only lose volume, by Jensen's inequality on the d-th power).  The resulting
per-dimension volume converts to the power-efficiency factor gamma that a
peak constraint retains relative to an average-power constraint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import extremes
from .extremes import ExtremeValueModel
from .logdomain import LogValue
from .primitives import (
    log_unit_ball_volume,
    truncated_exponential_mean,
    truncated_gaussian_variance,
)
from .quadrature import log_integral

__all__ = [
    "ChannelModel",
    "VolumeEstimate",
    "BoundCurve",
    "normalize_domain",
    "gamma_from_log_volume",
    "radial_length",
    "integration_support",
    "log_volume_lower_bound",
    "integrand_profile",
    "truncated_gamma_curve",
    "capacity_lower_bound",
    "sampled_only_upper_bound",
]

# Integration window: widen from the integrand's peak until its log value has
# fallen this many nats; the discarded tails are then negligible at any
# useful reporting precision.
SUPPORT_DROP_NATS = 250.0

_LOG2 = np.log(2.0)


def normalize_domain(domain: str) -> str:
    if domain in ("real", "real-lowpass"):
        return "real"
    if domain in ("complex", "complex-bandpass"):
        return "complex"
    raise ValueError(f"unknown domain {domain!r}")


@dataclass(frozen=True)
class ChannelModel:
    """Physical channel parameters and the derived SNR bookkeeping."""

    domain: str  # "real-lowpass" | "complex-bandpass"
    peak_power: float
    bandwidth: float
    noise_density: float

    def __post_init__(self):
        if self.domain not in ("real-lowpass", "complex-bandpass"):
            raise ValueError("domain must be 'real-lowpass' or 'complex-bandpass'")
        if not (self.peak_power > 0 and self.bandwidth > 0 and self.noise_density > 0):
            raise ValueError("peak power, bandwidth and noise density must be positive")

    @property
    def kind(self) -> str:
        return normalize_domain(self.domain)

    @property
    def noise_power(self) -> float:
        return self.noise_density * self.bandwidth

    @property
    def snr(self) -> float:
        return self.peak_power / self.noise_power

    @property
    def nyquist_interval(self) -> float:
        return 0.5 / self.bandwidth if self.kind == "real" else 1.0 / self.bandwidth


def gamma_from_log_volume(domain: str, n_symbols: int, log_volume: float,
                          peak_power: float = 1.0) -> float:
    """Power-efficiency factor from the log volume of the admissible body.

    Real blocks occupy n dimensions, complex blocks 2n.  The result is
    invariant under the peak power (the volume scales as P^(d/2)).
    """
    kind = normalize_domain(domain)
    if kind == "real":
        return float(np.exp((2.0 / n_symbols) * log_volume)
                     / (2.0 * np.pi * np.e * peak_power))
    return float(np.exp((1.0 / n_symbols) * log_volume)
                 / (np.pi * np.e * peak_power))


@dataclass(frozen=True)
class VolumeEstimate:
    """Log volume of the admissible body at unit peak power, plus gamma."""

    n_symbols: int
    body_dimension: int
    log_volume: LogValue
    gamma: float
    entropy_power: float
    method: str
    uncertainty: float | None = None

    @classmethod
    def from_log_volume(cls, domain: str, n_symbols: int, log_volume: float,
                        method: str, uncertainty: float | None = None) -> "VolumeEstimate":
        kind = normalize_domain(domain)
        d = n_symbols if kind == "real" else 2 * n_symbols
        gamma = gamma_from_log_volume(kind, n_symbols, log_volume)
        return cls(n_symbols=n_symbols, body_dimension=d,
                   log_volume=LogValue(float(log_volume)), gamma=gamma,
                   entropy_power=gamma, method=method, uncertainty=uncertainty)

    @property
    def log_volume_per_dim(self) -> float:
        return self.log_volume.log_magnitude / self.body_dimension


@dataclass(frozen=True)
class BoundCurve:
    """Capacity curves over an SNR grid, bits per Nyquist interval."""

    snr_grid: np.ndarray
    apl_capacity: np.ndarray
    ppl_lower_bound: np.ndarray
    gamma_used: float


def sampled_only_upper_bound(domain: str) -> float:
    """Exact gamma when only the Nyquist samples are peak-limited.

    The admissible body is then the hypercube (real) or polydisc (complex),
    giving 2/(pi e) and 1/e respectively; these upper-bound the gamma of the
    fully peak-limited waveform body, which is contained in them.
    """
    kind = normalize_domain(domain)
    if kind == "real":
        return float(2.0 / (np.pi * np.e))
    return float(1.0 / np.e)


def _body_dimension(model: ExtremeValueModel) -> int:
    return model.n_symbols if model.domain == "real" else 2 * model.n_symbols


def _log_radial_sq(model: ExtremeValueModel, v: np.ndarray) -> np.ndarray:
    """log L(v)^2 for the RMS length of a peak-normalized vector."""
    n = model.n_symbols
    if model.domain == "real":
        return np.log1p(truncated_gaussian_variance(v) * (n - 1) / (v * v))
    return np.log1p(truncated_exponential_mean(v) * (n - 1) / v)


def radial_length(model: ExtremeValueModel, v):
    """RMS distance L >= 1 from the origin to the body surface, given maxima v."""
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("maxima variable must be positive")
    if model.n_symbols == 1:
        out = np.ones_like(v)
    else:
        out = np.exp(0.5 * _log_radial_sq(model, v))
    return float(out) if out.ndim == 0 else out


def _log_integrand(model: ExtremeValueModel, v: np.ndarray) -> np.ndarray:
    """log of p(v) * L(v)^d, the angular-average integrand."""
    d = _body_dimension(model)
    return extremes.max_log_pdf(model, v) + 0.5 * d * _log_radial_sq(model, v)


def integration_support(model: ExtremeValueModel,
                        drop: float = SUPPORT_DROP_NATS) -> tuple[float, float]:
    """Window outside which the integrand is down by at least ``drop`` nats.

    The integrand peaks at rare low-maxima values far below the bulk of the
    maxima law for large blocks, so the window is located from the integrand
    itself (coarse log-spaced scan, then root-finding on the drop-off),
    never from quantiles of the maxima law alone.
    """
    hi_law = extremes.max_ppf(model, 1.0 - 1e-14)
    scan = np.geomspace(1e-6, max(4.0 * hi_law, 1.0), 4096)
    values = _log_integrand(model, scan)
    i_peak = int(np.argmax(values))
    v_peak, f_peak = float(scan[i_peak]), float(values[i_peak])

    def rel(x: float) -> float:
        return float(_log_integrand(model, np.array([x]))[0] - (f_peak - drop))

    floor = 1e-9
    if rel(floor) >= 0.0:
        lo = 0.0
    else:
        lo = brentq(rel, floor, v_peak)
    hi = 2.0 * max(v_peak, 1.0)
    while rel(hi) >= 0.0:
        hi *= 2.0
        if hi > 1e9:
            raise RuntimeError("failed to bracket the integrand's upper tail")
    hi = brentq(rel, max(v_peak, 1e-12), hi)
    return float(lo), float(hi)


def log_volume_lower_bound(model: ExtremeValueModel) -> VolumeEstimate:
    """Volume lower bound of the peak-limited body at unit peak power.

    log V = log V_d(unit ball) + log E[L^d] with the expectation over the
    maxima law, evaluated by adaptive panel quadrature in log scale.
    """
    if model.n_symbols < 2:
        raise ValueError("volume bound needs n_symbols >= 2")
    lo, hi = integration_support(model)
    log_i, _ = log_integral(lambda v: _log_integrand(model, v), max(lo, 1e-300), hi)
    d = _body_dimension(model)
    log_v = log_unit_ball_volume(d).log_magnitude + log_i
    return VolumeEstimate.from_log_volume(model.domain, model.n_symbols,
                                          log_v, method="analytic")


def integrand_profile(model: ExtremeValueModel, grid) -> np.ndarray:
    """Angular-average integrand on a grid, normalized to peak value 1."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be non-empty")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    values = _log_integrand(model, grid)
    return np.exp(values - values.max())


def truncated_gamma_curve(model: ExtremeValueModel, quantile_grid) -> np.ndarray:
    """Gamma when directions below each maxima-law quantile are discarded.

    For each quantile q the integral runs only over v with cdf(v) >= q.
    The curve flattens once the discarded region stops carrying volume; the
    flattening point predicts how many Monte Carlo draws resolve the body
    (roughly 1/q of them).
    """
    quantile_grid = np.asarray(quantile_grid, dtype=float)
    if np.any((quantile_grid <= 0) | (quantile_grid >= 1)):
        raise ValueError("quantiles must lie strictly inside (0, 1)")
    if np.any(np.diff(quantile_grid) <= 0):
        raise ValueError("quantile grid must be strictly increasing")
    lo, hi = integration_support(model)
    lo = max(lo, 1e-300)
    d = _body_dimension(model)
    log_vu = log_unit_ball_volume(d).log_magnitude
    out = np.empty(quantile_grid.size)
    for i, q in enumerate(quantile_grid):
        v_min = max(lo, float(extremes.max_ppf(model, float(q))))
        if v_min >= hi:
            out[i] = 0.0
            continue
        log_i, _ = log_integral(lambda v: _log_integrand(model, v), v_min, hi)
        out[i] = gamma_from_log_volume(model.domain, model.n_symbols, log_vu + log_i)
    return out


def capacity_lower_bound(channel: ChannelModel, gamma: float, snr_grid) -> BoundCurve:
    """Capacity curves: exact average-power-limited and peak-limited lower bound.

    Bits per Nyquist interval; the peak-limited bound keeps a factor gamma
    of the SNR inside the log.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    snr_grid = np.asarray(snr_grid, dtype=float)
    if np.any(snr_grid <= 0) or np.any(np.diff(snr_grid) <= 0):
        raise ValueError("SNR grid must be positive and strictly increasing")
    scale = 0.5 if channel.kind == "real" else 1.0
    apl = scale * np.log2(1.0 + snr_grid)
    ppl = scale * np.log2(1.0 + gamma * snr_grid)
    return BoundCurve(snr_grid=snr_grid, apl_capacity=apl,
                      ppl_lower_bound=ppl, gamma_used=float(gamma))
