"""Maxima laws for blocks of Gaussian-derived samples and their calibration.

Four cases are supported.  For real samples the maxima variable is the
largest absolute value z over the block; for complex samples it is the
largest squared modulus w (unit-mean exponential per sample).  The
"discrete" laws are exact order statistics of the N block samples; the
"continuous" laws approximate the peak of the band-limited waveform between
samples by replacing N with an effective count alpha*N.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erfc, erfcinv

from . import synthesis

__all__ = [
    "CASES",
    "ExtremeValueModel",
    "EmpiricalMaxHistogram",
    "CalibrationError",
    "SimulationBudgetError",
    "default_alpha",
    "make_model",
    "max_pdf",
    "max_log_pdf",
    "max_cdf",
    "max_log_cdf",
    "max_ppf",
    "simulate_max_distribution",
    "simulate_maxima",
    "fit_alpha_to_maxima",
    "calibrate_alpha",
]

CASES = ("discrete-real", "continuous-real", "discrete-complex", "continuous-complex")

# Calibrated effective-count factors for band-limited blocks (real case);
# regenerate with calibrate_alpha.  Between tabulated sizes the nearest
# entry (in log N) is used -- a heuristic, not an interpolation rule.
REAL_ALPHA_TABLE = {101: 2.3, 1001: 2.8, 10001: 2.9, 100001: 2.9}
COMPLEX_ALPHA_DEFAULT = 2.8

_SQRT2 = np.sqrt(2.0)

# Sanity ceiling on simulated waveform grid points (trials * N * oversample).
SIM_MAX_ELEMENTS = 2 * 10**11


class CalibrationError(RuntimeError):
    """Fit residual too large to trust the fitted alpha."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class SimulationBudgetError(RuntimeError):
    """Requested simulation exceeds the resource ceiling; no partial results."""


@dataclass(frozen=True)
class ExtremeValueModel:
    """Which maxima law applies, for how many symbols, at which alpha."""

    case: str
    n_symbols: int
    alpha: float = 1.0

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}, expected one of {CASES}")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        if self.case.startswith("discrete"):
            if self.alpha != 1.0:
                raise ValueError("discrete cases require alpha = 1")
        elif not 1.0 <= self.alpha <= 4.0:
            raise ValueError("continuous cases require alpha in [1, 4]")

    @property
    def domain(self) -> str:
        return "real" if self.case.endswith("real") else "complex"

    @property
    def is_continuous(self) -> bool:
        return self.case.startswith("continuous")

    @property
    def effective_count(self) -> float:
        return self.alpha * self.n_symbols


def default_alpha(n_symbols: int, domain: str = "real") -> float:
    """Effective-count factor for a continuous model of the given size.

    Real case: nearest tabulated size in log scale (heuristic).  Complex
    case: the single calibrated value 2.8.
    """
    if domain == "complex":
        return COMPLEX_ALPHA_DEFAULT
    sizes = np.array(sorted(REAL_ALPHA_TABLE))
    nearest = sizes[np.argmin(np.abs(np.log(sizes) - np.log(max(n_symbols, 2))))]
    return REAL_ALPHA_TABLE[int(nearest)]


def make_model(domain: str, n_symbols: int, continuous: bool,
               alpha: float | None = None) -> ExtremeValueModel:
    """Convenience constructor filling the default alpha for continuous cases."""
    kind = "continuous" if continuous else "discrete"
    if not continuous:
        alpha = 1.0
    elif alpha is None:
        alpha = default_alpha(n_symbols, domain)
    return ExtremeValueModel(case=f"{kind}-{domain}", n_symbols=n_symbols, alpha=alpha)


def _base_log_cdf(model: ExtremeValueModel, v: np.ndarray) -> np.ndarray:
    """log CDF of a single sample's maxima variable (|x| or |x|^2)."""
    if model.domain == "real":
        return np.log1p(-erfc(v / _SQRT2))
    return np.log1p(-np.exp(-v))


def _base_log_pdf(model: ExtremeValueModel, v: np.ndarray) -> np.ndarray:
    if model.domain == "real":
        return 0.5 * np.log(2.0 / np.pi) - v * v / 2.0
    return -v


def _check_positive(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("maxima variable must be positive")
    return v


def max_log_cdf(model: ExtremeValueModel, v) -> np.ndarray:
    v = _check_positive(v)
    out = model.effective_count * _base_log_cdf(model, v)
    return float(out) if out.ndim == 0 else out


def max_cdf(model: ExtremeValueModel, v):
    out = np.exp(max_log_cdf(model, v))
    return float(out) if np.ndim(out) == 0 else out


def max_log_pdf(model: ExtremeValueModel, v) -> np.ndarray:
    v = _check_positive(v)
    m = model.effective_count
    log_g = _base_log_pdf(model, v)
    if m == 1.0:
        out = log_g
    else:
        out = np.log(m) + (m - 1.0) * _base_log_cdf(model, v) + log_g
    return float(out) if np.ndim(out) == 0 else out


def max_pdf(model: ExtremeValueModel, v):
    out = np.exp(max_log_pdf(model, v))
    return float(out) if np.ndim(out) == 0 else out


def max_ppf(model: ExtremeValueModel, q):
    """Quantile of the maxima law (inverse of max_cdf)."""
    q = np.asarray(q, dtype=float)
    if np.any((q <= 0) | (q >= 1)):
        raise ValueError("quantile must lie strictly inside (0, 1)")
    base = -np.expm1(np.log(q) / model.effective_count)  # 1 - G(v)
    if model.domain == "real":
        out = _SQRT2 * erfcinv(base)
    else:
        out = -np.log(base)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EmpiricalMaxHistogram:
    """Binned per-trial maxima of simulated blocks."""

    bin_edges: np.ndarray
    counts: np.ndarray
    n_trials: int
    n_symbols: int
    oversample: int

    def __post_init__(self):
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if len(self.bin_edges) != len(self.counts) + 1:
            raise ValueError("need exactly one more edge than count")
        if int(self.counts.sum()) != self.n_trials:
            raise ValueError("histogram counts must sum to the trial count")

    @property
    def densities(self) -> np.ndarray:
        widths = np.diff(self.bin_edges)
        return self.counts / (self.n_trials * widths)

    def to_csv(self, path) -> None:
        dens = self.densities
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_left", "bin_right", "count", "density"])
            for i in range(len(self.counts)):
                writer.writerow([
                    f"{self.bin_edges[i]:.17g}",
                    f"{self.bin_edges[i + 1]:.17g}",
                    int(self.counts[i]),
                    f"{dens[i]:.17g}",
                ])


def _check_sim_args(n_symbols: int, oversample: int, domain: str, n_trials: int) -> None:
    if n_symbols < 2:
        raise ValueError("n_symbols must be >= 2")
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    if domain not in ("real", "complex"):
        raise ValueError("domain must be 'real' or 'complex'")
    if n_trials < 10**3:
        raise ValueError("n_trials must be >= 1000")
    if n_trials * n_symbols * oversample > SIM_MAX_ELEMENTS:
        raise SimulationBudgetError(
            f"simulation of {n_trials} trials x {n_symbols} symbols x "
            f"{oversample} oversampling exceeds the resource ceiling; "
            "no partial results were produced")


def simulate_maxima(n_symbols: int, oversample: int, domain: str,
                    n_trials: int, seed: int) -> np.ndarray:
    """Per-trial maxima of unit-power Gaussian blocks.

    Real domain: max |x(t)| over the oversampled waveform; complex domain:
    max |x(t)|^2.  oversample = 1 skips interpolation (sample-level maxima).
    Trials are drawn in fixed-size blocks with one counter-based substream
    per block, so results depend only on (seed, n_trials).
    """
    _check_sim_args(n_symbols, oversample, domain, n_trials)
    out = np.empty(n_trials)
    block = synthesis.DRAW_BLOCK
    for block_idx, start in enumerate(range(0, n_trials, block)):
        b = min(block, n_trials - start)
        rng = synthesis.substream(seed, synthesis.STREAM_MAXSIM, block_idx)
        x = synthesis.gaussian_batch(rng, b, n_symbols, domain)
        peaks = synthesis.interpolated_peaks(x, oversample)
        out[start:start + b] = peaks if domain == "real" else peaks**2
    return out


def simulate_max_distribution(n_symbols: int, oversample: int, domain: str,
                              n_trials: int, seed: int,
                              alpha: float | None = None) -> EmpiricalMaxHistogram:
    """Histogram of simulated block maxima.

    200 equal-width bins span the central [1e-6, 1 - 1e-6] quantile range of
    the reference law (alpha defaulted from the calibration table when
    oversampling); stray maxima are clipped into the edge bins so counts
    always sum to n_trials.
    """
    maxima = simulate_maxima(n_symbols, oversample, domain, n_trials, seed)
    law = make_model(domain, n_symbols, continuous=oversample > 1, alpha=alpha)
    edges = np.linspace(max_ppf(law, 1e-6), max_ppf(law, 1.0 - 1e-6), 201)
    width = edges[1] - edges[0]
    clipped = np.clip(maxima, edges[0] + width * 1e-9, edges[-1] - width * 1e-9)
    counts, _ = np.histogram(clipped, bins=edges)
    return EmpiricalMaxHistogram(bin_edges=edges, counts=counts,
                                 n_trials=n_trials, n_symbols=n_symbols,
                                 oversample=oversample)


def sup_cdf_distance(maxima: np.ndarray, model: ExtremeValueModel) -> float:
    """Kolmogorov-Smirnov distance between empirical maxima and the model law."""
    v = np.sort(maxima)
    F = np.exp(max_log_cdf(model, v))
    i = np.arange(1, len(v) + 1, dtype=float)
    n = float(len(v))
    return float(max(np.max(np.abs(i / n - F)), np.max(np.abs((i - 1.0) / n - F))))


def fit_alpha_to_maxima(maxima: np.ndarray, n_symbols: int, domain: str,
                        lo: float = 1.0, hi: float = 4.0, tol: float = 0.01,
                        max_residual: float = 0.05) -> float:
    """Alpha minimizing the sup-norm CDF distance, by golden-section search."""
    def dist(alpha: float) -> float:
        model = ExtremeValueModel(case=f"continuous-{domain}",
                                  n_symbols=n_symbols, alpha=alpha)
        return sup_cdf_distance(maxima, model)

    gr = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = dist(c), dist(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = dist(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = dist(d)
    alpha = 0.5 * (a + b)
    residual = dist(alpha)
    if residual > max_residual:
        raise CalibrationError(
            f"maxima law fit did not converge: sup-distance {residual:.4f} "
            f"at alpha={alpha:.3f}", residual)
    return float(alpha)


def calibrate_alpha(n_symbols: int, oversample: int, domain: str,
                    n_trials: int, seed: int) -> float:
    """Simulate block maxima and fit the effective-count factor alpha."""
    maxima = simulate_maxima(n_symbols, oversample, domain, n_trials, seed)
    return fit_alpha_to_maxima(maxima, n_symbols, domain)
