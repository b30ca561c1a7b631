"""Random directions and periodic band-limited waveform synthesis.

Blocks of N Nyquist-rate samples are treated as one period of a cyclic
signal.  Interpolation to a finer grid is spectral: forward DFT, zero-pad
the spectrum to M*N bins (splitting the shared Nyquist bin for even N),
inverse DFT.  Every M-th output sample reproduces the input exactly and no
energy leaks out of the original N bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .logdomain import LogValue
from .primitives import log_unit_ball_volume

__all__ = [
    "SignalVector",
    "DirectionDraw",
    "substream",
    "draw_gaussian_direction",
    "draw_importance_uniform",
    "gaussian_batch",
    "importance_batch",
    "bandlimit_interpolate",
    "interpolate_batch",
    "interpolated_peaks",
    "peak_and_radius",
    "cube_dfo",
    "importance_log_weight",
]

# Fixed number of vectors per RNG call; part of the reproducibility contract
# (stream consumption depends only on seed, stream tag and block index).
DRAW_BLOCK = 4096

# Stream tags keep substreams of distinct purposes disjoint under one seed.
STREAM_MC = 1
STREAM_MAXSIM = 2
STREAM_SWEEP = 3

# Rows per FFT slab; memory knob only, never affects values.
_FFT_SLICE_ELEMENTS = 1 << 21


def substream(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent counter-based generator for (seed, stream, index)."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    return np.random.Generator(np.random.Philox(seed=[seed, stream, index]))


@dataclass(frozen=True)
class SignalVector:
    """One block of Nyquist-rate samples (real or complex baseband)."""

    samples: np.ndarray
    n_symbols: int

    def __post_init__(self):
        if self.samples.ndim != 1 or len(self.samples) != self.n_symbols:
            raise ValueError("samples must be a 1-D array of length n_symbols")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")

    @classmethod
    def from_samples(cls, samples) -> "SignalVector":
        arr = np.asarray(samples)
        return cls(samples=arr, n_symbols=len(arr))

    @property
    def domain(self) -> str:
        return "complex" if np.iscomplexobj(self.samples) else "real"


@dataclass(frozen=True)
class DirectionDraw:
    """A peak-normalized draw with its radial distance and cube geometry."""

    signal: SignalVector
    radial_distance: float
    cube_dfo: float | None = None
    importance_weight_log: LogValue | None = None


def gaussian_batch(rng: np.random.Generator, rows: int, n: int, domain: str) -> np.ndarray:
    """rows x n i.i.d. unit-power Gaussian samples (circular for complex)."""
    if domain == "real":
        return rng.standard_normal((rows, n))
    re = rng.standard_normal((rows, n))
    im = rng.standard_normal((rows, n))
    return (re + 1j * im) * np.sqrt(0.5)


def importance_batch(rng: np.random.Generator, rows: int, n: int, domain: str) -> np.ndarray:
    """rows x n samples uniform in [-1, 1] (real) or in the unit disk (complex)."""
    if domain == "real":
        return rng.uniform(-1.0, 1.0, size=(rows, n))
    u = rng.random((rows, n))
    phase = rng.random((rows, n))
    return np.sqrt(u) * np.exp(2j * np.pi * phase)


def draw_gaussian_direction(n_symbols: int, domain: str,
                            rng: np.random.Generator) -> SignalVector:
    """One vector of independent Gaussian components (uniform direction)."""
    return SignalVector.from_samples(gaussian_batch(rng, 1, n_symbols, domain)[0])


def draw_importance_uniform(n_symbols: int, domain: str,
                            rng: np.random.Generator) -> SignalVector:
    """One vector uniform in the unit hypercube (real) or polydisc (complex)."""
    return SignalVector.from_samples(importance_batch(rng, 1, n_symbols, domain)[0])


def interpolate_batch(x: np.ndarray, oversample: int) -> np.ndarray:
    """Zero-padding DFT interpolation of each row to oversample * n points."""
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    rows, n = x.shape
    if n < 2:
        raise ValueError("interpolation needs at least 2 samples")
    if oversample == 1:
        return x.copy()
    mn = oversample * n
    if np.iscomplexobj(x):
        spectrum = np.fft.fft(x, axis=1)
        padded = np.zeros((rows, mn), dtype=complex)
        h = (n + 1) // 2
        padded[:, :h] = spectrum[:, :h]
        if n % 2 == 0:
            padded[:, h] = 0.5 * spectrum[:, h]
            padded[:, mn - h] += 0.5 * spectrum[:, h]
            if h + 1 < n:
                padded[:, mn - (n - h - 1):] = spectrum[:, h + 1:]
        else:
            padded[:, mn - (n - h):] = spectrum[:, h:]
        return np.fft.ifft(padded, axis=1) * oversample
    spectrum = np.fft.rfft(x, axis=1)
    padded = np.zeros((rows, mn // 2 + 1), dtype=complex)
    k = n // 2 + 1
    padded[:, :k] = spectrum
    if n % 2 == 0:
        padded[:, n // 2] *= 0.5
    return np.fft.irfft(padded, n=mn, axis=1) * oversample


def bandlimit_interpolate(signal: SignalVector, oversample: int) -> np.ndarray:
    """Length M*N waveform samples of one block (M = oversample)."""
    return interpolate_batch(signal.samples[None, :], oversample)[0]


def interpolated_peaks(x: np.ndarray, oversample: int) -> np.ndarray:
    """Per-row peak magnitude of the interpolated waveform.

    Rows are processed in slabs to bound FFT memory; slab size never
    affects the values.
    """
    rows, n = x.shape
    if oversample == 1:
        return np.abs(x).max(axis=1)
    slab = max(8, _FFT_SLICE_ELEMENTS // (oversample * n))
    peaks = np.empty(rows)
    for start in range(0, rows, slab):
        y = interpolate_batch(x[start:start + slab], oversample)
        peaks[start:start + slab] = np.abs(y).max(axis=1)
    return peaks


def peak_and_radius(signal: SignalVector, oversample: int,
                    importance: bool = False) -> DirectionDraw:
    """Scale a draw to unit waveform peak and record its radial distance.

    The radial distance r is the Euclidean norm of the scaled samples, i.e.
    the distance from the origin to the peak-limited body's surface along
    the draw's direction.  With oversample = 1 the peak is taken over the
    samples themselves.
    """
    x = signal.samples
    if not np.any(x != 0):
        raise ValueError("all-zero signal has no direction")
    peak = float(interpolated_peaks(x[None, :], oversample)[0])
    norm = float(np.linalg.norm(x))
    sample_peak = float(np.abs(x).max())
    scaled = SignalVector.from_samples(x / peak)
    lc = norm / sample_peak
    weight = None
    if importance:
        weight = importance_log_weight(signal.n_symbols, signal.domain, lc)
    return DirectionDraw(signal=scaled, radial_distance=norm / peak,
                         cube_dfo=lc, importance_weight_log=weight)


def cube_dfo(signal: SignalVector) -> float:
    """Distance to the unit hypercube / polydisc surface along the draw."""
    x = signal.samples
    if not np.any(x != 0):
        raise ValueError("all-zero signal has no direction")
    return float(np.linalg.norm(x) / np.abs(x).max())


def importance_log_weight(n_symbols: int, domain: str, cube_dfo: float) -> LogValue:
    """Change-of-measure factor for draws uniform in the cube / polydisc.

    Ratio of the uniform-over-angles density to the uniform-in-cube density
    along the drawn direction.
    """
    n = n_symbols
    if domain == "real":
        log_w = n * np.log(2.0) - log_unit_ball_volume(n).log_magnitude \
            - n * np.log(cube_dfo)
    else:
        log_w = n * np.log(np.pi) - log_unit_ball_volume(2 * n).log_magnitude \
            - 2 * n * np.log(cube_dfo)
    return LogValue(float(log_w))
