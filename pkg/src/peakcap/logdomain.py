"""Log-domain scalars and streaming accumulation.

Volume-like quantities here scale as r^N with N in the hundreds or
thousands, far beyond double-precision range, so everything volume-shaped
is carried as a natural logarithm until the final per-dimension report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

__all__ = ["LogValue", "StreamingLogMean", "log_add", "log_diff"]

NEG_INF = float("-inf")


def log_add(a: float, b: float) -> float:
    """log(e^a + e^b) via the max-shifted formula; safe for any magnitudes."""
    return float(np.logaddexp(a, b))


def log_diff(a: float, b: float) -> float:
    """log(e^a - e^b) for a >= b. Returns -inf when the two coincide."""
    if b == NEG_INF:
        return float(a)
    if b > a:
        raise ValueError(f"log_diff requires a >= b, got a={a}, b={b}")
    return float(a + np.log1p(-np.exp(b - a)))


@dataclass(frozen=True)
class LogValue:
    """A strictly positive quantity stored as its natural logarithm."""

    log_magnitude: float

    @classmethod
    def from_linear(cls, x: float) -> "LogValue":
        if not x > 0:
            raise ValueError(f"LogValue requires a positive quantity, got {x}")
        return cls(float(np.log(x)))

    def to_linear(self) -> float:
        return float(np.exp(self.log_magnitude))

    def __add__(self, other: "LogValue") -> "LogValue":
        return LogValue(log_add(self.log_magnitude, other.log_magnitude))

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log_magnitude + other.log_magnitude)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log_magnitude - other.log_magnitude)

    def __lt__(self, other: "LogValue") -> bool:
        return self.log_magnitude < other.log_magnitude


@dataclass
class StreamingLogMean:
    """Streaming mean (and second moment) of positive values given in log scale.

    The mean estimate is always ``log_sum - log(count)``.  Accumulators can
    be merged associatively, so chunked or multi-worker reductions give the
    same result as sequential accumulation over the merged stream.
    """

    count: int = 0
    log_sum: float = NEG_INF
    log_sum_sq: float = NEG_INF

    def add(self, log_value: float) -> None:
        self.log_sum = log_add(self.log_sum, log_value)
        self.log_sum_sq = log_add(self.log_sum_sq, 2.0 * log_value)
        self.count += 1

    def add_many(self, log_values: np.ndarray) -> None:
        log_values = np.asarray(log_values, dtype=float)
        if log_values.size == 0:
            return
        self.log_sum = log_add(self.log_sum, float(logsumexp(log_values)))
        self.log_sum_sq = log_add(self.log_sum_sq, float(logsumexp(2.0 * log_values)))
        self.count += int(log_values.size)

    def merge(self, other: "StreamingLogMean") -> "StreamingLogMean":
        return StreamingLogMean(
            count=self.count + other.count,
            log_sum=log_add(self.log_sum, other.log_sum),
            log_sum_sq=log_add(self.log_sum_sq, other.log_sum_sq),
        )

    @property
    def log_mean(self) -> float:
        if self.count == 0:
            raise ValueError("empty accumulator has no mean")
        return self.log_sum - np.log(self.count)

    @property
    def log_second_moment(self) -> float:
        if self.count == 0:
            raise ValueError("empty accumulator has no second moment")
        return self.log_sum_sq - np.log(self.count)

    @property
    def log_variance(self) -> float:
        """Population variance in log scale; -inf for a degenerate sample."""
        m2 = self.log_second_moment
        m1sq = 2.0 * self.log_mean
        if m1sq >= m2:
            return NEG_INF
        return log_diff(m2, m1sq)

    @property
    def log_sample_variance(self) -> float:
        if self.count < 2:
            raise ValueError("sample variance needs at least two values")
        lv = self.log_variance
        if lv == NEG_INF:
            return NEG_INF
        return lv + np.log(self.count / (self.count - 1))
