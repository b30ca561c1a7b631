"""Monte Carlo volume estimation with streaming log-domain accumulation.

Each draw yields one log contribution to the angular average of the body's
radial function.  Draws with directions uniform over angles average
V_unit_ball * r^d; draws uniform in the hypercube / polydisc reweight so
the same average is (2 r / L_c)^N or pi^N (r / L_c)^(2N), which visits the
rare corner regions often enough to converge at practical draw counts.

Reproducibility contract: contributions are produced in fixed chunks of
2^16 vectors, each chunk from its own counter-based substream, and reduced
in chunk order with a fixed floating-point operation sequence.  Results for
a given (seed, n_sim) are therefore byte-identical for any worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import bounds, extremes, synthesis
from .bounds import VolumeEstimate, gamma_from_log_volume
from .logdomain import NEG_INF, log_add, log_diff
from .primitives import log_unit_ball_volume

__all__ = [
    "CHUNK",
    "SAMPLERS",
    "McConfig",
    "McResult",
    "estimate_volume_mc",
    "discard_topk",
    "gamma_vs_n_sweep",
    "SweepPoint",
    "predicted_nsim",
    "result_to_dict",
    "write_result_json",
    "write_trace_csv",
    "write_discard_csv",
]

CHUNK = 1 << 16
SAMPLERS = ("importance-uniform", "gaussian-direction")

_LOG2 = np.log(2.0)
_LOGPI = np.log(np.pi)


def _default_schedule(n_sim: int) -> tuple[int, ...]:
    marks = [10**k for k in range(1, 13) if 10**k < n_sim]
    return tuple(marks + [n_sim])


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo volume run; all determinism inputs live here."""

    domain: str
    n_symbols: int
    oversample: int
    n_sim: int
    sampler: str = "importance-uniform"
    seed: int = 0
    top_k_tracked: int = 1000
    checkpoint_schedule: tuple[int, ...] = ()
    max_seconds: Optional[float] = None
    n_workers: int = 1

    def __post_init__(self):
        if self.domain not in ("real", "complex"):
            raise ValueError("domain must be 'real' or 'complex'")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        if self.n_symbols < 1 or (self.oversample > 1 and self.n_symbols < 2):
            raise ValueError("invalid n_symbols")
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")
        if self.n_sim < 10**3:
            raise ValueError("n_sim must be >= 1000")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 1 <= self.top_k_tracked <= self.n_sim:
            raise ValueError("top_k_tracked must lie in [1, n_sim]")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")
        schedule = self.checkpoint_schedule or _default_schedule(self.n_sim)
        schedule = tuple(int(v) for v in schedule)
        if any(b <= a for a, b in zip(schedule, schedule[1:])) or \
                schedule[-1] != self.n_sim or schedule[0] < 1:
            raise ValueError("checkpoint schedule must increase and end at n_sim")
        object.__setattr__(self, "checkpoint_schedule", schedule)


@dataclass(frozen=True)
class _ChunkSummary:
    count: int
    log_sum: float
    log_sum_sq: float
    top: np.ndarray
    checkpoints: tuple[tuple[int, float, float], ...]


def _chunk_summary(config: McConfig, chunk_idx: int, start: int, length: int) -> _ChunkSummary:
    n = config.n_symbols
    m = config.oversample
    gaussian = config.sampler == "gaussian-direction"
    d = n if config.domain == "real" else 2 * n
    log_vu = log_unit_ball_volume(d).log_magnitude if gaussian else 0.0
    rng = synthesis.substream(config.seed, synthesis.STREAM_MC, chunk_idx)

    contribs = np.empty(length)
    block = synthesis.DRAW_BLOCK
    for bs in range(0, length, block):
        b = min(block, length - bs)
        if gaussian:
            x = synthesis.gaussian_batch(rng, b, n, config.domain)
        else:
            x = synthesis.importance_batch(rng, b, n, config.domain)
        peak = synthesis.interpolated_peaks(x, m)
        if gaussian:
            log_r = np.log(np.linalg.norm(x, axis=1)) - np.log(peak)
            c = log_vu + d * log_r
        else:
            # log(sample peak / waveform peak) is exactly 0 when oversample=1,
            # which keeps the hypercube / polydisc anchor at zero variance.
            log_ratio = np.log(np.abs(x).max(axis=1)) - np.log(peak)
            if config.domain == "real":
                c = n * _LOG2 + n * log_ratio
            else:
                c = n * _LOGPI + 2 * n * log_ratio
        contribs[bs:bs + b] = c

    block_ls = []
    block_lsq = []
    for bs in range(0, length, block):
        seg = contribs[bs:bs + block]
        block_ls.append(float(logsumexp(seg)))
        block_lsq.append(float(logsumexp(2.0 * seg)))

    def prefix(j: int) -> tuple[float, float]:
        ls, lsq = NEG_INF, NEG_INF
        full = j // block
        for i in range(full):
            ls = log_add(ls, block_ls[i])
            lsq = log_add(lsq, block_lsq[i])
        rem = j - full * block
        if rem:
            seg = contribs[full * block:full * block + rem]
            ls = log_add(ls, float(logsumexp(seg)))
            lsq = log_add(lsq, float(logsumexp(2.0 * seg)))
        return ls, lsq

    checkpoints = []
    for mark in config.checkpoint_schedule:
        if start < mark <= start + length:
            ls, lsq = prefix(mark - start)
            checkpoints.append((mark, ls, lsq))
    total_ls, total_lsq = prefix(length)

    k = min(config.top_k_tracked, length)
    top = np.sort(np.partition(contribs, length - k)[length - k:])[::-1]
    return _ChunkSummary(count=length, log_sum=total_ls, log_sum_sq=total_lsq,
                         top=top, checkpoints=tuple(checkpoints))


@dataclass(frozen=True)
class McResult:
    """Estimate plus the convergence and rare-contributor diagnostics."""

    estimate: VolumeEstimate
    convergence_trace: tuple[tuple[int, float], ...]
    top_contributions: np.ndarray
    discard_curve: tuple[tuple[int, float], ...]
    completed_sims: int
    partial: bool
    wall_seconds: float
    config: McConfig
    log_sum: float
    log_sum_sq: float


def _gamma_stderr(domain: str, n: int, gamma: float, log_sum: float,
                  log_sum_sq: float, count: int) -> float:
    """Delta-method standard error of gamma from log-domain moments."""
    log_m1 = log_sum - np.log(count)
    log_m2 = log_sum_sq - np.log(count)
    # Degenerate samples (all contributions equal) must report exactly zero;
    # below ~1e-12 nats the moment gap is accumulation rounding, not variance.
    if count < 2 or log_m2 - 2.0 * log_m1 < 1e-12:
        return 0.0
    log_var = log_diff(log_m2, 2.0 * log_m1) + np.log(count / (count - 1.0))
    rel_sd_mean = np.exp(0.5 * log_var - log_m1 - 0.5 * np.log(count))
    a = 2.0 / n if domain == "real" else 1.0 / n
    return float(gamma * a * rel_sd_mean)


_DISCARD_KS = tuple(list(range(0, 11)) + list(range(20, 101, 10))
                    + list(range(200, 1001, 100)))


def estimate_volume_mc(config: McConfig) -> McResult:
    """Run the configured Monte Carlo volume estimate.

    Honors ``config.max_seconds`` by stopping at a chunk boundary (at least
    one chunk always completes); a truncated run is returned with
    ``partial=True`` and the completed draw count.
    """
    chunk_specs = [(idx, start, min(CHUNK, config.n_sim - start))
                   for idx, start in enumerate(range(0, config.n_sim, CHUNK))]
    t0 = time.perf_counter()
    summaries: list[_ChunkSummary] = []

    def out_of_time() -> bool:
        return (config.max_seconds is not None
                and time.perf_counter() - t0 > config.max_seconds)

    if config.n_workers == 1:
        for spec in chunk_specs:
            summaries.append(_chunk_summary(config, *spec))
            if out_of_time():
                break
    else:
        with ProcessPoolExecutor(max_workers=config.n_workers) as pool:
            futures = [pool.submit(_chunk_summary, config, *spec)
                       for spec in chunk_specs]
            for i, fut in enumerate(futures):
                summaries.append(fut.result())
                if out_of_time():
                    for later in futures[i + 1:]:
                        later.cancel()
                    break

    run_ls, run_lsq, count = NEG_INF, NEG_INF, 0
    trace: list[tuple[int, float]] = []
    tops = []
    for summary in summaries:
        for mark, pls, plsq in summary.checkpoints:
            ls = log_add(run_ls, pls)
            trace.append((mark, gamma_from_log_volume(
                config.domain, config.n_symbols, ls - np.log(mark))))
        run_ls = log_add(run_ls, summary.log_sum)
        run_lsq = log_add(run_lsq, summary.log_sum_sq)
        count += summary.count
        tops.append(summary.top)

    partial = len(summaries) < len(chunk_specs)
    if partial and (not trace or trace[-1][0] != count):
        trace.append((count, gamma_from_log_volume(
            config.domain, config.n_symbols, run_ls - np.log(count))))

    top = np.sort(np.concatenate(tops))[::-1][:config.top_k_tracked]
    log_mean = run_ls - np.log(count)
    gamma = gamma_from_log_volume(config.domain, config.n_symbols, log_mean)
    stderr = _gamma_stderr(config.domain, config.n_symbols, gamma,
                           run_ls, run_lsq, count)
    estimate = VolumeEstimate.from_log_volume(
        config.domain, config.n_symbols, log_mean,
        method="monte-carlo", uncertainty=stderr)

    result = McResult(estimate=estimate, convergence_trace=tuple(trace),
                      top_contributions=top, discard_curve=(),
                      completed_sims=count, partial=partial,
                      wall_seconds=time.perf_counter() - t0, config=config,
                      log_sum=run_ls, log_sum_sq=run_lsq)
    curve = tuple((k, discard_topk(result, k)) for k in _DISCARD_KS
                  if k <= len(top) and k < count)
    return replace(result, discard_curve=curve)


def discard_topk(result: McResult, k: int) -> float:
    """Gamma recomputed with the k largest contributions removed."""
    if k < 0 or k > len(result.top_contributions):
        raise ValueError("k must lie within the tracked top contributions")
    if k >= result.completed_sims:
        raise ValueError("cannot discard every contribution")
    if k == 0:
        return result.estimate.gamma
    removed = float(logsumexp(result.top_contributions[:k]))
    remaining = log_diff(result.log_sum, removed)
    log_mean = remaining - np.log(result.completed_sims - k)
    return gamma_from_log_volume(result.config.domain, result.config.n_symbols,
                                 log_mean)


def predicted_nsim(model: extremes.ExtremeValueModel,
                   rel_change: float = 0.005) -> float:
    """Draws needed before rare low-peak directions stop being missed.

    Found from the truncated-volume curve: the largest discarded-mass q at
    which gamma is still within ``rel_change`` of the untruncated value
    requires roughly 1/q draws to be sampled at all.
    """
    qs = np.geomspace(1e-14, 1e-1, 14)
    gammas = bounds.truncated_gamma_curve(model, qs)
    g0 = bounds.log_volume_lower_bound(model).gamma
    within = np.abs(gammas - g0) <= rel_change * g0
    if not within.any():
        return float("inf")
    return float(1.0 / qs[np.where(within)[0].max()])


@dataclass(frozen=True)
class SweepPoint:
    n_symbols: int
    gamma: float
    stderr: float
    n_sim: int
    likely_underestimate: bool


def derive_seed(seed: int, tag: int) -> int:
    """Stable child seed for derived runs."""
    return int(np.random.SeedSequence([seed, synthesis.STREAM_SWEEP, tag])
               .generate_state(1)[0])


def gamma_vs_n_sweep(base: McConfig, n_values) -> list[SweepPoint]:
    """Run the estimator across block lengths with independent derived seeds.

    Points whose draw budget falls short of the truncation-curve prediction
    are flagged as likely underestimates (the rare contributing directions
    are then undersampled, biasing gamma low).
    """
    points = []
    for n in n_values:
        cfg = replace(base, n_symbols=int(n), seed=derive_seed(base.seed, int(n)))
        result = estimate_volume_mc(cfg)
        flag = False
        if cfg.oversample > 1:
            model = extremes.make_model(cfg.domain, cfg.n_symbols, continuous=True)
            flag = cfg.n_sim < predicted_nsim(model)
        points.append(SweepPoint(n_symbols=int(n), gamma=result.estimate.gamma,
                                 stderr=result.estimate.uncertainty or 0.0,
                                 n_sim=result.completed_sims,
                                 likely_underestimate=flag))
    return points


def result_to_dict(result: McResult) -> dict:
    cfg = asdict(result.config)
    cfg["checkpoint_schedule"] = list(result.config.checkpoint_schedule)
    return {
        "config": cfg,
        "gamma": result.estimate.gamma,
        "gamma_stderr": result.estimate.uncertainty,
        "log_volume_per_dim": result.estimate.log_volume_per_dim,
        "convergence_trace": [[int(n), float(g)] for n, g in result.convergence_trace],
        "discard_curve": [[int(k), float(g)] for k, g in result.discard_curve],
        "wall_seconds": result.wall_seconds,
        "completed_sims": result.completed_sims,
        "partial": result.partial,
    }


def write_result_json(result: McResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result_to_dict(result), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_trace_csv(result: McResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("n_sim,gamma\n")
        for n, g in result.convergence_trace:
            fh.write(f"{n},{g:.17g}\n")


def write_discard_csv(result: McResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("k_discarded,gamma\n")
        for k, g in result.discard_curve:
            fh.write(f"{k},{g:.17g}\n")
