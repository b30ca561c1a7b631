"""Executable checks behind the ``verify`` command: anchors, stats, invariants.

Each check returns a :class:`CheckResult` with the measured numbers so the
CLI report and the test suite share one implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import bounds, extremes, mc, synthesis
from .primitives import truncated_exponential_mean, truncated_gaussian_variance

__all__ = [
    "CheckResult",
    "SUITES",
    "run_suite",
    "measure_conditional_variance_fit",
    "measure_conditional_mean_fit",
    "measure_peak_oversampling_sensitivity",
    "results_equivalent",
]

STREAM_VERIFY = 7

EXACT_GAMMA = {"real": 2.0 / (np.pi * np.e), "complex": 1.0 / np.e}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: dict
    detail: str


def _check(name: str, passed: bool, measured: dict, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), measured=measured, detail=detail)


# ---------------------------------------------------------------- anchors

def check_discrete_anchor(domain: str, n_symbols: int, seed: int = 7) -> CheckResult:
    """Sample-limited blocks must reproduce the cube / polydisc gamma exactly."""
    cfg = mc.McConfig(domain=domain, n_symbols=n_symbols, oversample=1,
                      n_sim=1000, sampler="importance-uniform", seed=seed)
    result = mc.estimate_volume_mc(cfg)
    exact = EXACT_GAMMA[domain]
    rel = abs(result.estimate.gamma - exact) / exact
    ok = rel <= 1e-9 and result.estimate.uncertainty == 0.0
    return _check(
        f"anchor-{domain}-n{n_symbols}", ok,
        {"gamma": result.estimate.gamma, "exact": exact, "rel_error": rel,
         "stderr": result.estimate.uncertainty},
        f"gamma={result.estimate.gamma:.12f} vs {exact:.12f} "
        f"(rel={rel:.2e}, stderr={result.estimate.uncertainty})")


def check_cube_bruteforce(n_sim: int = 10**6, seed: int = 11) -> CheckResult:
    """Low-dimensional direction sampling must recover the known cube volume."""
    cfg = mc.McConfig(domain="real", n_symbols=8, oversample=1, n_sim=n_sim,
                      sampler="gaussian-direction", seed=seed)
    result = mc.estimate_volume_mc(cfg)
    exact = EXACT_GAMMA["real"]
    err = abs(result.estimate.gamma - exact)
    stderr = result.estimate.uncertainty
    ok = err <= 3.0 * stderr and stderr < 0.02 * exact
    return _check(
        "cube-bruteforce-n8", ok,
        {"gamma": result.estimate.gamma, "exact": exact, "stderr": stderr},
        f"gamma={result.estimate.gamma:.6f} vs {exact:.6f} "
        f"({err / stderr:.2f} sigma, rel stderr {stderr / exact:.3%})")


# ------------------------------------------------------------------ stats

def measure_conditional_variance_fit(n_tuples: int = 10**6, seed: int = 101,
                                     n: int = 100, z_lo: float = 1.5,
                                     z_hi: float = 4.0, n_bins: int = 8):
    """Empirical variance of non-maximal samples vs the truncated-Gaussian law.

    Returns (max relative error over bins, per-bin table).  Theory is
    averaged over each bin's actual maxima, so the comparison carries no
    binning bias.
    """
    edges = np.linspace(z_lo, z_hi, n_bins + 1)
    emp_sum = np.zeros(n_bins)
    theo_sum = np.zeros(n_bins)
    cnt = np.zeros(n_bins)
    block = 50_000
    for bi, start in enumerate(range(0, n_tuples, block)):
        b = min(block, n_tuples - start)
        rng = synthesis.substream(seed, STREAM_VERIFY, bi)
        sq = rng.standard_normal((b, n))**2
        z2 = sq.max(axis=1)
        z = np.sqrt(z2)
        nonmax = (sq.sum(axis=1) - z2) / (n - 1)
        idx = np.digitize(z, edges) - 1
        keep = (idx >= 0) & (idx < n_bins)
        np.add.at(emp_sum, idx[keep], nonmax[keep])
        np.add.at(theo_sum, idx[keep], truncated_gaussian_variance(z[keep]))
        np.add.at(cnt, idx[keep], 1.0)
    emp = emp_sum / cnt
    theo = theo_sum / cnt
    rel = np.abs(emp - theo) / theo
    table = list(zip(edges[:-1], edges[1:], cnt, emp, theo, rel))
    return float(rel.max()), table


def measure_conditional_mean_fit(n_tuples: int = 10**6, seed: int = 102,
                                 n: int = 100, w_lo: float = 2.5,
                                 w_hi: float = 9.0, n_bins: int = 10):
    """Complex analog: mean of non-maximal sample powers vs the truncated law."""
    edges = np.linspace(w_lo, w_hi, n_bins + 1)
    emp_sum = np.zeros(n_bins)
    theo_sum = np.zeros(n_bins)
    cnt = np.zeros(n_bins)
    block = 50_000
    for bi, start in enumerate(range(0, n_tuples, block)):
        b = min(block, n_tuples - start)
        rng = synthesis.substream(seed, STREAM_VERIFY, bi)
        x = synthesis.gaussian_batch(rng, b, n, "complex")
        p = np.abs(x)**2
        w = p.max(axis=1)
        nonmax = (p.sum(axis=1) - w) / (n - 1)
        idx = np.digitize(w, edges) - 1
        keep = (idx >= 0) & (idx < n_bins)
        np.add.at(emp_sum, idx[keep], nonmax[keep])
        np.add.at(theo_sum, idx[keep], truncated_exponential_mean(w[keep]))
        np.add.at(cnt, idx[keep], 1.0)
    emp = emp_sum / cnt
    theo = theo_sum / cnt
    rel = np.abs(emp - theo) / theo
    table = list(zip(edges[:-1], edges[1:], cnt, emp, theo, rel))
    return float(rel.max()), table


def check_conditional_variance(n_tuples: int = 10**6) -> CheckResult:
    worst, _ = measure_conditional_variance_fit(n_tuples=n_tuples)
    return _check("truncated-variance-vs-tuples", worst <= 0.02,
                  {"max_rel_error": worst, "n_tuples": n_tuples},
                  f"max relative error {worst:.3%} over z in [1.5, 4]")


def check_conditional_mean(n_tuples: int = 10**6) -> CheckResult:
    worst, _ = measure_conditional_mean_fit(n_tuples=n_tuples)
    return _check("truncated-mean-vs-tuples", worst <= 0.02,
                  {"max_rel_error": worst, "n_tuples": n_tuples},
                  f"max relative error {worst:.3%} over w in [2.5, 9]")


def check_discrete_maxima_law(domain: str, n_symbols: int = 101,
                              n_trials: int = 10**5, seed: int = 5) -> CheckResult:
    """Sample-level maxima must follow the exact order-statistics law."""
    maxima = extremes.simulate_maxima(n_symbols, 1, domain, n_trials, seed)
    model = extremes.make_model(domain, n_symbols, continuous=False)
    sup = extremes.sup_cdf_distance(maxima, model)
    limit = 3.0 / np.sqrt(n_trials)
    return _check(f"discrete-maxima-law-{domain}", sup < limit,
                  {"sup_distance": sup, "limit": limit},
                  f"sup CDF distance {sup:.4f} (limit {limit:.4f})")


def check_alpha_fit(n_symbols: int = 101, n_trials: int = 20_000,
                    lo: float = 2.0, hi: float = 2.6, seed: int = 6) -> CheckResult:
    """Band-limited maxima need an effective-count factor near the table value."""
    maxima = extremes.simulate_maxima(n_symbols, 30, "real", n_trials, seed)
    alpha = extremes.fit_alpha_to_maxima(maxima, n_symbols, "real")
    model = extremes.ExtremeValueModel(case="continuous-real",
                                       n_symbols=n_symbols, alpha=alpha)
    sup = extremes.sup_cdf_distance(maxima, model)
    return _check(f"alpha-fit-n{n_symbols}", lo <= alpha <= hi and sup < 0.03,
                  {"alpha": alpha, "sup_distance": sup},
                  f"alpha={alpha:.3f} (expected [{lo}, {hi}]), sup={sup:.4f}")


def measure_peak_oversampling_sensitivity(n_symbols: int = 101, oversample: int = 30,
                                          n_draws: int = 2000, seed: int = 9) -> float:
    """Mean relative peak increase when doubling the detection grid."""
    rng = synthesis.substream(seed, STREAM_VERIFY, 999)
    x = synthesis.gaussian_batch(rng, n_draws, n_symbols, "real")
    p1 = synthesis.interpolated_peaks(x, oversample)
    p2 = synthesis.interpolated_peaks(x, 2 * oversample)
    return float(np.mean(p2 / p1 - 1.0))


def check_peak_sensitivity() -> CheckResult:
    change = measure_peak_oversampling_sensitivity()
    return _check("peak-grid-sensitivity", change < 0.01,
                  {"mean_rel_increase_m30_to_m60": change},
                  f"doubling the peak grid raises peaks by {change:.4%} on average")


# ------------------------------------------------------------- invariants

def check_convexity(n_pairs: int = 1000, n_symbols: int = 51,
                    oversample: int = 30, seed: int = 21) -> CheckResult:
    """Convex combinations of peak-normalized waveforms stay peak-limited."""
    rng = synthesis.substream(seed, STREAM_VERIFY, 1)
    worst = 0.0
    for start in range(0, n_pairs, 250):
        b = min(250, n_pairs - start)
        x1 = synthesis.gaussian_batch(rng, b, n_symbols, "real")
        x2 = synthesis.gaussian_batch(rng, b, n_symbols, "real")
        x1 /= synthesis.interpolated_peaks(x1, oversample)[:, None]
        x2 /= synthesis.interpolated_peaks(x2, oversample)[:, None]
        a = rng.random((b, 1))
        combo = a * x1 + (1.0 - a) * x2
        worst = max(worst, float(synthesis.interpolated_peaks(combo, oversample).max()))
    return _check("convexity", worst <= 1.0 + 1e-9,
                  {"max_combined_peak": worst, "n_pairs": n_pairs},
                  f"max combined peak {worst:.12f}")


_INTERP_CASES = [(11, 4), (51, 30), (101, 30), (101, 7), (1001, 30)]


def check_interpolation_exactness(seed: int = 22) -> CheckResult:
    """Decimating the interpolated waveform must reproduce the samples."""
    worst = 0.0
    for domain in ("real", "complex"):
        for i, (n, m) in enumerate(_INTERP_CASES):
            rng = synthesis.substream(seed, STREAM_VERIFY, 100 + i)
            x = synthesis.gaussian_batch(rng, 4, n, domain)
            y = synthesis.interpolate_batch(x, m)
            err = np.abs(y[:, ::m] - x).max() / np.abs(x).max()
            worst = max(worst, float(err))
    return _check("interpolation-exactness", worst <= 1e-12,
                  {"max_rel_error": worst},
                  f"max decimation error {worst:.2e}")


def check_spectral_confinement(seed: int = 23) -> CheckResult:
    """Interpolated waveforms must occupy exactly the original N bins."""
    worst = 0.0
    for domain in ("real", "complex"):
        for i, (n, m) in enumerate(_INTERP_CASES):
            if m == 1:
                continue
            rng = synthesis.substream(seed, STREAM_VERIFY, 200 + i)
            x = synthesis.gaussian_batch(rng, 4, n, domain)
            y = synthesis.interpolate_batch(x, m)
            spec = np.fft.fft(y, axis=1)
            h = (n + 1) // 2
            out_of_band = spec[:, h:m * n - (n - h)]
            ratio = (np.abs(out_of_band)**2).sum() / (np.abs(spec)**2).sum()
            worst = max(worst, float(ratio))
    return _check("spectral-confinement", worst <= 1e-10,
                  {"max_out_of_band_energy": worst},
                  f"max out-of-band energy fraction {worst:.2e}")


def check_power_and_peak_dominance(seed: int = 24) -> CheckResult:
    """Interpolation preserves power; the waveform peak dominates sample peaks."""
    rng = synthesis.substream(seed, STREAM_VERIFY, 301)
    worst_power = 0.0
    dominated = True
    for domain in ("real", "complex"):
        x = synthesis.gaussian_batch(rng, 200, 101, domain)
        y = synthesis.interpolate_batch(x, 30)
        power_in = (np.abs(x)**2).mean(axis=1)
        power_out = (np.abs(y)**2).mean(axis=1)
        worst_power = max(worst_power, float(np.abs(power_out / power_in - 1.0).max()))
        dominated &= bool(np.all(np.abs(y).max(axis=1) >= np.abs(x).max(axis=1)))
    return _check("power-and-peak-dominance",
                  worst_power <= 1e-10 and dominated,
                  {"max_power_mismatch": worst_power, "peak_dominates": dominated},
                  f"max power mismatch {worst_power:.2e}, "
                  f"waveform peak >= sample peak: {dominated}")


def check_gamma_scale_invariance() -> CheckResult:
    """Re-deriving with peak power 4 must leave gamma unchanged."""
    worst = 0.0
    for case, n, alpha in [("discrete-real", 51, 1.0),
                           ("continuous-real", 101, 2.3),
                           ("discrete-complex", 51, 1.0),
                           ("continuous-complex", 101, 2.8)]:
        model = extremes.ExtremeValueModel(case=case, n_symbols=n, alpha=alpha)
        est = bounds.log_volume_lower_bound(model)
        d = est.body_dimension
        log_v_scaled = est.log_volume.log_magnitude + 0.5 * d * np.log(4.0)
        g4 = bounds.gamma_from_log_volume(model.domain, n, log_v_scaled, peak_power=4.0)
        worst = max(worst, abs(g4 - est.gamma) / est.gamma)
    return _check("gamma-scale-invariance", worst <= 1e-12,
                  {"max_rel_change": worst},
                  f"max relative gamma change under P=4: {worst:.2e}")


def check_bound_curves() -> CheckResult:
    """Ordering, monotonicity and the high-SNR gap of the capacity curves."""
    grid = np.geomspace(0.01, 1e4, 50)
    ok = True
    worst_gap = 0.0
    for domain, gamma in [("real-lowpass", 0.15), ("real-lowpass", 1.0),
                          ("complex-bandpass", 0.245), ("complex-bandpass", 1.0)]:
        channel = bounds.ChannelModel(domain=domain, peak_power=1.0,
                                      bandwidth=1.0, noise_density=1.0)
        curve = bounds.capacity_lower_bound(channel, gamma, grid)
        ok &= bool(np.all(curve.ppl_lower_bound <= curve.apl_capacity + 1e-12))
        ok &= bool(np.all(np.diff(curve.apl_capacity) > 0))
        ok &= bool(np.all(np.diff(curve.ppl_lower_bound) > 0))
        scale = 0.5 if channel.kind == "real" else 1.0
        gap_limit = scale * np.log2(1.0 / gamma)
        gap = curve.apl_capacity[-1] - curve.ppl_lower_bound[-1]
        worst_gap = max(worst_gap, abs(gap - gap_limit))
    return _check("bound-curves", ok and worst_gap <= 0.01,
                  {"worst_gap_error_bits": worst_gap},
                  f"curve ordering/monotonicity ok={ok}, "
                  f"high-SNR gap error {worst_gap:.4f} bits")


def results_equivalent(a: mc.McResult, b: mc.McResult) -> bool:
    """Equality of everything that must be deterministic.

    Wall time and the execution-only knobs (worker count, time budget) are
    excluded; every numerical field must match exactly.
    """
    da, db = mc.result_to_dict(a), mc.result_to_dict(b)
    for d in (da, db):
        d.pop("wall_seconds")
        d["config"].pop("n_workers")
        d["config"].pop("max_seconds")
    return da == db and np.array_equal(a.top_contributions, b.top_contributions)


def check_worker_determinism(seed: int = 33) -> CheckResult:
    """Identical results for 1, 4 and 16 workers and for repeated runs."""
    base = mc.McConfig(domain="real", n_symbols=8, oversample=2,
                       n_sim=150_000, sampler="importance-uniform", seed=seed)
    serial = mc.estimate_volume_mc(base)
    rerun = mc.estimate_volume_mc(base)
    ok = results_equivalent(serial, rerun)
    for workers in (4, 16):
        result = mc.estimate_volume_mc(replace(base, n_workers=workers))
        ok &= results_equivalent(serial, result)
    return _check("worker-determinism", ok,
                  {"gamma": serial.estimate.gamma},
                  "results byte-identical across reruns and 1/4/16 workers"
                  if ok else "results differ across worker counts")


# ------------------------------------------------------------------ suites

def run_anchor_suite(budget: str = "desk") -> list[CheckResult]:
    checks = [check_discrete_anchor(domain, n)
              for domain in ("real", "complex") for n in (11, 51, 101)]
    checks.append(check_cube_bruteforce())
    return checks


def run_stats_suite(budget: str = "desk") -> list[CheckResult]:
    n_tuples = 10**6
    checks = [
        check_conditional_variance(n_tuples),
        check_conditional_mean(n_tuples),
        check_discrete_maxima_law("real"),
        check_discrete_maxima_law("complex"),
        check_alpha_fit(101, n_trials=20_000 if budget == "desk" else 10**5),
        check_peak_sensitivity(),
    ]
    if budget == "full":
        maxima = extremes.simulate_maxima(1001, 30, "real", 10**5, 61)
        alpha = extremes.fit_alpha_to_maxima(maxima, 1001, "real")
        model = extremes.ExtremeValueModel(case="continuous-real",
                                           n_symbols=1001, alpha=alpha)
        sup = extremes.sup_cdf_distance(maxima, model)
        checks.append(_check("alpha-fit-n1001", 2.6 <= alpha <= 3.0 and sup < 0.02,
                             {"alpha": alpha, "sup_distance": sup},
                             f"alpha={alpha:.3f}, sup={sup:.4f}"))
    return checks


def run_invariant_suite(budget: str = "desk") -> list[CheckResult]:
    return [
        check_convexity(),
        check_interpolation_exactness(),
        check_spectral_confinement(),
        check_power_and_peak_dominance(),
        check_gamma_scale_invariance(),
        check_bound_curves(),
        check_worker_determinism(),
    ]


SUITES = {
    "anchors": run_anchor_suite,
    "stats": run_stats_suite,
    "invariants": run_invariant_suite,
}


def run_suite(name: str, budget: str = "desk") -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}, expected one of {sorted(SUITES)}")
    return SUITES[name](budget)
