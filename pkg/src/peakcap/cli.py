"""Command-line surface: analytic tables, Monte Carlo runs, summary table,
verification suites and bundled curve presets, all emitted as CSV/JSON files
plus a JSON manifest per command.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, bounds, extremes, mc, verify
from .extremes import CalibrationError
from .quadrature import QuadratureError

DEFAULT_SEED = 12345
SEED_ENV_VAR = "PEAKCAP_SEED"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


class Manifest:
    """Re-run record: effective configuration plus produced artifacts."""

    def __init__(self, command: str, config: dict):
        self.command = command
        self.config = config
        self.artifacts: list[str] = []
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()

    def add(self, path: Path) -> Path:
        self.artifacts.append(str(path))
        return path

    def write(self, out_dir: Path) -> Path:
        payload = {
            "command": self.command,
            "config_echo": self.config,
            "artifact_paths": self.artifacts,
            "tool_version": __version__,
            "numpy_version": np.__version__,
            "scipy_version": scipy.__version__,
            "started": self.started,
            "finished": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        path = out_dir / f"manifest_{self.command}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, DEFAULT_SEED))


# ---------------------------------------------------------------- analytic

def cmd_analytic(args) -> int:
    out = _out_dir(args)
    model = extremes.make_model(args.domain, args.n,
                                continuous=args.case == "continuous",
                                alpha=args.alpha)
    manifest = Manifest("analytic", {
        "domain": args.domain, "case": args.case, "n": args.n,
        "alpha": model.alpha, "profile": args.profile,
        "truncation": args.truncation, "out": str(out),
    })
    est = bounds.log_volume_lower_bound(model)
    upper = bounds.sampled_only_upper_bound(args.domain)
    write_csv(manifest.add(out / "analytic_gamma.csv"),
              ["n_symbols", "alpha", "gamma_lower", "gamma_upper", "method"],
              [(model.n_symbols, model.alpha, est.gamma, upper, "analytic")])
    if args.profile:
        lo, hi = bounds.integration_support(model)
        grid = np.linspace(max(lo, 1e-6), hi, 2001)
        profile = bounds.integrand_profile(model, grid)
        write_csv(manifest.add(out / "integrand_profile.csv"),
                  ["v", "normalized_integrand"], zip(grid, profile))
        arg_peak = grid[int(np.argmax(profile))]
        print(f"integrand peak at v={arg_peak:.4f}")
    if args.truncation:
        qs = np.geomspace(1e-14, 1e-1, 27)
        gammas = bounds.truncated_gamma_curve(model, qs)
        write_csv(manifest.add(out / "truncated_gamma.csv"),
                  ["discard_mass", "gamma"], zip(qs, gammas))
    manifest.write(out)
    print(f"analytic gamma={est.gamma:.6f} (upper bound {upper:.6f}) "
          f"for {model.case} N={model.n_symbols} alpha={model.alpha}")
    return EXIT_OK


# ---------------------------------------------------------------------- mc

def _build_mc_config(args) -> mc.McConfig:
    sampler = {"importance": "importance-uniform",
               "gaussian": "gaussian-direction"}[args.sampler]
    return mc.McConfig(domain=args.domain, n_symbols=args.n,
                       oversample=args.oversample, n_sim=args.nsim,
                       sampler=sampler, seed=args.seed,
                       top_k_tracked=args.topk, max_seconds=args.max_seconds,
                       n_workers=args.workers)


def cmd_mc(args) -> int:
    out = _out_dir(args)
    config = _build_mc_config(args)
    manifest = Manifest("mc", {
        "domain": config.domain, "n": config.n_symbols,
        "oversample": config.oversample, "nsim": config.n_sim,
        "sampler": config.sampler, "seed": config.seed,
        "topk": config.top_k_tracked, "workers": config.n_workers,
        "max_seconds": config.max_seconds, "out": str(out),
    })
    result = mc.estimate_volume_mc(config)
    mc.write_result_json(result, manifest.add(out / "mc_result.json"))
    mc.write_trace_csv(result, manifest.add(out / "mc_trace.csv"))
    mc.write_discard_csv(result, manifest.add(out / "mc_discard.csv"))
    manifest.config["partial"] = result.partial
    manifest.config["completed_sims"] = result.completed_sims
    manifest.write(out)
    flag = " (partial)" if result.partial else ""
    print(f"mc gamma={result.estimate.gamma:.6f} "
          f"+- {result.estimate.uncertainty:.2e} "
          f"({result.completed_sims} draws{flag})")
    return EXIT_OK


# ------------------------------------------------------------------ table1

def cmd_table1(args) -> int:
    out = _out_dir(args)
    n_sim = 10**6 if args.budget == "desk" else 10**8
    manifest = Manifest("table1", {"budget": args.budget, "n_sim": n_sim,
                                   "seed": args.seed, "out": str(out)})
    rows = [
        ("low-pass-lower", "prior-pulse-shaping", np.pi / (32.0 * np.e), "reference"),
        ("low-pass-lower", "prior-papr-bound", 0.04470, "reference"),
        ("low-pass-upper", "sample-limited-exact", 2.0 / (np.pi * np.e), "reference"),
        ("band-pass-lower", "prior-pulse-shaping", np.pi**2 / (128.0 * np.e), "reference"),
        ("band-pass-upper", "sample-limited-exact", 1.0 / np.e, "reference"),
    ]
    real_model = extremes.ExtremeValueModel(case="continuous-real",
                                            n_symbols=10_000, alpha=2.9)
    cplx_model = extremes.ExtremeValueModel(case="continuous-complex",
                                            n_symbols=10_000, alpha=2.8)
    rows.append(("low-pass-lower", "this-work-analytic",
                 bounds.log_volume_lower_bound(real_model).gamma, "computed"))
    rows.append(("band-pass-lower", "this-work-analytic",
                 bounds.log_volume_lower_bound(cplx_model).gamma, "computed"))
    for domain, label in [("real", "low-pass-lower"), ("complex", "band-pass-lower")]:
        cfg = mc.McConfig(domain=domain, n_symbols=101, oversample=30,
                          n_sim=n_sim, sampler="importance-uniform",
                          seed=args.seed, n_workers=args.workers)
        result = mc.estimate_volume_mc(cfg)
        rows.append((label, "this-work-cpfde-n101", result.estimate.gamma, "computed"))
    write_csv(manifest.add(out / "table1.csv"),
              ["bound", "source", "gamma", "kind"], rows)
    manifest.write(out)
    for row in rows:
        print(f"{row[0]:17s} {row[1]:24s} {row[2]:.6f}  [{row[3]}]")
    return EXIT_OK


# ------------------------------------------------------------------ verify

def cmd_verify(args) -> int:
    out = _out_dir(args)
    manifest = Manifest("verify", {"suite": args.suite, "budget": args.budget,
                                   "out": str(out)})
    checks = verify.run_suite(args.suite, args.budget)
    write_csv(manifest.add(out / f"verify_{args.suite}.csv"),
              ["check", "passed", "detail"],
              [(c.name, c.passed, c.detail) for c in checks])
    payload = [{"name": c.name, "passed": c.passed, "measured": c.measured,
                "detail": c.detail} for c in checks]
    report = out / f"verify_{args.suite}.json"
    with open(report, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=float)
        fh.write("\n")
    manifest.add(report)
    manifest.write(out)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    return EXIT_VERIFY_FAILED if failed else EXIT_OK


# ----------------------------------------------------------------- figures

def _log_n_grid(max_n: int) -> list[int]:
    grid = np.unique(np.round(np.geomspace(2, max_n, 25)).astype(int))
    return [int(n) for n in grid if n >= 2]


def _gamma_curve_rows(domain: str, continuous: bool, max_n: int):
    upper = bounds.sampled_only_upper_bound(domain)
    rows = []
    for n in _log_n_grid(max_n):
        model = extremes.make_model(domain, n, continuous=continuous)
        est = bounds.log_volume_lower_bound(model)
        rows.append((n, model.alpha, est.gamma, upper, "analytic"))
    return rows


def _truncation_rows(domain: str, n_values):
    upper = bounds.sampled_only_upper_bound(domain)
    qs = np.geomspace(1e-14, 1e-1, 27)
    rows = []
    for n in n_values:
        model = extremes.make_model(domain, n, continuous=True)
        gammas = bounds.truncated_gamma_curve(model, qs)
        rows.extend((n, model.alpha, q, g, upper, "analytic")
                    for q, g in zip(qs, gammas))
    return rows


def _mc_run(domain: str, n: int, n_sim: int, seed: int, workers: int) -> mc.McResult:
    cfg = mc.McConfig(domain=domain, n_symbols=n, oversample=30, n_sim=n_sim,
                      sampler="importance-uniform", seed=seed, n_workers=workers)
    return mc.estimate_volume_mc(cfg)


def cmd_figures(args) -> int:
    out = _out_dir(args)
    which = set(args.which.split(",")) if args.which != "all" else {
        "fig6", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "fig14",
        "fig16", "fig17", "fig18", "fig19", "fig20", "fig21", "fig22", "fig23"}
    manifest = Manifest("figures", {"which": sorted(which), "budget": args.budget,
                                    "max_n": args.max_n, "seed": args.seed,
                                    "workers": args.workers, "out": str(out)})
    trace_sims = 10**6 if args.budget == "desk" else 10**8
    sweep_sims = 10**5 if args.budget == "desk" else 10**8
    gamma_header = ["n_symbols", "alpha", "gamma_lower", "gamma_upper", "method"]
    trunc_header = ["n_symbols", "alpha", "discard_mass", "gamma_lower",
                    "gamma_upper", "method"]

    analytic_specs = {
        "fig6": ("real", False), "fig8": ("real", True),
        "fig16": ("complex", False), "fig17": ("complex", True),
    }
    for name, (domain, continuous) in analytic_specs.items():
        if name in which:
            write_csv(manifest.add(out / f"{name}.csv"), gamma_header,
                      _gamma_curve_rows(domain, continuous, args.max_n))
    if "fig9" in which:
        write_csv(manifest.add(out / "fig9.csv"), trunc_header,
                  _truncation_rows("real", [51, 101, 200]))
    if "fig18" in which:
        write_csv(manifest.add(out / "fig18.csv"), trunc_header,
                  _truncation_rows("complex", [51, 101, 200]))

    if which & {"fig10", "fig11"}:
        result = _mc_run("real", 101, trace_sims, args.seed, args.workers)
        if "fig10" in which:
            mc.write_trace_csv(result, manifest.add(out / "fig10.csv"))
        if "fig11" in which:
            mc.write_discard_csv(result, manifest.add(out / "fig11.csv"))
    if which & {"fig19", "fig20"}:
        rows = []
        for n in (51, 101):
            result = _mc_run("complex", n, trace_sims, args.seed, args.workers)
            rows.extend((n, ns, g) for ns, g in result.convergence_trace)
            if n == 101 and "fig20" in which:
                mc.write_discard_csv(result, manifest.add(out / "fig20.csv"))
        if "fig19" in which:
            write_csv(manifest.add(out / "fig19.csv"),
                      ["n_symbols", "n_sim", "gamma"], rows)

    sweep_specs = {
        "real": ({"fig12", "fig13", "fig14"}, (11, 31, 51, 101, 201),
                 "fig12", "fig13", "fig14"),
        "complex": ({"fig21", "fig22", "fig23"}, (11, 31, 51, 101),
                    "fig21", "fig22", "fig23"),
    }
    for domain, (names, n_values, sweep_name, frac_name, count_name) in sweep_specs.items():
        if not (which & names):
            continue
        sweep_rows, frac_rows, count_rows = [], [], []
        for n in n_values:
            seed_n = mc.derive_seed(args.seed, n)
            result = _mc_run(domain, n, sweep_sims, seed_n, args.workers)
            flag = result.completed_sims < mc.predicted_nsim(
                extremes.make_model(domain, n, continuous=True))
            sweep_rows.append((n, result.estimate.gamma,
                               result.estimate.uncertainty,
                               result.completed_sims, flag))
            for k, g in result.discard_curve:
                count_rows.append((n, k, g))
                frac_rows.append((n, k / result.completed_sims, g))
        if sweep_name in which:
            write_csv(manifest.add(out / f"{sweep_name}.csv"),
                      ["n_symbols", "gamma", "stderr", "n_sim",
                       "likely_underestimate"], sweep_rows)
        if frac_name in which:
            write_csv(manifest.add(out / f"{frac_name}.csv"),
                      ["n_symbols", "discard_fraction", "gamma"], frac_rows)
        if count_name in which:
            write_csv(manifest.add(out / f"{count_name}.csv"),
                      ["n_symbols", "k_discarded", "gamma"], count_rows)

    manifest.write(out)
    print(f"figures written to {out}")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peakcap",
        description="Capacity bounds for peak-limited band-limited channels "
                    "via convex-body volume estimates.")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analytic", help="semianalytic gamma evaluation")
    pa.add_argument("--domain", choices=["real", "complex"], required=True)
    pa.add_argument("--case", choices=["discrete", "continuous"], default="discrete")
    pa.add_argument("--n", type=int, required=True)
    pa.add_argument("--alpha", type=float, default=None)
    pa.add_argument("--profile", action="store_true",
                    help="also emit the normalized integrand profile")
    pa.add_argument("--truncation", action="store_true",
                    help="also emit gamma vs discarded low-peak mass")
    pa.add_argument("--out", default="out")
    pa.set_defaults(func=cmd_analytic)

    pm = sub.add_parser("mc", help="Monte Carlo volume estimate")
    pm.add_argument("--domain", choices=["real", "complex"], required=True)
    pm.add_argument("--n", type=int, required=True)
    pm.add_argument("--oversample", type=int, default=30)
    pm.add_argument("--nsim", type=int, required=True)
    pm.add_argument("--sampler", choices=["importance", "gaussian"],
                    default="importance")
    pm.add_argument("--seed", type=int, default=None)
    pm.add_argument("--topk", type=int, default=1000)
    pm.add_argument("--workers", type=int, default=1)
    pm.add_argument("--max-seconds", type=float, default=None)
    pm.add_argument("--out", default="out")
    pm.set_defaults(func=cmd_mc)

    pt = sub.add_parser("table1", help="summary table of gamma bounds")
    pt.add_argument("--budget", choices=["desk", "full"], default="desk")
    pt.add_argument("--seed", type=int, default=None)
    pt.add_argument("--workers", type=int, default=1)
    pt.add_argument("--out", default="out")
    pt.set_defaults(func=cmd_table1)

    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite", choices=sorted(verify.SUITES))
    pv.add_argument("--budget", choices=["desk", "full"], default="desk")
    pv.add_argument("--out", default="out")
    pv.set_defaults(func=cmd_verify)

    pf = sub.add_parser("figures", help="bundled curve presets as CSV data")
    pf.add_argument("--which", default="all",
                    help="comma list of fig6,fig8,...,fig23 or 'all'")
    pf.add_argument("--budget", choices=["desk", "full"], default="desk")
    pf.add_argument("--max-n", type=int, default=100_000)
    pf.add_argument("--seed", type=int, default=None)
    pf.add_argument("--workers", type=int, default=1)
    pf.add_argument("--out", default="out")
    pf.set_defaults(func=cmd_figures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        args.seed = _default_seed()
    try:
        return args.func(args)
    except ValueError as exc:
        parser.exit(EXIT_USAGE, f"usage error: {exc}\n")
    except (QuadratureError, CalibrationError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
