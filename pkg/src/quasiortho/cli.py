"""Command-line front end: configure, seed, run, and serialize experiments.

Subcommands: overlap-dist, levy-check, packing (bound|build), decohere,
deff. Every output embeds a provenance header (command line, seed,
library version); identical command lines reproduce byte-identical
output apart from the timestamp, which --no-timestamp suppresses.

Exit codes: 0 pass, 1 statistical test failed, 2 usage error,
3 resource/IO error.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import effective_dim as ed
from . import overlap as ov
from . import packing as pk
from . import decoherence as dc
from .limits import ResourceLimitError
from .rng import RngStream

EXIT_PASS = 0
EXIT_STAT_FAIL = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

LEVY_GRID_D = (2, 16, 128, 1024, 4096)
LEVY_GRID_DELTA = (0.01, 0.05, 0.1, 0.5, 1.0)


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # shortest round-trip representation
    if value is None:
        return ""
    return str(value)


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(np.random.SeedSequence().entropy)


def _provenance(args, command: str, seed: int | None, params: dict) -> dict:
    # the normalized parameter set, not raw argv: output paths and
    # formatting flags must not break byte-identical reproducibility
    prov = {
        "command": command,
        "version": __version__,
        "threads": args.threads,
    }
    if seed is not None:
        prov["seed"] = seed
    prov.update({f"param_{k}": v for k, v in sorted(params.items())})
    if not args.no_timestamp:
        prov["timestamp"] = datetime.datetime.now(
            datetime.timezone.utc).isoformat(timespec="seconds")
    return prov


def _write(args, prov: dict, summary: dict, columns: list, rows: list) -> None:
    if args.format == "json":
        obj = {
            "provenance": prov,
            "summary": summary,
            "columns": columns,
            "rows": [dict(zip(columns, row)) for row in rows],
        }
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    else:
        lines = [f"# {k}={_fmt_cell(v)}" for k, v in sorted(prov.items())]
        lines += [f"# {k}={_fmt_cell(v)}" for k, v in sorted(summary.items())]
        lines.append(",".join(columns))
        lines += [",".join(_fmt_cell(c) for c in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_overlap_dist(args) -> int:
    if args.d < 2:
        raise ValueError("overlap law needs --d >= 2")
    if args.trials < ov.KS_MIN_SAMPLES:
        raise ValueError(f"--trials must be >= {ov.KS_MIN_SAMPLES} for the KS test")
    if args.bins < 1:
        raise ValueError("--bins must be >= 1")
    seed = _resolve_seed(args)
    sample = ov.sample_overlaps(args.d, args.trials, RngStream(seed))
    report = ov.ks_test(sample, alpha=args.alpha)

    hi = max(float(sample.values[-1]), 1e-12)
    edges = np.linspace(0.0, hi, args.bins + 1)
    counts, _ = np.histogram(sample.values, bins=edges)
    widths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    emp_density = counts / (sample.count * widths)
    emp_cdf = np.searchsorted(sample.values, edges[1:], side="right") / sample.count

    columns = ["bin_left", "bin_right", "count", "empirical_density",
               "empirical_cdf", "analytic_pdf", "analytic_cdf"]
    rows = [
        [float(edges[b]), float(edges[b + 1]), int(counts[b]),
         float(emp_density[b]), float(emp_cdf[b]),
         float(ov.pdf(args.d, min(mids[b], 1.0))),
         float(ov.cdf(args.d, min(edges[b + 1], 1.0)))]
        for b in range(args.bins)
    ]
    summary = {
        "d": args.d,
        "n_samples": sample.count,
        "empirical_mean": float(sample.values.mean()),
        "analytic_mean": ov.mean(args.d),
        "ks_statistic": report.statistic,
        "ks_threshold": report.threshold,
        "ks_alpha": report.alpha,
        "ks_pass": report.passed,
    }
    prov = _provenance(args, "overlap-dist", seed, {
        "d": args.d, "trials": args.trials, "bins": args.bins,
        "alpha": args.alpha,
    })
    _write(args, prov, summary, columns, rows)
    return EXIT_PASS if report.passed else EXIT_STAT_FAIL


def cmd_levy_check(args) -> int:
    if (args.d is None) != (args.delta is None):
        raise ValueError("single-point mode needs both --d and --delta")
    if args.d is not None:
        grid = [(args.d, args.delta)]
    else:
        grid = [(d, x) for d in LEVY_GRID_D for x in LEVY_GRID_DELTA]

    columns = ["d", "delta", "exact_tail", "levy_bound", "vacuous", "ok"]
    rows = []
    violations = 0
    for d, delta in grid:
        exact = ov.two_sided_exact_tail(d, delta)
        bound = ov.overlap_tail_bound(d, delta)
        ok = exact <= bound
        violations += 0 if ok else 1
        rows.append([d, float(delta), exact, bound, ov.is_vacuous(bound), ok])
    summary = {"grid_points": len(grid), "violations": violations}
    prov = _provenance(args, "levy-check", None, {
        "d": args.d, "delta": args.delta,
    })
    _write(args, prov, summary, columns, rows)
    return EXIT_PASS if violations == 0 else EXIT_STAT_FAIL


def cmd_packing_bound(args) -> int:
    if (args.d is None) == (args.qubits is None):
        raise ValueError("give exactly one of --d or --qubits")
    columns = ["d", "qubits", "eps", "lower_bound", "log_lower_bound"]
    if args.qubits is not None:
        log_m = pk.qubit_capacity_log(args.qubits, args.eps)
        d_label = f"2^{args.qubits}"
        try:
            m = pk.lower_bound(2 ** args.qubits, args.eps)
        except OverflowError:
            m = None
        rows = [[d_label, args.qubits, args.eps, m, log_m]]
        summary = {"log_lower_bound": log_m}
    else:
        if args.d < 1:
            raise ValueError("--d must be >= 1")
        log_m = pk.log_lower_bound(args.d, args.eps)
        try:
            m = pk.lower_bound(args.d, args.eps)
        except OverflowError:
            m = None
        rows = [[args.d, None, args.eps, m, log_m]]
        summary = {"lower_bound": m, "log_lower_bound": log_m}
    prov = _provenance(args, "packing bound", None, {
        "d": args.d, "qubits": args.qubits, "eps": args.eps,
    })
    _write(args, prov, summary, columns, rows)
    return EXIT_PASS


def cmd_packing_build(args) -> int:
    if args.d < 1:
        raise ValueError("--d must be >= 1")
    if args.M < 1:
        raise ValueError("--M must be >= 1")
    seed = _resolve_seed(args)
    rng = RngStream(seed)
    prov = _provenance(args, "packing build", seed, {
        "d": args.d, "eps": args.eps, "M": args.M, "method": args.method,
        "trials": args.trials, "max_attempts": args.max_attempts,
    })

    if args.trials is not None:
        if args.method != "random":
            raise ValueError("--trials applies to the random method only")
        report = pk.success_rate_experiment(args.d, args.eps, args.M,
                                            args.trials, rng)
        success_fraction = 1.0 - report.statistic
        columns = ["d", "eps", "M", "trials", "failure_fraction",
                   "success_fraction", "union_bound_plus_3se", "pass"]
        rows = [[args.d, args.eps, args.M, args.trials, report.statistic,
                 success_fraction, report.threshold, report.passed]]
        summary = {"description": report.description,
                   "success_fraction": success_fraction,
                   "pass": report.passed}
        _write(args, prov, summary, columns, rows)
        return EXIT_PASS if report.passed else EXIT_STAT_FAIL

    if args.method == "greedy":
        attempts = args.max_attempts or 100 * args.M
        family = pk.greedy_construct(args.d, args.eps, args.M, attempts, rng)
        success = family.size == args.M
        columns = ["d", "eps", "M_requested", "size", "max_pairwise", "success"]
        rows = [[args.d, args.eps, args.M, family.size,
                 family.max_pairwise, success]]
        summary = {"success": success, "size": family.size,
                   "max_pairwise": family.max_pairwise}
        if args.family_csv:
            family.to_csv(args.family_csv)
        _write(args, prov, summary, columns, rows)
        return EXIT_PASS if success else EXIT_STAT_FAIL

    report = pk.random_coding_construct(args.d, args.eps, args.M, rng)
    columns = ["d", "eps", "M_requested", "success", "max_pairwise",
               "failure_pair", "union_bound"]
    pair = None if report.failure_pair is None else \
        f"{report.failure_pair[0]}-{report.failure_pair[1]}"
    rows = [[args.d, args.eps, args.M, report.success, report.max_pairwise,
             pair, report.union_bound]]
    summary = report.as_dict()
    summary["failure_pair"] = pair
    if report.family is not None and args.family_csv:
        report.family.to_csv(args.family_csv)
    _write(args, prov, summary, columns, rows)
    return EXIT_PASS if report.success else EXIT_STAT_FAIL


def _build_model(args) -> dc.MeasurementModel:
    if args.config:
        return dc.MeasurementModel.from_config(args.config)
    dynamics = {"integrable": "integrable-product"}.get(args.dynamics,
                                                        args.dynamics)
    thetas = None
    if dynamics == "integrable-product":
        if not args.theta:
            raise ValueError("integrable dynamics needs --theta angles")
        thetas = tuple(args.theta)
    k = args.k
    if k is None:
        k = len(thetas) if thetas else (len(args.coeffs) if args.coeffs else 2)
    if k < 2:
        raise ValueError("--k must be >= 2")
    if args.coeffs:
        coeffs = np.asarray(args.coeffs, dtype=complex)
    else:
        coeffs = np.full(k, 1.0 / math.sqrt(k), dtype=complex)
    return dc.MeasurementModel(
        pointer_count=k,
        coefficients=coeffs,
        env_qubits=args.n,
        dynamics=dynamics,
        depth=args.depth,
        thetas=thetas,
    )


def cmd_decohere(args) -> int:
    if not args.config and args.n is None:
        raise ValueError("give --n (environment qubits) or --config")
    if args.trials < 30:
        raise ValueError("--trials must be >= 30")
    model = _build_model(args)
    seed = _resolve_seed(args)
    result = dc.suppression_experiment(model, args.trials, RngStream(seed))

    k = model.pointer_count
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    columns = ["trial", "pair", "squared_overlap", "max_coherence"]
    rows = []
    for t in range(result.trials):
        for p, (i, j) in enumerate(pairs):
            rows.append([t, f"{i}-{j}", float(result.pair_overlaps[t, p]),
                         float(result.max_coherences[t])])
    summary = result.summary()
    prov = _provenance(args, "decohere", seed, {
        "n": model.env_qubits, "k": k, "dynamics": model.dynamics,
        "depth": model.depth, "trials": args.trials,
        "theta": None if model.thetas is None else list(model.thetas),
    })
    _write(args, prov, summary, columns, rows)
    return EXIT_PASS


def cmd_deff(args) -> int:
    if args.width <= 0:
        raise ValueError("--width must be positive")
    try:
        spectrum = ed.Spectrum.from_file(args.spectrum)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot read spectrum: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    d_eff = ed.microcanonical_dim(spectrum, args.energy, args.width)
    columns = ["energy", "width", "d_eff", "entropy",
               "overlap_sq_scale", "amplitude_scale"]
    if d_eff == 0:
        summary = {
            "d_eff": 0,
            "warning": "zero-shell: no eigenvalues in window; entropy omitted",
        }
        rows = [[args.energy, args.width, 0, None, None, None]]
    else:
        report = ed.EffectiveDimensionReport(d_eff=float(d_eff),
                                             method="microcanonical-shell")
        info = report.as_dict()
        summary = {"d_eff": d_eff, "entropy": info["entropy"],
                   "method": info["method"]}
        rows = [[args.energy, args.width, d_eff, info["entropy"],
                 info["overlap_sq_scale"], info["amplitude_scale"]]]
    prov = _provenance(args, "deff", None, {
        "spectrum": args.spectrum, "energy": args.energy, "width": args.width,
    })
    _write(args, prov, summary, columns, rows)
    return EXIT_PASS


def _add_common(parser: argparse.ArgumentParser, with_seed: bool = True) -> None:
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--output", metavar="PATH", default=None)
    parser.add_argument("--threads", type=int,
                        default=os.cpu_count() or 1,
                        help="parallelism bound (recorded; results are "
                             "independent of it)")
    parser.add_argument("--no-timestamp", action="store_true")
    if with_seed:
        parser.add_argument("--seed", type=int, default=None,
                            help="RNG seed; drawn from system entropy and "
                                 "recorded when omitted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasiortho",
        description="Haar overlap statistics, quasi-orthogonal packing, "
                    "and decoherence-record experiments.",
    )
    parser.add_argument("--version", action="version",
                        version=f"quasiortho {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("overlap-dist",
                       help="sample Haar overlaps and test the analytic law")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--alpha", type=float, default=0.01)
    _add_common(p)
    p.set_defaults(func=cmd_overlap_dist)

    p = sub.add_parser("levy-check",
                       help="tabulate exact tails against the concentration bound")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    _add_common(p, with_seed=False)
    p.set_defaults(func=cmd_levy_check)

    packing = sub.add_parser("packing",
                             help="quasi-orthogonal family bounds and builds")
    packing_sub = packing.add_subparsers(dest="mode", required=True)

    p = packing_sub.add_parser("bound", help="evaluate the random-coding bound")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--qubits", type=int, default=None)
    p.add_argument("--eps", type=float, required=True)
    _add_common(p, with_seed=False)
    p.set_defaults(func=cmd_packing_bound)

    p = packing_sub.add_parser("build", help="construct and certify a family")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--method", choices=("random", "greedy"), default="random")
    p.add_argument("--trials", type=int, default=None,
                   help="run a success-rate experiment instead of one build")
    p.add_argument("--max-attempts", type=int, default=None)
    p.add_argument("--family-csv", metavar="PATH", default=None,
                   help="also export the certified family as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_packing_build)

    p = sub.add_parser("decohere",
                       help="branch-record suppression experiment")
    p.add_argument("--n", type=int, default=None, help="environment qubits")
    p.add_argument("--k", type=int, default=None, help="pointer outcomes")
    p.add_argument("--dynamics",
                   choices=("exact-haar", "chaotic-circuit",
                            "integrable", "integrable-product"),
                   default="exact-haar")
    p.add_argument("--theta", type=float, nargs="+", default=None,
                   help="per-pointer rotation angles (integrable dynamics)")
    p.add_argument("--depth", type=int, default=None,
                   help="circuit depth (chaotic dynamics; default 4n)")
    p.add_argument("--coeffs", type=float, nargs="+", default=None,
                   help="pointer amplitudes (default uniform)")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--config", metavar="PATH", default=None,
                   help="JSON measurement-model config (overrides flags)")
    _add_common(p)
    p.set_defaults(func=cmd_decohere)

    p = sub.add_parser("deff",
                       help="microcanonical shell dimension from a spectrum")
    p.add_argument("--spectrum", metavar="PATH", required=True,
                   help="one energy per line, or a JSON array")
    p.add_argument("--energy", type=float, required=True,
                   help="window lower edge E")
    p.add_argument("--width", type=float, required=True,
                   help="window width dE; the shell is [E, E+dE)")
    _add_common(p, with_seed=False)
    p.set_defaults(func=cmd_deff)

    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceLimitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
