"""Command-line benchmark harness.

Subcommands::

    swingid estimate  --case case4_sysA --noise gaussian:0.05 --runs 20 ...
    swingid sweep     --case case4_sysA --windows 0.5,1,2,5 --noises 0.05,0.1 ...
    swingid compare   --cases case4_sysA,case4_sysC --estimators sindy,pinn ...
    swingid simulate  --case case4_sysA --out traj.csv ...

All failures exit nonzero with a one-line error JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    Scenario,
    ErrorStats,
    compare_estimators,
    emit_report,
    resolve_case,
    run_scenario,
    sweep_window,
)
from .derivatives import DerivativeConfig
from .grid import load_case
from .simulate import NoiseSpec, add_noise, resample_uniform, simulate, write_trajectory_csv

__all__ = ["main"]


def parse_noise(text: str) -> NoiseSpec:
    if text == "none":
        return NoiseSpec.none()
    kind, _, level = text.partition(":")
    try:
        value = float(level)
    except ValueError:
        raise ValueError(f"noise must look like gaussian:0.05, logistic:0.01 or none, got {text!r}")
    if kind == "gaussian":
        return NoiseSpec("gaussian-relative", value)
    if kind == "logistic":
        return NoiseSpec("logistic-absolute", value)
    raise ValueError(f"unknown noise kind {kind!r}")


def parse_deriv(text: str) -> DerivativeConfig:
    if text == "fd":
        return DerivativeConfig(method="fd")
    if text.startswith("savgol"):
        parts = text.split(":")
        window = int(parts[1]) if len(parts) > 1 else 31
        order = int(parts[2]) if len(parts) > 2 else 3
        return DerivativeConfig(method="savgol", window=window, order=order)
    raise ValueError(f"deriv must be fd or savgol[:window:order], got {text!r}")


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", required=True, help="case file path or bundled case name")
    p.add_argument("--noise", default="none", help="gaussian:<frac> | logistic:<std> | none")
    p.add_argument("--ts", type=float, default=0.01, help="sampling interval (s)")
    p.add_argument("--samples", type=int, default=200, help="number of samples T")
    p.add_argument("--seed", type=int, default=0, help="base seed; run r uses seed+r")
    p.add_argument("--deriv", default="savgol:31:3", help="fd | savgol[:window:order]")
    p.add_argument("--init", default="zero", help="zero | spread[:amplitude]")


def _cmd_estimate(args) -> int:
    scenario = Scenario(
        case=args.case,
        noise=parse_noise(args.noise),
        t_s=args.ts,
        n_samples=args.samples,
        deriv=parse_deriv(args.deriv),
        estimator=args.estimator,
        runs=args.runs,
        base_seed=args.seed,
        init=args.init,
    )
    result = run_scenario(scenario)
    written = emit_report(result, args.out, format=args.format)
    if args.plot:
        from .figures import boxplot_errors

        written.append(boxplot_errors(result, Path(args.out) / f"{scenario.name}_errors.png"))
    stats = ErrorStats.from_result(result)
    for param, st in stats.per_parameter.items():
        print(f"{param}: median {st['median']:.3f}%  iqr [{st['q1']:.3f}, {st['q3']:.3f}]%")
    if stats.timings_ms:
        print(f"estimation time: median {np.median(stats.timings_ms):.2f} ms over {len(stats.timings_ms)} run(s)")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args) -> int:
    scenario = Scenario(
        case=args.case,
        noise=parse_noise(args.noise) if args.noise != "none" else NoiseSpec("gaussian-relative", 0.05),
        t_s=args.ts,
        n_samples=args.samples,
        deriv=parse_deriv(args.deriv),
        runs=args.runs,
        base_seed=args.seed,
        init=args.init,
    )
    windows = [float(w) for w in args.windows.split(",")]
    noises = [float(s) for s in args.noises.split(",")]
    table = sweep_window(scenario, windows, noises, parameter=args.parameter)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{scenario.name}_sweep_{args.parameter}.csv"
    table.to_csv(csv_path)
    print(f"wrote {csv_path}")
    if args.plot:
        from .figures import sweep_plot

        png = sweep_plot(table, out_dir / f"{scenario.name}_sweep_{args.parameter}.png")
        print(f"wrote {png}")
    for i, w in enumerate(table.windows_s):
        cells = "  ".join(f"{v:8.3f}%" for v in table.mean_error_pct[i])
        print(f"window {w:5.2f}s  {cells}")
    return 0


def _cmd_compare(args) -> int:
    estimators = tuple(args.estimators.split(","))
    scenarios = [
        Scenario(
            case=case,
            noise=parse_noise(args.noise),
            t_s=args.ts,
            n_samples=args.samples,
            deriv=parse_deriv(args.deriv),
            runs=args.runs,
            base_seed=args.seed,
            init=args.init,
        )
        for case in args.cases.split(",")
    ]
    report = compare_estimators(scenarios, estimators)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "comparison.json"
    path.write_text(json.dumps(report.to_json(), indent=1, sort_keys=True) + "\n")
    for notice in report.notices:
        print(f"notice: {notice}")
    for scen, cols in report.columns.items():
        for est, stats in cols.items():
            if stats is None:
                print(f"{scen} / {est}: unavailable")
                continue
            worst = max(v["median"] for v in stats.per_parameter.values())
            t = f"{np.median(stats.timings_ms):.1f} ms" if stats.timings_ms else "n/a"
            print(f"{scen} / {est}: worst median error {worst:.3f}%  timing {t}")
    print(f"wrote {path}")
    return 0


def _cmd_simulate(args) -> int:
    model, params = load_case(resolve_case(args.case))
    scenario = Scenario(case=args.case, t_s=args.ts, n_samples=args.samples, init=args.init)
    solution = simulate(model, params, scenario.initial_state(model), args.samples * args.ts)
    traj = resample_uniform(solution, args.ts, args.samples)
    spec = parse_noise(args.noise)
    if spec.kind != "none":
        traj = add_noise(traj, spec, args.seed)
    write_trajectory_csv(traj, args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swingid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="run one seeded scenario and report errors")
    _scenario_args(p)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--estimator", default="sindy", choices=["sindy", "sindy-library", "pinn"])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--no-plot", dest="plot", action="store_false", help="skip the boxplot PNG")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("sweep", help="error vs observation window and noise level")
    _scenario_args(p)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--windows", default="0.5,1,2,5", help="comma-separated windows (s)")
    p.add_argument("--noises", default="0.05,0.1", help="comma-separated noise fractions")
    p.add_argument("--parameter", default="D_1")
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("compare", help="side-by-side estimator comparison")
    p.add_argument("--cases", required=True, help="comma-separated case names/paths")
    p.add_argument("--estimators", default="sindy,pinn")
    p.add_argument("--noise", default="gaussian:0.05")
    p.add_argument("--ts", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deriv", default="savgol:31:3")
    p.add_argument("--init", default="zero")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("simulate", help="write a sampled (optionally noisy) trajectory CSV")
    _scenario_args(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(payload), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
