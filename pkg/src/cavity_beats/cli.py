"""Command line front end: run, sweep, preset families, validation ladder.

Exit codes: 0 success, 2 bad scenario input, 3 integration failure (partial
results are still written), 4 reduced-versus-full validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import scenario as scn
from .analytic import beat_frequency
from .integrator import IntegrationError
from .linalg import DriftError
from .model import CouplingSet, derive_rates, midpoint_levels

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_INTEGRATION = 3
EXIT_VALIDATION = 4

PRESET_OMEGAS = {"fig3": (0.5, 1.0, 3.0), "fig4": (0.0, 0.5, 1.0, 3.0)}
PRESET_SAMPLES = 1601


def _apply_tols(sc: scn.Scenario, args) -> scn.Scenario:
    if args.tol_rel is not None:
        sc = dataclasses.replace(sc, rel_tol=args.tol_rel)
    if args.tol_abs is not None:
        sc = dataclasses.replace(sc, abs_tol=args.tol_abs)
    return sc


def _emit(result: scn.RunResult, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    name = result.scenario.name
    if result.series is not None:
        csv_path = os.path.join(out_dir, f"{name}.csv")
        scn.write_csv(result.series, csv_path)
        print(f"wrote {csv_path}")
    summary_path = os.path.join(out_dir, f"{name}.summary.json")
    scn.write_summary(result.summary, summary_path)
    print(f"wrote {summary_path}")
    s = result.summary
    if "two_f_predicted" in s:
        print(
            f"  beats predicted: {s['beats_predicted']}"
            f" (2f = {s['two_f_predicted']}), measured: {s['two_f_measured']}"
            f" [{s['measure_method']}]"
        )
    if s.get("partial"):
        print(f"  PARTIAL: {s.get('error', 'integration stopped early')}")


def _cmd_run(args) -> int:
    sc = _apply_tols(scn.load_scenario(args.scenario), args)
    try:
        result = scn.run_scenario(sc)
    except IntegrationError as exc:
        _emit(scn.partial_result(sc, exc), args.out_dir)
        return EXIT_INTEGRATION
    _emit(result, args.out_dir)
    if sc.mode == "validate" and not result.check.monotone:
        print("validation FAILED: deviations do not shrink with the coupling")
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_sweep(args) -> int:
    sc = _apply_tols(scn.load_scenario(args.scenario), args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    results = scn.run_sweep(sc, args.param, values)
    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    failed = 0
    for value, result in zip(values, results):
        if result.series is not None:
            csv_path = os.path.join(args.out_dir, f"{result.scenario.name}.csv")
            scn.write_csv(result.series, csv_path)
            print(f"wrote {csv_path}")
        if result.partial:
            failed += 1
            print(f"  point {value:g} failed: {result.summary.get('error', 'partial output')}")
        rows.append({"value": value, "summary": result.summary})
    combined = os.path.join(args.out_dir, f"{sc.name}.sweep.json")
    scn.write_summary({"name": sc.name, "param": args.param, "runs": rows}, combined)
    print(f"wrote {combined}")
    return EXIT_INTEGRATION if failed else EXIT_OK


def _preset_scenarios(which: str, eta_values, mode: str) -> list[scn.Scenario]:
    cases = []
    for omega in PRESET_OMEGAS[which]:
        levels, cavity = midpoint_levels(omega + 1.0, omega, omega)
        rates = derive_rates(CouplingSet.uniform(1.0), levels, cavity)
        for eta in eta_values:
            pred = beat_frequency(rates, eta)
            t_end = max(8.0, 3.5 / pred.two_f) if pred.beats else 8.0
            cases.append(
                scn.Scenario(
                    name=f"{which}_omega{omega:g}_eta{eta:g}",
                    mode=mode,
                    eta=eta,
                    Omega=omega,
                    G=complex(1.0),
                    t_end=t_end,
                    samples=PRESET_SAMPLES,
                )
            )
    return cases


def _cmd_preset(args) -> int:
    if args.eta is not None:
        eta_values = (args.eta,)
    elif args.mode == "composite":
        eta_values = (1.0,)  # the full model has no interference dial
    else:
        eta_values = (0.0, 1.0)
    runs = []
    code = EXIT_OK
    for sc in _preset_scenarios(args.which, eta_values, args.mode):
        sc = _apply_tols(sc, args)
        try:
            result = scn.run_scenario(sc)
        except IntegrationError as exc:
            result = scn.partial_result(sc, exc)
            code = EXIT_INTEGRATION
        _emit(result, args.out_dir)
        runs.append(result.summary)
    combined = os.path.join(args.out_dir, f"{args.which}.summary.json")
    scn.write_summary({"preset": args.which, "runs": runs}, combined)
    print(f"wrote {combined}")
    return code


def _cmd_validate(args) -> int:
    g_values = [float(v) for v in args.g_values.split(",") if v.strip()]
    sc = scn.Scenario(
        name=args.name, mode="validate", Omega=args.omega,
        samples=args.samples, g_values=tuple(g_values),
    )
    result = scn.run_scenario(sc)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"{sc.name}.summary.json")
    scn.write_summary(result.summary, path)
    print(f"wrote {path}")
    for g, dev in zip(result.check.g_values, result.check.deviations):
        print(f"  g = {g:<8g} max deviation = {dev:.6e}")
    if not result.check.monotone:
        print("validation FAILED: deviations do not shrink with the coupling")
        return EXIT_VALIDATION
    print("validation passed: deviations shrink with the coupling")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for CSV and JSON outputs")
    common.add_argument("--tol-rel", type=float, default=None, help="integrator relative tolerance")
    common.add_argument("--tol-abs", type=float, default=None, help="integrator absolute tolerance")
    common.add_argument(
        "--seed", type=int, default=None,
        help="accepted for interface stability; every computation here is deterministic",
    )

    p = argparse.ArgumentParser(
        prog="cavity-beats",
        description="Cascade emission in a damped two-mode cavity: reduced, analytic and full dynamics.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[common], help="run one scenario JSON file")
    run_p.add_argument("scenario", help="path to the scenario JSON")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", parents=[common], help="run a scenario over parameter values")
    sweep_p.add_argument("scenario", help="path to the base scenario JSON")
    sweep_p.add_argument("--param", required=True, choices=scn.SWEEP_PARAMS)
    sweep_p.add_argument("--values", required=True, help="comma-separated values")
    sweep_p.set_defaults(func=_cmd_sweep)

    preset_p = sub.add_parser("preset", parents=[common], help="run a stored configuration family")
    preset_p.add_argument("which", choices=sorted(PRESET_OMEGAS))
    preset_p.add_argument("--eta", type=float, default=None,
                          help="single interference weight (default: both 0 and 1)")
    preset_p.add_argument("--mode", choices=("reduced", "analytic", "composite"),
                          default="reduced")
    preset_p.set_defaults(func=_cmd_preset)

    val_p = sub.add_parser("validate", parents=[common],
                           help="compare reduced and full dynamics over a coupling ladder")
    val_p.add_argument("--g-values", default="0.2,0.1,0.05")
    val_p.add_argument("--omega", type=float, default=1.0)
    val_p.add_argument("--samples", type=int, default=151)
    val_p.add_argument("--name", default="validate")
    val_p.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except scn.ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except DriftError as exc:
        print(f"integration drifted out of tolerance: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
