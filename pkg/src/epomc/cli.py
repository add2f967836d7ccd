"""Command-line interface.

Subcommands:
    run <manifest>          execute a manifest of scenarios
    validate <manifest>     check a manifest without running it
    list-scenarios          show the bundled figure scenarios
    fig <name>              run one bundled figure scenario

Exit codes: 0 success, 1 scenario failure, 2 usage or validation error.
Worker count defaults to the CPU count, capped by the EPOMC_WORKERS
environment variable or --workers.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .model import ConfigError, apply_overrides
from .parallel import WORKERS_ENV

EXIT_OK = 0
EXIT_SCENARIO_FAILURE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epomc",
        description=(
            "Simulations of two mechanically coupled gain-loss optomechanical "
            "oscillators: classical dynamics, stability, covariance propagation "
            "and synchronization/entanglement metrics."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario manifest")
    p_run.add_argument("manifest", help="path to a manifest YAML file")
    p_run.add_argument("--out", help="override the manifest output directory")
    p_run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override a physics parameter in every scenario")
    p_run.add_argument("--workers", type=int, default=None,
                       help=f"worker process cap (default: CPUs or ${WORKERS_ENV})")

    p_val = sub.add_parser("validate", help="validate a manifest without running")
    p_val.add_argument("manifest", help="path to a manifest YAML file")

    sub.add_parser("list-scenarios", help="list the bundled figure scenarios")

    p_fig = sub.add_parser("fig", help="run a bundled figure scenario")
    p_fig.add_argument("name", help="scenario name (see list-scenarios)")
    p_fig.add_argument("--out", default="out", help="output directory (default: out)")
    p_fig.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                       help="override a physics parameter")
    p_fig.add_argument("--workers", type=int, default=None,
                       help=f"worker process cap (default: CPUs or ${WORKERS_ENV})")
    return parser


def _apply_param_overrides(manifest, overrides):
    if not overrides:
        return manifest
    scenarios = []
    for sc in manifest.scenarios:
        scenarios.append(experiments.Scenario(
            name=sc.name, kind=sc.kind,
            params=apply_overrides(sc.params, overrides),
            options=sc.options,
        ))
    manifest.scenarios = scenarios
    return manifest


def _cmd_run(args) -> int:
    try:
        manifest = experiments.load_manifest(args.manifest)
    except (OSError, experiments.ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        manifest.out_dir = args.out
    try:
        manifest = _apply_param_overrides(manifest, args.param)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = experiments.run(manifest, workers=args.workers)
    for sres in report.scenarios:
        marker = "ok " if sres.status == "ok" else "FAIL"
        print(f"[{marker}] {sres.name:<18} {sres.wall_time_s:8.1f}s  "
              f"{len(sres.outputs)} artifact(s)"
              + (f"  ({sres.error})" if sres.error else ""))
    return EXIT_SCENARIO_FAILURE if report.failed else EXIT_OK


def _cmd_validate(args) -> int:
    try:
        with open(args.manifest, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    errors = experiments.validate_manifest_text(text)
    if errors:
        for err in errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    print("manifest ok")
    return EXIT_OK


def _cmd_list_scenarios(_args) -> int:
    for name, sc in experiments.builtin_scenarios().items():
        print(f"{name:<8} kind={sc.kind}")
    return EXIT_OK


def _cmd_fig(args) -> int:
    try:
        manifest = experiments.figure_manifest([args.name], args.out)
        manifest = _apply_param_overrides(manifest, args.param)
    except (experiments.ManifestError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = experiments.run(manifest, workers=args.workers)
    for sres in report.scenarios:
        marker = "ok " if sres.status == "ok" else "FAIL"
        print(f"[{marker}] {sres.name:<18} {sres.wall_time_s:8.1f}s  "
              f"{len(sres.outputs)} artifact(s)"
              + (f"  ({sres.error})" if sres.error else ""))
    return EXIT_SCENARIO_FAILURE if report.failed else EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "list-scenarios": _cmd_list_scenarios,
        "fig": _cmd_fig,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
