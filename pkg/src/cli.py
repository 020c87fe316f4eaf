"""Command line: bench, discover, sei and diagnose subcommands."""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from .tools.benchmark_runner import aggregate, render_table, run_grid, write_summary_csv
from .tools.diagnostics_report import diagnose
from .tools.file_discovery import discover_from_files
from .tools.sei_regression import sei_regression
from .utils.settings import BenchConfig, DiscoveryConfig, Settings

logger = logging.getLogger(__name__)


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _float_list(value: str) -> List[float]:
    try:
        return [float(item) for item in _csv_list(value)]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {value!r}") from e


def _add_discovery_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("discovery")
    group.add_argument("--tau-scale", type=float, help="Effect threshold as a fraction of std(X_j)")
    group.add_argument("--tau-e", type=float, help="Absolute effect threshold")
    group.add_argument(
        "--noise-floor", type=float, help="Minimum threshold in standard errors of the effect"
    )
    group.add_argument("--mmd-agg", choices=["mean", "max"], help="Gap aggregation over do-values")
    group.add_argument("--obs-conditional", choices=["kde", "flow"], help="Observational conditional")
    group.add_argument(
        "--effect-statistic",
        choices=["pooled", "per_value_max", "dose_response"],
        help="Decision statistic for orientation",
    )
    group.add_argument("--with-flow", action="store_true", help="Train the pair flow models")
    group.add_argument("--no-confounding", action="store_true", help="Skip confounding detection")
    group.add_argument(
        "--no-indirect-filter", action="store_true", help="Keep edges mediated by another child"
    )


def _discovery_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for flag, name in (
        ("tau_scale", "tau_scale"),
        ("tau_e", "tau_e"),
        ("noise_floor", "noise_floor"),
        ("mmd_agg", "mmd_agg"),
        ("obs_conditional", "obs_conditional"),
        ("effect_statistic", "effect_statistic"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "with_flow", False):
        overrides["train_flows"] = True
    if getattr(args, "no_confounding", False):
        overrides["skip_confounding"] = True
    if getattr(args, "no_indirect_filter", False):
        overrides["skip_indirect_filter"] = True
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-sim-discovery",
        description="Causal discovery under latent confounding with simulator interventions",
    )
    parser.add_argument("--log-level", help="Override CAUSAL_SIM_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    bench = commands.add_parser("bench", help="Run the synthetic benchmark grid")
    bench.add_argument("--mechanism", type=_csv_list, help="linear or nl1..nl4, comma-separated")
    bench.add_argument("--graphs", type=_csv_list, help="fork,chain,vstr,diamond,collider")
    bench.add_argument("--gammas", type=_float_list, help="Confounder strengths")
    bench.add_argument("--seeds", type=int, help="Replicates per cell")
    bench.add_argument("--n-obs", type=int, help="Observational rows")
    bench.add_argument("--n-int", type=int, help="Interventional rows per variable")
    bench.add_argument("--k", type=int, help="Do-values per variable")
    bench.add_argument("--out", help="Per-row results CSV")
    bench.add_argument("--workers", type=int, help="Worker processes")
    bench.add_argument("--base-seed", type=int, help="Seed every cell seed derives from")
    bench.add_argument(
        "--published-baselines",
        "--paper-baselines",
        dest="published_baselines",
        action="store_true",
        help="Print published F1 of six external methods next to the measured column",
    )
    bench.add_argument("--config", help="JSON file mirroring the benchmark settings")
    _add_discovery_flags(bench)

    discover = commands.add_parser("discover", help="Discover a graph from CSV files")
    discover.add_argument("--obs", required=True, help="Observational CSV")
    discover.add_argument("--int-dir", required=True, help="Directory of int_target{i}.csv")
    discover.add_argument("--config", help="JSON file with discovery settings")
    discover.add_argument("--out", default="result.json", help="Result JSON")
    _add_discovery_flags(discover)

    sei = commands.add_parser("sei", help="Additive capacity regression")
    sei.add_argument("--table", help="Descriptor CSV (bundled table by default)")

    diag = commands.add_parser("diagnose", help="Diagnostics report for CSV inputs")
    diag.add_argument("--obs", required=True, help="Observational CSV")
    diag.add_argument("--int-dir", required=True, help="Directory of int_target{i}.csv")
    diag.add_argument("--config", help="JSON file with discovery settings")
    diag.add_argument("--report", default="report.json", help="Report JSON")
    diag.add_argument("--no-flow", action="store_true", help="Skip the flow multimodality check")

    return parser


def _bench_config(args: argparse.Namespace, settings: Settings) -> BenchConfig:
    """Model defaults < environment < config file < flags."""
    payload: Dict[str, Any] = {"workers": settings.workers, "base_seed": settings.base_seed}
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            payload.update(json.load(handle))

    for flag, name in (
        ("mechanism", "mechanisms"),
        ("graphs", "graphs"),
        ("gammas", "gammas"),
        ("seeds", "seeds"),
        ("n_obs", "n_obs"),
        ("n_int", "n_int"),
        ("k", "k"),
        ("out", "out"),
        ("workers", "workers"),
        ("base_seed", "base_seed"),
    ):
        value = getattr(args, flag)
        if value is not None:
            payload[name] = value
    if args.published_baselines:
        payload["published_baselines"] = True

    overrides = _discovery_overrides(args)
    if overrides:
        payload["discovery"] = {**payload.get("discovery", {}), **overrides}
    return BenchConfig.model_validate(payload)


def _discovery_config(args: argparse.Namespace) -> DiscoveryConfig:
    payload: Dict[str, Any] = {}
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            payload.update(json.load(handle))
    if hasattr(args, "tau_scale"):
        payload.update(_discovery_overrides(args))
    return DiscoveryConfig.model_validate(payload)


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    config = _bench_config(args, settings)
    rows = run_grid(config)
    summary = aggregate(rows)
    print(render_table(summary, config.published_baselines))
    if config.out:
        path = write_summary_csv(summary, config.out.with_suffix(".summary.csv"))
        print(f"\nrows: {config.out}\nsummary: {path}")
    if summary["failedRows"]:
        print(f"{summary['failedRows']} of {summary['rows']} cells failed; see the error column")
    return 0


def cmd_discover(args: argparse.Namespace, settings: Settings) -> int:
    result = discover_from_files(args.obs, args.int_dir, _discovery_config(args), args.out)
    edges = ", ".join(f"X{i}->X{j}" for i, j in result.graph.edges) or "(none)"
    print(f"edges: {edges}")
    print(f"confounded pairs: {len(result.mmd.confounded_pairs)}")
    print(f"result: {args.out}")
    return 0


def cmd_sei(args: argparse.Namespace, settings: Settings) -> int:
    print(json.dumps(sei_regression(args.table), indent=2))
    return 0


def cmd_diagnose(args: argparse.Namespace, settings: Settings) -> int:
    report = diagnose(
        args.obs, args.int_dir, _discovery_config(args), args.report, with_flow=not args.no_flow
    )
    print(f"tau_c: {report['mmd']['tauC']:.6f}")
    print(f"confounded pairs: {report['mmd']['confoundedPairs']}")
    if "flow" in report:
        print(f"multimodal conditionals: {report['flow']['multimodalPairs']}")
    print(f"report: {args.report}")
    return 0


COMMANDS = {
    "bench": cmd_bench,
    "discover": cmd_discover,
    "sei": cmd_sei,
    "diagnose": cmd_diagnose,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = Settings.from_env()
    if args.log_level:
        settings = settings.model_copy(update={"log_level": args.log_level.upper()})
    settings.configure_logging()

    try:
        return COMMANDS[args.command](args, settings)
    except (ValidationError, ValueError, OSError) as e:
        logger.debug("command %s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
