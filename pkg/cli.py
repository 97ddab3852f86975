"""
cli.py — Command-line interface of the SBTS simulator.

Subcommands:
    run      simulate one student model and export its curves and summary
    compare  run every labelled profile of a profile file and tabulate them
    sweep    final expected level of a static student over several success probabilities

Values come from defaults, then an optional JSON config file (--config), then
flags; later sources win. Exit codes: 0 success, 2 configuration error,
3 runtime error.

Example:
    sbts-sim run --model static --p 0.7 --students 100 --tasksets 50 --iterations 10 --seed 42 --out results
    sbts-sim compare --config profiles/desk.json --baseline static-good --workers 4
"""

import argparse
import logging
import os
import re
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

from experiment_harness import ExperimentConfig, MetricsAggregate, run_cohort, summary, sweep
from profile_manager import (
    ConfigError,
    config_to_flat,
    load_config_file,
    load_last_used_profile,
    load_profiles,
    resolve_config,
    save_last_used_profile,
    save_profiles,
)
from result_writer import (
    ExportError,
    RunManifest,
    write_curves_csv,
    write_onsets_csv,
    write_summary_json,
    write_topic_curves_csv,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

# (flag, config key, help)
CONFIG_FLAGS = [
    ("--students", "students", "students per iteration (default 1000)"),
    ("--tasksets", "tasksets", "task-sets of ten tasks per student (default 200)"),
    ("--iterations", "iterations", "independent repetitions (default 100)"),
    ("--model", "model", "student model: static | static-eps | dynamic"),
    ("--p", "p", "static success probability"),
    ("--epsilon", "epsilon", "fixed exploration probability of static-eps (default 0.3)"),
    ("--epsilon0", "epsilon0", "initial exploration probability of dynamic (default 0.7)"),
    ("--cutoff", "cutoff", "task count after which dynamic only exploits (default 100)"),
    ("--p-explore", "p-explore", "success probability when exploring"),
    ("--eta", "eta", "knowledge increment per correct answer (default 0.1)"),
    ("--lambda", "lambda", "learning speed in [0, 1] (default 0.1)"),
    ("--decay", "decay", "within-set decay factor in (0, 1] (default 0.5)"),
    ("--decay-scope", "decay-scope", "decay the drawn cell or its whole topic: cell | topic"),
    ("--span", "span", "neighbour cells per axis in reward / punish (default 1)"),
    ("--seed", "seed", "master seed (default 0)"),
]


def get_version():
    """Get version from setup.py without triggering setuptools."""
    setup_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), "setup.py")
    try:
        with open(setup_path, "r") as f:
            content = f.read()
    except OSError:
        return "1.0.0"  # fallback when installed without setup.py
    version_match = re.search(r'VERSION\s*=\s*["\']([^"\']+)["\']', content)
    if version_match:
        return version_match.group(1)
    return "1.0.0"


VERSION = get_version()


def _add_common(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("experiment")
    for flag, key, help_text in CONFIG_FLAGS:
        group.add_argument(flag, dest=key, default=None, help=help_text)
    parser.add_argument("--config", metavar="FILE", help="JSON config document")
    parser.add_argument("--out", metavar="DIR", default="results", help="output directory (default: results)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    parser.add_argument("--by-topic", action="store_true", help="also write per-topic level curves")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbts-sim", description="Skill-Based Task Selection simulator", allow_abbrev=False
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one student model", allow_abbrev=False)
    _add_common(run)

    compare = sub.add_parser("compare", help="run labelled profiles and compare them", allow_abbrev=False)
    _add_common(compare)
    compare.add_argument("--baseline", help="label the others are compared to (default: first profile)")

    sweep_parser = sub.add_parser("sweep", help="static success probability sweep", allow_abbrev=False)
    _add_common(sweep_parser)
    sweep_parser.add_argument("--p-values", default="0.2,0.5,0.7,0.9", help="comma-separated probabilities")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parse the command line.

    Raises:
        ConfigError: For an unknown flag.
    """
    args, unknown = build_parser().parse_known_args(argv)
    if unknown:
        raise ConfigError(unknown[0].lstrip("-").split("=")[0] or unknown[0], "unknown flag")
    if args.workers < 1:
        raise ConfigError("workers", f"must be at least 1, got {args.workers}")
    return args


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, key) for _, key, _ in CONFIG_FLAGS if getattr(args, key) is not None}


def _resolve(args: argparse.Namespace, file_values: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    values: Dict[str, Any] = {}
    if file_values:
        values.update(file_values)
    values.update(_flag_values(args))
    return resolve_config(values)


def parse_config(argv: Sequence[str]) -> ExperimentConfig:
    """
    Resolve the experiment configuration of a `run` command line.

    A leading subcommand is optional; `run` is assumed.

    Raises:
        ConfigError: Unknown flag, out-of-range value, or missing model-specific value.
    """
    argv = list(argv)
    if not argv or argv[0] not in ("run", "compare", "sweep"):
        argv = ["run"] + argv
    args = parse_args(argv)
    return _resolve(args, load_config_file(args.config) if args.config else None)


def _export(aggregate: MetricsAggregate, out_dir: str, suffix: str, by_topic: bool) -> Dict[str, str]:
    outputs = {
        "curves": os.path.join(out_dir, f"curves{suffix}.csv"),
        "onsets": os.path.join(out_dir, f"onsets{suffix}.csv"),
    }
    write_curves_csv(aggregate, outputs["curves"])
    write_onsets_csv(aggregate, outputs["onsets"])
    if by_topic:
        outputs["curves_by_topic"] = os.path.join(out_dir, f"curves_by_topic{suffix}.csv")
        write_topic_curves_csv(aggregate, outputs["curves_by_topic"])
    return outputs


def _finish(command: str, args, configs: Dict[str, ExperimentConfig], results: Dict[str, MetricsAggregate],
            outputs: Dict[str, str], baseline: Optional[str], started: float) -> None:
    table = summary(results, baseline)
    summary_path = os.path.join(args.out, "summary.json")
    outputs["summary"] = summary_path
    manifest = RunManifest(
        command=command,
        version=VERSION,
        master_seed=configs[table[0].label].master_seed,
        configs={label: config_to_flat(config) for label, config in configs.items()},
        outputs=outputs,
        duration_seconds=round(time.perf_counter() - started, 3),
    )
    write_summary_json(table, manifest, summary_path)
    for row in table:
        logger.info(
            "%-20s expected level %.2f ± %.2f (%+.1f%%)",
            row.label, row.expected_level_mean, row.expected_level_std, row.pct_change_vs_baseline,
        )


def _load_compare_profiles(args) -> Tuple[str, Dict[str, Dict[str, Any]]]:
    path = args.config or load_last_used_profile()
    if not path:
        raise ConfigError("config", "compare needs a profile file")
    return path, load_profiles(path)


def cmd_run(args) -> None:
    started = time.perf_counter()
    config = _resolve(args, load_config_file(args.config) if args.config else None)
    label = config_to_flat(config)["model"]
    os.makedirs(args.out, exist_ok=True)
    aggregate = run_cohort(config, workers=args.workers, by_topic=args.by_topic)
    outputs = _export(aggregate, args.out, "", args.by_topic)
    _finish("run", args, {label: config}, {label: aggregate}, outputs, label, started)


def cmd_compare(args) -> None:
    started = time.perf_counter()
    path, profiles = _load_compare_profiles(args)
    overrides = _flag_values(args)
    configs = {}
    for label, values in profiles.items():
        try:
            configs[label] = resolve_config({**values, **overrides})
        except ConfigError as e:
            raise ConfigError(e.flag, f"profile {label!r}: {e.message}") from e
    if args.baseline is not None and args.baseline not in configs:
        raise ConfigError("baseline", f"unknown profile {args.baseline!r}")

    os.makedirs(args.out, exist_ok=True)
    results, outputs = {}, {"profiles": os.path.join(args.out, "profiles.json")}
    save_profiles(outputs["profiles"], {label: config_to_flat(config) for label, config in configs.items()})
    for label, config in configs.items():
        logger.info("Profile %s", label)
        results[label] = run_cohort(config, workers=args.workers, by_topic=args.by_topic)
        for kind, file_path in _export(results[label], args.out, f"_{label}", args.by_topic).items():
            outputs[f"{kind}_{label}"] = file_path
    save_last_used_profile(path)
    _finish("compare", args, configs, results, outputs, args.baseline, started)


def _parse_p_values(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("p-values", f"expected comma-separated numbers, got {text!r}") from None
    if not values or any(not 0.0 <= v <= 1.0 for v in values):
        raise ConfigError("p-values", f"expected probabilities within [0, 1], got {text!r}")
    return values


def cmd_sweep(args) -> None:
    started = time.perf_counter()
    p_values = _parse_p_values(args.p_values)
    file_values = load_config_file(args.config) if args.config else {}
    values = {**file_values, **_flag_values(args)}
    if values.get("model", "static") != "static":
        raise ConfigError("model", "sweep varies a static student; use --model static or omit it")
    values.update({"model": "static", "p": p_values[0]})
    config = resolve_config(values)

    os.makedirs(args.out, exist_ok=True)
    results = sweep(config, p_values, workers=args.workers)
    configs, outputs = {}, {}
    for (label, aggregate), p in zip(results.items(), p_values):
        configs[label] = resolve_config({**values, "p": p})
        for kind, file_path in _export(aggregate, args.out, f"_{label}", args.by_topic).items():
            outputs[f"{kind}_{label}"] = file_path
    _finish("sweep", args, configs, results, outputs, None, started)


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    try:
        args = parse_args(argv)
    except ConfigError as e:
        print(f"sbts-sim: error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG

    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        COMMANDS[args.command](args)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except (ExportError, OSError, RuntimeError, ValueError) as e:
        logger.error("Run failed: %s", e)
        return EXIT_RUNTIME
    return EXIT_OK
