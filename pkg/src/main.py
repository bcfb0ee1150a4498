import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from .config_service import ConfigValidationError, config_service, load_run_config
from .core import DomainError, make_market
from .experiments import check_bounds, growth_rate, lil_trace, run_trace, ville_coverage
from .logger_setup import setup_logging
from .models import ExperimentConfig, PriorKind
from .streams import parse_stream
from .trace_writer import local_now, write_run_summary, write_table, write_violations

logger = logging.getLogger('VilleBet')

COMMANDS = ("trace", "growth", "lil", "ville", "check-bounds")

# Used when config/config.ini could not be loaded
BUILTIN_DEFAULTS: Dict[str, Any] = {
    "m0": 0.5, "nodes_per_side": 2048, "gl_order": 16, "grading_levels": 24, "alpha": 0.05,
    "s0": 0.5, "horizon": 10000, "replications": 500, "seed": 0, "workers": 1,
    "ville_nodes_per_side": 64, "tolerance": 1e-8, "max_quadrature_gap": 1e-6,
    "log_file": "logs/villebet.log", "log_level": "INFO", "timezone": "UTC",
}

# Priors each command runs when --prior is not given
DEFAULT_PRIORS = {
    "trace": "all", "growth": "all", "lil": "robbins", "ville": "all", "check-bounds": "all",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="villebet", description="Mixture wealth processes, hindsight regret and their path-wise bounds.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", help="JSON run file whose keys mirror these flags")
        sub.add_argument("--m0", type=float)
        sub.add_argument("--prior", help="uniform, robbins, oj, a comma list, or all")
        sub.add_argument("--stream", help="e.g. bernoulli:p=0.8, beta:a=2,b=5, pointmass:x=1, nsm-adv:delta=0.1,l1=1,l2=-1,pi=0.5")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--horizon", type=int)
        sub.add_argument("--alpha", type=float)
        sub.add_argument("--s0", type=float)
        sub.add_argument("--nodes-per-side", dest="nodes_per_side", type=int)
        sub.add_argument("--replications", type=int)
        sub.add_argument("--checkpoints", help="comma separated n values, or 'every' for 1..horizon (default 1, 2, 4, ..., horizon)")
        sub.add_argument("--workers", type=int, help="worker processes, 0 = all cores")
        sub.add_argument("--no-certify", dest="certify", action="store_false", default=None,
                         help="skip the 2K shadow engines that measure eps_quad")
        sub.add_argument("--log-level", dest="log_level")
        sub.add_argument("--corpus-size", dest="corpus_size", type=int,
                         help="check-bounds: add seeded random streams until the corpus has this many")
        sub.add_argument("--out", help="output CSV file")
    return parser


def parse_priors(text: str) -> List[PriorKind]:
    if text.strip().lower() == "all":
        return list(PriorKind)
    try:
        kinds = [PriorKind(part.strip().lower()) for part in text.split(',') if part.strip()]
    except ValueError as e:
        raise ConfigValidationError(f"Unknown prior in '{text}' (use uniform, robbins, oj or all)") from e
    if not kinds:
        raise ConfigValidationError("No prior given")
    return list(dict.fromkeys(kinds))


def parse_checkpoints(value: Any, horizon: Optional[int] = None) -> Optional[List[int]]:
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() == "every":
        if horizon is None:
            raise ConfigValidationError("'every' checkpoints need a horizon")
        return list(range(1, horizon + 1))
    parts = value.split(',') if isinstance(value, str) else value
    try:
        return [int(part) for part in parts if str(part).strip()]
    except (TypeError, ValueError) as e:
        raise ConfigValidationError(f"Checkpoints must be integers, got {value!r}") from e


def _typed(settings: Dict[str, Any], key: str, kind: type):
    value = settings[key]
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ConfigValidationError(f"{key} must be an integer, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigValidationError(f"{key} must be {kind.__name__}, got {value!r}") from e


def _flag(settings: Dict[str, Any], key: str) -> bool:
    value = settings[key]
    if not isinstance(value, bool):
        raise ConfigValidationError(f"{key} must be true or false, got {value!r}")
    return value


def resolve_settings(args: argparse.Namespace) -> Dict[str, Any]:
    """Merges built-in defaults < config.ini < JSON run file < CLI flags."""
    settings = dict(BUILTIN_DEFAULTS)
    if config_service is not None:
        settings.update(config_service.run_defaults())
    else:
        logger.warning("ConfigService unavailable; using built-in defaults")
    explicit = set()
    if args.config:
        run_config = load_run_config(args.config)
        explicit.update(run_config)
        settings.update(run_config)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        settings[key] = value
        explicit.add(key)
    if args.command == "ville" and "nodes_per_side" not in explicit:
        settings["nodes_per_side"] = settings["ville_nodes_per_side"]
    # The configured replication count is for the Monte Carlo commands
    if args.command not in ("ville", "lil") and "replications" not in explicit:
        settings["replications"] = 1
    settings.setdefault("prior", DEFAULT_PRIORS[args.command])
    settings.setdefault("certify", True)
    return settings


def build_experiment(settings: Dict[str, Any]) -> ExperimentConfig:
    market = make_market(_typed(settings, "m0", float))
    stream_text = settings.get("stream") or f"bernoulli:p={market.m0}"
    horizon = _typed(settings, "horizon", int)
    stream = parse_stream(stream_text, seed=_typed(settings, "seed", int), horizon=horizon)
    return ExperimentConfig(
        market=market,
        stream=stream,
        priors=parse_priors(str(settings["prior"])),
        s0=_typed(settings, "s0", float),
        alpha=_typed(settings, "alpha", float),
        nodes_per_side=_typed(settings, "nodes_per_side", int),
        replications=_typed(settings, "replications", int),
        checkpoints=parse_checkpoints(settings.get("checkpoints"), horizon),
        certify=_flag(settings, "certify"),
        tolerance=_typed(settings, "tolerance", float),
        workers=_typed(settings, "workers", int),
        gl_order=_typed(settings, "gl_order", int),
        grading_levels=_typed(settings, "grading_levels", int),
        max_quadrature_gap=_typed(settings, "max_quadrature_gap", float),
        corpus_size=None if settings.get("corpus_size") is None else _typed(settings, "corpus_size", int),
    )


def run_command(command: str, config: ExperimentConfig):
    if command == "trace":
        return run_trace(config)
    if command == "growth":
        return growth_rate(config)
    if command == "lil":
        return lil_trace(config)
    if command == "ville":
        return ville_coverage(config)
    return check_bounds(config)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the villebet CLI.

    Returns:
        int: 0 when no bound violation was recorded, 1 when at least one was, 2 on bad input.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
    except ConfigValidationError as e:
        print(f"villebet: {e}", file=sys.stderr)
        return 2
    setup_logging(settings["log_file"], str(settings["log_level"]), settings["timezone"])
    started = local_now(settings["timezone"])
    logger.info(f"villebet {args.command} started at {started.strftime('%Y-%m-%d %H:%M:%S %Z')}")

    out = settings.get("out")
    if not out:
        logger.error("No output file given (--out or 'out' in the run config)")
        return 2
    try:
        config = build_experiment(settings)
        result = run_command(args.command, config)
    except (ConfigValidationError, DomainError) as e:
        logger.error(f"Invalid run configuration: {e}")
        return 2

    write_table(result.table, out)
    write_violations(result.violations, out)
    summary = dict(result.summary)
    summary.update({"command": args.command, "violations": len(result.violations), "out": out})
    write_run_summary(summary, out, started, settings["timezone"])
    if result.violations:
        logger.error(f"{len(result.violations)} bound violation(s) recorded")
        return 1
    logger.info("No bound violations recorded")
    return 0


if __name__ == '__main__':
    sys.exit(main())
