"""Command-line entry point.

    tensorgpc run --dim 10 --order 2 --rank-init 4 --q 0.5 --init-samples 60 \\
        --batches 6 --batch-size 10 --mode exploit --benchmark quad-exp --out runs/qe
    tensorgpc run --config run.cfg --sim-cmd "./my_simulator" --test-file test.csv
    tensorgpc moments runs/qe/model.json
    tensorgpc count --dim 57 --order 2

Exit status: 0 on success, 2 on configuration errors, 3 on simulator or
protocol errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .exceptions import ConfigError, ModelLoadError, SimulatorError
from .harness.benchmarks import BENCHMARKS
from .harness.loop import RUN_MODES, RunConfig, run_active_loop, summarize
from .harness.persistence import load_model
from .polybasis import count_basis

EXIT_CONFIG = 2
EXIT_SIMULATOR = 3


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _optional_float(text):
    return None if text.lower() in ("", "none", "auto") else float(text)


# (flag, RunConfig field, argparse kwargs)
_RUN_FLAGS = [
    ("--dim", "dim", dict(type=int, help="number of random parameters d")),
    ("--order", "order", dict(type=int, help="polynomial order p per dimension")),
    ("--rank-init", "rank_init", dict(type=int, help="initial CP rank R")),
    ("--q", "q", dict(type=float, help="rank penalty exponent in (0, 1]")),
    ("--lambda", "lam", dict(type=_optional_float, help="penalty weight (default 1e-3 * N)")),
    ("--init-samples", "init_samples", dict(type=int, help="Latin hypercube design size")),
    ("--batches", "batches", dict(type=int, help="number of adaptive rounds")),
    ("--batch-size", "batch_size", dict(type=int, help="samples added per round")),
    ("--pool-size", "pool_size", dict(type=int, help="Monte-Carlo pool size (default 100 * |design|)")),
    ("--mode", "mode", dict(choices=RUN_MODES, help="sample selection rule")),
    ("--seed", "seed", dict(type=int)),
    ("--benchmark", "benchmark", dict(choices=BENCHMARKS, help="built-in simulator")),
    ("--sim-cmd", "sim_cmd", dict(help="external simulator command (line protocol on stdin/stdout)")),
    ("--sim-timeout", "sim_timeout", dict(type=float, help="seconds per simulator batch")),
    ("--test-size", "test_size", dict(type=int, help="Monte-Carlo test points (built-in benchmarks)")),
    ("--test-file", "test_file", dict(help="CSV of raw test points plus output (external simulators)")),
    ("--out", "out", dict(help="output directory for history.csv, model.json, summary.json")),
    ("--mean", "mean", dict(type=_float_list, help="per-dimension means, comma separated")),
    ("--std", "std", dict(type=_float_list, help="per-dimension standard deviations")),
    ("--n-init", "n_init", dict(type=int, help="solver starts per fit")),
    ("--max-sweeps", "max_sweeps", dict(type=int)),
]


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; keys are flag names with or without dashes."""
    by_key = {}
    for flag, dest, kw in _RUN_FLAGS:
        by_key[flag.lstrip("-")] = (dest, kw.get("type", str))
        by_key[dest] = by_key[flag.lstrip("-")]
    flags = {"no-rank-penalty": "no_rank_penalty", "no_rank_penalty": "no_rank_penalty",
             "no-timing": "no_timing", "no_timing": "no_timing"}
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in flags:
                values[flags[key]] = value.lower() in ("1", "true", "yes", "on")
                continue
            if key not in by_key:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            dest, conv = by_key[key]
            try:
                values[dest] = conv(value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensorgpc", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the active-learning loop")
    run.add_argument("--config", help="flat key=value file; command-line flags override it")
    for flag, dest, kw in _RUN_FLAGS:
        run.add_argument(flag, dest=dest, default=None, **kw)
    run.add_argument("--no-rank-penalty", dest="no_rank_penalty", action="store_true", default=None,
                     help="fixed-rank baseline (lambda = 0)")
    run.add_argument("--no-timing", dest="no_timing", action="store_true", default=None,
                     help="write wall_ms = 0 so histories are byte-reproducible")

    mom = sub.add_parser("moments", help="print analytic mean and std of a saved model")
    mom.add_argument("model")

    cnt = sub.add_parser("count", help="basis sizes and CP parameter count")
    cnt.add_argument("--dim", type=int, required=True)
    cnt.add_argument("--order", type=int, required=True)
    cnt.add_argument("--rank", type=int, default=None)
    return parser


def config_from_args(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for _, dest, _ in _RUN_FLAGS:
        v = getattr(args, dest)
        if v is not None:
            values[dest] = v
    for dest in ("no_rank_penalty", "no_timing"):
        if getattr(args, dest):
            values[dest] = True
    if "sim_cmd" in values and "benchmark" not in values:
        values["benchmark"] = None
    values["record_timing"] = not values.pop("no_timing", False)
    try:
        return RunConfig(**values).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _cmd_run(args) -> int:
    cfg = config_from_args(args)
    history = run_active_loop(cfg)
    print(json.dumps(summarize(history), indent=1))
    return 0


def _cmd_moments(args) -> int:
    model = load_model(args.model)
    mean, var = model.moments()
    print(json.dumps({"mean": mean, "variance": var, "std": var**0.5, "rank": model.coeffs.rank}))
    return 0


def _cmd_count(args) -> int:
    try:
        full, total = count_basis(args.dim, args.order)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    doc = {"full_tensor_basis": str(full), "total_degree_basis": total}
    if args.rank is not None:
        doc["cp_parameters"] = args.dim * (args.order + 1) * args.rank
    print(json.dumps(doc))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "moments": _cmd_moments, "count": _cmd_count}[args.command]
    try:
        return handler(args)
    except (ConfigError, ModelLoadError, FileNotFoundError) as exc:
        print(f"tensorgpc: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulatorError as exc:
        print(f"tensorgpc: simulator error: {exc}", file=sys.stderr)
        return EXIT_SIMULATOR


if __name__ == "__main__":
    sys.exit(main())
