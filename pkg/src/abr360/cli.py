"""Command-line front end.

Exit codes form a stable contract: 0 success, 2 configuration error,
3 runtime error. Log verbosity comes from the ABR360_LOG environment
variable (DEBUG, INFO, WARNING, ERROR; default WARNING).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .engine import ConfigError, SimulationError
from .harness import (
    load_experiment_config,
    run_experiment,
    write_outputs,
)
from .headmodel import dump_prob_matrix, head_model_from_profile, table_profiles
from .oracle import OracleCapacityError, dp_off
from .traces import (
    StalledDownloadError,
    constant_trace,
    dump_bandwidth_trace,
    ramp_trace,
    square_trace,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("abr360")


def _setup_logging() -> None:
    level_name = os.environ.get("ABR360_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s"
    )


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    result = run_experiment(config)
    written = write_outputs(config, result)
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    # load_experiment_config raises ConfigError on any violation,
    # so reaching this line means the file is usable as-is.
    config = load_experiment_config(args.config)
    print(
        f"ok: {len(config.algorithms)} algorithms, {len(config.traces)} traces, "
        f"{config.trials} trials"
    )
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    config = load_experiment_config(args.config)
    trace_ids = [tid for tid, _ in config.traces]
    if args.trace is None:
        chosen = config.traces[0]
    else:
        matches = [(tid, tr) for tid, tr in config.traces if tid == args.trace]
        if not matches:
            raise ConfigError(
                f"oracle: trace {args.trace!r} not in config (have {trace_ids})"
            )
        chosen = matches[0]
    trace_id, trace = chosen
    result = dp_off(
        config.video,
        trace,
        config.head.probs,
        t0=args.t0,
        gamma=config.gamma,
        q_max=config.q_max,
        action_cap=args.action_cap,
        state_cap=args.state_cap,
    )
    print(f"trace: {trace_id}")
    print(f"t0: {args.t0:g}")
    print(f"bound: {result.bound:.6g}")
    print(f"actions_per_chunk: {result.num_actions}")
    print(f"states_expanded: {result.states_expanded}")
    print(f"max_frontier: {result.max_frontier}")
    print(f"final_states: {result.final_states}")
    return EXIT_OK


def _cmd_gen_trace(args: argparse.Namespace) -> int:
    if args.kind == "constant":
        if args.rate is None:
            raise ConfigError("gen-trace constant: --rate is required")
        trace = constant_trace(args.rate)
    elif args.kind == "square":
        missing = [
            name
            for name, val in (
                ("--low", args.low),
                ("--high", args.high),
                ("--period", args.period),
            )
            if val is None
        ]
        if missing:
            raise ConfigError(f"gen-trace square: {', '.join(missing)} required")
        trace = square_trace(args.low, args.high, args.period, args.duration)
    elif args.kind == "ramp":
        if args.start is None or args.stop is None:
            raise ConfigError("gen-trace ramp: --start and --stop required")
        trace = ramp_trace(args.start, args.stop, args.duration, steps=args.steps)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown trace kind {args.kind!r}")
    with open(args.output, "w", newline="") as fh:
        dump_bandwidth_trace(trace, fh)
    print(args.output)
    return EXIT_OK


def _cmd_gen_profiles(args: argparse.Namespace) -> int:
    specs = table_profiles()
    if args.out_dir is None:
        print("profile,d_pos,alpha,r_min")
        for i, spec in enumerate(specs, start=1):
            print(f"{i},{spec.d_pos},{spec.alpha:g},{spec.r_min:g}")
        return EXIT_OK
    if args.tiles < max(spec.d_pos for spec in specs):
        raise ConfigError(
            f"gen-profiles: --tiles {args.tiles} is below the widest profile "
            f"span ({max(spec.d_pos for spec in specs)})"
        )
    os.makedirs(args.out_dir, exist_ok=True)
    for i, spec in enumerate(specs, start=1):
        head = head_model_from_profile(
            spec, args.chunks, args.tiles, rotate=args.rotate, seed=args.seed
        )
        path = os.path.join(args.out_dir, f"profile_{i:02d}.csv")
        with open(path, "w", newline="") as fh:
            dump_prob_matrix(head, fh)
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abr360",
        description="Trace-driven simulation lab for tiled 360-degree video streaming.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config and write reports")
    p_run.add_argument("config", help="experiment config file (YAML)")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config", help="experiment config file (YAML)")
    p_val.set_defaults(func=_cmd_validate)

    p_or = sub.add_parser(
        "oracle", help="compute the offline scheduling bound for a config"
    )
    p_or.add_argument("config", help="experiment config file (YAML)")
    p_or.add_argument("--trace", default=None, help="trace id (default: first)")
    p_or.add_argument("--t0", type=float, default=0.5, help="time quantum (s)")
    p_or.add_argument(
        "--action-cap", type=int, default=4096, help="max per-chunk action count"
    )
    p_or.add_argument(
        "--state-cap", type=int, default=10_000_000, help="max expanded states"
    )
    p_or.set_defaults(func=_cmd_oracle)

    p_gt = sub.add_parser("gen-trace", help="write a synthetic bandwidth trace CSV")
    p_gt.add_argument("kind", choices=("constant", "square", "ramp"))
    p_gt.add_argument("output", help="destination CSV path")
    p_gt.add_argument("--duration", type=float, default=600.0, help="seconds covered")
    p_gt.add_argument("--rate", type=float, default=None, help="constant: Mbps")
    p_gt.add_argument("--low", type=float, default=None, help="square: low Mbps")
    p_gt.add_argument("--high", type=float, default=None, help="square: high Mbps")
    p_gt.add_argument(
        "--period", type=float, default=None, help="square: full cycle seconds"
    )
    p_gt.add_argument("--start", type=float, default=None, help="ramp: initial Mbps")
    p_gt.add_argument("--stop", type=float, default=None, help="ramp: final Mbps")
    p_gt.add_argument("--steps", type=int, default=20, help="ramp: staircase steps")
    p_gt.set_defaults(func=_cmd_gen_trace)

    p_gp = sub.add_parser(
        "gen-profiles", help="emit the stock head-probability profiles"
    )
    p_gp.add_argument(
        "--out-dir", default=None, help="write one matrix CSV per profile here"
    )
    p_gp.add_argument("--chunks", type=int, default=60, help="rows per matrix")
    p_gp.add_argument("--tiles", type=int, default=8, help="columns per matrix")
    p_gp.add_argument(
        "--rotate", action="store_true", help="rotate the hot region per chunk"
    )
    p_gp.add_argument("--seed", type=int, default=0, help="rotation seed")
    p_gp.set_defaults(func=_cmd_gen_profiles)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, 0 on --help; keep the contract.
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        log.error("%s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, StalledDownloadError, OracleCapacityError) as exc:
        log.error("%s", exc)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
