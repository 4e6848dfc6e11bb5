"""Command-line interface: single runs, config-driven sweeps, validation."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import __version__, harness, topology

_LIST_FIELDS = {"mu", "r_sig", "w_s"}


def _add_config_flags(parser):
    """One flag per SweepConfig field so CLI values override config files."""
    for f in dataclasses.fields(harness.SweepConfig):
        if f.name == "experiment":
            continue
        flag = "--" + f.name.replace("_", "-")
        if f.name in _LIST_FIELDS:
            parser.add_argument(flag, nargs="+", type=float, default=None)
        elif f.type == "bool":
            parser.add_argument(flag, action=argparse.BooleanOptionalAction, default=None)
        elif f.type == "int":
            parser.add_argument(flag, type=int, default=None)
        elif f.type in ("float", "float | None"):
            parser.add_argument(flag, type=float, default=None)
        else:
            parser.add_argument(flag, type=str, default=None)
    parser.add_argument("--seed", type=int, default=None,
                        help="alias for --master-seed")
    parser.add_argument("--workers", type=int, default=1)


def _overrides(args):
    values = {}
    for f in dataclasses.fields(harness.SweepConfig):
        if f.name == "experiment":
            continue
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = tuple(v) if f.name in _LIST_FIELDS else v
    if getattr(args, "seed", None) is not None:
        values["master_seed"] = args.seed
    return values


def _print_result(result: harness.SweepResult):
    for row in result.rows:
        print(
            f"{row.experiment} mu={row.mu!r} r_sig={row.r_sig!r} w_s={row.w_s!r} "
            f"realization={row.realization} {row.metric}={row.value!r}"
        )


def _run_single(experiment, args) -> int:
    overrides = _overrides(args)
    out = overrides.pop("out", None)
    cfg = harness.default_config(experiment, **overrides)
    harness.validate_config(cfg)
    result = harness.run_sweep(cfg, workers=args.workers,
                               progress=lambda msg: print(msg, file=sys.stderr))
    _print_result(result)
    if out is not None:
        harness.write_sweep_csv(result, out)
        print(f"wrote {out}", file=sys.stderr)
    return 1 if result.n_failed else 0


def _cmd_generate(args) -> int:
    overrides = _overrides(args)
    out = overrides.pop("out", None)
    if out is None:
        print("generate requires --out", file=sys.stderr)
        return 2
    cfg = harness.default_config("spectrum", **overrides)
    harness.validate_config(cfg)
    if len(cfg.mu) != 1 or len(cfg.w_s) != 1:
        print("generate takes a single mu and a single w-s", file=sys.stderr)
        return 2
    graph_seed, weight_seed = harness.split_seed(cfg.master_seed, 2)
    network = harness.build_network(cfg, cfg.mu[0], cfg.w_s[0], graph_seed, weight_seed)
    topology.save(network, out)
    print(f"wrote {out} (measured_mu={topology.measured_mu(network)!r})")
    return 0


def _cmd_sweep(args) -> int:
    cfg = harness.load_config(args.config)
    overrides = _overrides(args)
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
        harness.validate_config(cfg)
    result = harness.run_sweep(cfg, workers=args.workers,
                               progress=lambda msg: print(msg, file=sys.stderr))
    harness.write_sweep_csv(result, cfg.out)
    print(f"wrote {cfg.out} ({len(result.rows)} rows, {result.n_failed} failed jobs)")
    return 1 if result.n_failed else 0


def _cmd_validate(args) -> int:
    cfg = harness.load_config(args.config)
    print(f"ok: {cfg.experiment} sweep, {len(cfg.cells())} cells x "
          f"{cfg.n_realizations} realizations")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="esnlab",
        description="Echo state networks on modular random graphs",
    )
    parser.add_argument("--version", action="version", version=f"esnlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in [
        ("generate", "generate a weighted network file"),
        ("mc", "run the memory-capacity task"),
        ("recall", "run the recall task"),
        ("attractors", "run the attractor census"),
        ("spectrum", "report the two leading eigenvalue magnitudes"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)

    p = sub.add_parser("spread", help="run a spreading experiment")
    p.add_argument("--kind", choices=["two", "many"], default="two")
    _add_config_flags(p)

    p = sub.add_parser("sweep", help="run a config-file-driven sweep")
    p.add_argument("--config", required=True)
    _add_config_flags(p)

    p = sub.add_parser("validate-config", help="check a sweep config file")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "validate-config":
            return _cmd_validate(args)
        if args.command == "spread":
            experiment = "spread_two" if args.kind == "two" else "spread_many"
            return _run_single(experiment, args)
        return _run_single(args.command, args)
    except (harness.ConfigError, topology.GraphConstructionError, ValueError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
