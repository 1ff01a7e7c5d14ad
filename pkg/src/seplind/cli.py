"""Command line interface: ``seplind run|oracle|check``."""
import argparse
import json
import sys

from .runner import (
    EXIT_INVALID,
    EXIT_OK,
    ConfigError,
    load_config,
    parse_config,
    run,
    with_overrides,
    write_outputs,
)
from .scenarios import BELL_DEFAULT_RATES


def _summary(result, out):
    for engine, info in result.manifest["engines"].items():
        line = f"{engine}: {info['wall_time_s']:.2f}s"
        if info.get("trajectories"):
            line += f", {info['trajectories']} trajectories, {info['aborted']} aborted"
        print(line)
    if "dynamical_entanglement_detected" in result.report:
        print(f"dynamical entanglement detected: {result.report['dynamical_entanglement_detected']}")
    for err in result.manifest["errors"]:
        print(f"error: {err}", file=sys.stderr)
    print(f"wrote {len(result.series)} curves to {out}")


def cmd_run(args):
    try:
        config = load_config(args.config)
        config = with_overrides(config, seed=args.seed, output=args.out)
    except (ConfigError, OSError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = run(config, workers=args.workers)
    write_outputs(result, config.output)
    _summary(result, config.output)
    return result.exit_code


def cmd_oracle(args):
    scenario = {"name": args.scenario}
    if args.scenario == "bell_decay":
        scenario["rates"] = list(args.rates)
    else:
        scenario["gamma"] = args.gamma
    raw = {
        "scenario": scenario,
        "evolution": {"t_max": args.t_max, "tau": args.tau},
        "engines": ["oracles"],
        "output": args.out,
    }
    try:
        config = parse_config(json.dumps(raw))
    except ConfigError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = run(config)
    write_outputs(result, config.output)
    _summary(result, config.output)
    return EXIT_OK


def cmd_check(args):
    from .checks import run_checks

    failures = run_checks()
    print(f"{failures} failure(s)")
    return 1 if failures else 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="seplind",
        description="Compare full and separability-restricted open-system dynamics.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a configured experiment")
    r.add_argument("config", help="YAML/JSON config file or a previous manifest.json")
    r.add_argument("--seed", type=int, default=None, help="override the master seed")
    r.add_argument("--workers", type=int, default=1, help="worker processes")
    r.add_argument("--out", default=None, help="override the output directory")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="emit closed-form curves only")
    o.add_argument("scenario", choices=["bell_decay", "swap_exchange"])
    o.add_argument("--rates", type=float, nargs=4, default=list(BELL_DEFAULT_RATES),
                   metavar=("G_11_PHIPLUS", "G_PHIPLUS_00", "G_11_PHIMINUS", "G_PHIMINUS_00"))
    o.add_argument("--gamma", type=float, default=1.0)
    o.add_argument("--t-max", type=float, default=2.0)
    o.add_argument("--tau", type=float, default=0.2)
    o.add_argument("--out", default="oracle")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("check", help="run the built-in invariant checks")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
