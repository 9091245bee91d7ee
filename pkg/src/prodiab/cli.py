"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 model inapplicable for the
requested parameters, 4 numerical failure (stiffness, truncation leak,
invariant violation).
"""

from __future__ import annotations

import argparse
import sys

from .errors import (
    ConfigError,
    DegenerateSteadyStateError,
    InvariantViolationError,
    StiffnessError,
    TruncationLeakError,
    ValidityError,
)

EXIT_CONFIG = 2
EXIT_INAPPLICABLE = 3
EXIT_NUMERICAL = 4


def _parse_overrides(pairs):
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override must be key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="prodiab",
        description="Scenario runner for cavity-QED effective-model comparisons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config and write data files")
    run.add_argument("config", help="path to the scenario config file")
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument(
        "--reps",
        default=None,
        help="comma-separated subset of exact,adb,pdb,pdb-lme",
    )
    run.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry (repeatable)",
    )

    val = sub.add_parser("validate", help="parse a config and echo the timescale diagnostics")
    val.add_argument("config")
    val.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .harness import load_config, run_scenario  # deferred: keeps --help fast

    try:
        overrides = _parse_overrides(args.override)
        if getattr(args, "reps", None):
            overrides["representations"] = args.reps
        cfg = load_config(args.config, overrides)
        if args.command == "validate":
            print(f"scenario: {cfg.scenario}")
            print(f"grid: [{cfg.grid[0]:g}, {cfg.grid[-1]:g}] with {len(cfg.grid)} points")
            print(f"representations: {', '.join(cfg.representations)}")
            from .elimination import epsilon_report

            if cfg.jc is not None:
                rep = epsilon_report(cfg.jc)
            else:
                from .elimination import JCParams

                rep = epsilon_report(
                    JCParams(kappa=1.0, gamma=cfg.lam.gamma, g=cfg.lam.g,
                             f=max(cfg.lam.env_H.amp, cfg.lam.env_V.amp))
                )
            for name, value in {**rep.eps_sq_candidates, **rep.eps_candidates}.items():
                print(f"  {name} = {value:g}")
            print(f"  worst_eps = {rep.worst_eps:g}" + ("  (warning: > 0.3)" if rep.warn else ""))
            return 0
        paths, report = run_scenario(cfg, out_dir=args.out)
        for name in sorted(paths):
            print(f"wrote {paths[name]}")
        if report.leak_flagged:
            print(f"note: truncation leak exceeded threshold; rerun used n_max = {report.n_max_used}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValidityError, DegenerateSteadyStateError) as exc:
        print(f"model inapplicable: {exc}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    except (StiffnessError, TruncationLeakError, InvariantViolationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
