"""Command-line front end: ``faswipt {run,sweep,check}``.

Exit codes: 0 success, 1 configuration error, 2 runtime or solver error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .ao import run_ao
from .channel import sample_scenario_paths
from .errors import ConfigurationError
from .experiment import emit_outputs, format_number, load_config, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", type=Path, help="YAML experiment configuration")
    p.add_argument("--seed", type=int, help="base seed (overrides base_seed)")
    p.add_argument("--out-dir", help="output directory (overrides out_dir)")
    p.add_argument("--trials", type=int, help="trials per sweep point (overrides trials)")
    p.add_argument("--schemes", help="comma-separated subset of PROPOSED,TFA,RFA,FPA")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="faswipt", description="Fluid-antenna SWIPT optimization simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p_run = sub.add_parser("run", help="run one AO trace per scheme and write trace CSVs")
    _common(p_run)
    p_sweep = sub.add_parser("sweep", help="Monte-Carlo sweep; writes sweep.csv")
    _common(p_sweep)
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    p_check = sub.add_parser("check", help="quick invariant and oracle checks at small M")
    p_check.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load(args):
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()] if args.schemes else None
    return load_config(
        args.config,
        base_seed=args.seed,
        out_dir=args.out_dir,
        trials=args.trials,
        schemes=schemes,
    )


def cmd_run(args):
    config = _load(args)
    _, scenario = config.points[0]
    seed = config.base_seed
    paths_I, paths_E = sample_scenario_paths(scenario, seed)
    traces = []
    for scheme in config.schemes:
        tr = run_ao(
            scenario, paths_I, paths_E, scheme, seed,
            eps_outer=config.eps_outer, max_outer=config.max_outer, n_samples=config.n_samples,
        )
        if tr.infeasible:
            print(f"{scheme}: infeasible ({tr.diagnostic})")
        else:
            last = tr.records[-1]
            print(
                f"{scheme}: rate={format_number(last.rate)} bits/s/Hz  Q={format_number(last.harvested_power)} W  "
                f"iterations={tr.iterations}  converged={tr.converged}"
            )
        traces.append(tr)
    for path in emit_outputs(traces=traces, out_dir=config.out_dir, config=config):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args):
    config = _load(args)
    result = run_experiment(config, jobs=max(1, args.jobs))
    for row in result.rows:
        print(",".join(format_number(v) for v in row.as_list()))
    for path in emit_outputs(rows=result.rows, out_dir=config.out_dir, config=config):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_check(args):
    from .checks import run_checks

    return EXIT_OK if run_checks() else EXIT_RUNTIME


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "sweep": cmd_sweep, "check": cmd_check}[args.command]
    try:
        return handler(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
