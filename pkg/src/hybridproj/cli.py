"""Command line front end: ``hybridproj {run,check,sweep,schema}``.

Exit codes: 0 success, 2 configuration error, 3 runtime failure
(infeasible region, empty level set, ...), 4 invariant check failure.
"""

import argparse
import json
import os
import sys

from .errors import ConfigError, HybridProjError
from .harness import (CONFIG_SCHEMA, check_report, load_config, run_experiment,
                      sweep)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CHECK = 0, 2, 3, 4


def _summary(trace):
    last = trace.rows[-1]
    return {"scheme": trace.scheme, "iterations": trace.iterations,
            "stop_reason": trace.stop_reason, "final": last["x"],
            "res_t": last["res_t"], "anchor_dist": last["anchor_dist"],
            "fixed_dist": last["fixed_dist"]}


def _cmd_run(args):
    cfg = load_config(args.config)
    trace = run_experiment(cfg, args.csv)
    print(json.dumps(_summary(trace)))
    return EXIT_OK


def _cmd_check(args):
    cfg = load_config(args.config)
    trace = run_experiment(cfg, args.csv)
    report = check_report(trace)
    print(json.dumps(report, indent=1))
    return EXIT_OK if report["passed"] else EXIT_CHECK


def _cmd_sweep(args):
    with open(args.config, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    values = []
    for v in args.values:
        try:
            values.append(json.loads(v))
        except json.JSONDecodeError:
            values.append(v)
    stem = os.path.splitext(os.path.basename(args.config))[0]
    results = sweep(doc, args.param, values, args.out_dir, stem, args.jobs)
    for r in results:
        print(json.dumps(r))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="hybridproj",
                                     description="Hybrid projection fixed-point experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment and write its CSV trace")
    p.add_argument("config")
    p.add_argument("--csv", help="override output.csv_path")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("check", help="run and print the invariant report (JSON)")
    p.add_argument("config")
    p.add_argument("--csv", help="override output.csv_path")
    p.set_defaults(func=_cmd_check)
    p = sub.add_parser("sweep", help="run once per parameter value")
    p.add_argument("config")
    p.add_argument("--param", required=True,
                   help="dotted path, e.g. scheme.t_schedule.params.c")
    p.add_argument("--values", nargs="+", required=True, help="JSON values")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)
    p = sub.add_parser("schema", help="print the config JSON schema")
    p.set_defaults(func=lambda a: print(json.dumps(CONFIG_SCHEMA, indent=1)) or EXIT_OK)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HybridProjError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
