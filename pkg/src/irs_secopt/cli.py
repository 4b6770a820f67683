"""``irs-secopt`` command line: single runs, Monte-Carlo sweeps, self-test."""

import argparse
import dataclasses
import datetime as _dt
import os
import sys
from importlib import metadata

import numpy as np

from . import bench
from .alternating import ao_discrete, ao_optimize
from .channel import THETA_STREAM, realization_rng, scenario_channels
from .config import RunConfig, config_snapshot, load_config, write_manifest
from .errors import ConfigError, IrsSecoptError
from .selftest import run_selftest

EXIT_OK, EXIT_SELFTEST, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
WORKERS_ENV = "IRS_SECOPT_WORKERS"


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def _load(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    scenario, ao = cfg.scenario, cfg.ao
    if args.seed is not None:
        scenario = scenario.replace(master_seed=args.seed)
    if getattr(args, "p_max", None) is not None:
        scenario = scenario.replace(p_max=args.p_max)
    if getattr(args, "swap_user_eve", False):
        scenario = scenario.swapped()
    if getattr(args, "q_levels", None) is not None:
        ao = dataclasses.replace(ao, q_levels=args.q_levels)
    return dataclasses.replace(cfg, scenario=scenario, ao=ao)


def _manifest(cfg, args, outputs):
    return {
        "tool": "irs-secopt",
        "version": _version(),
        "command": args.command,
        "argv": sys.argv[1:],
        "master_seed": cfg.scenario.master_seed,
        "config_path": os.path.abspath(args.config) if args.config else None,
        "config": config_snapshot(cfg),
        "started": _now(),
        "finished": None,
        "outputs": outputs,
    }


def cmd_run(args):
    cfg = _load(args)
    manifest = _manifest(cfg, args, [])
    write_manifest(args.manifest, manifest)

    chs = scenario_channels(cfg.scenario, args.realization)
    rng = realization_rng(cfg.scenario.master_seed, args.realization, THETA_STREAM)
    if cfg.ao.q_levels:
        report = ao_discrete(chs, cfg.scenario.p_max, cfg.ao, rng)
    else:
        report = ao_optimize(chs, cfg.scenario.p_max, cfg.ao, rng)
    summary = report.summary()
    summary["realization"] = args.realization
    summary["channel_digest"] = chs.digest()
    for key, value in summary.items():
        print(f"{key}: {value!r}" if isinstance(value, float) else f"{key}: {value}")

    manifest["finished"] = _now()
    manifest["result"] = summary
    write_manifest(args.manifest, manifest)
    return EXIT_OK


def _workers(args, cfg):
    if args.workers is not None:
        n = args.workers
    elif os.environ.get(WORKERS_ENV):
        try:
            n = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
    else:
        n = cfg.workers
    if n < 1:
        raise ConfigError("workers must be >= 1")
    return n


def cmd_sweep(args):
    cfg = _load(args)
    if args.axis not in bench.AXES:
        raise ConfigError(f"--axis must be one of {', '.join(sorted(bench.AXES))}")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    schemes = tuple(bench.Scheme.parse(s) for s in args.scheme) if args.scheme else cfg.schemes
    realizations = args.realizations if args.realizations is not None else cfg.realizations
    workers = _workers(args, cfg)

    outputs = [os.path.abspath(args.out_csv)] + ([os.path.abspath(args.out_svg)] if args.out_svg else [])
    manifest_path = os.path.splitext(args.out_csv)[0] + ".manifest.json"
    manifest = _manifest(dataclasses.replace(cfg, schemes=schemes), args, outputs)
    manifest.update(axis=args.axis, values=values, realizations=realizations, workers=workers)
    write_manifest(manifest_path, manifest)

    result = bench.monte_carlo_sweep(cfg.scenario, args.axis, values, realizations, schemes, cfg.ao, workers)
    bench.emit_csv(result, args.out_csv)
    if args.out_svg:
        bench.emit_plot(result, args.out_svg)
    for name in result.schemes:
        print(name + ": " + ", ".join(f"{m:.4f}" for m in result.mean[name]))

    manifest["finished"] = _now()
    write_manifest(manifest_path, manifest)
    return EXIT_OK


def cmd_selftest(args):
    results = run_selftest(args.scale, args.seed, stream=sys.stdout)
    failed = [name for name, ok in results.items() if not all(ok)]
    print("selftest: " + ("FAILED " + ", ".join(failed) if failed else "all suites passed"))
    return EXIT_SELFTEST if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="irs-secopt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file (default: built-in reference scenario)")
        p.add_argument("--seed", type=int, help="override scenario.master_seed")
        p.add_argument("--p-max", type=float, help="transmit power budget in W")
        p.add_argument("--q-levels", type=int, help="phase levels; 0 keeps continuous phases")
        p.add_argument("--swap-user-eve", action="store_true", help="exchange user and eavesdropper positions")

    run = sub.add_parser("run", help="optimize one channel realization")
    common(run)
    run.add_argument("--realization", type=int, default=0)
    run.add_argument("--manifest", default="irs-secopt-run.json", help="JSON manifest path")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="Monte-Carlo sweep over one parameter")
    common(sweep)
    sweep.add_argument("--axis", required=True, choices=sorted(bench.AXES))
    sweep.add_argument("--values", required=True, help="comma-separated ascending values")
    sweep.add_argument("--realizations", type=int)
    sweep.add_argument("--out-csv", default="sweep.csv")
    sweep.add_argument("--out-svg")
    sweep.add_argument("--workers", type=int, help=f"worker processes (env {WORKERS_ENV})")
    sweep.add_argument("--scheme", action="append", help="scheme name, repeatable (e.g. ao_q8)")
    sweep.set_defaults(func=cmd_sweep)

    st = sub.add_parser("selftest", help="run the brute-force oracle suites")
    st.add_argument("--scale", choices=("quick", "full"), default="quick")
    st.add_argument("--seed", type=int, default=0)
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IrsSecoptError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

if __name__ == "__main__":
    sys.exit(main())
