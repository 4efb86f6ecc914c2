"""Command line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import logging
import os
import sys

import numpy as np

from ..combine import aligned_add_state, optimal_path
from ..dtw import AlignmentPath
from ..errors import ConfigError, FPETPFError, InvalidInput
from ..euler import GasConstants, advance
from ..filters import FILTER_KINDS
from . import io
from .config import config_from_mapping, dump_config, parse_config_text
from .diagnostics import shock_position
from .problems import build_state, get_problem
from .riemann import exact_riemann
from .run import AssimilationFailure, FEATURE_FRACTION, prepare, run_filter

log = logging.getLogger("fpetpf")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _config_values(args):
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if args.problem:
        values["problem"] = args.problem
    if args.seed is not None:
        values["seed"] = args.seed
    if args.out:
        values["out"] = args.out
    if args.scale:
        values.pop("shape", None)
        values.pop("n_ensemble", None)
        values["scale"] = args.scale
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        values.update(parse_config_text(f"{key.strip()} = {raw}"))
    return values


def _load(args):
    values = _config_values(args)
    kinds = args.filter if getattr(args, "filter", None) else None
    if kinds:
        values["filter"] = kinds[0]
    cfg = config_from_mapping(values)
    return cfg, kinds or [cfg.filter]


def _progress(kind):
    def report(k, n, err):
        if k == n or k % 10 == 0:
            log.info("%s: step %d/%d error %.4g", kind, k, n, err)
    return report


def cmd_run(args):
    cfg, kinds = _load(args)
    log.info("problem %s shape %s n_e %d seed %d -> %s", cfg.problem, cfg.shape, cfg.n_ensemble, cfg.seed, cfg.out)
    setup = prepare(cfg)
    results = {}
    for kind in kinds:
        try:
            results[kind] = run_filter(setup, kind, _progress(kind))
        except AssimilationFailure as exc:
            os.makedirs(cfg.out, exist_ok=True)
            path = io.dump_failure(os.path.join(cfg.out, f"failure_{kind}.npz"), exc)
            print(f"numerical failure: {exc}\ndiagnostic dump: {path}", file=sys.stderr)
            return EXIT_NUMERICAL
    summary = io.write_run(cfg.out, setup, results, dump_config(cfg))
    for kind, entry in summary["filters"].items():
        print(f"{kind}: final error {entry['final_error']:.6g}")
    return EXIT_OK


def cmd_truth(args):
    cfg, _ = _load(args)
    prob = get_problem(cfg.problem)
    gas = GasConstants()
    grid = prob.grid(cfg.shape)
    state = build_state(prob, grid, cfg.truth, gas)
    state = advance(state, cfg.t_final, gas, cfg.cfl)
    os.makedirs(cfg.out, exist_ok=True)
    io.write_snapshot(os.path.join(cfg.out, "truth_final.csv"), state, gas)
    if grid.ndim == 2:
        io.write_ppm(os.path.join(cfg.out, "truth_rho.ppm"), state.rho)
    print(f"{cfg.problem}: advanced to t={state.t:.6g} on {grid.shape}")
    if cfg.problem not in ("sod", "toro"):
        return EXIT_OK
    t = cfg.truth
    left = (t["rho_L"], t["u_L"], t["p_L"])
    right = (t["rho_R"], t["u_R"], t["p_R"])
    x = grid.axes[0]
    rho, u, p = exact_riemann(left, right, gas.gamma, x, state.t, x0=t["x_d"])
    io.write_table(os.path.join(cfg.out, "exact.csv"), ["x", "rho", "u", "p"], [x, rho, u, p])
    l1 = float(np.sum(np.abs(state.rho - rho)) * grid.spacing[0])
    thr = FEATURE_FRACTION * float(np.max(np.abs(np.diff(rho))))
    print(f"L1(rho) vs exact: {l1:.6g}")
    print(f"shock node: numerical {shock_position(state.rho, thr)}, exact {shock_position(rho, thr)}")
    return EXIT_OK


def _pair_from_args(args, cfg, gas):
    prob = get_problem(cfg.problem)
    grid = prob.grid(cfg.shape)
    if args.snapshots:
        a, b = (io.load_snapshot(p, grid, gas) for p in args.snapshots)
        return grid, a, b
    second = dict(cfg.truth)
    for item in args.other or []:
        key, sep, raw = item.partition("=")
        if not sep or key not in second:
            raise ConfigError(f"--other expects a known parameter key=value, got {item!r}")
        second[key] = float(raw)
    a = build_state(prob, grid, cfg.truth, gas)
    b = build_state(prob, grid, second, gas)
    if args.time:
        a = advance(a, args.time, gas, cfg.cfl)
        b = advance(b, args.time, gas, cfg.cfl)
    return grid, a, b


def cmd_align(args):
    cfg, _ = _load(args)
    gas = GasConstants()
    grid, a, b = _pair_from_args(args, cfg, gas)
    path = optimal_path(a, b, cfg.q)
    mixed = aligned_add_state(a, b, args.alpha, path)
    plain = a.copy()
    plain.q = args.alpha * a.q + (1.0 - args.alpha) * b.q
    os.makedirs(cfg.out, exist_ok=True)
    io.write_snapshot(os.path.join(cfg.out, "aligned.csv"), mixed, gas)
    io.write_snapshot(os.path.join(cfg.out, "plain.csv"), plain, gas)
    paths = [("path", path)] if isinstance(path, AlignmentPath) else [("path_rows", path.rows), ("path_cols", path.cols)]
    for name, p in paths:
        pairs = np.asarray(p.pairs)
        io.write_table(os.path.join(cfg.out, f"{name}.csv"), ["i", "j"], [pairs[:, 0], pairs[:, 1]])
        print(f"{name}: {len(pairs)} pairs, distance {p.distance:.6g}")
    if grid.ndim == 2:
        io.write_ppm(os.path.join(cfg.out, "aligned_rho.ppm"), mixed.rho)
        io.write_ppm(os.path.join(cfg.out, "plain_rho.ppm"), plain.rho)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--problem", help="sod, toro, shu-osher or blast2d")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    scale = common.add_mutually_exclusive_group()
    scale.add_argument("--desk-scale", dest="scale", action="store_const", const="desk")
    scale.add_argument("--paper-scale", dest="scale", action="store_const", const="paper")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fpetpf", description="Feature-preserving ensemble transform particle filter.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="twin experiment")
    run.add_argument("--filter", action="append", choices=FILTER_KINDS,
                     help="filter kind; repeat to compare on identical inputs")
    run.set_defaults(func=cmd_run)

    truth = sub.add_parser("truth", parents=[common], help="free run, compared to the exact solution when one exists")
    truth.set_defaults(func=cmd_truth)

    align = sub.add_parser("align", parents=[common], help="aligned combination of two states")
    align.add_argument("--alpha", type=float, default=0.5)
    align.add_argument("--snapshots", nargs=2, metavar="CSV", help="two snapshot files on the config grid")
    align.add_argument("--other", action="append", metavar="KEY=VALUE",
                       help="parameter change for the second state")
    align.add_argument("--time", type=float, default=0.0, help="advance both states to this time first")
    align.set_defaults(func=cmd_align)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidInput) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FPETPFError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
