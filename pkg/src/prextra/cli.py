"""Command-line entry points: run, gen-data, validate, compare."""

from __future__ import annotations

import argparse
import json
import sys

from .config import RunConfig
from .errors import ConfigError, SimulationError
from .problems import SpectralRecipe, save_matrix, synthesize
from .runner import compare, run, validate

_RECIPE_KEYS = {"m", "d", "xi", "exponent", "seed"}


def _load_recipe(path) -> SpectralRecipe:
    with open(path) as fh:
        raw = json.load(fh)
    unknown = set(raw) - _RECIPE_KEYS
    if unknown:
        raise ConfigError(f"unknown recipe keys: {sorted(unknown)}")
    missing = _RECIPE_KEYS - set(raw)
    if missing:
        raise ConfigError(f"missing recipe keys: {sorted(missing)}")
    return SpectralRecipe(m=raw["m"], d=raw["d"], xi=raw["xi"],
                          exponent=raw["exponent"], seed=raw["seed"])


def _render_figures(csv_path: str, out_dir: str) -> None:
    try:
        from traj_plots.render import render_files
    except ImportError as exc:
        raise SystemExit(
            "figure rendering needs the companion plots package "
            "(see plots/ in the repository): " + str(exc))
    render_files([csv_path], out_dir)
    print(f"figures written to {out_dir}")


def _cmd_run(args) -> int:
    cfg = RunConfig.from_json(args.config)
    result = run(cfg)
    print(f"trajectory: {result.csv_path}")
    print(f"summary:    {result.summary_path}")
    print(f"termination: {result.termination}")
    if args.render:
        _render_figures(result.csv_path, cfg.out_dir)
    if result.termination == "error":
        print(f"error: {result.summary['error']}", file=sys.stderr)
        return 1
    return 0


def _cmd_gen_data(args) -> int:
    recipe = _load_recipe(args.recipe)
    save_matrix(args.out, synthesize(recipe))
    print(f"data written to {args.out} "
          f"({recipe.m} x {recipe.d}, {recipe.exponent}, xi={recipe.xi})")
    return 0


def _cmd_validate(args) -> int:
    cfg = RunConfig.from_json(args.config) if args.config else None
    report = validate(cfg)
    print(report.render())
    return 0 if report.passed else 1


def _cmd_compare(args) -> int:
    cfgs = [RunConfig.from_json(path) for path in args.configs]
    result = compare(cfgs, args.out_dir)
    print(f"merged trajectory: {result.csv_path}")
    print(f"summary:           {result.summary_path}")
    if args.render:
        _render_figures(result.csv_path, args.out_dir)
    failed = [r["label"] for r in result.summary["runs"]
              if r["termination"] == "error"]
    if failed:
        print(f"runs ended in error: {failed}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prextra",
        description="Decentralized composite optimization on the Stiefel "
                    "manifold: simulation, validation, and comparison runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configured run")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--render", action="store_true",
                       help="also render figures (needs the plots package)")
    p_run.set_defaults(func=_cmd_run)

    p_gen = sub.add_parser("gen-data", help="synthesize a data matrix file")
    p_gen.add_argument("--recipe", required=True,
                       help="JSON recipe: m, d, xi, exponent, seed")
    p_gen.add_argument("--out", required=True, help="output file path")
    p_gen.set_defaults(func=_cmd_gen_data)

    p_val = sub.add_parser("validate", help="run invariant suites")
    p_val.add_argument("--config", help="JSON config path (default config "
                                        "when omitted)")
    p_val.set_defaults(func=_cmd_validate)

    p_cmp = sub.add_parser("compare",
                           help="run several configs on one instance")
    p_cmp.add_argument("--configs", nargs="+", required=True,
                       help="JSON config paths")
    p_cmp.add_argument("--out-dir", default="runs",
                       help="output directory for the merged trajectory")
    p_cmp.add_argument("--render", action="store_true",
                       help="also render figures (needs the plots package)")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimulationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
