"""Command-line entry point for running experiment sweeps."""

import argparse
import json
import os
import sys

from ncim.config import SimConfig
from ncim.harness import SweepSpec, get_preset, presets, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncim",
        description="Grant-free non-coherent index-modulation access simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment sweep and write a CSV")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="named experiment: " + ", ".join(sorted(presets())))
    src.add_argument("--config", help="JSON file with SimConfig fields")
    run.add_argument("--trials", type=int, default=None, help="trials per sweep point")
    run.add_argument("--seed", type=int, default=None, help="master seed")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--algorithms", default=None,
                     help="comma-separated algorithm list override")
    run.add_argument("--desk-scale", action="store_true",
                     help="use the reduced desk-scale trial count of the preset")
    run.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    return parser


def _load_config_file(path: str) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return SimConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.preset:
        try:
            preset = get_preset(args.preset)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        base = SimConfig(**preset.overrides)
        sweeps = list(preset.sweeps)
        trials = preset.trials_desk if args.desk_scale else preset.trials_full
        name = preset.name
    else:
        try:
            base = _load_config_file(args.config)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        # a bare config is a single-point experiment
        sweeps = [SweepSpec("snr_db", (base.snr_db,))]
        trials = base.trials
        name = os.path.splitext(os.path.basename(args.config))[0]

    if args.algorithms:
        base = base.replace(algorithms=tuple(args.algorithms.split(",")))
    if args.seed is not None:
        base = base.replace(master_seed=args.seed)
    if args.trials is not None:
        trials = args.trials

    problems = base.validate()
    if problems:
        for p in problems:
            print(f"invalid config -> {p}", file=sys.stderr)
        return 2

    out_path = os.path.join(args.out, f"{name}.csv")
    try:
        run_experiment(base, sweeps, out_path, trials=trials,
                       jobs=args.jobs, experiment=name)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
