"""Command-line entry points.

Subcommands: synth-weather (emit a synthetic season CSV), identify (fit the
water-balance model from an observation log), train (optimize a policy and
persist it), evaluate (one controller over a season), compare (the full
paired roster with savings and stress metrics).  Exit status 0 on success,
2 on usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import evalharness
from .agent.policy import load_policy
from .agent.ppo import write_training_curve
from .predictor import fit, load_observations_csv
from .runconfig import (
    RunConfig,
    config_hash,
    default_run_config,
    load_config,
    save_config,
)
from .weather import synthesize_season, write_weather_csv

RL_CONTROLLERS = ("rl", "rl-mad", "rl-noshield")
CONTROLLER_CHOICES = evalharness.ROSTER_NAMES + ("zero",)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="run-config JSON file (defaults used if omitted)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", help="output directory (overrides config out_dir)")
    parser.add_argument("--days", type=int, help="override season length in days")


def _load_run(args) -> RunConfig:
    run = load_config(args.config) if args.config else default_run_config()
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "days", None) is not None:
        updates["days"] = args.days
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    if getattr(args, "reward", None):
        updates["reward"] = dataclasses.replace(run.reward, kind=args.reward)
    if getattr(args, "no_shield", False):
        updates["shield"] = dataclasses.replace(run.shield, enabled=False)
    return dataclasses.replace(run, **updates) if updates else run


def _obtain_policy(run: RunConfig, path: str | None, reward_kind: str,
                   label: str):
    if path:
        return load_policy(path)
    print(f"[{label}] no policy snapshot given; training one "
          f"(reward={reward_kind}, seed={run.seed})", flush=True)
    policy, _ = evalharness.train_policy_for_run(run, reward_kind=reward_kind)
    return policy


def cmd_synth_weather(args) -> int:
    days = args.days if args.days is not None else 246
    season = synthesize_season(args.seed if args.seed is not None else 0, days)
    write_weather_csv(args.out, season)
    print(f"wrote {days} daily records to {args.out}")
    return 0


def cmd_identify(args) -> int:
    rows = load_observations_csv(args.observations)
    model = fit(rows)
    print(f"rows: {len(rows)}")
    print(f"c1 = {model.c1:.6f}")
    print(f"c2 = {model.c2:.6f}")
    print(f"c3 = {model.c3:.6f}")
    print(f"b  = {model.b:.6f}")
    print(f"r_squared = {model.r_squared:.6f}")
    print(f"nrmse     = {model.nrmse:.6f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"c1": model.c1, "c2": model.c2, "c3": model.c3,
                       "b": model.b, "r_squared": model.r_squared,
                       "nrmse": model.nrmse}, fh, indent=2)
            fh.write("\n")
        print(f"model written to {args.out}")
    return 0


def cmd_train(args) -> int:
    run = _load_run(args)
    policy, curve = evalharness.train_policy_for_run(run, reward_kind=run.reward.kind)
    outdir = run.out_dir
    os.makedirs(outdir, exist_ok=True)
    policy_path = os.path.join(outdir, "policy.npz")
    policy.save(policy_path)
    write_training_curve(os.path.join(outdir, "training_curve.csv"), curve)
    save_config(run, os.path.join(outdir, "config.json"))
    final = curve[-1]
    print(f"trained for {len(curve)} iterations "
          f"(final mean episode reward {final.total_reward:.3f}, "
          f"loss {final.loss:.6f})")
    print(f"policy -> {policy_path}")
    print(f"config hash {config_hash(run)}")
    return 0


def _print_summary(name: str, entry, levels) -> None:
    below, above = evalharness.qos(entry, levels)
    print(f"{name:12s} water {entry.total_water:8.3f} in  "
          f"days_below_mad {below:3d}  days_above_fc {above:3d}  "
          f"trigger_days {entry.shield_trigger_days:3d}")


def cmd_evaluate(args) -> int:
    run = _load_run(args)
    levels = evalharness.build_levels(run)
    policy = None
    if args.controller in RL_CONTROLLERS:
        kind = "mad-only" if args.controller == "rl-mad" else run.reward.kind
        policy = _obtain_policy(run, args.policy, kind, args.controller)
    controller = evalharness.build_controller(run, args.controller, policy=policy)
    entry = evalharness.run_season(run, controller, name=args.controller)
    result = evalharness.ExperimentResult(
        season_days=entry.season_days, seed=run.seed,
        config_fingerprint=config_hash(run),
        entries={args.controller: entry})
    evalharness.write_results(run.out_dir, result, levels)
    _print_summary(args.controller, entry, levels)
    print(f"results -> {run.out_dir}")
    return 0


def cmd_compare(args) -> int:
    run = _load_run(args)
    levels = evalharness.build_levels(run)
    policy = _obtain_policy(run, args.policy, run.reward.kind, "rl")
    policy_mad = _obtain_policy(run, args.policy_mad, "mad-only", "rl-mad")
    controllers = {
        "et": evalharness.build_controller(run, "et"),
        "sensor": evalharness.build_controller(run, "sensor"),
        "rl": evalharness.build_controller(run, "rl", policy=policy),
        "rl-mad": evalharness.build_controller(run, "rl-mad", policy=policy_mad),
        "rl-noshield": evalharness.build_controller(run, "rl-noshield", policy=policy),
    }
    result = evalharness.run_roster(run, controllers)
    evalharness.write_results(run.out_dir, result, levels)

    et_entry = result.entries["et"]
    print(f"{'controller':12s} {'water_in':>9s} {'vs_et_%':>8s} "
          f"{'below_mad':>9s} {'above_fc':>8s} {'triggers':>8s}")
    for name, entry in result.entries.items():
        below, above = evalharness.qos(entry, levels)
        savings = evalharness.water_savings(entry, et_entry)
        print(f"{name:12s} {entry.total_water:9.3f} {savings:8.2f} "
              f"{below:9d} {above:8d} {entry.shield_trigger_days:8d}")
    print(f"results -> {run.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orchardrl",
        description="Learned irrigation control: simulation, training, evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-weather", help="emit a synthetic season CSV")
    p.add_argument("--days", type=int, help="number of daily records (default 246)")
    p.add_argument("--seed", type=int, help="generator seed (default 0)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_synth_weather)

    p = sub.add_parser("identify", help="fit the water-balance model from a log")
    p.add_argument("--observations", required=True,
                   help="observation CSV (soil_water, irrigation, precip, "
                        "et, soil_water_next)")
    p.add_argument("--out", help="optional JSON path for the fitted model")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("train", help="train a policy and persist the snapshot")
    _add_common(p)
    p.add_argument("--reward", choices=("full", "mad-only"),
                   help="reward variant to train against")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="run one controller over a season")
    _add_common(p)
    p.add_argument("--controller", required=True, choices=CONTROLLER_CHOICES)
    p.add_argument("--policy", help="policy snapshot (.npz) for rl controllers")
    p.add_argument("--no-shield", action="store_true",
                   help="disable the safety shield for this run")
    p.add_argument("--reward", choices=("full", "mad-only"),
                   help="reward variant logged by the environment")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="paired roster comparison over one season")
    _add_common(p)
    p.add_argument("--policy", help="policy snapshot for rl / rl-noshield")
    p.add_argument("--policy-mad", help="policy snapshot for rl-mad")
    p.add_argument("--no-shield", action="store_true",
                   help="disable the safety shield for the rl rows")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # runtime failure -> diagnostic + exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
