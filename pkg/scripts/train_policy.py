#!/usr/bin/env python3
"""Train an irrigation policy and persist the snapshot plus its curve.

Defaults reproduce the headline training run (2-region orchard, synthetic
seasons, full reward); expect a few hundred iterations and well under half
an hour on a laptop CPU.  Pass --reward mad-only for the ablated variant.
"""

import argparse
import dataclasses
import os
import time

import numpy as np

from orchardrl.agent.ppo import write_training_curve
from orchardrl.evalharness import train_policy_for_run
from orchardrl.runconfig import config_hash, default_run_config, load_config, save_config


def build_run(args):
    run = load_config(args.config) if args.config else default_run_config()
    if args.seed is not None:
        run = dataclasses.replace(run, seed=args.seed)
    if args.days is not None:
        run = dataclasses.replace(run, days=args.days)
    if args.reward:
        run = dataclasses.replace(
            run, reward=dataclasses.replace(run.reward, kind=args.reward))
    return run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", help="run-config JSON (defaults if omitted)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--days", type=int, help="override season length")
    parser.add_argument("--reward", choices=("full", "mad-only"))
    parser.add_argument("--out", default="results/training",
                        help="output directory (default results/training)")
    args = parser.parse_args()

    run = build_run(args)
    print(f"training: reward={run.reward.kind} seed={run.seed} "
          f"config {config_hash(run)}")
    t0 = time.monotonic()
    policy, curve = train_policy_for_run(run, reward_kind=run.reward.kind)
    elapsed = time.monotonic() - t0

    os.makedirs(args.out, exist_ok=True)
    policy_path = os.path.join(args.out, f"policy_{run.reward.kind}.npz")
    policy.save(policy_path)
    write_training_curve(os.path.join(args.out, "training_curve.csv"), curve)
    save_config(run, os.path.join(args.out, "config.json"))

    totals = [pt.total_reward for pt in curve]
    w = run.trainer.convergence_window
    print(f"{len(curve)} iterations in {elapsed:.1f}s")
    for lo in range(0, len(totals), w):
        chunk = totals[lo:lo + w]
        print(f"  iterations {lo:4d}..{lo + len(chunk) - 1:4d}: "
              f"mean episode reward {np.mean(chunk):9.2f}")
    print(f"snapshot -> {policy_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
