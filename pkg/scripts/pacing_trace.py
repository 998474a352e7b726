"""Follow case-4 pacing along one traced episode.

Prints, at geometric checkpoints, how far cumulative consumption under the
optimal basis is from its schedule n_x * b(i).

    python3 scripts/pacing_trace.py configs/pacing_case4.yaml --scale 100000
"""
import argparse

import numpy as np

from bwk.harness import ExperimentConfig, run_episode
from bwk.oracle import analyze
from bwk.policy import Policy


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--scale", type=float, default=None, help="B (default: last grid value)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cfg = ExperimentConfig.load(args.config)
    inst = cfg.build_instance(args.scale or cfg.b_grid[-1])
    policy = cfg.build_policies()[0]
    table = analyze(inst, cfg.epsilon)
    opt = table.optimal.basis
    bid = Policy(policy, inst).table.id_of(opt)
    ep = run_episode(inst, policy, args.seed, trace=True)
    rows = list(opt.resource_set)
    b = inst.budget_ratios[rows]
    mine = ep.trace.basis_ids == bid
    costs = np.where(mine[:, None], ep.trace.costs[:, rows], 0.0)
    used, n = np.cumsum(costs, axis=0), np.cumsum(mine)
    print(f"optimal basis {opt}, xi* {np.round(table.optimal.xi, 4)}, tau* {ep.tau_star}, status {ep.status}")
    print(f"pacing draws {ep.pacing['emitted']}, mean delta* {ep.pacing['mean_delta']:.3g}, "
          f"violations {ep.violations or 'none'}")
    print(f"{'round':>9} {'n_x':>9} {'max dev':>10} {'dev/n_x':>10}")
    t = 100
    while t <= len(n):
        if n[t - 1]:
            dev = np.abs(used[t - 1] - n[t - 1] * b).max()
            print(f"{t:>9} {n[t - 1]:>9} {dev:>10.3f} {dev / n[t - 1]:>10.2e}")
        t *= 4
    print(f"selected the optimal basis in {mine.mean():.2%} of rounds")


if __name__ == "__main__":
    main()
