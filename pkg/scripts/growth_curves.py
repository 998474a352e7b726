"""Run sweeps from config files and print regret growth diagnostics.

    python3 scripts/growth_curves.py configs/growth_case1.yaml configs/growth_case3.yaml --reps 50
"""
import argparse
import dataclasses
import time

from bwk.harness import ExperimentConfig, run_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--reps", type=int, default=None, help="override replications")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    for path in args.configs:
        cfg = ExperimentConfig.load(path)
        if args.reps:
            cfg = dataclasses.replace(cfg, replications=args.reps)
        start = time.perf_counter()
        res = run_sweep(cfg, jobs=args.jobs)
        print(f"== {cfg.name} ({cfg.replications} reps, {time.perf_counter() - start:.0f}s)")
        for row in res.rows:
            print(f"  {row['policy_id']:<20} B={row['B']:>9g}  regret {row['regret_ub']:9.2f} "
                  f"+/- {row['regret_ci']:7.2f}  /lnB {row['ln_ratio']:8.3f}  /sqrtB {row['sqrt_ratio']:7.4f}")
        for name, g in res.growth.items():
            print(f"  {name}: better fit {g.better_fit}, ln-ratio spread {g.ln_ratio_spread:.2f}, "
                  f"ln slope {g.ln_fit.slope:.2f}, sqrt slope {g.sqrt_fit.slope:.3f}"
                  + (f" [{'; '.join(g.notes)}]" if g.notes else ""))
        for f in res.failures:
            print(f"  failed: {f}")


if __name__ == "__main__":
    main()
