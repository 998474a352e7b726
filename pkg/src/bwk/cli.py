"""Command-line entry point: ``bwk {run,sweep,analyze,verify,scenarios}``.

Exit statuses: 0 success, 1 usage error, 2 config error, 3 runtime or
assertion failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np

from . import oracle
from .env import SCENARIO_DEFAULTS, SCENARIOS, ScenarioError
from .harness import ConfigError, ExperimentConfig, run_episode, run_sweep
from .lp import EnumerationCapError, UnboundedLPError
from .policy import ASSERT_LEVELS, PolicyError
from .selfcheck import run_selfcheck

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bwk", description="Bandits with knapsacks: UCB-Simplex simulations and LP tools.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p, jobs=False):
        p.add_argument("config", help="YAML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config master seed")
        p.add_argument("--assert", dest="assert_level", choices=ASSERT_LEVELS, default=None,
                       help="invariant checking level")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="max concurrent (policy, B) cells")

    common(sub.add_parser("run", help="run one episode per policy at the first grid budget"))
    common(sub.add_parser("sweep", help="full (policy, B, replication) sweep, writes the CSV"), jobs=True)
    p = sub.add_parser("analyze", help="gap table and non-degeneracy audit of the config instance")
    p.add_argument("config")
    p.add_argument("--epsilon", type=float, default=None, help="audit threshold (default: config epsilon)")
    p = sub.add_parser("verify", help="LP self-check: enumeration oracle, duality, adjugate identity")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    sub.add_parser("scenarios", help="list built-in scenarios and their default parameters")
    return parser


def _load(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config)
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "assert_level", None) is not None:
        changes["assert_level"] = args.assert_level
    return dataclasses.replace(cfg, **changes) if changes else cfg


def cmd_run(args, out) -> int:
    cfg = _load(args)
    instance = cfg.build_instance()
    status = EXIT_OK
    for i, policy in enumerate(cfg.build_policies()):
        xi = oracle.analyze(instance).optimal.xi if policy.kind == "static-lp" else None
        ep = run_episode(instance, policy, cfg.seed + i, assert_level=cfg.assert_level, xi_static=xi)
        print(f"{policy.name}: B={instance.scale:g} tau*={ep.tau_star} payoff={ep.total_payoff:.6g} "
              f"init={ep.init_rounds} status={ep.status}", file=out)
        if ep.violations:
            print(f"  violations: {ep.violations}", file=out)
        if ep.error is not None or ep.violations:
            status = EXIT_RUNTIME
    return status


def cmd_sweep(args, out) -> int:
    cfg = _load(args)
    result = run_sweep(cfg, jobs=max(1, args.jobs))
    print(result.csv_text(), end="", file=out)
    for name, g in result.growth.items():
        print(f"{name}: better fit {g.better_fit}, ln-ratio spread {g.ln_ratio_spread:.3g}"
              + (f" ({'; '.join(g.notes)})" if g.notes else ""), file=out)
    for batch in result.batches:
        if len(batch.taus) < 2:
            print(f"note: replications={len(batch.taus)}, confidence intervals undefined", file=out)
            break
    if cfg.output:
        print(f"wrote {cfg.output}", file=out)
    bad = result.failures or [b for b in result.batches if b.violations]
    for f in result.failures:
        print(f"failed cell: {f}", file=out)
    for b in result.batches:
        if b.violations:
            print(f"violations in cell policy={b.policy_idx} B={b.scale:g}: {b.violations}", file=out)
    return EXIT_RUNTIME if bad else EXIT_OK


def cmd_analyze(args, out) -> int:
    cfg = ExperimentConfig.load(args.config)
    instance = cfg.build_instance()
    eps = args.epsilon if args.epsilon is not None else cfg.epsilon
    table = oracle.analyze(instance, eps)
    opt = table.optimal
    print(f"instance {instance.name} ({instance.case_tag}), K={instance.n_arms}, C={instance.n_resources}",
          file=out)
    print(f"obj* {opt.objective:.6g} at basis {opt.basis}, xi* = {np.array2string(opt.xi, precision=6)}",
          file=out)
    print(f"rank {table.rho}, delta_min {table.delta_min:.6g}", file=out)
    print("gap table (feasible bases):", file=out)
    for sol in table.feasible:
        print(f"  {str(sol.basis):<24} obj {sol.objective:<12.6g} gap {table.gaps[sol.basis]:.6g}", file=out)
    if table.audit is None:
        print("non-degeneracy audit skipped (no epsilon given)", file=out)
    else:
        verdict = "pass" if table.audit.passed else "FAIL"
        print(f"non-degeneracy audit at epsilon={eps:g}: {verdict}", file=out)
        for e in table.audit.failures:
            print(f"  {e.basis}: margin {e.margin:.3g}", file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    rep = run_selfcheck(args.instances, args.seed)
    print(f"{rep.instances} instances: max |enum - brute| {rep.max_oracle_gap:.3g}, "
          f"max duality gap {rep.max_duality_gap:.3g}, max adjugate residual {rep.max_adjugate_residual:.3g}",
          file=out)
    for f in rep.failures:
        print(f"  {f}", file=out)
    print("verify: " + ("ok" if rep.passed else "FAILED"), file=out)
    return EXIT_OK if rep.passed else EXIT_RUNTIME


def cmd_scenarios(args, out) -> int:
    for name in SCENARIOS:
        params = ", ".join(f"{k}={v}" for k, v in SCENARIO_DEFAULTS[name].items())
        print(f"{name}: {params}", file=out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "analyze": cmd_analyze, "verify": cmd_verify,
            "scenarios": cmd_scenarios}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (ConfigError, ScenarioError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PolicyError, UnboundedLPError, EnumerationCapError, AssertionError, ArithmeticError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
