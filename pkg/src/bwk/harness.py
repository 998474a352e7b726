"""Episodes, Monte-Carlo sweeps, config files and result serialization."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from numba import njit

from . import oracle
from .env import ArmModel, Instance, ScenarioError, make_scenario, make_tabular, min_positive_cost, sample_arm
from .estimator import (S_INIT_ROUNDS, S_RHO, S_SELECTIONS, V_BAND, V_CONSERVATION, V_PARANOID,
                        EstimatorState, record_obs)
from .lp import FEAS_TOL
from .policy import (ASSERT_LEVELS, HORIZON_CAP, INIT_CAP, OK, STATUS_TEXT, Policy, PolicyConfig,
                     init_next, select_step)
from .rng import hash64

CSV_COLUMNS = ("policy_id", "B", "reps", "mean_payoff", "payoff_ci", "regret_ub", "regret_ci",
               "mean_tau", "tau_bound", "ln_ratio", "sqrt_ratio")
SPEC_VERSION = 1
VIOLATION_NAMES = ("band", "pacing_feasibility", "counter_conservation", "pacing_basic_solution", "paranoid")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


# ------------------------------------------------------------ episode loop

@njit(cache=True)
def _check_band(st, arms, d, bid, rho):
    n_x, n_xk, xi_frozen = st[3], st[4], st[7]
    s = 0.0
    for j in range(d):
        s += xi_frozen[bid, arms[j]]
    if s <= 0.0:
        return True
    for j in range(d):
        k = arms[j]
        target = n_x[bid] * xi_frozen[bid, k] / s
        if n_xk[bid, k] < target - rho - FEAS_TOL or n_xk[bid, k] > target + 1.0 + FEAS_TOL:
            return False
    return True


@njit(cache=True)
def episode_loop(enc, pp, st, wk, seed, cap_rounds, tr_label, tr_arm, tr_basis, tr_obs, tr_init):
    """Play one episode in place on ``st``.

    Returns (tau, payoff, last round, status, consumed, consumed before tau).
    ``tau`` is -1 when the episode stopped for another reason than a budget.
    """
    kind, bal, budgets, time_col = pp[0], pp[1], pp[9], pp[11]
    arms_tab, sizes, assert_level = pp[12], pp[14], pp[19]
    n_x, n_xk, frozen, scalars, violations = st[3], st[4], st[6], st[12], st[13]
    K = st[0].shape[0]
    C = budgets.shape[0]
    consumed = np.zeros(C)
    before = np.zeros(C)
    obs = np.zeros(C + 1)
    trace_len = tr_label.shape[0]
    payoff = 0.0
    tau = -1
    status = OK
    in_init = True
    t = 1
    while True:
        if t > cap_rounds:
            status = HORIZON_CAP
            break
        bid = -1
        if in_init:
            arm = init_next(pp, st)
            if arm == -2:
                status = INIT_CAP
                break
            if arm == -1:
                in_init = False
            label = arm
        if not in_init:
            label, arm, bid, _, s = select_step(pp, st, wk, seed, t, consumed)
            if s != OK:
                status = s
                break
        if arm >= 0:
            sample_arm(enc, seed, t, arm, obs)
        else:
            for j in range(C + 1):
                obs[j] = 0.0
            if time_col >= 0:
                obs[1 + time_col] = 1.0
        for i in range(C):
            before[i] = consumed[i]
        over = False
        for i in range(C):
            consumed[i] += obs[1 + i]
            if consumed[i] > budgets[i]:
                over = True
        record_obs(st, label, arm, bid, obs[0], obs[1:], in_init)
        if assert_level >= 1 and not in_init and kind == 0:
            if bid >= 0:
                tot = 0
                for l in range(2 * K + 1):
                    tot += n_xk[bid, l]
                if tot != n_x[bid]:
                    violations[V_CONSERVATION] += 1
            if scalars[S_SELECTIONS] + scalars[S_INIT_ROUNDS] != t:
                violations[V_CONSERVATION] += 1
            rho = scalars[S_RHO] if scalars[S_RHO] > 0 else sizes[bid]
            if bal == 0 and bid >= 0 and not _check_band(st, arms_tab[bid], sizes[bid], bid, rho):
                violations[V_BAND] += 1
            if assert_level >= 2:
                total = 0
                for j in range(n_x.shape[0]):
                    total += n_x[j]
                    row = 0
                    for l in range(2 * K + 1):
                        row += n_xk[j, l]
                    if row != n_x[j]:
                        violations[V_PARANOID] += 1
                    if bal == 0 and frozen[j] == 1 and n_x[j] > 0:
                        if not _check_band(st, arms_tab[j], sizes[j], j, rho):
                            violations[V_PARANOID] += 1
                if total != scalars[S_SELECTIONS]:
                    violations[V_PARANOID] += 1
        if t <= trace_len:
            tr_label[t - 1] = label
            tr_arm[t - 1] = arm
            tr_basis[t - 1] = bid
            tr_init[t - 1] = in_init
            for j in range(C + 1):
                tr_obs[t - 1, j] = obs[j]
        if over:
            tau = t
            break
        payoff += obs[0]
        t += 1
    scalars[2] = t
    return tau, payoff, t, status, consumed, before


@dataclass(frozen=True, eq=False)
class Trace:
    labels: np.ndarray
    arms: np.ndarray
    basis_ids: np.ndarray
    rewards: np.ndarray
    costs: np.ndarray
    init_flags: np.ndarray

    def to_jsonl(self, episode: dict) -> str:
        lines = [json.dumps({"episode": episode})]
        for t in range(self.labels.size):
            lines.append(json.dumps({
                "t": t + 1, "label": int(self.labels[t]), "arm": int(self.arms[t]),
                "basis": int(self.basis_ids[t]), "init": bool(self.init_flags[t]),
                "reward": float(self.rewards[t]), "costs": [float(c) for c in self.costs[t]],
            }))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> tuple[dict, "Trace"]:
        rows = [json.loads(line) for line in text.splitlines() if line.strip()]
        header, body = rows[0]["episode"], rows[1:]
        return header, cls(
            np.array([r["label"] for r in body], np.int64), np.array([r["arm"] for r in body], np.int64),
            np.array([r["basis"] for r in body], np.int64), np.array([r["reward"] for r in body]),
            np.array([r["costs"] for r in body]).reshape(len(body), -1),
            np.array([r["init"] for r in body], bool))


@dataclass(eq=False)
class EpisodeResult:
    tau_star: int | None
    total_payoff: float
    rounds: int
    status: str
    consumed: np.ndarray
    consumed_before_stop: np.ndarray
    pulls: np.ndarray
    selections: np.ndarray          # n_x per canonical basis id
    per_basis_consumed: np.ndarray  # b_x per basis id
    init_rounds: int
    swaps: int
    pacing: dict
    violations: dict
    state: EstimatorState = field(repr=False)
    trace: Trace | None = field(default=None, repr=False)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def anomaly(self) -> bool:
        return self.status == STATUS_TEXT[HORIZON_CAP]

    def summary(self) -> dict:
        return {"tau_star": self.tau_star, "total_payoff": self.total_payoff, "rounds": self.rounds,
                "status": self.status, "init_rounds": self.init_rounds, "swaps": self.swaps,
                "violations": self.violations, "pacing": self.pacing, "error": self.error}


def horizon_cap(instance: Instance) -> int:
    """Round cap: T+1 with a time resource, else 10 * sum(B(i)) / (min positive mean cost)."""
    if instance.time_is_resource:
        return int(math.floor(instance.scale)) + 1
    return int(math.ceil(10.0 * instance.budgets.sum() / min_positive_cost(instance)))


def run_episode(instance: Instance, config: PolicyConfig, seed: int, *, assert_level: str = "invariants",
                trace: bool = False, xi_static=None, cap_rounds: int | None = None) -> EpisodeResult:
    """One episode: initialization, then Step-Simplex + Step-Load-Balance until stopping."""
    if config.kind == "static-lp" and xi_static is None:
        xi_static = oracle.analyze(instance).optimal.xi
    policy = Policy(config, instance, xi_static=xi_static, assert_level=assert_level)
    state = policy.fresh_state()
    C = instance.n_resources
    cap = horizon_cap(instance) if cap_rounds is None else int(cap_rounds)
    L = cap if trace else 0
    tr = (np.zeros(L, np.int64), np.zeros(L, np.int64), np.zeros(L, np.int64), np.zeros((L, C + 1)),
          np.zeros(L, np.bool_))
    tau, payoff, t, status, consumed, before = episode_loop(
        instance.encode(), policy.params, state.as_tuple(), policy.work, np.uint64(seed), cap, *tr)
    trace_obj = None
    if trace:
        n = min(t if tau > 0 else t - 1, L)
        trace_obj = Trace(tr[0][:n], tr[1][:n], tr[2][:n], tr[3][:n, 0], tr[3][:n, 1:], tr[4][:n])
    status = int(status)
    error = None if status in (OK, HORIZON_CAP) else STATUS_TEXT[status]
    pacing = {"emitted": int(state.pacing[0]),
              "mean_delta": float(state.pacing[1] / state.pacing[0]) if state.pacing[0] else 0.0,
              "max_delta": float(state.pacing[2])}
    return EpisodeResult(
        tau_star=int(tau) if tau > 0 else None, total_payoff=float(payoff), rounds=int(t),
        status=STATUS_TEXT[status], consumed=consumed, consumed_before_stop=before, pulls=state.pulls.copy(),
        selections=state.n_x.copy(), per_basis_consumed=state.b_x.copy(), init_rounds=state.init_rounds,
        swaps=int(state.swaps.sum()), pacing=pacing,
        violations={n: int(v) for n, v in zip(VIOLATION_NAMES, state.violations) if v},
        state=state, trace=trace_obj, error=error)


# ------------------------------------------------------------------ configs

def _arm_from_spec(a: dict) -> ArmModel:
    kind = a.get("kind", "bernoulli")
    if kind == "bernoulli":
        return ArmModel.bernoulli(a["reward"], a["costs"], bool(a.get("coupled", False)))
    if kind == "deterministic":
        return ArmModel.deterministic(a["reward"], a["costs"], bool(a.get("reward_fixed", False)))
    if kind == "tabular":
        return ArmModel.tabular(a["outcomes"], a["probs"])
    raise ConfigError(f"unknown arm kind {kind!r} (bernoulli, deterministic, tabular)")


def instance_from_spec(spec: dict, scale: float) -> Instance:
    """Instance from a config mapping: a built-in ``scenario``, per-arm ``arms``, or mean tables."""
    spec = dict(spec)
    try:
        if "scenario" in spec:
            params = dict(spec.get("params") or {})
            params["scale"] = scale
            return make_scenario(spec["scenario"], params)
        time = bool(spec.get("time_is_resource", False))
        if "arms" in spec:
            arms = tuple(_arm_from_spec(dict(a)) for a in spec["arms"])
            C = len(spec["budget_ratios"])
            tag = spec.get("case_tag") or ("case2" if all(a.deterministic_costs for a in arms)
                                           else "case1" if C == 1 else "case3" if time and C == 2 else "case4")
            return Instance(arms, spec["budget_ratios"], scale, time, tag, name=spec.get("name", "custom"))
        return make_tabular(spec["mean_rewards"], spec["mean_costs"], spec["budget_ratios"], scale,
                            time_is_resource=time, case_tag=spec.get("case_tag"),
                            kind=spec.get("kind", "bernoulli-joint"), coupled=bool(spec.get("coupled", False)),
                            reward_fixed=bool(spec.get("reward_fixed", False)), name=spec.get("name", "tabular"))
    except KeyError as exc:
        raise ConfigError(f"instance spec missing {exc}") from exc
    except (ScenarioError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ExperimentConfig:
    instance: dict
    policies: tuple[dict, ...]
    b_grid: tuple[float, ...]
    replications: int
    seed: int = 0
    assert_level: str = "invariants"
    output: str | None = None
    trace_dir: str | None = None
    epsilon: float | None = None
    name: str = "experiment"

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        grid = [float(b) for b in self.b_grid]
        if not grid or any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])) or grid[0] <= 0:
            raise ConfigError(f"b_grid must be positive and strictly increasing: {grid}")
        object.__setattr__(self, "b_grid", tuple(grid))
        if self.assert_level not in ASSERT_LEVELS:
            raise ConfigError(f"assert level must be one of {ASSERT_LEVELS}")
        if not self.policies:
            raise ConfigError("at least one policy is required")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config must be a mapping")
        if d.get("spec_version") != SPEC_VERSION:
            raise ConfigError(f"spec_version must be {SPEC_VERSION}, got {d.get('spec_version')!r}")
        required = ("instance", "policies", "b_grid", "replications")
        missing = [k for k in required if k not in d]
        if missing:
            raise ConfigError(f"missing keys: {missing}")
        extra = set(d) - set(required) - {"spec_version", "seed", "assert_level", "output", "trace_dir",
                                          "epsilon", "name"}
        if extra:
            raise ConfigError(f"unknown keys: {sorted(extra)}")
        try:
            return cls(instance=dict(d["instance"]), policies=tuple(dict(p) for p in d["policies"]),
                       b_grid=tuple(d["b_grid"]), replications=int(d["replications"]),
                       seed=int(d.get("seed", 0)), assert_level=d.get("assert_level", "invariants"),
                       output=d.get("output"), trace_dir=d.get("trace_dir"), epsilon=d.get("epsilon"),
                       name=d.get("name", "experiment"))
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        cfg = cls.from_dict(data)
        base = Path(path).parent
        for key in ("output", "trace_dir"):
            val = getattr(cfg, key)
            if val is not None and not os.path.isabs(val):
                object.__setattr__(cfg, key, str(base / val))
        return cfg

    def to_dict(self) -> dict:
        return {"spec_version": SPEC_VERSION, "name": self.name, "instance": self.instance,
                "policies": list(self.policies), "b_grid": list(self.b_grid), "replications": self.replications,
                "seed": self.seed, "assert_level": self.assert_level, "output": self.output,
                "trace_dir": self.trace_dir, "epsilon": self.epsilon}

    def build_instance(self, scale: float | None = None) -> Instance:
        return instance_from_spec(self.instance, float(scale if scale is not None else self.b_grid[0]))

    def build_policies(self) -> list[PolicyConfig]:
        C = self.build_instance().n_resources
        try:
            return [PolicyConfig.from_dict(p, C) for p in self.policies]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad policy: {exc}") from exc


# ------------------------------------------------------------------- sweeps

def cell_seed(master: int, policy_idx: int, b_idx: int, rep: int) -> int:
    """seed = hash64(master, policy index, B index, replication index)."""
    return hash64(master, policy_idx, b_idx, rep)


@dataclass(frozen=True, eq=False)
class CellBatch:
    policy_idx: int
    b_idx: int
    scale: float
    taus: np.ndarray
    payoffs: np.ndarray
    statuses: tuple[str, ...]
    errors: tuple[str | None, ...]
    violations: dict
    extra: dict


@dataclass(frozen=True, eq=False)
class SweepResult:
    config: ExperimentConfig
    policy_names: tuple[str, ...]
    rows: tuple[dict, ...]
    growth: dict
    batches: tuple[CellBatch, ...]
    failures: tuple[str, ...]

    def csv_text(self) -> str:
        return rows_to_csv(self.rows)


def _run_batch(args) -> CellBatch:
    cfg, p_idx, b_idx, trace_dir = args
    scale = cfg.b_grid[b_idx]
    instance = cfg.build_instance(scale)
    policy = cfg.build_policies()[p_idx]
    xi_static = oracle.analyze(instance).optimal.xi if policy.kind == "static-lp" else None
    taus, pays, statuses, errors = [], [], [], []
    viol: dict = {}
    swaps = init = 0
    for rep in range(cfg.replications):
        seed = cell_seed(cfg.seed, p_idx, b_idx, rep)
        ep = run_episode(instance, policy, seed, assert_level=cfg.assert_level,
                         trace=trace_dir is not None, xi_static=xi_static)
        if trace_dir is not None:
            path = Path(trace_dir) / f"p{p_idx}_b{b_idx}_r{rep}.jsonl"
            path.parent.mkdir(parents=True, exist_ok=True)
            header = {"policy": p_idx, "b_index": b_idx, "rep": rep, "seed": seed, **ep.summary()}
            path.write_text(ep.trace.to_jsonl(header))
        tau = ep.tau_star if ep.tau_star is not None else ep.rounds
        taus.append(tau)
        pays.append(ep.total_payoff)
        statuses.append(ep.status)
        errors.append(ep.error)
        for k, v in ep.violations.items():
            viol[k] = viol.get(k, 0) + v
        swaps += ep.swaps
        init += ep.init_rounds
    return CellBatch(p_idx, b_idx, scale, np.array(taus, float), np.array(pays), tuple(statuses), tuple(errors),
                     viol, {"swaps": swaps, "init_rounds": init})


def run_sweep(config: ExperimentConfig, jobs: int = 1) -> SweepResult:
    """All (policy, B, replication) cells, aggregated per (policy, B)."""
    policies = config.build_policies()
    tasks = [(config, p, b, config.trace_dir) for p in range(len(policies)) for b in range(len(config.b_grid))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_batch, tasks))
    else:
        batches = [_run_batch(t) for t in tasks]
    rows, failures, growth = [], [], {}
    curves: dict[int, dict] = {}
    for batch in batches:
        name = policies[batch.policy_idx].name
        instance = config.build_instance(batch.scale)
        good = np.array([e is None for e in batch.errors])
        for rep, err in enumerate(batch.errors):
            if err is not None:
                failures.append(f"{name} B={batch.scale:g} rep={rep}: {err}")
        if not good.any():
            continue
        est = oracle.regret_report(list(zip(batch.taus[good], batch.payoffs[good])), instance)
        rows.append({
            "policy_id": name, "B": batch.scale, "reps": int(good.sum()),
            "mean_payoff": est.mean_realized_payoff, "payoff_ci": est.ci_halfwidth,
            "regret_ub": est.pseudo_regret_ub, "regret_ci": est.ci_halfwidth, "mean_tau": est.mean_tau,
            "tau_bound": est.tau_bound, "ln_ratio": est.pseudo_regret_ub / math.log(batch.scale),
            "sqrt_ratio": est.pseudo_regret_ub / math.sqrt(batch.scale),
        })
        curves.setdefault(batch.policy_idx, {})[batch.scale] = est.pseudo_regret_ub
    for p_idx, curve in curves.items():
        if len(curve) >= 3:
            growth[policies[p_idx].name] = oracle.growth_diagnostics(curve)
    result = SweepResult(config, tuple(p.name for p in policies), tuple(rows), growth, tuple(batches),
                         tuple(failures))
    if config.output:
        Path(config.output).parent.mkdir(parents=True, exist_ok=True)
        Path(config.output).write_text(result.csv_text())
    return result


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else format(float(v), ".17g")
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in CSV_COLUMNS])
    return buf.getvalue()
