"""UCB-Simplex with its load balancers, and the baseline policies.

Each round of UCB-Simplex builds the optimistic LP

    maximize  sum_k (rbar_k + lam * eps_k) xi_k
    s.t.      sum_k (cbar_k(i) - eta_i * eps_k) xi_k <= b(i),   xi >= 0,

takes its optimal basis x_t, and lets a load balancer pick the arm within
x_t. Balancers:

``alg2``      deterministic pull-ratio tracking with frozen ratios (deterministic costs)
``alg3``      two-arm budget pacing for one resource plus time, with skip/shadow arms
``alg4``      randomized pacing along a direction that corrects over/under-consumption
``alg5-alt``  argmax xi_k / n_k with frozen ratios
``alg6-alt``  argmax xi_k / n_k with the current-round ratios

The per-round logic is jitted and shared by :class:`Policy` (one step at a
time, for inspection) and by the episode loop in :mod:`bwk.harness`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np
from numba import njit

from .estimator import (P_DELTA_MAX, P_DELTA_SUM, P_EMITTED, S_RHO, V_PACING, V_PACING_XI,
                        EstimatorState, record_obs)
from .lp import (FEAS_TOL, SING_TOL, PseudoBasis, basis_table, best_basis, elimination_rank, gauss_solve,
                 unbounded_column)
from .rng import STREAM_POLICY, counter_uniform

POLICY_KINDS = ("ucb-simplex", "ucb1", "static-lp", "adaptive-lp")
BALANCERS = ("alg2", "alg3", "alg4", "alg5-alt", "alg6-alt")
INIT_RULES = ("until-nonzero-cost", "rho-pulls-each", "one-pull-each", "c-init-log-pulls-each", "none")
ASSERT_LEVELS = ("off", "invariants", "paranoid")

# Kernel status codes
OK, HORIZON_CAP, UNBOUNDED, INIT_CAP, SINGULAR_PACING, UNPULLED = range(6)
STATUS_TEXT = {OK: "ok", HORIZON_CAP: "horizon cap reached", UNBOUNDED: "unbounded optimistic LP",
               INIT_CAP: "initialization never observed a nonzero cost",
               SINGULAR_PACING: "singular pacing matrix", UNPULLED: "arm without samples at Step-Simplex"}


class PolicyError(RuntimeError):
    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(STATUS_TEXT.get(status, f"status {status}") + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class PolicyConfig:
    """Policy hyperparameters. Serialized keys match field names except ``lam`` -> ``lambda``."""

    kind: str = "ucb-simplex"
    lam: float = 1.0
    eta: tuple[float, ...] | None = None
    kappa: float | None = None
    epsilon_known: float | None = None
    init_rule: str | None = None  # None: "none" for static-lp, "one-pull-each" otherwise
    balancer: str = "alg2"
    skip_rounds_allowed: bool = True
    tie_break: str = "canonical"
    rho: int | None = None
    c_init: float | None = None
    delta_max: float = 1.0
    gamma: float = 0.0
    init_cap: int = 10**6
    policy_id: str | None = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.balancer not in BALANCERS:
            raise ValueError(f"unknown balancer {self.balancer!r}")
        if self.init_rule is None:
            object.__setattr__(self, "init_rule", "none" if self.kind == "static-lp" else "one-pull-each")
        if self.init_rule not in INIT_RULES:
            raise ValueError(f"unknown init rule {self.init_rule!r}")
        if self.tie_break != "canonical":
            raise ValueError("only canonical tie-breaking is supported")
        if self.kind == "ucb-simplex" and self.lam < 1.0:
            raise ValueError(f"lambda must be >= 1, got {self.lam}")
        if self.eta is not None:
            object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
            if any(e < 0 for e in self.eta):
                raise ValueError("eta must be nonnegative")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.delta_max < 0:
            raise ValueError("delta_max must be nonnegative")

    @property
    def name(self) -> str:
        return self.policy_id or (self.kind if self.kind != "ucb-simplex" else f"ucb-simplex-{self.balancer}")

    @classmethod
    def for_case(cls, case: str, n_resources: int, *, kappa: float | None = None,
                 epsilon: float | None = None, **overrides) -> "PolicyConfig":
        """Case defaults for lambda, eta, initialization and balancer."""
        C = n_resources
        if case == "case1":
            if kappa is None:
                raise ValueError("case1 needs kappa")
            base = dict(lam=1.0 + kappa, eta=(0.0,) * C, init_rule="until-nonzero-cost", balancer="alg2")
        elif case == "case2":
            base = dict(lam=1.0, eta=(0.0,) * C, init_rule="rho-pulls-each", balancer="alg2")
        elif case == "case3":
            if kappa is None:
                raise ValueError("case3 needs kappa")
            base = dict(lam=1.0 + 2.0 * kappa, eta=(1.0, 0.0), init_rule="one-pull-each", balancer="alg3")
        elif case == "case4":
            if epsilon is None:
                raise ValueError("case4 needs epsilon")
            base = dict(lam=1.0 + 2.0 * math.factorial(C + 1) ** 2 / epsilon, eta=(0.0,) * C,
                        init_rule="c-init-log-pulls-each", balancer="alg4", c_init=16.0 / epsilon**2)
        else:
            raise ValueError(f"unknown case {case!r}")
        base.update(kappa=kappa, epsilon_known=epsilon)
        base.update(overrides)
        return cls(**{"kind": "ucb-simplex", **base})

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out["lambda" if f.name == "lam" else f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, d: dict, n_resources: int | None = None) -> "PolicyConfig":
        """Inverse of :meth:`to_dict`. A ``case`` key applies :meth:`for_case` defaults first."""
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known - {"case"}
        if unknown:
            raise ValueError(f"unknown policy keys: {sorted(unknown)}")
        if "eta" in d and d["eta"] is not None:
            d["eta"] = tuple(d["eta"])
        case = d.pop("case", None)
        if case is None:
            return cls(**d)
        if n_resources is None:
            raise ValueError("case defaults need the number of resources")
        kappa = d.pop("kappa", None)
        epsilon = d.pop("epsilon_known", None)
        return cls.for_case(case, n_resources, kappa=kappa, epsilon=epsilon, **d)


@dataclass(frozen=True)
class Action:
    """``label`` is 0..K-1 for real arms, K+k for the shadow of k, 2K for skip."""

    label: int
    payoff_arm: int | None
    n_arms: int

    @property
    def is_skip(self) -> bool:
        return self.payoff_arm is None

    @property
    def is_shadow(self) -> bool:
        return self.n_arms <= self.label < 2 * self.n_arms


@dataclass(frozen=True, eq=False)
class UcbLpSnapshot:
    inflated_rewards: np.ndarray
    deflated_costs: np.ndarray
    chosen_basis: PseudoBasis
    chosen_solution: np.ndarray
    index_parts: tuple[float, float]   # (obj_{x,t}, E_{x,t})
    radii: np.ndarray

    @property
    def index(self) -> float:
        return float(self.inflated_rewards @ self.chosen_solution)


@dataclass(frozen=True, eq=False)
class PacingState:
    direction_vector: np.ndarray
    delta_star: float
    distribution: np.ndarray      # over the basis columns (real arms, then skip if added)
    columns: tuple[int, ...]      # arm per column, -1 for skip


# ------------------------------------------------------------- jitted parts

@njit(cache=True)
def alg2_pick(arms, d, xi, n_x, n_xk_row):
    """Lowest arm with n^x_k <= n_x xi_k / sum(xi); most-behind arm if rounding leaves none."""
    s = 0.0
    for j in range(d):
        s += xi[arms[j]]
    if s <= 0.0:
        return -1
    worst = -1
    worst_gap = np.inf
    for j in range(d):
        k = arms[j]
        target = n_x * xi[k] / s
        if n_xk_row[k] <= target:
            return k
        gap = n_xk_row[k] - target
        if gap < worst_gap:
            worst_gap = gap
            worst = k
    return worst


@njit(cache=True)
def ratio_pick(arms, d, xi, pulls):
    """argmax over the basis of xi_k / n_k, ties to the lowest arm."""
    best = -1
    best_r = -np.inf
    for j in range(d):
        k = arms[j]
        r = xi[k] / pulls[k]
        if r > best_r:
            best_r = r
            best = k
    return best


@njit(cache=True)
def alg3_pick(label_a, label_b, cost_a, cost_b, consumed, n_x, b, skip_label, skip_allowed):
    """Returns (chosen label, label in the high-cost role). ``label_a < label_b``."""
    if cost_a >= cost_b:
        hi, lo = label_a, label_b
    else:
        hi, lo = label_b, label_a
    chosen = hi if consumed <= n_x * b else lo
    if chosen == skip_label and not skip_allowed:
        chosen = lo if chosen == hi else hi
    return chosen, hi


@njit(cache=True)
def alg4_distribution(A, b, arms, res, d, time_col, b_x_row, n_x, delta_max, M, v, p0, dv, pv, cols, rows):
    """Pacing distribution over the basis columns.

    Fills cols/rows (adding a skip column and the time row when time is not
    binding), p0 = basic solution, dv = direction, pv = p0 + delta* dv.
    Returns (number of columns, delta*, status).
    """
    C = A.shape[0]
    nd = d
    has_time = False
    for j in range(d):
        cols[j] = arms[j]
        rows[j] = res[j]
        if res[j] == time_col:
            has_time = True
    if not has_time and time_col >= 0:
        cols[d] = -1
        rows[d] = time_col
        nd = d + 1
    for pass_ in range(2):
        for a in range(nd):
            r = rows[a]
            for j in range(nd):
                if cols[j] >= 0:
                    M[a, j] = A[r, cols[j]]
                else:
                    M[a, j] = 1.0 if r == time_col else 0.0
            if pass_ == 0:
                v[a] = b[r]
            elif r == time_col:
                v[a] = 0.0
            elif b_x_row[r] >= n_x * b[r]:
                v[a] = -1.0
            else:
                v[a] = 1.0
        if pass_ == 0:
            det = gauss_solve(M, v, nd, p0)
            if abs(det) <= SING_TOL:
                return nd, 0.0, SINGULAR_PACING
        else:
            gauss_solve(M, v, nd, dv)
    delta = delta_max
    for j in range(nd):
        if dv[j] < 0.0:
            r = p0[j] / (-dv[j])
            if r < delta:
                delta = r
    for i in range(C):
        bound = False
        for a in range(nd):
            if rows[a] == i:
                bound = True
        if bound:
            continue
        s = 0.0
        h = 0.0
        for j in range(nd):
            if cols[j] >= 0:
                s += A[i, cols[j]] * p0[j]
                h += A[i, cols[j]] * dv[j]
        if h > 0.0:
            r = (b[i] - s) / h
            if r < delta:
                delta = r
    if delta < 0.0:
        delta = 0.0
    for j in range(nd):
        pv[j] = p0[j] + delta * dv[j]
    return nd, delta, OK


@njit(cache=True)
def sample_columns(pv, nd, u):
    total = 0.0
    for j in range(nd):
        if pv[j] > 0.0:
            total += pv[j]
    target = u * total
    acc = 0.0
    last = -1
    for j in range(nd):
        if pv[j] > 0.0:
            acc += pv[j]
            last = j
            if target < acc:
                return j
    return last


@njit(cache=True)
def sample_rates(xi, u):
    """Arm k with probability xi_k, -1 (skip) with the remaining mass."""
    acc = 0.0
    for k in range(xi.shape[0]):
        if xi[k] > 0.0:
            acc += xi[k]
            if u < acc:
                return k
    return -1


@njit(cache=True)
def build_optimistic_lp(st, wk, lam, eta, t):
    pulls, mean_r, mean_c = st[0], st[1], st[2]
    obj, A, eps = wk[0], wk[1], wk[12]
    K = pulls.shape[0]
    C = mean_c.shape[1]
    logt = math.log(t)
    for k in range(K):
        if pulls[k] == 0:
            return False
        e = math.sqrt(2.0 * logt / pulls[k])
        eps[k] = e
        obj[k] = mean_r[k] + lam * e
        for i in range(C):
            A[i, k] = mean_c[k, i] - eta[i] * e
    return True


@njit(cache=True)
def select_step(pp, st, wk, seed, t, consumed):
    """One decision. Returns (label, real arm or -1, basis id or -1, delta*, status)."""
    (kind, bal, lam, eta, skip_allowed, gamma, delta_max, xi_static, b, budgets, horizon,
     time_col, arms_tab, res_tab, sizes, init_rule, init_count, init_cap, rho_cfg, assert_level) = pp
    (pulls, mean_r, mean_c, n_x, n_xk, b_x, frozen, xi_frozen, swaps, last_role,
     init_pulls, saw_cost, scalars, violations, pacing) = st
    (obj, A, xi_best, xi_work, Mw, vw, xw, Mp, vp, p0, dv, pv, eps, cols, rows, rhs) = wk
    K = pulls.shape[0]
    C = mean_c.shape[1]
    skip = 2 * K

    if kind == 1:  # ucb1
        logt = math.log(t)
        best = -1
        best_v = -np.inf
        for k in range(K):
            if pulls[k] == 0:
                return k, k, -1, 0.0, OK
            v = mean_r[k] + math.sqrt(2.0 * logt / pulls[k])
            if v > best_v:
                best_v = v
                best = k
        return best, best, -1, 0.0, OK
    if kind == 2:  # static-lp
        k = sample_rates(xi_static, counter_uniform(seed, t, STREAM_POLICY, 0))
        return (skip if k < 0 else k), k, -1, 0.0, OK
    if kind == 3:  # adaptive-lp
        if not build_optimistic_lp(st, wk, 1.0, eta, t):
            return skip, -1, -1, 0.0, UNPULLED
        remaining_t = horizon - t + 1.0
        for i in range(C):
            if i == time_col:
                rhs[i] = 1.0
                for k in range(K):
                    A[i, k] = 1.0
            else:
                left = budgets[i] - consumed[i]
                if left < 0.0:
                    left = 0.0
                rhs[i] = (1.0 - gamma) * left / remaining_t
        best_basis(obj, A, rhs, arms_tab, res_tab, sizes, xi_best, xi_work, Mw, vw, xw)
        k = sample_rates(xi_best, counter_uniform(seed, t, STREAM_POLICY, 0))
        return (skip if k < 0 else k), k, -1, 0.0, OK

    # ucb-simplex: Step-Simplex
    if not build_optimistic_lp(st, wk, lam, eta, t):
        return skip, -1, -1, 0.0, UNPULLED
    if unbounded_column(obj, A) >= 0:
        return skip, -1, -1, 0.0, UNBOUNDED
    bid, _ = best_basis(obj, A, b, arms_tab, res_tab, sizes, xi_best, xi_work, Mw, vw, xw)
    d = sizes[bid]
    arms = arms_tab[bid]
    res = res_tab[bid]
    if d == 0:
        return skip, -1, bid, 0.0, OK
    if frozen[bid] == 0:
        frozen[bid] = 1
        for k in range(K):
            xi_frozen[bid, k] = xi_best[k]

    # Step-Load-Balance
    if bal == 1:  # alg3: one resource (row 0) plus time (row 1)
        if d == 2:
            la, lb = arms[0], arms[1]
            ca, cb = A[0, la], A[0, lb]
        elif res[0] == 0:
            la, lb = arms[0], skip
            ca, cb = A[0, la], 0.0
        else:
            la, lb = arms[0], K + arms[0]
            ca, cb = A[0, la], 1.0
        chosen, hi = alg3_pick(la, lb, ca, cb, b_x[bid, 0], n_x[bid], b[0], skip, skip_allowed == 1)
        if last_role[bid] >= 0 and last_role[bid] != hi:
            swaps[bid] += 1
        last_role[bid] = hi
        if chosen == skip:
            return skip, -1, bid, 0.0, OK
        return chosen, (chosen if chosen < K else chosen - K), bid, 0.0, OK
    if bal == 2:  # alg4
        nd, delta, status = alg4_distribution(A, b, arms, res, d, time_col, b_x[bid], n_x[bid], delta_max,
                                              Mp, vp, p0, dv, pv, cols, rows)
        if status != OK:
            return skip, -1, bid, 0.0, status
        pacing[P_EMITTED] += 1.0
        pacing[P_DELTA_SUM] += delta
        if delta > pacing[P_DELTA_MAX]:
            pacing[P_DELTA_MAX] = delta
        if assert_level >= 1:
            bad = False
            for j in range(nd):
                if pv[j] < -FEAS_TOL:
                    bad = True
            for i in range(C):
                bound = False
                for a in range(nd):
                    if rows[a] == i:
                        bound = True
                if not bound:
                    s = 0.0
                    for j in range(nd):
                        if cols[j] >= 0:
                            s += A[i, cols[j]] * pv[j]
                    if s > b[i] + FEAS_TOL:
                        bad = True
            if bad:
                violations[V_PACING] += 1
            for j in range(d):
                if abs(p0[j] - xi_best[cols[j]]) > FEAS_TOL:
                    violations[V_PACING_XI] += 1
                    break
        j = sample_columns(pv, nd, counter_uniform(seed, t, STREAM_POLICY, 0))
        k = cols[j]
        return (skip if k < 0 else k), k, bid, delta, OK
    if bal == 0:
        k = alg2_pick(arms, d, xi_frozen[bid], n_x[bid], n_xk[bid])
    elif bal == 3:
        k = ratio_pick(arms, d, xi_frozen[bid], pulls)
    else:
        k = ratio_pick(arms, d, xi_best, pulls)
    return (skip if k < 0 else k), k, bid, 0.0, OK


@njit(cache=True)
def init_next(pp, st):
    """Next initialization arm, -1 when done, -2 when a per-arm cap is hit."""
    init_rule, init_count, init_cap, rho_cfg = pp[15], pp[16], pp[17], pp[18]
    pulls, mean_c, init_pulls, saw_cost, scalars = st[0], st[2], st[10], st[11], st[12]
    K = init_pulls.shape[0]
    if init_rule == 4:
        return -1
    if init_rule == 0:
        best = -1
        for k in range(K):
            if saw_cost[k] == 0 and (best < 0 or init_pulls[k] < init_pulls[best]):
                best = k
        if best >= 0 and init_pulls[best] >= init_cap:
            return -2
        return best
    target = 1
    if init_rule == 1:
        for k in range(K):
            if init_pulls[k] == 0:
                return k
        if scalars[S_RHO] <= 0:
            scalars[S_RHO] = rho_cfg if rho_cfg > 0 else elimination_rank(mean_c, FEAS_TOL)
        target = scalars[S_RHO]
    elif init_rule == 3:
        target = init_count
    best = 0
    for k in range(1, K):
        if init_pulls[k] < init_pulls[best]:
            best = k
    return best if init_pulls[best] < target else -1


# ----------------------------------------------------------- Python facade

_KIND = {k: i for i, k in enumerate(POLICY_KINDS)}
_BAL = {k: i for i, k in enumerate(BALANCERS)}
_INIT = {k: i for i, k in enumerate(INIT_RULES)}


def make_workspace(K: int, C: int):
    D = max(1, min(K, C))
    return (np.zeros(K), np.zeros((C, K)), np.zeros(K), np.zeros(K), np.zeros((D, D)), np.zeros(D),
            np.zeros(D), np.zeros((D + 1, D + 1)), np.zeros(D + 1), np.zeros(D + 1), np.zeros(D + 1),
            np.zeros(D + 1), np.zeros(K), np.zeros(D + 1, np.int64), np.zeros(D + 1, np.int64), np.zeros(C))


class Policy:
    """A configured policy bound to the public facts of an instance.

    Only K, C, the budget ratios, budgets and horizon are read from the
    instance; the static-LP baseline additionally receives the clairvoyant
    rates ``xi_static`` from the oracle.
    """

    def __init__(self, config: PolicyConfig, instance, xi_static=None, assert_level: str = "invariants"):
        K, C = instance.n_arms, instance.n_resources
        self.config, self.K, self.C = config, K, C
        if config.eta is not None:
            eta = np.asarray(config.eta, dtype=np.float64)
        elif config.kind == "adaptive-lp":
            eta = np.ones(C)  # lower confidence bounds on costs
        else:
            eta = np.zeros(C)
        if eta.size != C:
            raise ValueError(f"eta needs {C} entries, got {eta.size}")
        if config.kind == "static-lp":
            if xi_static is None:
                raise ValueError("static-lp needs the oracle solution")
            xi_static = np.asarray(xi_static, dtype=np.float64)
        else:
            xi_static = np.zeros(K)
        time_col = C - 1 if instance.time_is_resource else -1
        if config.kind == "adaptive-lp" and time_col < 0:
            raise ValueError("adaptive-lp needs time as a resource")
        if config.balancer == "alg3" and config.kind == "ucb-simplex" and not (C == 2 and time_col == 1):
            raise ValueError("alg3 needs one resource plus time")
        if config.balancer == "alg4" and config.kind == "ucb-simplex" and time_col < 0:
            raise ValueError("alg4 needs time as the last resource")
        init_count = 0
        if config.init_rule == "c-init-log-pulls-each":
            if config.c_init is None or instance.horizon is None:
                raise ValueError("c-init-log-pulls-each needs c_init and a time horizon")
            init_count = int(math.ceil(config.c_init * math.log(instance.horizon)))
        tab = basis_table(K, C)
        self.table = tab
        self.assert_level = ASSERT_LEVELS.index(assert_level)
        self.params = (
            np.int64(_KIND[config.kind]), np.int64(_BAL[config.balancer]), float(config.lam), eta,
            np.int64(config.skip_rounds_allowed), float(config.gamma), float(config.delta_max), xi_static,
            np.asarray(instance.budget_ratios, dtype=np.float64), np.asarray(instance.budgets, dtype=np.float64),
            float(instance.horizon or 0.0), np.int64(time_col), tab.arms, tab.resources, tab.sizes,
            np.int64(_INIT[config.init_rule]), np.int64(init_count), np.int64(config.init_cap),
            np.int64(config.rho or 0), np.int64(self.assert_level),
        )
        self.work = make_workspace(K, C)

    def fresh_state(self) -> EstimatorState:
        return EstimatorState.fresh(self.K, self.C)

    def init_action(self, state: EstimatorState) -> int | None:
        """Next initialization arm, or None once initialization is over."""
        k = int(init_next(self.params, state.as_tuple()))
        if k == -2:
            raise PolicyError(INIT_CAP, f"cap {self.config.init_cap} pulls per arm")
        return None if k < 0 else k

    def select(self, state: EstimatorState, t: int, rng, consumed=None):
        """One main-phase decision: (Action, snapshot or None, basis id, delta*)."""
        consumed = np.zeros(self.C) if consumed is None else np.asarray(consumed, dtype=np.float64)
        label, arm, bid, delta, status = select_step(self.params, state.as_tuple(), self.work,
                                                     np.uint64(rng.seed), t, consumed)
        if status != OK:
            raise PolicyError(int(status))
        action = Action(int(label), None if arm < 0 else int(arm), self.K)
        snap = None
        if self.config.kind == "ucb-simplex":
            obj, A, xi, eps = self.work[0], self.work[1], self.work[2], self.work[12]
            mean_part = float(state.mean_r @ xi)
            snap = UcbLpSnapshot(obj.copy(), A.copy(), self.table.bases[bid], xi.copy(),
                                 (mean_part, float(self.config.lam * (eps @ xi))), eps.copy())
        return action, snap, int(bid), float(delta)

    def observe(self, state: EstimatorState, action: Action, obs, basis_id: int, init: bool = False):
        record_obs(state.as_tuple(), action.label, -1 if action.payoff_arm is None else action.payoff_arm,
                   basis_id, float(obs.reward), np.asarray(obs.costs, dtype=np.float64), init)


def select_action(policy: Policy, state: EstimatorState, t: int, rng, consumed=None):
    """Step-Simplex plus Step-Load-Balance for round ``t``; returns (Action, snapshot)."""
    action, snap, _, _ = policy.select(state, t, rng, consumed)
    return action, snap


def run_init(policy: Policy, env_state, instance, state: EstimatorState, rng):
    """Play the initialization pulls. Returns (rounds used, env state)."""
    from .env import step

    rounds = 0
    while not env_state.terminated:
        k = policy.init_action(state)
        if k is None:
            break
        obs, env_state = step(env_state, instance, k, rng)
        policy.observe(state, Action(k, k, policy.K), obs, -1, init=True)
        rounds += 1
    return rounds, env_state


# Standalone balancers, mainly for inspection and tests.

def _arms(basis: PseudoBasis) -> np.ndarray:
    return np.array(basis.arm_set + (0,), dtype=np.int64)


def balance_alg2(basis: PseudoBasis, xi, n_x: int, per_arm_pulls) -> int:
    xi = np.asarray(xi, dtype=np.float64)
    return int(alg2_pick(_arms(basis), basis.size, xi, n_x, np.asarray(per_arm_pulls, dtype=np.int64)))


def balance_alg3(pair: tuple[int, int], deflated_costs: tuple[float, float], consumed: float, n_x: int,
                 b: float, *, skip_label: int = -1, skip_rounds_allowed: bool = True) -> int:
    """``pair`` lists the two (post-mapping) labels in increasing order."""
    chosen, _ = alg3_pick(pair[0], pair[1], deflated_costs[0], deflated_costs[1], consumed, n_x, b,
                          skip_label, skip_rounds_allowed)
    return int(chosen)


def balance_alg4(basis: PseudoBasis, Abar, b, consumed_x, n_x: int, *, time_col: int | None = None,
                 delta_max: float = 1.0, u: float | None = None):
    """Pacing distribution (and a sampled arm when ``u`` is given)."""
    A = np.atleast_2d(np.asarray(Abar, dtype=np.float64))
    C = A.shape[0]
    time_col = C - 1 if time_col is None else time_col
    D = basis.size + 1
    M, v, p0, dv, pv = np.zeros((D, D)), np.zeros(D), np.zeros(D), np.zeros(D), np.zeros(D)
    cols, rows = np.zeros(D, np.int64), np.zeros(D, np.int64)
    nd, delta, status = alg4_distribution(A, np.asarray(b, dtype=np.float64), _arms(basis),
                                          np.array(basis.resource_set + (0,), dtype=np.int64), basis.size,
                                          time_col, np.asarray(consumed_x, dtype=np.float64), n_x, delta_max,
                                          M, v, p0, dv, pv, cols, rows)
    if status != OK:
        raise PolicyError(int(status))
    e = np.array([0.0 if rows[a] == time_col else (-1.0 if consumed_x[rows[a]] >= n_x * b[rows[a]] else 1.0)
                  for a in range(nd)])
    state = PacingState(e, float(delta), pv[:nd].copy(), tuple(int(c) for c in cols[:nd]))
    arm = None
    if u is not None:
        arm = int(cols[sample_columns(pv, nd, u)])
    return arm, state


def balance_alg5(basis: PseudoBasis, pulls, xi_frozen) -> int:
    return int(ratio_pick(_arms(basis), basis.size, np.asarray(xi_frozen, float), np.asarray(pulls, float)))


def balance_alg6(basis: PseudoBasis, pulls, xi_current) -> int:
    return int(ratio_pick(_arms(basis), basis.size, np.asarray(xi_current, float), np.asarray(pulls, float)))


def baseline_static_lp(xi_star, u: float) -> int | None:
    k = int(sample_rates(np.asarray(xi_star, dtype=np.float64), u))
    return None if k < 0 else k


def baseline_ucb1(mean_rewards, pulls, t: int) -> int:
    idx = np.asarray(mean_rewards, float) + np.sqrt(2.0 * math.log(t) / np.asarray(pulls, float))
    return int(np.argmax(idx))
