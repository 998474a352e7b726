"""Ground-truth BwK environments.

An :class:`Instance` holds K arm models, budget ratios ``b`` and the scale
``B``; resource ``i`` has budget ``b[i] * B``. When time is a resource it is
the last one and every pull costs exactly one unit of it.

Sampling is done by one jitted routine shared by :func:`step` and the
episode kernel. Scenario arms draw a per-round latent that is common to all
arms (for example the buyer's valuation), so reward and cost of one pull are
functions of the same draw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numba import njit

from .lp import LpProblem
from .rng import STREAM_ARM, STREAM_SHARED, CounterStream, counter_uniform

ARM_KINDS = ("bernoulli-joint", "deterministic-cost", "tabular",
             "pricing", "auction", "procurement", "shelf")
KIND_CODE = {name: i for i, name in enumerate(ARM_KINDS)}
CASE_TAGS = ("case1", "case2", "case3", "case4")
SCENARIOS = ("pricing", "auction", "procurement", "ad-alloc", "sensors", "shelf")

_MAX_SHELF_CUSTOMERS = 64


class ScenarioError(ValueError):
    """Unknown scenario or parameters outside the [0, 1] scaling."""


@dataclass(frozen=True)
class Valuation:
    """Distribution of the shared per-round latent value.

    ``uniform`` on [low, high] or ``discrete`` with finite support.
    """

    kind: str = "uniform"
    low: float = 0.0
    high: float = 1.0
    values: tuple[float, ...] = ()
    probs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "uniform":
            if not 0.0 <= self.low < self.high <= 1.0:
                raise ScenarioError(f"uniform valuation needs 0 <= low < high <= 1, got {self.low}, {self.high}")
        elif self.kind == "discrete":
            v, p = np.asarray(self.values, float), np.asarray(self.probs, float)
            if v.size == 0 or v.shape != p.shape:
                raise ScenarioError("discrete valuation needs matching non-empty values and probs")
            if np.any(v < 0) or np.any(v > 1) or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
                raise ScenarioError("discrete valuation needs values in [0,1] and probabilities summing to 1")
        else:
            raise ScenarioError(f"unknown valuation kind {self.kind!r}")

    @classmethod
    def from_dict(cls, d: dict | None) -> "Valuation":
        if d is None:
            return cls()
        d = dict(d)
        for key in ("values", "probs"):
            if key in d:
                d[key] = tuple(float(x) for x in d[key])
        return cls(**d)

    def prob_at_least(self, x: float) -> float:
        if self.kind == "uniform":
            return float(np.clip((self.high - x) / (self.high - self.low), 0.0, 1.0))
        v, p = np.asarray(self.values), np.asarray(self.probs)
        return float(p[v >= x].sum())

    def prob_at_most(self, x: float) -> float:
        if self.kind == "uniform":
            return float(np.clip((x - self.low) / (self.high - self.low), 0.0, 1.0))
        v, p = np.asarray(self.values), np.asarray(self.probs)
        return float(p[v <= x].sum())

    def partial_mean_below(self, x: float) -> float:
        """E[V * 1{V <= x}]."""
        if self.kind == "uniform":
            top = min(max(x, self.low), self.high)
            return (top**2 - self.low**2) / (2.0 * (self.high - self.low))
        v, p = np.asarray(self.values), np.asarray(self.probs)
        return float((v * p)[v <= x].sum())

    def encode(self):
        if self.kind == "uniform":
            return 0, np.array([self.low, self.high]), np.zeros(1), np.ones(1)
        return 1, np.zeros(2), np.asarray(self.values, float), np.cumsum(self.probs)


@dataclass(frozen=True, eq=False)
class ArmModel:
    """One arm: its kind, exact means and sampler parameters.

    ``mean_costs`` has one entry per resource, including time when present.
    Kind-specific parameters live in ``params``:

    * bernoulli-joint: ``coupled`` (one latent drives reward and costs)
    * deterministic-cost: ``reward_fixed`` (reward equals its mean)
    * tabular: ``outcomes`` (S, 1+C) and ``probs`` (S,)
    * pricing / procurement: ``price``, ``resource``
    * auction: ``bid``, ``resource``
    * shelf: ``prices``, ``customers``, ``capacity``, ``scale``
    """

    kind: str
    mean_reward: float
    mean_costs: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KIND_CODE:
            raise ScenarioError(f"unknown arm kind {self.kind!r}")
        mc = np.array(self.mean_costs, dtype=np.float64).reshape(-1)
        mc.flags.writeable = False
        object.__setattr__(self, "mean_costs", mc)
        if not 0.0 <= self.mean_reward <= 1.0 + 1e-12 or np.any(mc < 0) or np.any(mc > 1 + 1e-12):
            raise ScenarioError(f"means must lie in [0,1]: r={self.mean_reward}, c={mc}")
        if not mc.max() > 0.0:
            raise ScenarioError("every arm needs a positive mean cost on some resource")

    @property
    def deterministic_costs(self) -> bool:
        if self.kind in ("deterministic-cost", "shelf"):
            return True
        if self.kind == "tabular":
            costs = self.params["outcomes"][:, 1:]
            return bool(np.all(costs == costs[0]))
        if self.kind == "bernoulli-joint":
            return bool(np.all((self.mean_costs == 0.0) | (self.mean_costs == 1.0)))
        return False

    @classmethod
    def bernoulli(cls, mean_reward, mean_costs, coupled=False) -> "ArmModel":
        return cls("bernoulli-joint", float(mean_reward), mean_costs, {"coupled": bool(coupled)})

    @classmethod
    def deterministic(cls, mean_reward, costs, reward_fixed=False) -> "ArmModel":
        return cls("deterministic-cost", float(mean_reward), costs, {"reward_fixed": bool(reward_fixed)})

    @classmethod
    def tabular(cls, outcomes, probs) -> "ArmModel":
        out = np.atleast_2d(np.asarray(outcomes, dtype=np.float64))
        p = np.asarray(probs, dtype=np.float64)
        if out.shape[0] != p.size or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ScenarioError("tabular arm needs one probability per outcome, summing to 1")
        if np.any(out < 0) or np.any(out > 1):
            raise ScenarioError("tabular outcomes must lie in [0,1]")
        means = p @ out
        return cls("tabular", float(means[0]), means[1:], {"outcomes": out, "probs": p})


@dataclass(frozen=True, eq=False)
class Instance:
    arms: tuple[ArmModel, ...]
    budget_ratios: np.ndarray
    scale: float
    time_is_resource: bool
    case_tag: str
    valuation: Valuation = field(default_factory=Valuation)
    resource_names: tuple[str, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        arms = tuple(self.arms)
        b = np.array(self.budget_ratios, dtype=np.float64).reshape(-1)
        b.flags.writeable = False
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "budget_ratios", b)
        C = b.size
        if not arms:
            raise ScenarioError("an instance needs at least one arm")
        if any(a.mean_costs.size != C for a in arms):
            raise ScenarioError("every arm needs one mean cost per resource")
        if np.any(b <= 0) or np.any(b > 1):
            raise ScenarioError(f"budget ratios must lie in (0, 1]: {b}")
        if not self.scale > 0:
            raise ScenarioError("scale B must be positive")
        if self.case_tag not in CASE_TAGS:
            raise ScenarioError(f"unknown case tag {self.case_tag!r}")
        if self.time_is_resource:
            if b[-1] != 1.0 or any(a.mean_costs[-1] != 1.0 for a in arms):
                raise ScenarioError("time must be the last resource with ratio 1 and unit cost")
        if self.case_tag == "case2" and not all(a.deterministic_costs for a in arms):
            raise ScenarioError("case2 requires deterministic costs")
        if self.case_tag == "case3" and not (C == 2 and self.time_is_resource):
            raise ScenarioError("case3 requires C = 2 with time as resource 2")
        if self.case_tag == "case4" and not self.time_is_resource:
            raise ScenarioError("case4 requires time as the last resource")
        if not self.resource_names:
            names = [f"r{i}" for i in range(C)]
            if self.time_is_resource:
                names[-1] = "time"
            object.__setattr__(self, "resource_names", tuple(names))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def n_resources(self) -> int:
        return self.budget_ratios.size

    @property
    def budgets(self) -> np.ndarray:
        return self.budget_ratios * self.scale

    @property
    def horizon(self) -> float | None:
        return float(self.scale) if self.time_is_resource else None

    @property
    def mean_rewards(self) -> np.ndarray:
        return np.array([a.mean_reward for a in self.arms])

    @property
    def mean_cost_matrix(self) -> np.ndarray:
        """C x K matrix of mean costs."""
        return np.column_stack([a.mean_costs for a in self.arms])

    def with_scale(self, scale: float) -> "Instance":
        return Instance(self.arms, self.budget_ratios, float(scale), self.time_is_resource,
                        self.case_tag, self.valuation, self.resource_names, self.name)

    def encode(self):
        """Pack the sampler parameters into arrays for the jitted sampler."""
        cached = self.__dict__.get("_encoded")
        if cached is None:
            cached = _encode(self)
            object.__setattr__(self, "_encoded", cached)
        return cached


@dataclass(frozen=True)
class Observation:
    reward: float
    costs: np.ndarray
    round: int
    payoff: bool = True   # False for the round that triggers stopping and later ones


@dataclass(frozen=True, eq=False)
class EnvState:
    consumed: np.ndarray
    round: int = 1
    terminated: bool = False
    stop_time: int | None = None

    @classmethod
    def fresh(cls, instance: Instance) -> "EnvState":
        return cls(np.zeros(instance.n_resources))


# ------------------------------------------------------------------ sampler

def _encode(inst: Instance):
    K, C = inst.n_arms, inst.n_resources
    kind = np.array([KIND_CODE[a.kind] for a in inst.arms], dtype=np.int64)
    P = 1 + C
    shelf_m = max((len(a.params["prices"]) for a in inst.arms if a.kind == "shelf"), default=0)
    P = max(P, 2 + 3 * shelf_m)
    fp = np.zeros((K, P))
    ip = np.zeros((K, 2), dtype=np.int64)
    S = max((a.params["probs"].size for a in inst.arms if a.kind == "tabular"), default=1)
    tab = np.zeros((K, S, 1 + C))
    tab_cum = np.ones((K, S))
    n_out = np.ones(K, dtype=np.int64)
    for k, a in enumerate(inst.arms):
        if a.kind in ("bernoulli-joint", "deterministic-cost"):
            fp[k, 0] = a.mean_reward
            fp[k, 1:1 + C] = a.mean_costs
            ip[k, 0] = int(a.params.get("coupled", a.params.get("reward_fixed", False)))
        elif a.kind == "tabular":
            s = a.params["probs"].size
            tab[k, :s] = a.params["outcomes"]
            tab_cum[k, :s] = np.cumsum(a.params["probs"])
            tab_cum[k, s - 1:] = 1.0
            n_out[k] = s
        elif a.kind in ("pricing", "procurement"):
            fp[k, 0] = a.params["price"]
            ip[k, 0] = a.params["resource"]
        elif a.kind == "auction":
            fp[k, 0] = a.params["bid"]
            ip[k, 0] = a.params["resource"]
        elif a.kind == "shelf":
            m = len(a.params["prices"])
            ip[k, 0] = m
            fp[k, 0] = a.params["scale"]
            fp[k, 1:1 + m] = a.params["prices"]
            fp[k, 1 + m:1 + 2 * m] = a.params["capacity"]
            fp[k, 1 + 2 * m:1 + 3 * m] = a.params["customers"]
    dk, dpar, dvals, dcum = inst.valuation.encode()
    time_col = C - 1 if inst.time_is_resource else -1
    return (kind, fp, ip, tab, tab_cum, n_out, np.int64(dk), dpar,
            np.ascontiguousarray(dvals, float), np.ascontiguousarray(dcum, float), np.int64(time_col))


@njit(cache=True)
def _quantile(dk, dpar, dvals, dcum, u):
    if dk == 0:
        return dpar[0] + (dpar[1] - dpar[0]) * u
    for j in range(dvals.shape[0]):
        if u < dcum[j]:
            return dvals[j]
    return dvals[dvals.shape[0] - 1]


@njit(cache=True)
def sample_arm(enc, seed, t, k, out):
    """Draw (reward, cost_0..cost_{C-1}) of arm ``k`` at round ``t`` into ``out``."""
    kind, fp, ip, tab, tab_cum, n_out, dk, dpar, dvals, dcum, time_col = enc
    C = out.shape[0] - 1
    for j in range(C + 1):
        out[j] = 0.0
    code = kind[k]
    base = k * 1024
    if code == 0:  # bernoulli-joint
        u0 = counter_uniform(seed, t, STREAM_ARM, base)
        out[0] = 1.0 if u0 < fp[k, 0] else 0.0
        for i in range(C):
            u = u0 if ip[k, 0] == 1 else counter_uniform(seed, t, STREAM_ARM, base + 1 + i)
            out[1 + i] = 1.0 if u < fp[k, 1 + i] else 0.0
    elif code == 1:  # deterministic-cost
        if ip[k, 0] == 1:
            out[0] = fp[k, 0]
        else:
            out[0] = 1.0 if counter_uniform(seed, t, STREAM_ARM, base) < fp[k, 0] else 0.0
        for i in range(C):
            out[1 + i] = fp[k, 1 + i]
    elif code == 2:  # tabular
        u = counter_uniform(seed, t, STREAM_ARM, base)
        s = n_out[k] - 1
        for j in range(n_out[k]):
            if u < tab_cum[k, j]:
                s = j
                break
        for j in range(C + 1):
            out[j] = tab[k, s, j]
    elif code == 3 or code == 5:  # pricing / procurement on a shared valuation
        v = _quantile(dk, dpar, dvals, dcum, counter_uniform(seed, t, STREAM_SHARED, 0))
        p = fp[k, 0]
        if code == 3:
            if p <= v:
                out[0] = p
                out[1 + ip[k, 0]] = 1.0
        else:
            if p >= v:
                out[0] = 1.0
                out[1 + ip[k, 0]] = p
    elif code == 4:  # auction: competing bid m shared, click value uniform
        m = _quantile(dk, dpar, dvals, dcum, counter_uniform(seed, t, STREAM_SHARED, 0))
        if fp[k, 0] >= m:
            out[0] = counter_uniform(seed, t, STREAM_SHARED, 1)
            out[1 + ip[k, 0]] = m
    elif code == 6:  # shelf: customers' valuations shared across arms
        M = ip[k, 0]
        revenue = 0.0
        for m in range(M):
            price = fp[k, 1 + m]
            demand = 0
            for j in range(int(fp[k, 1 + 2 * M + m])):
                if counter_uniform(seed, t, STREAM_SHARED, 2 + m * 64 + j) >= price:
                    demand += 1
            revenue += price * min(demand, fp[k, 1 + M + m])
        out[0] = revenue / fp[k, 0]
        for i in range(C):
            out[1 + i] = 1.0
    if time_col >= 0:
        out[1 + time_col] = 1.0


@njit(cache=True)
def sample_many(enc, seed, k, t0, n, C):
    out = np.empty((n, C + 1))
    buf = np.empty(C + 1)
    for j in range(n):
        sample_arm(enc, seed, t0 + j, k, buf)
        out[j] = buf
    return out


def sample_means(instance: Instance, arm: int, n: int, seed: int = 0) -> np.ndarray:
    """``n`` consecutive-round draws of one arm, shape (n, 1+C)."""
    return sample_many(instance.encode(), np.uint64(seed), arm, 1, n, instance.n_resources)


# --------------------------------------------------------------- stepping

def step(state: EnvState, instance: Instance, arm: int | None, rng: CounterStream
         ) -> tuple[Observation, EnvState]:
    """Pull ``arm`` (``None`` skips the round) and advance the budget ledger.

    The round that first pushes some resource strictly over its budget is the
    stopping time; its observation is returned with ``payoff=False``.
    """
    K, C = instance.n_arms, instance.n_resources
    t = state.round
    out = np.zeros(C + 1)
    if arm is None:
        if instance.time_is_resource:
            out[C] = 1.0
    else:
        if not (isinstance(arm, (int, np.integer)) and 0 <= arm < K):
            raise IndexError(f"invalid arm index {arm!r} for K={K}")
        sample_arm(instance.encode(), np.uint64(rng.seed), t, int(arm), out)
    consumed = state.consumed + out[1:]
    terminated, stop = state.terminated, state.stop_time
    if not terminated and np.any(consumed > instance.budgets):
        terminated, stop = True, t
    obs = Observation(float(out[0]), out[1:].copy(), t, payoff=not terminated)
    return obs, EnvState(consumed, t + 1, terminated, stop)


def true_mean_lp(instance: Instance) -> LpProblem:
    return LpProblem(instance.mean_rewards, instance.mean_cost_matrix, instance.budget_ratios)


def min_positive_cost(instance: Instance) -> float:
    A = instance.mean_cost_matrix
    return float(A[A > 0].min())


# -------------------------------------------------------------- scenarios

def _with_time(costs: list[float], time: bool) -> list[float]:
    return costs + [1.0] if time else costs


def _check_unit(name: str, values) -> list[float]:
    vals = [float(v) for v in np.atleast_1d(values)]
    if any(not 0.0 < v <= 1.0 for v in vals):
        raise ScenarioError(f"{name} must lie in (0, 1]: {vals}")
    return vals


def _default_case(time: bool, C: int) -> str:
    if C == 1:
        return "case1"
    return "case3" if time and C == 2 else "case4"


def make_scenario(name: str, params: dict[str, Any] | None = None) -> Instance:
    """Build one of the built-in application scenarios.

    Common parameters: ``scale`` (B), ``case_tag`` override, ``time``
    (time as a resource). See :data:`SCENARIO_DEFAULTS` for the rest.
    """
    if name not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    p = {**SCENARIO_DEFAULTS[name], **(params or {})}
    return _BUILDERS[name](p)


SCENARIO_DEFAULTS: dict[str, dict[str, Any]] = {
    "pricing": {"prices": [0.3, 0.6], "valuation": None, "budget_ratio": 0.5, "time": True, "scale": 1000},
    "auction": {"bids": [0.4, 0.6, 0.8], "reserve": 0.2, "valuation": None, "budget_ratio": 0.3,
                "time": False, "scale": 1000},
    "procurement": {"prices": [0.3, 0.5, 0.7], "valuation": None, "budget_ratio": 0.2, "time": True,
                    "scale": 1000},
    "ad-alloc": {"prices": [0.5, 0.8], "click_probs": [0.6, 0.3], "budget_ratios": [0.2, 0.15],
                 "time": True, "scale": 1000},
    "sensors": {"costs": [0.6, 0.5, 0.7, 0.4], "reward_probs": [0.9, 0.7, 0.8, 0.5],
                "battery_ratios": [0.2, 0.3, 0.25, 0.15], "scale": 1000},
    "shelf": {"price_grid": [[0.3, 0.5], [0.5, 0.3], [0.6, 0.6]], "capacity": [3, 3], "customers": [5, 5],
              "scale": 1000},
}


def _build_posted(p, kind: str) -> Instance:
    prices = _check_unit("prices", p["prices"])
    val = Valuation.from_dict(p.get("valuation"))
    time = bool(p["time"])
    arms = []
    for price in prices:
        if kind == "pricing":
            sell = val.prob_at_least(price)
            mr, mc = price * sell, sell
        else:
            sell = val.prob_at_most(price)
            mr, mc = sell, price * sell
        arms.append(ArmModel(kind, mr, _with_time([mc], time), {"price": price, "resource": 0}))
    b = _with_time(_check_unit("budget_ratio", p["budget_ratio"]), time)
    names = ("inventory" if kind == "pricing" else "money",) + (("time",) if time else ())
    return Instance(tuple(arms), b, float(p["scale"]), time, p.get("case_tag") or _default_case(time, len(b)),
                    val, names, kind)


def _build_auction(p) -> Instance:
    bids = _check_unit("bids", p["bids"])
    reserve = float(p["reserve"])
    val = Valuation.from_dict(p.get("valuation") or {"kind": "uniform", "low": reserve, "high": 1.0})
    time = bool(p["time"])
    arms = []
    for bid in bids:
        win = val.prob_at_most(bid)
        arms.append(ArmModel("auction", 0.5 * win, _with_time([val.partial_mean_below(bid)], time),
                             {"bid": bid, "resource": 0}))
    b = _with_time(_check_unit("budget_ratio", p["budget_ratio"]), time)
    names = ("money",) + (("time",) if time else ())
    return Instance(tuple(arms), b, float(p["scale"]), time, p.get("case_tag") or _default_case(time, len(b)),
                    val, names, "auction")


def _build_ad_alloc(p) -> Instance:
    prices = _check_unit("prices", p["prices"])
    clicks = [float(q) for q in p["click_probs"]]
    if len(clicks) != len(prices) or any(not 0 <= q <= 1 for q in clicks):
        raise ScenarioError("click_probs must match prices and lie in [0,1]")
    ratios = _check_unit("budget_ratios", p["budget_ratios"])
    if len(ratios) != len(prices):
        raise ScenarioError("one budget ratio per advertiser")
    K, time = len(prices), bool(p["time"])
    C = K + int(time)
    arms = []
    for k, (price, q) in enumerate(zip(prices, clicks)):
        hit = np.zeros(1 + C)
        hit[0] = price
        hit[1 + k] = price
        miss = np.zeros(1 + C)
        if time:
            hit[-1] = miss[-1] = 1.0
        arms.append(ArmModel.tabular([hit, miss], [q, 1.0 - q]))
    names = tuple(f"advertiser{k}" for k in range(K)) + (("time",) if time else ())
    return Instance(tuple(arms), _with_time(ratios, time), float(p["scale"]), time,
                    p.get("case_tag") or _default_case(time, C), Valuation(), names, "ad-alloc")


def _build_sensors(p) -> Instance:
    costs = _check_unit("costs", p["costs"])
    q = [float(x) for x in p["reward_probs"]]
    ratios = _check_unit("battery_ratios", p["battery_ratios"])
    if not len(costs) == len(q) == len(ratios):
        raise ScenarioError("costs, reward_probs and battery_ratios need one entry per sensor")
    K = len(costs)
    arms = []
    for k in range(K):
        c = [0.0] * K + [1.0]
        c[k] = costs[k]
        arms.append(ArmModel.deterministic(q[k], c))
    names = tuple(f"battery{k}" for k in range(K)) + ("time",)
    return Instance(tuple(arms), ratios + [1.0], float(p["scale"]), True, p.get("case_tag") or "case2",
                    Valuation(), names, "sensors")


def _expected_sales(n: int, sell_prob: float, cap: float) -> float:
    return sum(math.comb(n, d) * sell_prob**d * (1 - sell_prob) ** (n - d) * min(d, cap)
               for d in range(n + 1))


def _build_shelf(p) -> Instance:
    grid = [_check_unit("price_grid row", row) for row in p["price_grid"]]
    cap = [float(c) for c in p["capacity"]]
    cust = [int(n) for n in p["customers"]]
    M = len(cap)
    if any(len(row) != M for row in grid) or len(cust) != M:
        raise ScenarioError("each price vector needs one price per product")
    if any(n < 0 or n > _MAX_SHELF_CUSTOMERS for n in cust):
        raise ScenarioError(f"customers per product must lie in [0, {_MAX_SHELF_CUSTOMERS}]")
    scale = p.get("reward_scale") or sum(max(row[m] for row in grid) * min(cap[m], cust[m]) for m in range(M))
    arms = []
    for row in grid:
        mean = sum(row[m] * _expected_sales(cust[m], 1.0 - row[m], cap[m]) for m in range(M)) / scale
        if mean > 1 + 1e-12:
            raise ScenarioError("reward_scale too small: rewards would exceed 1")
        arms.append(ArmModel("shelf", mean, [1.0],
                             {"prices": row, "capacity": cap, "customers": cust, "scale": float(scale)}))
    return Instance(tuple(arms), [1.0], float(p["scale"]), True, p.get("case_tag") or "case2",
                    Valuation(), ("time",), "shelf")


_BUILDERS = {
    "pricing": lambda p: _build_posted(p, "pricing"),
    "procurement": lambda p: _build_posted(p, "procurement"),
    "auction": _build_auction,
    "ad-alloc": _build_ad_alloc,
    "sensors": _build_sensors,
    "shelf": _build_shelf,
}


def make_tabular(mean_rewards, mean_costs, budget_ratios, scale, *, time_is_resource=False,
                 case_tag=None, kind="bernoulli-joint", coupled=False, reward_fixed=False,
                 name="tabular") -> Instance:
    """Instance from mean tables; ``mean_costs`` is C x K and includes time if present."""
    A = np.atleast_2d(np.asarray(mean_costs, dtype=np.float64))
    r = np.asarray(mean_rewards, dtype=np.float64)
    if kind == "bernoulli-joint":
        arms = tuple(ArmModel.bernoulli(r[k], A[:, k], coupled) for k in range(r.size))
    elif kind == "deterministic-cost":
        arms = tuple(ArmModel.deterministic(r[k], A[:, k], reward_fixed) for k in range(r.size))
    else:
        raise ScenarioError(f"make_tabular supports bernoulli-joint and deterministic-cost, not {kind!r}")
    C = A.shape[0]
    tag = case_tag or ("case2" if kind == "deterministic-cost" else _default_case(time_is_resource, C))
    return Instance(arms, budget_ratios, float(scale), time_is_resource, tag, name=name)
