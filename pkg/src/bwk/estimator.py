"""Online statistics for UCB-Simplex.

All state lives in flat numpy arrays so the jitted episode loop and the
Python API update exactly the same memory with exactly the same code.

Per-basis counters are indexed by the canonical basis id of
:func:`bwk.lp.basis_table` and by an *action label*: ``0..K-1`` are real
arms, ``K..2K-1`` are unit-cost shadow twins, ``2K`` is the skip action.
A dense table replaces a hash map: at K <= ~10 and C <= ~5 it is small, and
:meth:`EstimatorState.basis_stats` exposes only the bases actually selected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .lp import basis_table

# Indices into EstimatorState.violations
V_BAND, V_PACING, V_CONSERVATION, V_PACING_XI, V_PARANOID = range(5)
# Indices into EstimatorState.scalars
S_RHO, S_INIT_ROUNDS, S_ROUND, S_SELECTIONS = range(4)
# Indices into EstimatorState.pacing
P_EMITTED, P_DELTA_SUM, P_DELTA_MAX = range(3)


class UnpulledArmError(ValueError):
    """Confidence radius requested for an arm with no samples."""


@dataclass(frozen=True)
class ArmStats:
    pulls: int
    mean_reward: float
    mean_costs: np.ndarray


@dataclass(frozen=True)
class BasisStats:
    selections: int
    per_arm_pulls: dict
    consumed: np.ndarray
    swaps: int


@dataclass(eq=False)
class EstimatorState:
    pulls: np.ndarray         # (K,) int64
    mean_r: np.ndarray        # (K,)
    mean_c: np.ndarray        # (K, C)
    n_x: np.ndarray           # (NB,) int64
    n_xk: np.ndarray          # (NB, 2K+1) int64
    b_x: np.ndarray           # (NB, C)
    frozen: np.ndarray        # (NB,) int64, 1 once xi of the basis is frozen
    xi_frozen: np.ndarray     # (NB, K)
    swaps: np.ndarray         # (NB,) int64
    last_role: np.ndarray     # (NB,) int64, label that held the high-cost role
    init_pulls: np.ndarray    # (K,) int64
    saw_cost: np.ndarray      # (K,) int64
    scalars: np.ndarray       # int64: rho, init rounds, last round, selections
    violations: np.ndarray    # int64 counters, see V_*
    pacing: np.ndarray        # float: emitted, sum delta*, max delta*

    @classmethod
    def fresh(cls, K: int, C: int) -> "EstimatorState":
        NB = len(basis_table(K, C))
        return cls(
            pulls=np.zeros(K, np.int64), mean_r=np.zeros(K), mean_c=np.zeros((K, C)),
            n_x=np.zeros(NB, np.int64), n_xk=np.zeros((NB, 2 * K + 1), np.int64),
            b_x=np.zeros((NB, C)), frozen=np.zeros(NB, np.int64), xi_frozen=np.zeros((NB, K)),
            swaps=np.zeros(NB, np.int64), last_role=np.full(NB, -1, np.int64),
            init_pulls=np.zeros(K, np.int64), saw_cost=np.zeros(K, np.int64),
            scalars=np.zeros(4, np.int64), violations=np.zeros(5, np.int64), pacing=np.zeros(3),
        )

    def as_tuple(self):
        return (self.pulls, self.mean_r, self.mean_c, self.n_x, self.n_xk, self.b_x, self.frozen,
                self.xi_frozen, self.swaps, self.last_role, self.init_pulls, self.saw_cost,
                self.scalars, self.violations, self.pacing)

    @property
    def n_arms(self) -> int:
        return self.pulls.size

    @property
    def n_resources(self) -> int:
        return self.mean_c.shape[1]

    @property
    def init_rounds(self) -> int:
        return int(self.scalars[S_INIT_ROUNDS])

    def arm_stats(self, k: int) -> ArmStats:
        return ArmStats(int(self.pulls[k]), float(self.mean_r[k]), self.mean_c[k].copy())

    def basis_stats(self) -> dict:
        """Selected bases only, keyed by PseudoBasis."""
        tab = basis_table(self.n_arms, self.n_resources)
        out = {}
        for j in np.flatnonzero(self.n_x):
            labels = np.flatnonzero(self.n_xk[j])
            out[tab.bases[j]] = BasisStats(int(self.n_x[j]), {int(a): int(self.n_xk[j, a]) for a in labels},
                                           self.b_x[j].copy(), int(self.swaps[j]))
        return out


@njit(cache=True)
def record_obs(st, label, arm, basis_id, reward, costs, is_init):
    """Fold one observation into the statistics.

    ``arm`` is the real arm the environment saw (-1 for a skip), ``label``
    the action label credited to the basis, ``basis_id`` -1 outside the
    Step-Simplex phase.
    """
    (pulls, mean_r, mean_c, n_x, n_xk, b_x, frozen, xi_frozen, swaps, last_role,
     init_pulls, saw_cost, scalars, violations, pacing) = st
    C = costs.shape[0]
    if arm >= 0:
        pulls[arm] += 1
        n = pulls[arm]
        mean_r[arm] += (reward - mean_r[arm]) / n
        for i in range(C):
            mean_c[arm, i] += (costs[i] - mean_c[arm, i]) / n
    if is_init:
        if arm >= 0:
            init_pulls[arm] += 1
            for i in range(C):
                if costs[i] > 0.0:
                    saw_cost[arm] = 1
        scalars[1] += 1
    elif basis_id >= 0:
        n_x[basis_id] += 1
        n_xk[basis_id, label] += 1
        for i in range(C):
            b_x[basis_id, i] += costs[i]
        scalars[3] += 1


@njit(cache=True)
def radius_value(n, t):
    return math.sqrt(2.0 * math.log(t) / n)


def radius(state: EstimatorState, arm: int, t: int) -> float:
    """Confidence radius sqrt(2 ln t / n_k) with no cap."""
    n = int(state.pulls[arm])
    if n <= 0:
        raise UnpulledArmError(f"arm {arm} has not been pulled")
    if t < 1:
        raise ValueError(f"round must be >= 1, got {t}")
    return float(radius_value(n, t))


def record(state: EstimatorState, t: int, arm: int | None, reward: float, costs, *,
           basis_id: int = -1, label: int | None = None, init: bool = False) -> EstimatorState:
    """Python entry point to :func:`record_obs`; mutates and returns ``state``."""
    K = state.n_arms
    real = -1 if arm is None else int(arm)
    if label is None:
        label = 2 * K if real < 0 else real
    record_obs(state.as_tuple(), int(label), real, int(basis_id), float(reward),
               np.asarray(costs, dtype=np.float64), bool(init))
    state.scalars[S_ROUND] = t
    return state


def replay_statistics(K: int, C: int, arms, labels, basis_ids, rewards, costs, init_flags):
    """Recompute all counters from a raw trace with plain numpy (no incremental updates)."""
    arms = np.asarray(arms)
    rewards = np.asarray(rewards, dtype=np.float64)
    costs = np.asarray(costs, dtype=np.float64).reshape(len(arms), C)
    pulls = np.array([(arms == k).sum() for k in range(K)])
    mean_r = np.array([rewards[arms == k].mean() if pulls[k] else 0.0 for k in range(K)])
    mean_c = np.array([costs[arms == k].mean(axis=0) if pulls[k] else np.zeros(C) for k in range(K)])
    NB = len(basis_table(K, C))
    n_x = np.zeros(NB, np.int64)
    n_xk = np.zeros((NB, 2 * K + 1), np.int64)
    b_x = np.zeros((NB, C))
    main = ~np.asarray(init_flags, dtype=bool) & (np.asarray(basis_ids) >= 0)
    for j in np.unique(np.asarray(basis_ids)[main]):
        sel = main & (np.asarray(basis_ids) == j)
        n_x[j] = sel.sum()
        n_xk[j] = np.bincount(np.asarray(labels)[sel], minlength=2 * K + 1)
        b_x[j] = costs[sel].sum(axis=0)
    return {"pulls": pulls, "mean_r": mean_r, "mean_c": mean_c, "n_x": n_x, "n_xk": n_xk, "b_x": b_x}
