"""Self-check of the LP machinery against an independent brute-force solver.

The brute force deliberately shares nothing with :mod:`bwk.lp` beyond the
problem data: it walks square subsystems with ``itertools`` and solves them
with ``numpy.linalg.solve``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .lp import LpProblem, det_and_adjugate, optimal_basis, solve_dual


def random_problem(rng: np.random.Generator, max_arms: int = 6, max_resources: int = 3) -> LpProblem:
    K = int(rng.integers(1, max_arms + 1))
    C = int(rng.integers(1, max_resources + 1))
    return LpProblem(rng.uniform(size=K), rng.uniform(size=(C, K)), rng.uniform(0.2, 1.0, size=C))


def brute_force_optimum(objective, matrix, rhs, tol: float = 1e-9) -> float:
    """Best objective over all feasible vertices of {A x <= b, x >= 0}."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    c = np.asarray(objective, dtype=float)
    b = np.asarray(rhs, dtype=float)
    C, K = A.shape
    best = 0.0  # the origin is feasible whenever b > 0
    for d in range(1, min(K, C) + 1):
        for rows in itertools.combinations(range(C), d):
            for cols in itertools.combinations(range(K), d):
                sub = A[np.ix_(rows, cols)]
                if abs(np.linalg.det(sub)) <= 1e-12:
                    continue
                x = np.zeros(K)
                x[list(cols)] = np.linalg.solve(sub, b[list(rows)])
                if x.min() >= -tol and np.all(A @ x <= b + tol):
                    best = max(best, float(c @ x))
    return best


@dataclass
class SelfCheckReport:
    instances: int = 0
    max_oracle_gap: float = 0.0
    max_duality_gap: float = 0.0
    max_adjugate_residual: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def run_selfcheck(n: int = 200, seed: int = 0, tol: float = 1e-9) -> SelfCheckReport:
    rng = np.random.default_rng(seed)
    rep = SelfCheckReport()
    for i in range(n):
        prob = random_problem(rng)
        best, _ = optimal_basis(prob)
        brute = brute_force_optimum(prob.objective_coeffs, prob.constraint_matrix, prob.rhs)
        dual = solve_dual(prob)
        gap, dgap = abs(best.objective - brute), abs(best.objective - dual.value)
        rep.max_oracle_gap = max(rep.max_oracle_gap, gap)
        rep.max_duality_gap = max(rep.max_duality_gap, dgap)
        if gap > tol:
            rep.failures.append(f"instance {i}: enumeration {best.objective!r} vs brute force {brute!r}")
        if dgap > tol:
            rep.failures.append(f"instance {i}: duality gap {dgap:.3g}")
        d = int(rng.integers(1, 6))
        M = rng.uniform(-1, 1, size=(d, d))
        det, adj = det_and_adjugate(M)
        scale = max(1.0, float(np.abs(M).sum(axis=1).max()) ** d)
        res = float(np.abs(M @ adj - det * np.eye(d)).max())
        rep.max_adjugate_residual = max(rep.max_adjugate_residual, res / scale)
        if res > tol * scale:
            rep.failures.append(f"instance {i}: adjugate residual {res:.3g} at d={d}")
        rep.instances += 1
    return rep
