"""Small dense linear programs solved by enumerating pseudo-bases.

The programs here have the form

    maximize  obj . xi   subject to   A xi <= rhs,  xi >= 0

with ``A`` of shape (C, K) and C, K at most a handful. A pseudo-basis is a
pair (arm_set, resource_set) of equal size; its basic solution sets the
resource rows in ``resource_set`` to equality and every arm outside
``arm_set`` to zero. Enumerating all of them gives the optimum together with
the complete table of feasible vertices, which the regret analysis is
indexed by.

Indices are 0-based throughout.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

FEAS_TOL = 1e-9
SING_TOL = 1e-12
DEFAULT_ENUM_CAP = 10**6


class EnumerationCapError(ValueError):
    """More pseudo-bases than the configured cap."""


class UnboundedLPError(RuntimeError):
    """The program has a feasible ray along which the objective grows."""


class DualityGapError(RuntimeError):
    """Primal and dual values disagree; indicates a solver inconsistency."""


@dataclass(frozen=True)
class PseudoBasis:
    arm_set: tuple[int, ...]
    resource_set: tuple[int, ...]

    def __post_init__(self):
        arms, res = tuple(self.arm_set), tuple(self.resource_set)
        if len(arms) != len(res):
            raise ValueError(f"unequal set sizes: {arms} vs {res}")
        for s in (arms, res):
            if any(b <= a for a, b in zip(s, s[1:])):
                raise ValueError(f"indices must be strictly increasing: {s}")
        object.__setattr__(self, "arm_set", arms)
        object.__setattr__(self, "resource_set", res)

    @property
    def size(self) -> int:
        return len(self.arm_set)

    def sort_key(self):
        return (self.resource_set, self.arm_set)

    def __str__(self) -> str:
        return f"({set(self.arm_set) or '{}'}, {set(self.resource_set) or '{}'})"


@dataclass(frozen=True, eq=False)
class BasicSolution:
    basis: PseudoBasis
    xi: np.ndarray
    objective: float
    is_basis: bool
    is_feasible: bool
    det_value: float


@dataclass(frozen=True, eq=False)
class LpProblem:
    """maximize objective_coeffs . xi  s.t.  constraint_matrix xi <= rhs, xi >= 0."""

    objective_coeffs: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    check_rhs: bool = field(default=True, repr=False)

    def __post_init__(self):
        obj = np.ascontiguousarray(self.objective_coeffs, dtype=np.float64).reshape(-1)
        A = np.ascontiguousarray(np.atleast_2d(np.asarray(self.constraint_matrix, dtype=np.float64)))
        rhs = np.ascontiguousarray(self.rhs, dtype=np.float64).reshape(-1)
        if A.shape != (rhs.size, obj.size):
            raise ValueError(f"shape mismatch: A {A.shape}, rhs {rhs.size}, objective {obj.size}")
        if self.check_rhs and not np.all((rhs > 0) & (rhs <= 1)):
            raise ValueError(f"rhs entries must lie in (0, 1]: {rhs}")
        for name, val in (("objective_coeffs", obj), ("constraint_matrix", A), ("rhs", rhs)):
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{name} contains non-finite values")
            val.flags.writeable = False
            object.__setattr__(self, name, val)

    @property
    def n_arms(self) -> int:
        return self.objective_coeffs.size

    @property
    def n_resources(self) -> int:
        return self.rhs.size


@dataclass(frozen=True, eq=False)
class DualSolution:
    zeta: np.ndarray
    value: float


# ---------------------------------------------------------------- enumeration

def count_pseudo_bases(K: int, C: int) -> int:
    return sum(math.comb(K, d) * math.comb(C, d) for d in range(min(K, C) + 1))


def enumerate_pseudo_bases(K: int, C: int, cap: int = DEFAULT_ENUM_CAP) -> list[PseudoBasis]:
    """All equal-size (arm_set, resource_set) pairs in canonical order.

    Canonical order is lexicographic in ``resource_set`` and then ``arm_set``
    (Python tuple order), which puts the empty basis first.
    """
    if K < 1 or C < 1:
        raise ValueError(f"need K >= 1 and C >= 1, got K={K}, C={C}")
    total = count_pseudo_bases(K, C)
    if total > cap:
        raise EnumerationCapError(f"{total} pseudo-bases exceed the cap of {cap}")
    out = [
        PseudoBasis(arms, res)
        for d in range(min(K, C) + 1)
        for res in itertools.combinations(range(C), d)
        for arms in itertools.combinations(range(K), d)
    ]
    out.sort(key=PseudoBasis.sort_key)
    return out


@dataclass(frozen=True, eq=False)
class BasisTable:
    """Canonical bases packed into integer arrays for the jitted kernels."""

    bases: tuple[PseudoBasis, ...]
    arms: np.ndarray      # (NB, D) arm indices, padded with -1
    resources: np.ndarray  # (NB, D)
    sizes: np.ndarray      # (NB,)
    index: dict

    def __len__(self) -> int:
        return len(self.bases)

    def id_of(self, basis: PseudoBasis) -> int:
        return self.index[basis]


@functools.lru_cache(maxsize=64)
def basis_table(K: int, C: int, cap: int = DEFAULT_ENUM_CAP) -> BasisTable:
    bases = enumerate_pseudo_bases(K, C, cap)
    D = max(1, min(K, C))
    arms = np.full((len(bases), D), -1, dtype=np.int64)
    res = np.full((len(bases), D), -1, dtype=np.int64)
    sizes = np.zeros(len(bases), dtype=np.int64)
    for j, b in enumerate(bases):
        sizes[j] = b.size
        arms[j, : b.size] = b.arm_set
        res[j, : b.size] = b.resource_set
    for a in (arms, res, sizes):
        a.flags.writeable = False
    return BasisTable(tuple(bases), arms, res, sizes, {b: j for j, b in enumerate(bases)})


# ------------------------------------------------------------ jitted kernels

@njit(cache=True)
def gauss_solve(M, v, d, x):
    """Solve M[:d,:d] x = v[:d] by partial-pivot elimination, in place.

    Returns the determinant. ``M`` and ``v`` are overwritten. When the
    determinant is at most SING_TOL in magnitude ``x`` is zeroed.
    """
    det = 1.0
    for c in range(d):
        p = c
        best = abs(M[c, c])
        for r in range(c + 1, d):
            if abs(M[r, c]) > best:
                best = abs(M[r, c])
                p = r
        if best == 0.0:
            det = 0.0
            break
        if p != c:
            det = -det
            for j in range(c, d):
                tmp = M[c, j]
                M[c, j] = M[p, j]
                M[p, j] = tmp
            tmp = v[c]
            v[c] = v[p]
            v[p] = tmp
        piv = M[c, c]
        det *= piv
        for r in range(c + 1, d):
            f = M[r, c] / piv
            if f != 0.0:
                for j in range(c + 1, d):
                    M[r, j] -= f * M[c, j]
                v[r] -= f * v[c]
            M[r, c] = 0.0
    if abs(det) <= SING_TOL:
        for j in range(d):
            x[j] = 0.0
        return det
    for r in range(d - 1, -1, -1):
        s = v[r]
        for j in range(r + 1, d):
            s -= M[r, j] * x[j]
        x[r] = s / M[r, r]
    return det


@njit(cache=True)
def solve_one(obj, A, rhs, arms, res, d, xi, Mw, vw, xw):
    """Basic solution of one pseudo-basis into ``xi``.

    Returns (det, is_basis, is_feasible, objective).
    """
    C, K = A.shape
    for k in range(K):
        xi[k] = 0.0
    det = 1.0
    if d > 0:
        for a in range(d):
            vw[a] = rhs[res[a]]
            for b in range(d):
                Mw[a, b] = A[res[a], arms[b]]
        det = gauss_solve(Mw, vw, d, xw)
        if abs(det) <= SING_TOL:
            return det, False, False, 0.0
        for b in range(d):
            xi[arms[b]] = xw[b]
    value = 0.0
    feasible = True
    for k in range(K):
        if xi[k] < -FEAS_TOL:
            feasible = False
        value += obj[k] * xi[k]
    if feasible:
        for i in range(C):
            s = 0.0
            for k in range(K):
                s += A[i, k] * xi[k]
            if s > rhs[i] + FEAS_TOL:
                feasible = False
                break
    return det, True, feasible, value


@njit(cache=True)
def best_basis(obj, A, rhs, arms_tab, res_tab, sizes, xi_best, xi_work, Mw, vw, xw):
    """Index and value of the best feasible basis; ties keep the earliest."""
    K = obj.shape[0]
    best = -1
    best_val = -np.inf
    for j in range(sizes.shape[0]):
        _, _, feas, val = solve_one(obj, A, rhs, arms_tab[j], res_tab[j], sizes[j],
                                    xi_work, Mw, vw, xw)
        if feas and val > best_val:
            best = j
            best_val = val
            for k in range(K):
                xi_best[k] = xi_work[k]
    return best, best_val


@njit(cache=True)
def unbounded_column(obj, A):
    """First arm whose column has no positive cost but a positive objective, else -1."""
    C, K = A.shape
    for k in range(K):
        if obj[k] > 0.0:
            free = True
            for i in range(C):
                if A[i, k] > 0.0:
                    free = False
                    break
            if free:
                return k
    return -1


def _workspace(K: int, C: int):
    D = max(1, min(K, C))
    return np.zeros(K), np.zeros((D, D)), np.zeros(D), np.zeros(D)


# ------------------------------------------------------------- public API

def solve_basic(problem: LpProblem, basis: PseudoBasis) -> BasicSolution:
    K, C = problem.n_arms, problem.n_resources
    if any(k >= K or k < 0 for k in basis.arm_set) or any(i >= C or i < 0 for i in basis.resource_set):
        raise ValueError(f"basis {basis} out of range for K={K}, C={C}")
    xi, Mw, vw, xw = _workspace(K, C)
    arms = np.array(basis.arm_set + (0,), dtype=np.int64)
    res = np.array(basis.resource_set + (0,), dtype=np.int64)
    det, is_basis, feas, val = solve_one(problem.objective_coeffs, problem.constraint_matrix,
                                         problem.rhs, arms, res, basis.size, xi, Mw, vw, xw)
    xi.flags.writeable = False
    return BasicSolution(basis, xi, float(val), bool(is_basis), bool(feas), float(det))


def all_basic_solutions(problem: LpProblem, cap: int = DEFAULT_ENUM_CAP) -> list[BasicSolution]:
    return [solve_basic(problem, b)
            for b in enumerate_pseudo_bases(problem.n_arms, problem.n_resources, cap)]


def ray_value(A: np.ndarray, obj: np.ndarray) -> float:
    """max obj.d over d >= 0, A d <= 0, sum d <= 1; positive iff a ray exists."""
    C, K = A.shape
    A_ray = np.vstack([A, np.ones((1, K))])
    rhs = np.zeros(C + 1)
    rhs[-1] = 1.0
    tab = basis_table(K, C + 1)
    xi_best, xi_work = np.zeros(K), np.zeros(K)
    _, Mw, vw, xw = _workspace(K, C + 1)
    _, val = best_basis(np.asarray(obj, dtype=np.float64), A_ray, rhs, tab.arms, tab.resources,
                        tab.sizes, xi_best, xi_work, Mw, vw, xw)
    return float(val)


def optimal_basis(problem: LpProblem, cap: int = DEFAULT_ENUM_CAP
                  ) -> tuple[BasicSolution, list[BasicSolution]]:
    """Best feasible basic solution and the full list of feasible ones.

    Raises UnboundedLPError when the objective can grow without limit.
    """
    obj, A = problem.objective_coeffs, problem.constraint_matrix
    k = int(unbounded_column(obj, A))
    if k >= 0:
        raise UnboundedLPError(f"arm {k} has positive objective and no positive cost")
    if ray_value(A, obj) > FEAS_TOL:
        raise UnboundedLPError("objective increases along a feasible ray")
    feasible = [s for s in all_basic_solutions(problem, cap) if s.is_feasible]
    best = feasible[0]
    for s in feasible[1:]:
        if s.objective > best.objective:
            best = s
    return best, feasible


def _multipliers(problem: LpProblem, sol: BasicSolution) -> np.ndarray:
    """Simplex multipliers: zeta on C_x solves A_x^T zeta = obj on K_x."""
    zeta = np.zeros(problem.n_resources)
    b = sol.basis
    if b.size:
        A_x = problem.constraint_matrix[np.ix_(b.resource_set, b.arm_set)]
        zeta[list(b.resource_set)] = np.linalg.solve(A_x.T, problem.objective_coeffs[list(b.arm_set)])
    return zeta


def solve_dual(problem: LpProblem, tol: float = FEAS_TOL) -> DualSolution:
    """Dual of the program: min rhs.zeta s.t. A^T zeta >= obj, zeta >= 0.

    Uses the multipliers of an optimal basis. Under degeneracy the first
    optimal basis may carry infeasible multipliers, so every basis attaining
    the optimum is tried in canonical order.
    """
    best, feasible = optimal_basis(problem)
    A, obj = problem.constraint_matrix, problem.objective_coeffs
    for sol in feasible:
        if sol.objective < best.objective - tol:
            continue
        zeta = _multipliers(problem, sol)
        if np.any(zeta < -tol) or np.any(A.T @ zeta < obj - tol):
            continue
        zeta = np.maximum(zeta, 0.0)
        value = float(problem.rhs @ zeta)
        if abs(value - best.objective) > tol:
            raise DualityGapError(f"primal {best.objective!r} vs dual {value!r}")
        return DualSolution(zeta, value)
    raise DualityGapError("no optimal basis has dual-feasible multipliers")


def det_and_adjugate(matrix) -> tuple[float, np.ndarray]:
    """Determinant and adjugate of a small square matrix."""
    M = np.asarray(matrix, dtype=np.float64)
    d = M.shape[0]
    if M.shape != (d, d) or d < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    if d == 1:
        return float(M[0, 0]), np.ones((1, 1))
    if d == 2:
        a, b, c, e = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        return float(a * e - b * c), np.array([[e, -b], [-c, a]])
    if d == 3:
        minor_det = lambda S: S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]  # noqa: E731
    else:
        # LAPACK getrf: partial-pivot elimination with sign tracking.
        minor_det = np.linalg.det
    cof = np.empty((d, d))
    for i in range(d):
        for j in range(d):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * minor_det(minor)
    det = float(M[0] @ cof[0]) if d == 3 else float(np.linalg.det(M))
    return det, cof.T.copy()


@dataclass(frozen=True)
class BasisAudit:
    basis: PseudoBasis
    det_value: float
    is_feasible: bool
    min_basic: float | None      # smallest basic variable (feasible bases)
    min_slack: float | None      # smallest nonbinding slack (feasible bases)
    margin: float                # worst margin against epsilon; >= 0 means pass
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    epsilon: float
    entries: tuple[BasisAudit, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[BasisAudit]:
        return [e for e in self.entries if not e.passed]


def audit_nondegeneracy(mean_costs, rhs, epsilon: float) -> AuditReport:
    """Check epsilon-non-degeneracy of every basis of the mean-cost matrix.

    Each basis needs |det| >= epsilon; a feasible basis additionally needs
    every basic variable and every nonbinding slack to be at least epsilon.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    A = np.atleast_2d(np.asarray(mean_costs, dtype=np.float64))
    rhs = np.asarray(rhs, dtype=np.float64)
    problem = LpProblem(np.zeros(A.shape[1]), A, rhs, check_rhs=False)
    entries = []
    for sol in all_basic_solutions(problem):
        b = sol.basis
        margin = abs(sol.det_value) - epsilon
        min_basic = min_slack = None
        if sol.is_feasible:
            if b.size:
                min_basic = float(min(sol.xi[list(b.arm_set)]))
                margin = min(margin, min_basic - epsilon)
            free_rows = [i for i in range(A.shape[0]) if i not in b.resource_set]
            if free_rows:
                slack = rhs[free_rows] - A[free_rows] @ sol.xi
                min_slack = float(slack.min())
                margin = min(margin, min_slack - epsilon)
        entries.append(BasisAudit(b, sol.det_value, sol.is_feasible, min_basic, min_slack,
                                  float(margin), bool(margin >= -FEAS_TOL)))
    return AuditReport(float(epsilon), tuple(entries))


@njit(cache=True)
def elimination_rank(matrix, tol):
    """Rank by partial-pivot row elimination; pivots at most ``tol`` count as zero."""
    M = matrix.copy()
    R, Cn = M.shape
    rank = 0
    for c in range(Cn):
        if rank == R:
            break
        p = rank
        for r in range(rank + 1, R):
            if abs(M[r, c]) > abs(M[p, c]):
                p = r
        if abs(M[p, c]) <= tol:
            continue
        for j in range(Cn):
            tmp = M[rank, j]
            M[rank, j] = M[p, j]
            M[p, j] = tmp
        for r in range(rank + 1, R):
            f = M[r, c] / M[rank, c]
            for j in range(c, Cn):
                M[r, j] -= f * M[rank, j]
        rank += 1
    return rank


def matrix_rank(M, tol: float = FEAS_TOL) -> int:
    return int(elimination_rank(np.atleast_2d(np.asarray(M, dtype=np.float64)), tol))
