import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from bwk.lp import (DualityGapError, EnumerationCapError, LpProblem, PseudoBasis, UnboundedLPError,
                    audit_nondegeneracy, count_pseudo_bases, det_and_adjugate, enumerate_pseudo_bases,
                    matrix_rank, optimal_basis, solve_basic, solve_dual)
from bwk.selfcheck import run_selfcheck

from conftest import vertex_oracle

PB = PseudoBasis


# ---------------------------------------------------------------- enumeration

def test_enumeration_single_arm_single_resource():
    assert enumerate_pseudo_bases(1, 1) == [PB((), ()), PB((0,), (0,))]


def test_enumeration_two_arms_one_resource():
    assert enumerate_pseudo_bases(2, 1) == [PB((), ()), PB((0,), (0,)), PB((1,), (0,))]


def test_enumeration_count_two_by_two_matches_subset_oracle():
    bases = enumerate_pseudo_bases(2, 2)
    brute = {(a, r) for d in range(3) for a in itertools.combinations(range(2), d)
             for r in itertools.combinations(range(2), d)}
    assert len(bases) == len(brute) == 6
    assert {(b.arm_set, b.resource_set) for b in bases} == brute


def test_enumeration_order_is_resource_then_arm():
    bases = enumerate_pseudo_bases(3, 2)
    keys = [(b.resource_set, b.arm_set) for b in bases]
    assert keys == sorted(keys)
    assert bases[0] == PB((), ())


@pytest.mark.parametrize("K,C", [(1, 1), (4, 2), (6, 3), (5, 5)])
def test_enumeration_count_formula(K, C):
    assert len(enumerate_pseudo_bases(K, C)) == count_pseudo_bases(K, C)
    assert len(set(enumerate_pseudo_bases(K, C))) == count_pseudo_bases(K, C)


def test_enumeration_cap():
    with pytest.raises(EnumerationCapError):
        enumerate_pseudo_bases(20, 5, cap=1000)


def test_enumeration_rejects_empty_dims():
    with pytest.raises(ValueError):
        enumerate_pseudo_bases(0, 1)


def test_pseudo_basis_validation():
    with pytest.raises(ValueError):
        PB((0, 1), (0,))
    with pytest.raises(ValueError):
        PB((1, 0), (0, 1))


# --------------------------------------------------------------- basic solves

def test_solve_basic_time_only():
    prob = LpProblem([0.9, 0.5], [[1.0, 1.0]], [1.0])
    sol = solve_basic(prob, PB((0,), (0,)))
    np.testing.assert_allclose(sol.xi, [1.0, 0.0])
    assert sol.objective == pytest.approx(0.9)
    assert sol.is_basis and sol.is_feasible


def test_solve_basic_two_by_two(two_arm_lp):
    sol = solve_basic(two_arm_lp, PB((0, 1), (0, 1)))
    np.testing.assert_allclose(sol.xi, [0.5, 0.5], atol=1e-12)
    assert sol.det_value == pytest.approx(0.6)
    assert sol.is_feasible


def test_solve_basic_empty_basis(two_arm_lp):
    sol = solve_basic(two_arm_lp, PB((), ()))
    assert sol.objective == 0.0 and sol.is_feasible and not sol.xi.any()


def test_solve_basic_singular_reports_not_thrown():
    prob = LpProblem([0.5, 0.5], [[0.5, 0.5], [1.0, 1.0]], [0.5, 1.0])
    sol = solve_basic(prob, PB((0, 1), (0, 1)))
    assert not sol.is_basis and not sol.is_feasible
    assert not sol.xi.any()


def test_solve_basic_infeasible_flagged(two_arm_lp):
    # arm 0 alone on the time row: xi = 1 overspends resource 0 (0.8 > 0.5)
    sol = solve_basic(two_arm_lp, PB((0,), (1,)))
    assert sol.is_basis and not sol.is_feasible


def test_solve_basic_out_of_range(two_arm_lp):
    with pytest.raises(ValueError):
        solve_basic(two_arm_lp, PB((2,), (0,)))


def test_lp_problem_validates_rhs():
    with pytest.raises(ValueError):
        LpProblem([1.0], [[1.0]], [0.0])
    with pytest.raises(ValueError):
        LpProblem([1.0], [[1.0]], [1.5])
    with pytest.raises(ValueError):
        LpProblem([1.0, 2.0], [[1.0]], [1.0])


# ------------------------------------------------------------ optimal basis

def test_optimal_two_by_two(two_arm_lp):
    best, feasible = optimal_basis(two_arm_lp)
    assert best.objective == pytest.approx(0.6, abs=1e-12)
    np.testing.assert_allclose(best.xi, [0.5, 0.5], atol=1e-12)
    assert best.basis == PB((0, 1), (0, 1))
    assert {s.basis for s in feasible} == {PB((), ()), PB((0,), (0,)), PB((0, 1), (0, 1)), PB((1,), (1,))}


def test_optimal_matches_linprog(two_arm_lp):
    res = linprog(-two_arm_lp.objective_coeffs, A_ub=two_arm_lp.constraint_matrix, b_ub=two_arm_lp.rhs,
                  method="highs")
    assert optimal_basis(two_arm_lp)[0].objective == pytest.approx(-res.fun, abs=1e-9)


def test_optimal_unit_costs_picks_best_reward():
    best, _ = optimal_basis(LpProblem([0.9, 0.5], [[1.0, 1.0]], [1.0]))
    assert best.objective == pytest.approx(0.9)
    assert best.basis == PB((0,), (0,))


def test_optimal_zero_objective_empty_basis_wins():
    best, _ = optimal_basis(LpProblem([0.0, 0.0], [[0.3, 0.7], [1.0, 1.0]], [0.5, 1.0]))
    assert best.objective == 0.0 and best.basis == PB((), ())


def test_optimal_tie_goes_to_first_in_canonical_order():
    best, _ = optimal_basis(LpProblem([0.5, 0.5], [[1.0, 1.0]], [1.0]))
    assert best.basis == PB((0,), (0,))


def test_unbounded_column_detected():
    with pytest.raises(UnboundedLPError):
        optimal_basis(LpProblem([0.2, 0.5], [[0.5, 0.0]], [1.0]))


def test_unbounded_ray_detected():
    # column 1 has a positive cost on row 0 but a negative one on row 1: the
    # mix d = (1, 1) satisfies A d <= 0 and carries positive objective
    A = [[-1.0, 1.0], [1.0, -1.0]]
    with pytest.raises(UnboundedLPError):
        optimal_basis(LpProblem([1.0, 1.0], A, [0.5, 0.5]))


def test_negative_costs_but_bounded():
    best, _ = optimal_basis(LpProblem([1.0, 0.0], [[-0.1, 0.0], [1.0, 1.0]], [0.5, 1.0]))
    assert best.objective == pytest.approx(1.0)


def test_optimal_is_deterministic(two_arm_lp):
    a, b = optimal_basis(two_arm_lp)[0], optimal_basis(two_arm_lp)[0]
    assert a.basis == b.basis and a.objective == b.objective and np.array_equal(a.xi, b.xi)


# ----------------------------------------------------------------------- dual

def test_dual_two_by_two(two_arm_lp):
    dual = solve_dual(two_arm_lp)
    assert dual.value == pytest.approx(0.6, abs=1e-12)
    # complementary multipliers: zeta = A_x^{-T} obj = (1, 0.1)
    np.testing.assert_allclose(dual.zeta, [1.0, 0.1], atol=1e-12)
    res = linprog(two_arm_lp.rhs, A_ub=-two_arm_lp.constraint_matrix.T, b_ub=-two_arm_lp.objective_coeffs,
                  method="highs")
    assert dual.value == pytest.approx(res.fun, abs=1e-9)


def test_dual_one_by_one():
    dual = solve_dual(LpProblem([0.7], [[1.0]], [1.0]))
    np.testing.assert_allclose(dual.zeta, [0.7])
    assert dual.value == pytest.approx(0.7)


def test_dual_zero_objective():
    dual = solve_dual(LpProblem([0.0, 0.0, 0.0], [[0.2, 0.4, 0.9], [1, 1, 1]], [0.3, 1.0]))
    assert dual.value == 0.0 and not dual.zeta.any()


def test_dual_degenerate_falls_back_to_feasible_multipliers():
    # two optimal bases at the same vertex; solve_dual must still return dual-feasible zeta
    prob = LpProblem([1.0, 0.5], [[1.0, 0.5], [1.0, 1.0]], [1.0, 1.0])
    dual = solve_dual(prob)
    assert np.all(prob.constraint_matrix.T @ dual.zeta >= prob.objective_coeffs - 1e-9)
    assert dual.value == pytest.approx(optimal_basis(prob)[0].objective)


def test_duality_gap_error_is_a_runtime_error():
    assert issubclass(DualityGapError, RuntimeError)


# ------------------------------------------------------------------ adjugate

def test_adjugate_two_by_two():
    det, adj = det_and_adjugate([[0.8, 0.2], [1.0, 1.0]])
    assert det == pytest.approx(0.6)
    np.testing.assert_allclose(adj, [[1.0, -0.2], [-1.0, 0.8]])


def test_adjugate_identity_three():
    det, adj = det_and_adjugate(np.eye(3))
    assert det == 1.0
    np.testing.assert_array_equal(adj, np.eye(3))


def test_adjugate_one_by_one():
    det, adj = det_and_adjugate([[2.0]])
    assert det == 2.0 and adj.tolist() == [[1.0]]


def test_adjugate_rejects_non_square():
    with pytest.raises(ValueError):
        det_and_adjugate(np.zeros((2, 3)))


@given(st.integers(1, 5).flatmap(lambda d: arrays(np.float64, (d, d), elements=st.floats(-1, 1))))
def test_adjugate_identity_property(M):
    d = M.shape[0]
    det, adj = det_and_adjugate(M)
    scale = max(1.0, float(np.abs(M).sum(axis=1).max()) ** d)
    assert np.abs(M @ adj - det * np.eye(d)).max() <= 1e-9 * scale


# --------------------------------------------------------------------- audit

def test_audit_two_by_two_passes():
    rep = audit_nondegeneracy([[0.8, 0.2], [1.0, 1.0]], [0.5, 1.0], 0.05)
    assert rep.passed
    full = next(e for e in rep.entries if e.basis == PB((0, 1), (0, 1)))
    assert full.det_value == pytest.approx(0.6) and full.min_basic == pytest.approx(0.5)


def test_audit_identical_columns_fail_on_pair():
    rep = audit_nondegeneracy([[0.4, 0.4], [1.0, 1.0]], [0.5, 1.0], 0.01)
    assert not rep.passed
    assert PB((0, 1), (0, 1)) in {e.basis for e in rep.failures}


def test_audit_zero_epsilon_vacuous():
    assert audit_nondegeneracy([[0.8, 0.2], [1.0, 1.0]], [0.5, 1.0], 0.0).passed


def test_audit_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        audit_nondegeneracy([[1.0]], [1.0], 1.5)


# ---------------------------------------------------------------------- rank

@pytest.mark.parametrize("M,r", [([[1.0, 2.0], [2.0, 4.0]], 1), (np.eye(3), 3), (np.zeros((2, 2)), 0),
                                 ([[0.6, 0, 0, 0], [0, 0.5, 0, 0], [1, 1, 1, 1]], 3)])
def test_matrix_rank(M, r):
    assert matrix_rank(np.asarray(M, float)) == r == np.linalg.matrix_rank(np.asarray(M, float))


# ---------------------------------------------------------- property checks

lp_dims = st.tuples(st.integers(1, 6), st.integers(1, 3))


@st.composite
def random_lps(draw):
    K, C = draw(lp_dims)
    obj = draw(arrays(np.float64, K, elements=st.floats(0, 1)))
    A = draw(arrays(np.float64, (C, K), elements=st.floats(0.01, 1)))
    rhs = draw(arrays(np.float64, C, elements=st.floats(0.2, 1)))
    return LpProblem(obj, A, rhs)


@given(random_lps())
def test_enumeration_matches_brute_force(prob):
    best, _ = optimal_basis(prob)
    value, _ = vertex_oracle(prob.objective_coeffs, prob.constraint_matrix, prob.rhs)
    assert abs(best.objective - value) <= 1e-9


@given(random_lps())
def test_strong_duality(prob):
    assert abs(solve_dual(prob).value - optimal_basis(prob)[0].objective) <= 1e-9


@given(random_lps())
def test_basic_solution_residual(prob):
    for b in enumerate_pseudo_bases(prob.n_arms, prob.n_resources):
        sol = solve_basic(prob, b)
        if sol.is_basis and b.size:
            A_x = prob.constraint_matrix[np.ix_(b.resource_set, b.arm_set)]
            resid = A_x @ sol.xi[list(b.arm_set)] - prob.rhs[list(b.resource_set)]
            assert np.abs(resid).max() <= 1e-9
            off = [k for k in range(prob.n_arms) if k not in b.arm_set]
            assert not sol.xi[off].any()


@given(random_lps())
def test_feasible_solutions_respect_constraints(prob):
    _, feasible = optimal_basis(prob)
    for sol in feasible:
        assert sol.is_basis and sol.xi.min() >= -1e-9
        assert np.all(prob.constraint_matrix @ sol.xi <= prob.rhs + 1e-9)


@given(random_lps())
def test_solver_bit_determinism(prob):
    a, b = optimal_basis(prob)[0], optimal_basis(prob)[0]
    assert a.objective == b.objective and np.array_equal(a.xi, b.xi)


def test_selfcheck_small_run():
    rep = run_selfcheck(20, seed=5)
    assert rep.passed and rep.instances == 20
