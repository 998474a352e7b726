import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bwk.env import (SCENARIOS, ArmModel, EnvState, Instance, ScenarioError, make_scenario, make_tabular,
                     sample_means, step, true_mean_lp)
from bwk.rng import CounterStream, hash64


def play(instance, arms, seed=0):
    """Pull ``arms`` in order (None skips); return observations and the final state."""
    state, rng, seen = EnvState.fresh(instance), CounterStream(seed), []
    for a in arms:
        obs, state = step(state, instance, a, rng)
        seen.append(obs)
    return seen, state


# ----------------------------------------------------------- stopping rule

def test_deterministic_cost_stops_when_budget_first_exceeded():
    inst = make_tabular([0.5], [[0.5]], [1.0], 10, kind="deterministic-cost")
    seen, state = play(inst, [0] * 25)
    assert state.stop_time == 21
    assert all(o.payoff for o in seen[:20]) and not seen[20].payoff
    assert state.consumed[0] == pytest.approx(12.5)


def test_time_only_horizon_counts_skips():
    inst = make_tabular([0.5], [[1.0]], [1.0], 5, time_is_resource=True)
    _, state = play(inst, [None] * 8)
    assert state.stop_time == 6


def test_certain_unit_cost_stops_after_budget_plus_one():
    inst = make_tabular([1.0], [[1.0]], [1.0], 3)
    seen, state = play(inst, [0] * 5)
    assert state.stop_time == 4
    assert sum(o.reward for o in seen if o.payoff) == 3.0


def test_skip_without_time_costs_nothing():
    inst = make_tabular([0.5], [[0.5]], [1.0], 1, kind="deterministic-cost")
    seen, state = play(inst, [None] * 4)
    assert not state.terminated and state.consumed[0] == 0.0 and seen[-1].reward == 0.0


@pytest.mark.parametrize("arm", [-1, 2, 1.0, "0"])
def test_invalid_arm_raises(arm):
    inst = make_tabular([0.5, 0.5], [[0.5, 0.5]], [1.0], 10)
    with pytest.raises(IndexError):
        step(EnvState.fresh(inst), inst, arm, CounterStream(0))


@settings(max_examples=40)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=3), st.integers(1, 30),
       st.lists(st.integers(-1, 2), min_size=1, max_size=200), st.integers(0, 2**32))
def test_stopping_time_is_first_overdraft(probs, B, pulls, seed):
    K = len(probs)
    inst = make_tabular([0.5] * K, [probs], [1.0], B)
    arms = [None if a < 0 or a >= K else a for a in pulls]
    seen, state = play(inst, arms, seed)
    cum = np.cumsum([o.costs[0] for o in seen])
    over = np.flatnonzero(cum > B)
    expected = int(over[0]) + 1 if over.size else None
    assert state.stop_time == expected
    assert [o.payoff for o in seen] == [expected is None or i + 1 < expected for i in range(len(seen))]


# ---------------------------------------------------------------- scenarios

def test_pricing_means():
    inst = make_scenario("pricing")
    np.testing.assert_allclose(inst.mean_rewards, [0.21, 0.24])
    np.testing.assert_allclose(inst.mean_cost_matrix, [[0.7, 0.4], [1.0, 1.0]])
    assert inst.case_tag == "case3" and inst.time_is_resource


def test_procurement_means():
    inst = make_scenario("procurement", {"prices": [0.5], "time": False})
    assert inst.mean_rewards[0] == pytest.approx(0.5)
    assert inst.mean_cost_matrix[0, 0] == pytest.approx(0.25)
    assert inst.case_tag == "case1"


def test_sensors_is_case2_with_diagonal_batteries():
    inst = make_scenario("sensors")
    A = inst.mean_cost_matrix
    assert inst.case_tag == "case2" and A.shape == (5, 4)
    np.testing.assert_allclose(np.diag(A[:4]), [0.6, 0.5, 0.7, 0.4])
    np.testing.assert_allclose(A[4], 1.0)


def test_unknown_scenario_and_bad_params():
    with pytest.raises(ScenarioError, match="unknown scenario"):
        make_scenario("lottery")
    with pytest.raises(ScenarioError):
        make_scenario("pricing", {"prices": [1.5]})
    with pytest.raises(ScenarioError):
        make_scenario("sensors", {"costs": [0.5]})


def test_instance_validation():
    with pytest.raises(ScenarioError, match="deterministic"):
        make_tabular([0.5], [[0.5], [1.0]], [0.5, 1.0], 10, time_is_resource=True, case_tag="case2")
    with pytest.raises(ScenarioError, match="case3"):
        make_tabular([0.5], [[0.5]], [0.5], 10, case_tag="case3")
    with pytest.raises(ScenarioError):
        make_tabular([0.5], [[0.0]], [0.5], 10)
    with pytest.raises(ScenarioError):
        make_tabular([0.5], [[0.5], [0.7]], [0.5, 1.0], 10, time_is_resource=True)


def test_true_mean_lp_matches_tables():
    inst = make_tabular([0.9, 0.3], [[0.8, 0.2], [1, 1]], [0.5, 1.0], 100, time_is_resource=True)
    lp = true_mean_lp(inst)
    np.testing.assert_array_equal(lp.objective_coeffs, [0.9, 0.3])
    np.testing.assert_array_equal(lp.constraint_matrix, [[0.8, 0.2], [1, 1]])
    np.testing.assert_array_equal(lp.rhs, [0.5, 1.0])


def _all_scenarios():
    for name in SCENARIOS:
        inst = make_scenario(name)
        for k in range(inst.n_arms):
            yield pytest.param(inst, k, id=f"{name}-arm{k}")


@pytest.mark.parametrize("inst,arm", list(_all_scenarios()))
def test_sampler_means_match_declared_means(inst, arm):
    n = 100_000
    x = sample_means(inst, arm, n, seed=hash64(3, arm))
    assert x.min() >= 0.0 and x.max() <= 1.0
    declared = np.concatenate([[inst.mean_rewards[arm]], inst.mean_cost_matrix[:, arm]])
    se = x.std(axis=0) / np.sqrt(n)
    assert np.all(np.abs(x.mean(axis=0) - declared) <= 4 * se + 1e-9)


def test_coupled_bernoulli_ties_reward_to_cost():
    inst = Instance((ArmModel.bernoulli(0.7, [0.7], coupled=True),), [1.0], 10, False, "case1")
    x = sample_means(inst, 0, 5000, seed=1)
    np.testing.assert_array_equal(x[:, 0], x[:, 1])


def test_same_seed_same_draws_and_arm_draws_ignore_history():
    inst = make_scenario("ad-alloc")
    a, _ = play(inst, [0, 1, 0, 1, 0], seed=9)
    b, _ = play(inst, [0, 0, 0, 0, 0], seed=9)
    for t in (0, 2, 4):
        assert a[t].reward == b[t].reward and np.array_equal(a[t].costs, b[t].costs)


def test_replications_are_uncorrelated():
    inst = make_scenario("pricing")
    corr = []
    for rep in range(50):
        x = sample_means(inst, 0, 10_000, seed=hash64(1, 0, 0, 2 * rep))[:, 0]
        y = sample_means(inst, 0, 10_000, seed=hash64(1, 0, 0, 2 * rep + 1))[:, 0]
        corr.append(np.corrcoef(x, y)[0, 1])
    corr = np.array(corr)
    assert abs(corr.mean()) < 0.01
    assert np.abs(corr).max() < 0.045
