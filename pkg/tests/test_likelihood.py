"""Forward likelihoods, exact values, and confidence sets."""
from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from pomg_lab.errors import (
    BudgetExceededError,
    EmptyConfidenceSetError,
    LikelihoodDegeneracyError,
)
from pomg_lab.likelihood import (
    CandidateFamily,
    build_confidence_set,
    dataset_from_jsonl,
    dataset_to_jsonl,
    default_beta,
    forward_prob,
    log_likelihood,
    mixed_value,
    policy_value,
)
from pomg_lab.model import PomgModel, PomgSpec, Trajectory, sample_trajectory
from pomg_lab.policies import (
    REACTIVE,
    DetPolicy,
    JointDetPolicy,
    MixedJointPolicy,
    Mixture,
    enumerate_det_policies,
    product_policy,
)

from conftest import random_model, random_small_spec
from oracles import (
    all_observation_sequences,
    brute_force_forward_prob,
    exhaustive_policy_value,
    induced_actions,
    monte_carlo_value,
)


def constant_policy(spec: PomgSpec, actions=None) -> JointDetPolicy:
    actions = actions or tuple(0 for _ in range(spec.num_players))
    policies = []
    for i in range(spec.num_players):
        table = {
            (h, o): actions[i]
            for h in range(1, spec.horizon + 1)
            for o in range(spec.observations_per_player[i])
        }
        policies.append(DetPolicy.from_table(i, REACTIVE, table))
    return JointDetPolicy(policies=tuple(policies))


def single_state_model() -> PomgModel:
    spec = PomgSpec(2, 2, 1, (1, 1), (2, 1))
    return PomgModel(
        spec=spec,
        mu1=np.array([1.0]),
        trans=tuple(np.ones((1, 1, 1)) for _ in range(2)),
        emit=tuple(np.array([[0.7], [0.3]]) for _ in range(2)),
        rewards=(np.zeros((2, 2)), np.zeros((2, 1))),
    )


# ---------------------------------------------------------------------------
# forward_prob
# ---------------------------------------------------------------------------

def test_forward_prob_product_rule():
    model = single_state_model()
    actions = [(0, 0), (0, 0)]
    assert forward_prob(model, actions, [(0, 0), (0, 0)]) == pytest.approx(0.49, abs=1e-15)
    assert forward_prob(model, actions, [(1, 0), (1, 0)]) == pytest.approx(0.09, abs=1e-15)


def test_forward_prob_deterministic_model():
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    emit = np.zeros((4, 2))
    emit[0, 0] = 1.0
    emit[3, 1] = 1.0
    trans = np.zeros((2, 2, 4))
    trans[1, :, :] = 1.0  # always move to state 1
    model = PomgModel(
        spec,
        np.array([1.0, 0.0]),
        (trans, trans),
        (emit, emit),
        (np.zeros((2, 2)), np.zeros((2, 2))),
    )
    actions = [(0, 0), (0, 0)]
    assert forward_prob(model, actions, [(0, 0), (1, 1)]) == 1.0
    assert forward_prob(model, actions, [(0, 0), (0, 0)]) == 0.0


def test_forward_prob_matches_brute_force_sweep():
    gen = np.random.default_rng(31)
    for _ in range(30):
        spec = random_small_spec(gen)
        model = random_model(spec, gen)
        for _ in range(4):
            actions = [
                tuple(int(gen.integers(0, a)) for a in spec.actions_per_player)
                for _ in range(spec.horizon)
            ]
            observations = [
                tuple(int(gen.integers(0, o)) for o in spec.observations_per_player)
                for _ in range(spec.horizon)
            ]
            exact = forward_prob(model, actions, observations)
            brute = brute_force_forward_prob(model, actions, observations)
            assert exact == pytest.approx(brute, abs=1e-12)


def test_forward_prob_sums_to_one_under_any_policy(rng):
    spec = PomgSpec(2, 2, 2, (2, 1), (2, 2))
    model = random_model(spec, rng)
    policy = constant_policy(spec, actions=(1, 0))
    total = 0.0
    for obs_seq in all_observation_sequences(model):
        acts = induced_actions(policy, obs_seq)
        total += forward_prob(model, acts, obs_seq)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_forward_prob_rejects_wrong_length():
    model = single_state_model()
    with pytest.raises(ValueError, match="length"):
        forward_prob(model, [(0, 0)], [(0, 0), (0, 0)])


# ---------------------------------------------------------------------------
# log_likelihood
# ---------------------------------------------------------------------------

def test_log_likelihood_empty_dataset():
    assert log_likelihood(single_state_model(), []) == 0.0


def test_log_likelihood_single_trajectory():
    model = single_state_model()
    traj = Trajectory(observations=((0, 0), (0, 0)), actions=((0, 0), (0, 0)))
    assert log_likelihood(model, [("anything", traj)]) == pytest.approx(math.log(0.49))


def test_log_likelihood_impossible_trajectory_is_minus_inf():
    model = single_state_model()
    emit = tuple(np.array([[1.0], [0.0]]) for _ in range(2))
    degenerate = PomgModel(model.spec, model.mu1, model.trans, emit, model.rewards)
    traj = Trajectory(observations=((1, 0), (0, 0)), actions=((0, 0), (0, 0)))
    assert log_likelihood(degenerate, [(None, traj)]) == float("-inf")


def test_log_likelihood_ignores_policy_records():
    model = single_state_model()
    traj = Trajectory(observations=((0, 0), (1, 0)), actions=((0, 0), (0, 0)))
    a = log_likelihood(model, [("policy-a", traj)])
    b = log_likelihood(model, [({"totally": "different"}, traj)])
    assert a == b


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

def test_policy_value_single_step_expectation():
    spec = PomgSpec(1, 2, 2, (1, 1), (2, 1))
    emit = np.array([[1.0, 0.0], [0.0, 1.0]])  # observation = state for player 1
    model = PomgModel(
        spec,
        np.array([0.5, 0.5]),
        (np.ones((2, 2, 1)) * 0.5,),
        (emit,),
        (np.array([[1.0, 0.0]]), np.zeros((1, 1))),
    )
    assert policy_value(model, constant_policy(spec), 0) == pytest.approx(0.5)


def test_policy_value_zero_rewards(rng):
    spec = random_small_spec(rng)
    model = random_model(
        spec,
        rng,
        rewards=[np.zeros((spec.horizon, o)) for o in spec.observations_per_player],
    )
    policy = constant_policy(spec)
    assert policy_value(model, policy, 0) == 0.0
    assert policy_value(model, policy, 1) == 0.0


def test_policy_value_matches_exhaustive_sum(rng):
    gen = np.random.default_rng(8)
    for _ in range(10):
        spec = random_small_spec(gen, max_states=2, max_horizon=2)
        model = random_model(spec, gen)
        pures0 = enumerate_det_policies(spec, 0, REACTIVE)
        pures1 = enumerate_det_policies(spec, 1, REACTIVE)
        policy = JointDetPolicy((pures0[len(pures0) // 2], pures1[-1]))
        for player in range(2):
            assert policy_value(model, policy, player) == pytest.approx(
                exhaustive_policy_value(model, policy, player), abs=1e-12
            )


def test_policy_value_matches_monte_carlo(rng):
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    model = random_model(spec, rng)
    policy = constant_policy(spec, actions=(1, 0))
    exact = policy_value(model, policy, 0)
    estimate, stderr = monte_carlo_value(model, policy, 0, 100_000, seed=404)
    assert abs(estimate - exact) <= 3 * stderr + 1e-9


def test_policy_value_in_range_and_linear_in_rewards(rng):
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    model = random_model(spec, rng)
    policy = constant_policy(spec)
    value = policy_value(model, policy, 0)
    assert 0.0 <= value <= spec.horizon
    doubled = PomgModel(
        model.spec,
        model.mu1,
        model.trans,
        model.emit,
        (model.rewards[0] * 0.5, model.rewards[1]),
    )
    assert policy_value(doubled, policy, 0) == pytest.approx(0.5 * value)


def test_policy_value_budget_fault(rng):
    spec = PomgSpec(3, 2, 2, (2, 2), (2, 2))
    model = random_model(spec, rng)
    with pytest.raises(BudgetExceededError, match="sequence count 64"):
        policy_value(model, constant_policy(spec), 0, budget=3)


def test_mixed_value_point_mass_and_average(rng):
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    model = random_model(spec, rng)
    mu_a = constant_policy(spec, actions=(0, 0))
    mu_b = constant_policy(spec, actions=(1, 1))
    point = MixedJointPolicy(support=(mu_a,), weights=(1.0,))
    assert mixed_value(model, point, 0) == pytest.approx(policy_value(model, mu_a, 0))
    uniform = MixedJointPolicy(support=(mu_a, mu_b), weights=(0.5, 0.5))
    expected = 0.5 * (policy_value(model, mu_a, 0) + policy_value(model, mu_b, 0))
    assert mixed_value(model, uniform, 0) == pytest.approx(expected)


def test_mixed_value_product_equals_explicit_mixture(rng):
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    model = random_model(spec, rng)
    a = enumerate_det_policies(spec, 0, REACTIVE)[:2]
    b = enumerate_det_policies(spec, 1, REACTIVE)[:2]
    prod = product_policy([Mixture(tuple(a), (0.3, 0.7)), Mixture(tuple(b), (0.25, 0.75))])
    explicit = MixedJointPolicy(support=prod.support, weights=prod.weights)
    assert mixed_value(model, prod, 1) == pytest.approx(mixed_value(model, explicit, 1), abs=1e-12)


def test_mixed_value_affine_in_weights(rng):
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    model = random_model(spec, rng)
    mu_a = constant_policy(spec, actions=(0, 0))
    mu_b = constant_policy(spec, actions=(1, 1))
    va = policy_value(model, mu_a, 0)
    vb = policy_value(model, mu_b, 0)
    for w in (0.0, 0.25, 0.9, 1.0):
        weights = (w, 1.0 - w) if w < 1.0 else (1.0, 0.0)
        pi = MixedJointPolicy(support=(mu_a, mu_b), weights=weights)
        assert mixed_value(model, pi, 0) == pytest.approx(weights[0] * va + weights[1] * vb)


# ---------------------------------------------------------------------------
# confidence sets
# ---------------------------------------------------------------------------

def _family(rng, count=4) -> CandidateFamily:
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    return CandidateFamily(models=tuple(random_model(spec, rng) for _ in range(count)))


def test_confidence_set_empty_dataset_keeps_all(rng):
    family = _family(rng)
    cs = build_confidence_set(family, [], beta=1.0, revealing=lambda m: True)
    assert cs.member_indices == tuple(range(len(family)))
    assert cs.max_log_likelihood == 0.0


def test_confidence_set_beta_zero_is_argmax_set(rng):
    family = _family(rng)
    policy = constant_policy(family.spec)
    traj = sample_trajectory(family.models[0], policy, np.random.default_rng(3))
    data = [(None, traj)]
    cs = build_confidence_set(family, data, beta=0.0, revealing=lambda m: True)
    scores = [log_likelihood(m, data) for m in family.models]
    best = max(scores)
    assert cs.member_indices == tuple(i for i, sc in enumerate(scores) if sc >= best)
    assert cs.max_log_likelihood == pytest.approx(best)


def test_confidence_set_respects_revealing_filter(rng):
    family = _family(rng)
    cs = build_confidence_set(family, [], beta=0.0, revealing=lambda m: m is family.models[2])
    assert cs.member_indices == (2,)


def test_confidence_set_empty_b1_faults(rng):
    family = _family(rng)
    with pytest.raises(EmptyConfidenceSetError, match="empty B1"):
        build_confidence_set(family, [], beta=1.0, revealing=lambda m: False)


def test_confidence_set_degenerate_family_faults(rng):
    spec = PomgSpec(1, 2, 1, (1, 1), (2, 1))
    dead = PomgModel(
        spec,
        np.array([1.0]),
        (np.ones((1, 1, 1)),),
        (np.array([[1.0], [0.0]]),),
        (np.zeros((1, 2)), np.zeros((1, 1))),
    )
    family = CandidateFamily(models=(dead,))
    traj = Trajectory(observations=((1, 0),), actions=((0, 0),))
    with pytest.raises(LikelihoodDegeneracyError, match="inconsistent"):
        build_confidence_set(family, [(None, traj)], beta=10.0, revealing=lambda m: True)


def test_confidence_set_grows_with_beta(rng):
    family = _family(rng)
    policy = constant_policy(family.spec)
    gen = np.random.default_rng(17)
    data = [(None, sample_trajectory(family.models[0], policy, gen)) for _ in range(20)]
    sizes = [
        len(build_confidence_set(family, data, beta, lambda m: True).member_indices)
        for beta in (0.0, 0.5, 2.0, 50.0)
    ]
    assert sizes == sorted(sizes)
    assert sizes[-1] == len(family)


def test_default_beta_matches_formula():
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    s, a, o, h, k = 2, 4, 4, 2, 400
    expected = h * (s * s * a + s * o) * math.log(s * a * o * h * k) + math.log(k / 0.05)
    assert default_beta(spec, 400) == pytest.approx(expected)
    assert default_beta(spec, 400, c=0.5) == pytest.approx(0.5 * expected)
    with pytest.raises(ValueError):
        default_beta(spec, 0)


# ---------------------------------------------------------------------------
# dataset serialization
# ---------------------------------------------------------------------------

def test_dataset_jsonl_roundtrip(rng):
    model = single_state_model()
    policy = constant_policy(model.spec)
    gen = np.random.default_rng(1)
    data = [
        ({"episode": k}, sample_trajectory(model, policy, gen))
        for k in range(3)
    ]
    text = dataset_to_jsonl(data)
    again = dataset_from_jsonl(text)
    assert [t for _, t in again] == [t for _, t in data]
    assert [r for r, _ in again] == [r for r, _ in data]
    assert dataset_to_jsonl([]) == ""
