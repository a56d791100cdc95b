"""Exact likelihoods, values, and maximum-likelihood confidence sets.

The likelihood of a trajectory conditions on the executed actions only:
P(o_1..o_H | a_1..a_H). Whatever policy chose the actions contributes the
same factor to every model's trajectory probability, so it cancels from
every likelihood comparison; dataset policy records are therefore ignored
here, by design.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    BudgetExceededError,
    EmptyConfidenceSetError,
    LikelihoodDegeneracyError,
)
from .model import (
    PomgModel,
    PomgSpec,
    Trajectory,
    joint_index,
    split_joint,
    trajectory_from_dict,
    trajectory_to_dict,
    validate_model,
)
from .policies import JointDetPolicy, MixedJointPolicy

DEFAULT_VALUE_BUDGET = 2_000_000

# A dataset is a list of (policy record, Trajectory) pairs in collection
# order. Policy records are opaque JSON-serializable labels.
Dataset = List[Tuple[object, Trajectory]]

RevealingPredicate = Callable[[PomgModel], bool]


@dataclass(frozen=True, eq=False)
class CandidateFamily:
    """A finite stand-in for the continuous model space.

    Every maximization over models runs over this explicit list, which keeps
    each max exact and each experiment reproducible. ``truth_index`` marks
    the ground truth for test harnesses only; no algorithm reads it.
    """

    models: Tuple[PomgModel, ...]
    truth_index: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        if not self.models:
            raise ValueError("candidate family must contain at least one model")
        spec = self.models[0].spec
        for i, model in enumerate(self.models):
            if model.spec != spec:
                raise ValueError(f"candidate {i} has a different spec")
            report = validate_model(model)
            if not report.ok:
                raise ValueError(f"candidate {i} is invalid: {report.violations[0]}")
        if self.truth_index is not None and not 0 <= self.truth_index < len(self.models):
            raise ValueError("truth_index out of range")

    @property
    def spec(self) -> PomgSpec:
        return self.models[0].spec

    def __len__(self) -> int:
        return len(self.models)


@dataclass(frozen=True)
class ConfidenceSet:
    """Candidate indices whose log-likelihood is within beta of the best."""

    member_indices: Tuple[int, ...]
    beta: float
    max_log_likelihood: float

    def __contains__(self, index: int) -> bool:
        return index in self.member_indices


# ---------------------------------------------------------------------------
# likelihood
# ---------------------------------------------------------------------------

def forward_prob(
    model: PomgModel,
    actions: Sequence[Tuple[int, ...]],
    observations: Sequence[Tuple[int, ...]],
) -> float:
    """P(o_1..o_H | a_1..a_H) by forward belief recursion.

    Multiplies the belief elementwise by each emission column, records the
    mass, normalizes, and pushes through the transition for the executed
    joint action. The product of recorded masses equals the brute-force sum
    over all latent state sequences. Zero is a valid return.
    """
    spec = model.spec
    if len(actions) != spec.horizon or len(observations) != spec.horizon:
        raise ValueError(
            f"sequences must have length {spec.horizon}, got {len(actions)} actions "
            f"and {len(observations)} observations"
        )
    belief = model.mu1.copy()
    prob = 1.0
    for h in range(spec.horizon):
        o_joint = joint_index(tuple(observations[h]), spec.observations_per_player)
        belief = belief * model.emit[h][o_joint, :]
        mass = float(belief.sum())
        if mass <= 0.0:
            return 0.0
        prob *= mass
        belief /= mass
        if h + 1 < spec.horizon:
            a_joint = joint_index(tuple(actions[h]), spec.actions_per_player)
            belief = model.trans[h][:, :, a_joint] @ belief
    return float(prob)


def log_likelihood(model: PomgModel, data: Dataset) -> float:
    """Sum of log forward_prob over the dataset; -inf on any zero.

    Policy records in the dataset are ignored: the likelihood conditions on
    actions only, so the policy factor cancels from every comparison.
    """
    total = 0.0
    for _, traj in data:
        prob = forward_prob(model, traj.actions, traj.observations)
        if prob <= 0.0:
            return float("-inf")
        total += math.log(prob)
    return total


# ---------------------------------------------------------------------------
# values
# ---------------------------------------------------------------------------

def policy_value(
    model: PomgModel,
    mu: JointDetPolicy,
    player: int,
    budget: int = DEFAULT_VALUE_BUDGET,
) -> float:
    """Exact expected return of a deterministic joint policy.

    Sums forward_prob times accumulated reward over every joint observation
    sequence, expanding only prefixes with nonzero probability. The budget
    caps expanded prefixes and guards dense specs where the full sequence
    count is out of reach.
    """
    spec = model.spec
    n = spec.num_players
    n_obs_joint = spec.num_joint_observations
    obs_parts = [split_joint(o, spec.observations_per_player) for o in range(n_obs_joint)]
    reward = model.rewards[player]
    sequence_count = n_obs_joint ** spec.horizon
    nodes = 0
    value = 0.0

    # Stack of (step h, unnormalized belief carrying the prefix probability,
    # per-player private histories).
    stack: List[Tuple[int, np.ndarray, Tuple[Tuple[int, ...], ...]]] = [
        (0, model.mu1.copy(), tuple(() for _ in range(n)))
    ]
    while stack:
        h, belief, histories = stack.pop()
        emit = model.emit[h]
        for o_joint in range(n_obs_joint):
            mass_vec = emit[o_joint, :] * belief
            mass = float(mass_vec.sum())
            if mass <= 0.0:
                continue
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(
                    f"value enumeration expanded over {budget} observation prefixes "
                    f"(full sequence count {sequence_count})"
                )
            parts = obs_parts[o_joint]
            value += mass * float(reward[h, parts[player]])
            actions = []
            new_histories = []
            for i in range(n):
                hist = histories[i] + (parts[i],)
                action = mu.policies[i].decide(hist)
                actions.append(action)
                new_histories.append(hist + (action,))
            if h + 1 < spec.horizon:
                a_joint = joint_index(tuple(actions), spec.actions_per_player)
                stack.append((h + 1, model.trans[h][:, :, a_joint] @ mass_vec, tuple(new_histories)))
    return value


def mixed_value(
    model: PomgModel,
    pi: MixedJointPolicy,
    player: int,
    budget: int = DEFAULT_VALUE_BUDGET,
) -> float:
    """Weight-average of policy_value over the mixture support."""
    return float(
        sum(w * policy_value(model, mu, player, budget) for mu, w in zip(pi.support, pi.weights))
    )


# ---------------------------------------------------------------------------
# confidence sets
# ---------------------------------------------------------------------------

def build_confidence_set(
    candidates: CandidateFamily,
    data: Dataset,
    beta: float,
    revealing: RevealingPredicate,
) -> ConfidenceSet:
    """Members = revealing-passing candidates within beta of the best log-likelihood.

    The revealing filter applies to both sides: the max is taken over
    passing candidates only.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    passing = [i for i, model in enumerate(candidates.models) if revealing(model)]
    if not passing:
        raise EmptyConfidenceSetError(
            "empty B1: no candidate passes the revealing filter"
        )
    scores = [log_likelihood(candidates.models[i], data) for i in passing]
    best = max(scores)
    if best == float("-inf"):
        raise LikelihoodDegeneracyError(
            "every revealing-passing candidate assigns zero probability to the data; "
            "the family is inconsistent with the data-generating process"
        )
    members = tuple(i for i, score in zip(passing, scores) if score >= best - beta)
    return ConfidenceSet(member_indices=members, beta=float(beta), max_log_likelihood=float(best))


def default_beta(spec: PomgSpec, num_episodes: int, delta: float = 0.05, c: float = 1.0) -> float:
    """Default likelihood slack: c * (H(S^2 A + S O) ln(SAOHK) + ln(K/delta)).

    S, A, O are the state, joint-action and joint-observation counts, H the
    horizon, and K the total episode count of the run.
    """
    if num_episodes < 1:
        raise ValueError("num_episodes must be >= 1")
    if not 0 < delta < 1:
        raise ValueError("delta must be in (0, 1)")
    s = spec.num_states
    a = spec.num_joint_actions
    o = spec.num_joint_observations
    h = spec.horizon
    k = num_episodes
    return float(c * (h * (s * s * a + s * o) * math.log(s * a * o * h * k) + math.log(k / delta)))


# ---------------------------------------------------------------------------
# dataset serialization (JSON-lines)
# ---------------------------------------------------------------------------

def dataset_to_jsonl(data: Dataset) -> str:
    lines = []
    for record, traj in data:
        lines.append(json.dumps({"policy": record, "trajectory": trajectory_to_dict(traj)},
                                separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def dataset_from_jsonl(text: str) -> Dataset:
    data: Dataset = []
    for line in text.splitlines():
        if not line.strip():
            continue
        doc = json.loads(line)
        data.append((doc["policy"], trajectory_from_dict(doc["trajectory"])))
    return data
