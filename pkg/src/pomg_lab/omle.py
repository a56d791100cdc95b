"""Optimistic-MLE learners over finite candidate families.

Three episode loops share one skeleton: keep every candidate whose
cumulative log-likelihood sits within beta of the best, act optimistically
against that confidence set, execute, and refit. The equilibrium learner
plays an equilibrium of the optimistic normal-form game, the multi-step
variant adds uniform-tail roll-ins for identification under weaker
revealing conditions, and the adversary learner maximins for player 1
against an arbitrary opponent source.

Regret oracles evaluate deployed policies on the true model. That is a
simulator privilege, impossible for a deployed learner, and every log line
carries a ``regret_oracle`` marker saying so.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.base import BaseEstimator

from .equilibria import (
    DEFAULT_NASH_BUDGET,
    DEFAULT_PROFILE_BUDGET,
    JointDistribution,
    NormalFormGame,
    ZeroSumSolution,
    raw_best_swap_gain,
    raw_exploitability,
    solve_cce,
    solve_ce,
    solve_nash_2p,
    solve_zero_sum,
)
from .errors import (
    BudgetExceededError,
    EmptyConfidenceSetError,
    GateError,
    LikelihoodDegeneracyError,
    PomgError,
)
from .likelihood import (
    DEFAULT_VALUE_BUDGET,
    CandidateFamily,
    ConfidenceSet,
    build_confidence_set,
    default_beta,
    forward_prob,
    policy_value,
)
from .model import (
    PomgModel,
    Trajectory,
    _draw,
    joint_index,
    sample_trajectory,
    split_joint,
    trajectory_from_dict,
    trajectory_to_dict,
)
from .policies import (
    DEFAULT_ENUMERATION_BUDGET,
    REACTIVE,
    DetPolicy,
    JointDetPolicy,
    MixedJointPolicy,
    enumerate_det_policies,
    enumerate_pure_sets,
    exclude,
    joint_policy_from_dict,
    joint_policy_to_dict,
    mixed_policy_from_dict,
    mixed_policy_to_dict,
)
from .revealing import multi_step_predicate, single_step_predicate

EQ_TYPES = ("Nash", "CCE", "CE")
METRIC_FOR_EQ = {"Nash": "nash", "CCE": "cce", "CE": "ce"}
REGRET_ORACLE = "true-model-simulator"
CSV_HEADER = "k,metric,increment,cumulative,|B^k|"


def resolve_threads(threads: Optional[int]) -> int:
    """Explicit argument wins; else the POMG_LAB_THREADS variable; else 1."""
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get("POMG_LAB_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(
            f"POMG_LAB_THREADS must be an integer, got {raw!r}"
        ) from None


# ---------------------------------------------------------------------------
# caching
# ---------------------------------------------------------------------------

def model_fingerprint(model: PomgModel) -> str:
    """Content hash of the dynamics; metadata does not participate."""
    digest = hashlib.sha1()
    digest.update(repr(model.spec).encode())
    digest.update(model.mu1.tobytes())
    for t in model.trans:
        digest.update(t.tobytes())
    for e in model.emit:
        digest.update(e.tobytes())
    for r in model.rewards:
        digest.update(r.tobytes())
    return digest.hexdigest()


class RunCache:
    """Memo shared across episodes and across runs on the same family.

    Value tensors depend only on (model, policy class), equilibrium
    solutions only on (eq type, optimistic tensors), and matrix-game
    solutions only on the model, so repeated runs over the same candidates
    reuse nearly everything. Keys assume pure sets are the canonical
    full enumerations of their class.
    """

    def __init__(self) -> None:
        self.tensors: Dict[tuple, Tuple[np.ndarray, ...]] = {}
        self.equilibria: Dict[tuple, JointDistribution] = {}
        self.matrix_games: Dict[tuple, ZeroSumSolution] = {}
        self._fingerprints: Dict[int, str] = {}

    def fingerprint(self, model: PomgModel) -> str:
        key = id(model)
        if key not in self._fingerprints:
            self._fingerprints[key] = model_fingerprint(model)
        return self._fingerprints[key]


def _pure_sets_key(pure_sets: Sequence[Sequence[DetPolicy]]) -> tuple:
    return tuple((s[0].policy_class if s else "", len(s)) for s in pure_sets)


def game_tensors(
    model: PomgModel,
    pure_sets: Sequence[Sequence[DetPolicy]],
    value_budget: int = DEFAULT_VALUE_BUDGET,
    tensor_budget: int = DEFAULT_PROFILE_BUDGET,
    cache: Optional[RunCache] = None,
    threads: int = 1,
) -> Tuple[np.ndarray, ...]:
    """Exact per-player value tensors of the model over pure profiles.

    Entry [j1,...,jn] of tensor i is the value to player i of the joint
    deterministic profile (pure_sets[0][j1], ...). Entries are evaluated in
    profile order; with threads > 1 they are computed concurrently but
    reduced in the same order.
    """
    shape = tuple(len(s) for s in pure_sets)
    count = int(np.prod(shape)) if shape else 0
    if count == 0:
        raise ValueError("pure sets must be nonempty for every player")
    if count > tensor_budget:
        raise BudgetExceededError(
            f"{count} pure profiles exceed the value-tensor budget {tensor_budget}"
        )
    if cache is not None:
        key = (cache.fingerprint(model), _pure_sets_key(pure_sets))
        hit = cache.tensors.get(key)
        if hit is not None:
            return hit
    profiles = [JointDetPolicy(policies=combo) for combo in itertools.product(*pure_sets)]
    n_players = len(pure_sets)

    def values_for(player: int) -> np.ndarray:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                vals = list(
                    pool.map(lambda mu: policy_value(model, mu, player, value_budget), profiles)
                )
        else:
            vals = [policy_value(model, mu, player, value_budget) for mu in profiles]
        return np.array(vals).reshape(shape)

    tensors = tuple(values_for(i) for i in range(n_players))
    if cache is not None:
        cache.tensors[key] = tensors
    return tensors


# ---------------------------------------------------------------------------
# optimistic game
# ---------------------------------------------------------------------------

def optimistic_game(
    candidates: CandidateFamily,
    b: ConfidenceSet,
    pure_sets: Sequence[Sequence[DetPolicy]],
    value_budget: int = DEFAULT_VALUE_BUDGET,
    tensor_budget: int = DEFAULT_PROFILE_BUDGET,
    cache: Optional[RunCache] = None,
    threads: int = 1,
    return_argmax: bool = False,
):
    """Entrywise-optimistic normal-form game over the confidence set.

    U_i[profile] = max over member models of that model's exact value for
    player i. Each player's maximum is taken separately, so the result is
    generally not constant-sum even when every member is. With
    ``return_argmax`` the per-entry maximizing member index (lowest index on
    ties) is returned alongside for diagnostics.
    """
    members = sorted(b.member_indices)
    if not members:
        raise EmptyConfidenceSetError("the optimistic game needs a nonempty confidence set")
    stacks: List[List[np.ndarray]] = []
    for j in members:
        stacks.append(
            list(
                game_tensors(
                    candidates.models[j],
                    pure_sets,
                    value_budget=value_budget,
                    tensor_budget=tensor_budget,
                    cache=cache,
                    threads=threads,
                )
            )
        )
    n_players = len(pure_sets)
    payoffs = []
    argmaxes = []
    member_array = np.array(members)
    for i in range(n_players):
        stacked = np.stack([stacks[pos][i] for pos in range(len(members))])
        payoffs.append(stacked.max(axis=0))
        argmaxes.append(member_array[stacked.argmax(axis=0)])
    game = NormalFormGame(payoffs=tuple(payoffs))
    if return_argmax:
        return game, tuple(argmaxes)
    return game


# ---------------------------------------------------------------------------
# episode logs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EpisodeLog:
    """Everything the harness records about one episode.

    ``increment`` is the clamped per-episode regret term for the configured
    metric, ``raw_increment`` its unclamped value, and ``cumulative`` the
    running sum of clamped terms. ``optimist_index`` is the candidate the
    maximin step selected (adversary loop only). Wall time is measured but
    excluded from canonical serializations so reruns reproduce files byte
    for byte.
    """

    episode: int
    policy: MixedJointPolicy
    sampled: JointDetPolicy
    trajectories: Tuple[Trajectory, ...]
    set_size: int
    member_indices: Tuple[int, ...]
    metric: str
    increment: float
    raw_increment: float
    cumulative: float
    optimist_index: Optional[int] = None
    wall_time_s: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectories", tuple(self.trajectories))
        object.__setattr__(self, "member_indices", tuple(int(j) for j in self.member_indices))
        if self.increment < -1e-9:
            raise ValueError(f"clamped increment {self.increment} is negative")


def episode_log_to_dict(log: EpisodeLog) -> dict:
    doc = {
        "episode": log.episode,
        "policy": mixed_policy_to_dict(log.policy),
        "sampled": joint_policy_to_dict(log.sampled),
        "trajectories": [trajectory_to_dict(t) for t in log.trajectories],
        "set_size": log.set_size,
        "members": list(log.member_indices),
        "metric": log.metric,
        "increment": log.increment,
        "raw_increment": log.raw_increment,
        "cumulative": log.cumulative,
        "regret_oracle": REGRET_ORACLE,
    }
    if log.optimist_index is not None:
        doc["optimist_index"] = log.optimist_index
    return doc


def episode_log_from_dict(doc: dict) -> EpisodeLog:
    return EpisodeLog(
        episode=int(doc["episode"]),
        policy=mixed_policy_from_dict(doc["policy"]),
        sampled=joint_policy_from_dict(doc["sampled"]),
        trajectories=tuple(trajectory_from_dict(t) for t in doc["trajectories"]),
        set_size=int(doc["set_size"]),
        member_indices=tuple(doc["members"]),
        metric=doc["metric"],
        increment=float(doc["increment"]),
        raw_increment=float(doc["raw_increment"]),
        cumulative=float(doc["cumulative"]),
        optimist_index=doc.get("optimist_index"),
    )


def episode_logs_to_jsonl(logs: Sequence[EpisodeLog]) -> str:
    return "".join(
        json.dumps(episode_log_to_dict(log), sort_keys=True, separators=(",", ":")) + "\n"
        for log in logs
    )


def episode_logs_from_jsonl(text: str) -> List[EpisodeLog]:
    return [episode_log_from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def regret_table(logs: Sequence[EpisodeLog]) -> str:
    """Summary CSV: one row per episode under a fixed header."""
    lines = [CSV_HEADER]
    for log in logs:
        lines.append(
            f"{log.episode},{log.metric},{log.increment!r},{log.cumulative!r},{log.set_size}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# regret oracles
# ---------------------------------------------------------------------------

def _profile_with(others: Tuple[DetPolicy, ...], player: int, dev: DetPolicy) -> JointDetPolicy:
    policies = list(others)
    policies.insert(player, dev)
    return JointDetPolicy(policies=tuple(policies))


def _mixture_value(
    model: PomgModel,
    pi: MixedJointPolicy,
    player: int,
    value_budget: int,
) -> float:
    return sum(
        w * policy_value(model, mu, player, value_budget)
        for mu, w in zip(pi.support, pi.weights)
    )


def _raw_deviation_gain(
    true_model: PomgModel,
    pi: MixedJointPolicy,
    player: int,
    enumeration_budget: int,
    value_budget: int,
) -> float:
    """Best-response gain: deviate to one fixed policy, opponents unchanged."""
    spec = true_model.spec
    dev_class = pi.support[0].policies[player].policy_class
    others = exclude(pi, player)
    current = _mixture_value(true_model, pi, player, value_budget)
    best = -math.inf
    for dev in enumerate_det_policies(spec, player, dev_class, enumeration_budget):
        value = sum(
            w * policy_value(true_model, _profile_with(rest, player, dev), player, value_budget)
            for rest, w in zip(others.support, others.weights)
        )
        best = max(best, value)
    return best - current


def _raw_swap_gain(
    true_model: PomgModel,
    pi: MixedJointPolicy,
    player: int,
    enumeration_budget: int,
    value_budget: int,
) -> float:
    """Best strategy-modification gain: deviations may depend on the
    recommended pure strategy."""
    spec = true_model.spec
    dev_class = pi.support[0].policies[player].policy_class
    devs = enumerate_det_policies(spec, player, dev_class, enumeration_budget)
    by_recommendation: Dict[DetPolicy, List[Tuple[Tuple[DetPolicy, ...], float]]] = {}
    for mu, w in zip(pi.support, pi.weights):
        rec = mu.policies[player]
        rest = tuple(p for i, p in enumerate(mu.policies) if i != player)
        by_recommendation.setdefault(rec, []).append((rest, w))
    gain = 0.0
    for rec, entries in by_recommendation.items():
        base = sum(
            w * policy_value(true_model, _profile_with(rest, player, rec), player, value_budget)
            for rest, w in entries
        )
        best = max(
            sum(
                w * policy_value(true_model, _profile_with(rest, player, dev), player, value_budget)
                for rest, w in entries
            )
            for dev in devs
        )
        gain += best - base
    return gain


def cce_regret_increment(
    true_model: PomgModel,
    pi: MixedJointPolicy,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    value_budget: int = DEFAULT_VALUE_BUDGET,
) -> float:
    """max_i (best fixed deviation for i) - (current value), clamped at 0."""
    raw = max(
        _raw_deviation_gain(true_model, pi, i, enumeration_budget, value_budget)
        for i in range(true_model.spec.num_players)
    )
    return max(raw, 0.0)


def nash_regret_increment(
    true_model: PomgModel,
    pi: MixedJointPolicy,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    value_budget: int = DEFAULT_VALUE_BUDGET,
) -> float:
    """The CCE increment restricted to product-form policies."""
    if not pi.product_form and not pi.check_product_form():
        raise GateError("the Nash regret increment needs a product-form policy")
    return cce_regret_increment(true_model, pi, enumeration_budget, value_budget)


def ce_regret_increment(
    true_model: PomgModel,
    pi: MixedJointPolicy,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    value_budget: int = DEFAULT_VALUE_BUDGET,
) -> float:
    """max_i (best recommendation-wise swap gain), clamped at 0."""
    raw = max(
        _raw_swap_gain(true_model, pi, i, enumeration_budget, value_budget)
        for i in range(true_model.spec.num_players)
    )
    return max(raw, 0.0)


def _raw_metric_increment(
    true_game: NormalFormGame, dist: JointDistribution, metric: str
) -> float:
    """Tensor-path increment; equals the policy-path oracles on the same
    pure sets."""
    n_players = len(true_game.payoffs)
    if metric == "ce":
        return max(raw_best_swap_gain(true_game, dist, i) for i in range(n_players))
    return max(raw_exploitability(true_game, dist, i) for i in range(n_players))


# ---------------------------------------------------------------------------
# loop plumbing
# ---------------------------------------------------------------------------

def _resolve_beta(
    beta: Union[None, float, Callable[[int], float]],
    candidates: CandidateFamily,
    num_episodes: int,
    beta_c: float,
    beta_delta: float,
) -> float:
    if beta is None:
        return default_beta(candidates.spec, num_episodes, delta=beta_delta, c=beta_c)
    if callable(beta):
        return float(beta(num_episodes))
    return float(beta)


def _trajectory_ll(model: PomgModel, traj: Trajectory) -> float:
    p = forward_prob(model, traj.actions, traj.observations)
    return math.log(p) if p > 0.0 else -math.inf


class _LikelihoodState:
    """Cumulative log-likelihoods over the revealing-filtered base set."""

    def __init__(self, candidates: CandidateFamily, base: ConfidenceSet, beta: float) -> None:
        self.candidates = candidates
        self.base_indices = tuple(sorted(base.member_indices))
        self.beta = beta
        self.lls = {j: 0.0 for j in self.base_indices}

    def add(self, trajectories: Sequence[Trajectory]) -> None:
        for j in self.base_indices:
            model = self.candidates.models[j]
            for traj in trajectories:
                self.lls[j] += _trajectory_ll(model, traj)

    def confidence_set(self) -> ConfidenceSet:
        best = max(self.lls.values())
        if best == -math.inf:
            raise LikelihoodDegeneracyError(
                "all candidates assign zero probability to the data: the family is "
                "inconsistent with the data-generating process"
            )
        members = tuple(j for j in self.base_indices if self.lls[j] >= best - self.beta)
        return ConfidenceSet(member_indices=members, beta=self.beta, max_log_likelihood=best)


def _solve_equilibrium(
    eq_type: str,
    game: NormalFormGame,
    nash_budget: int,
    profile_budget: int,
) -> JointDistribution:
    if eq_type == "Nash":
        return solve_nash_2p(game, budget=nash_budget)
    if eq_type == "CCE":
        return solve_cce(game, budget=profile_budget)
    if eq_type == "CE":
        return solve_ce(game, budget=profile_budget)
    raise ValueError(f"eq_type must be one of {EQ_TYPES}, got {eq_type!r}")


def _cached_equilibrium(
    eq_type: str,
    game: NormalFormGame,
    members: Tuple[int, ...],
    family_fp: str,
    pure_key: tuple,
    nash_budget: int,
    profile_budget: int,
    cache: Optional[RunCache],
) -> JointDistribution:
    if cache is None:
        return _solve_equilibrium(eq_type, game, nash_budget, profile_budget)
    key = (eq_type, members, family_fp, pure_key, nash_budget, profile_budget)
    hit = cache.equilibria.get(key)
    if hit is None:
        hit = _solve_equilibrium(eq_type, game, nash_budget, profile_budget)
        cache.equilibria[key] = hit
    return hit


def _dist_to_mixed_policy(
    dist: JointDistribution,
    pure_sets: Sequence[Sequence[DetPolicy]],
    product_form: bool,
) -> MixedJointPolicy:
    probs = np.asarray(dist.probs, dtype=float)
    flat = probs.ravel()
    support = []
    weights = []
    total = float(flat.sum())
    for flat_idx in np.flatnonzero(flat > 0.0):
        combo = np.unravel_index(int(flat_idx), probs.shape)
        support.append(
            JointDetPolicy(policies=tuple(pure_sets[i][combo[i]] for i in range(len(pure_sets))))
        )
        weights.append(float(flat[flat_idx]) / total)
    return MixedJointPolicy(
        support=tuple(support), weights=tuple(weights), product_form=product_form
    )


def _sample_profile(
    dist: JointDistribution, rng: np.random.Generator
) -> Tuple[int, ...]:
    probs = np.asarray(dist.probs, dtype=float)
    flat_idx = _draw(rng, probs.ravel())
    return tuple(int(v) for v in np.unravel_index(flat_idx, probs.shape))


def _family_fingerprint(candidates: CandidateFamily, cache: Optional[RunCache]) -> str:
    if cache is not None:
        return "+".join(cache.fingerprint(m) for m in candidates.models)
    return "+".join(model_fingerprint(m) for m in candidates.models)


def _check_env(env: PomgModel, candidates: CandidateFamily) -> None:
    if env.spec != candidates.spec:
        raise ValueError("environment and candidate family disagree on the game shape")


def _draw_output_policy(
    logs: Sequence[EpisodeLog], rng: np.random.Generator
) -> MixedJointPolicy:
    if not logs:
        raise PomgError("no policies were deployed, so no output policy can be drawn")
    return logs[int(rng.integers(len(logs)))].policy


# ---------------------------------------------------------------------------
# equilibrium learner (optionally with multi-step roll-ins)
# ---------------------------------------------------------------------------

def _rollout_uniform_tail(
    model: PomgModel,
    mu: JointDetPolicy,
    cut: int,
    rng: np.random.Generator,
) -> Trajectory:
    """One episode following ``mu`` for ``cut`` steps, then uniform actions.

    Mirrors trajectory sampling exactly, with only the action rule swapped
    after the cut, so likelihoods of the result are computed by the same
    forward recursion as ordinary trajectories.
    """
    spec = model.spec
    n = spec.num_players
    histories: List[List[int]] = [[] for _ in range(n)]
    obs_steps: List[Tuple[int, ...]] = []
    act_steps: List[Tuple[int, ...]] = []

    state = _draw(rng, model.mu1)
    for h in range(spec.horizon):
        o_joint = _draw(rng, model.emit[h][:, state])
        o_parts = split_joint(o_joint, spec.observations_per_player)
        obs_steps.append(o_parts)
        actions = []
        for i in range(n):
            histories[i].append(o_parts[i])
            if h < cut:
                actions.append(mu.policies[i].decide(tuple(histories[i])))
            else:
                actions.append(int(rng.integers(spec.actions_per_player[i])))
            histories[i].append(actions[i])
        a_parts = tuple(actions)
        act_steps.append(a_parts)
        if h + 1 < spec.horizon:
            state = _draw(rng, model.trans[h][:, state, joint_index(a_parts, spec.actions_per_player)])
    return Trajectory(observations=tuple(obs_steps), actions=tuple(act_steps))


def _run_optimistic_equilibrium(
    env: PomgModel,
    candidates: CandidateFamily,
    num_episodes: int,
    beta: Union[None, float, Callable[[int], float]],
    eq_type: str,
    policy_class: str,
    seed: int,
    alpha: float,
    rollin_m: Optional[int],
    nash_budget: int,
    profile_budget: int,
    enumeration_budget: int,
    value_budget: int,
    threads: Optional[int],
    cache: Optional[RunCache],
) -> Tuple[List[EpisodeLog], MixedJointPolicy, ConfidenceSet]:
    _check_env(env, candidates)
    if eq_type not in EQ_TYPES:
        raise ValueError(f"eq_type must be one of {EQ_TYPES}, got {eq_type!r}")
    if num_episodes < 0:
        raise ValueError("num_episodes must be nonnegative")
    spec = candidates.spec
    horizon = spec.horizon
    if rollin_m is not None and not 1 <= rollin_m <= horizon:
        raise GateError(f"roll-in window m={rollin_m} must lie in 1..{horizon}")
    n_threads = resolve_threads(threads)
    rng = np.random.default_rng(seed)

    if rollin_m is None:
        revealing = single_step_predicate(alpha)
    else:
        revealing = multi_step_predicate(rollin_m, alpha)

    if num_episodes == 0:
        raise PomgError("no policies were deployed (num_episodes=0), nothing to output")
    beta_value = _resolve_beta(beta, candidates, num_episodes, 1.0, 0.05)

    base = build_confidence_set(candidates, [], beta_value, revealing)
    state = _LikelihoodState(candidates, base, beta_value)
    pure_sets = enumerate_pure_sets(spec, policy_class, enumeration_budget)
    pure_key = _pure_sets_key(pure_sets)
    family_fp = _family_fingerprint(candidates, cache)
    metric = METRIC_FOR_EQ[eq_type]
    true_game = NormalFormGame(
        payoffs=game_tensors(
            env, pure_sets, value_budget=value_budget,
            tensor_budget=profile_budget, cache=cache, threads=n_threads,
        )
    )

    logs: List[EpisodeLog] = []
    b = state.confidence_set()
    cumulative = 0.0
    for k in range(1, num_episodes + 1):
        started = time.perf_counter()
        game = optimistic_game(
            candidates, b, pure_sets,
            value_budget=value_budget, tensor_budget=profile_budget,
            cache=cache, threads=n_threads,
        )
        dist = _cached_equilibrium(
            eq_type, game, tuple(sorted(b.member_indices)), family_fp, pure_key,
            nash_budget, profile_budget, cache,
        )
        pi = _dist_to_mixed_policy(dist, pure_sets, product_form=(eq_type == "Nash"))
        combo = _sample_profile(dist, rng)
        mu = JointDetPolicy(policies=tuple(pure_sets[i][combo[i]] for i in range(len(pure_sets))))

        if rollin_m is None:
            trajectories = [sample_trajectory(env, mu, rng)]
        else:
            trajectories = [
                _rollout_uniform_tail(env, mu, cut, rng)
                for cut in range(0, horizon - rollin_m + 1)
            ]

        raw = _raw_metric_increment(true_game, dist, metric)
        increment = max(raw, 0.0)
        cumulative += increment
        logs.append(
            EpisodeLog(
                episode=k,
                policy=pi,
                sampled=mu,
                trajectories=tuple(trajectories),
                set_size=len(b.member_indices),
                member_indices=tuple(sorted(b.member_indices)),
                metric=metric,
                increment=increment,
                raw_increment=raw,
                cumulative=cumulative,
                wall_time_s=time.perf_counter() - started,
            )
        )
        state.add(trajectories)
        b = state.confidence_set()

    output = _draw_output_policy(logs, rng)
    return logs, output, b


def run_omle_equilibrium(
    env: PomgModel,
    candidates: CandidateFamily,
    num_episodes: int,
    beta: Union[None, float, Callable[[int], float]] = None,
    eq_type: str = "CCE",
    policy_class: str = REACTIVE,
    seed: int = 0,
    alpha: float = 0.2,
    nash_budget: int = DEFAULT_NASH_BUDGET,
    profile_budget: int = DEFAULT_PROFILE_BUDGET,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    value_budget: int = DEFAULT_VALUE_BUDGET,
    threads: Optional[int] = None,
    cache: Optional[RunCache] = None,
) -> Tuple[List[EpisodeLog], MixedJointPolicy]:
    """Optimistic-equilibrium episode loop with single-trajectory execution.

    Per episode: play an ``eq_type`` equilibrium of the optimistic game over
    the current confidence set, execute one sampled deterministic profile,
    and refit the set. The output policy is drawn uniformly over the
    deployed equilibria with the run's generator.
    """
    logs, output, _ = _run_optimistic_equilibrium(
        env, candidates, num_episodes, beta, eq_type, policy_class, seed, alpha,
        None, nash_budget, profile_budget, enumeration_budget, value_budget,
        threads, cache,
    )
    return logs, output


def run_omle_multistep(
    env: PomgModel,
    candidates: CandidateFamily,
    num_episodes: int,
    beta: Union[None, float, Callable[[int], float]] = None,
    m: int = 2,
    eq_type: str = "CCE",
    policy_class: str = REACTIVE,
    seed: int = 0,
    alpha: float = 0.2,
    nash_budget: int = DEFAULT_NASH_BUDGET,
    profile_budget: int = DEFAULT_PROFILE_BUDGET,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    value_budget: int = DEFAULT_VALUE_BUDGET,
    threads: Optional[int] = None,
    cache: Optional[RunCache] = None,
) -> Tuple[List[EpisodeLog], MixedJointPolicy]:
    """Equilibrium loop with uniform-tail roll-ins for m-step identification.

    One profile is sampled per episode and reused across all H-m+1
    roll-ins; roll-in h follows it for h steps and then plays uniformly at
    random. Every roll-in trajectory enters the dataset; regret is logged
    against the episode's equilibrium policy.
    """
    logs, output, _ = _run_optimistic_equilibrium(
        env, candidates, num_episodes, beta, eq_type, policy_class, seed, alpha,
        m, nash_budget, profile_budget, enumeration_budget, value_budget,
        threads, cache,
    )
    return logs, output


# ---------------------------------------------------------------------------
# adversary learner
# ---------------------------------------------------------------------------

class Opponent:
    """Source of the non-learner policies, one joint choice per episode.

    ``prepare`` runs once with the true environment and the enumerated pure
    sets (harness privilege; respond must not peek further). ``respond``
    sees the learner's announced mixture over her own pure set before
    choosing, so adaptive adversaries are expressible.
    """

    def prepare(
        self,
        env: PomgModel,
        own_pures: Sequence[DetPolicy],
        opponent_profiles: Sequence[Tuple[DetPolicy, ...]],
        true_matrix: np.ndarray,
    ) -> None:
        pass

    def respond(
        self, episode: int, announced: np.ndarray, rng: np.random.Generator
    ) -> Tuple[DetPolicy, ...]:
        raise NotImplementedError


class FixedOpponent(Opponent):
    def __init__(self, policies: Sequence[DetPolicy]) -> None:
        self.policies = tuple(policies)

    def respond(self, episode, announced, rng):
        return self.policies


class RandomOpponent(Opponent):
    """Uniform over the opponents' joint pure profiles, fresh each episode."""

    def prepare(self, env, own_pures, opponent_profiles, true_matrix):
        self._profiles = list(opponent_profiles)

    def respond(self, episode, announced, rng):
        return self._profiles[int(rng.integers(len(self._profiles)))]


class BestResponseOpponent(Opponent):
    """Minimizes player 1's true value against the announced mixture."""

    def prepare(self, env, own_pures, opponent_profiles, true_matrix):
        self._profiles = list(opponent_profiles)
        self._matrix = true_matrix

    def respond(self, episode, announced, rng):
        exposure = announced @ self._matrix
        return self._profiles[int(np.argmin(exposure))]


class ScriptedOpponent(Opponent):
    """Plays a fixed schedule: a callable (episode, announced) -> policies,
    or a sequence cycled by episode."""

    def __init__(self, script) -> None:
        self.script = script

    def respond(self, episode, announced, rng):
        if callable(self.script):
            return tuple(self.script(episode, announced))
        return tuple(self.script[(episode - 1) % len(self.script)])


def run_omle_adversary(
    env: PomgModel,
    candidates: CandidateFamily,
    num_episodes: int,
    beta: Union[None, float, Callable[[int], float]] = None,
    opponent: Optional[Opponent] = None,
    seed: int = 0,
    policy_class: str = REACTIVE,
    alpha: float = 0.2,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    profile_budget: int = DEFAULT_PROFILE_BUDGET,
    value_budget: int = DEFAULT_VALUE_BUDGET,
    threads: Optional[int] = None,
    cache: Optional[RunCache] = None,
) -> List[EpisodeLog]:
    """Maximin episode loop for player 1 against an opponent source.

    Per episode the learner picks, over the confidence set, the candidate
    whose matrix game (own pures against opponents' joint pures) has the
    largest value, lowest candidate index on ties, and announces that
    model's maximin mixture. The increment logged is the true maximin value
    minus the announced profile's true value, clamped at 0 with the raw
    value retained.
    """
    _check_env(env, candidates)
    if num_episodes < 0:
        raise ValueError("num_episodes must be nonnegative")
    spec = candidates.spec
    if spec.num_players < 2:
        raise GateError("the adversary loop needs two or more players")
    if num_episodes == 0:
        raise PomgError("no policies were deployed (num_episodes=0), nothing to log")
    if opponent is None:
        opponent = BestResponseOpponent()
    n_threads = resolve_threads(threads)
    rng = np.random.default_rng(seed)
    beta_value = _resolve_beta(beta, candidates, num_episodes, 1.0, 0.05)
    revealing = single_step_predicate(alpha)
    base = build_confidence_set(candidates, [], beta_value, revealing)
    state = _LikelihoodState(candidates, base, beta_value)

    pure_sets = enumerate_pure_sets(spec, policy_class, enumeration_budget)
    own_pures = pure_sets[0]
    opponent_profiles = list(itertools.product(*pure_sets[1:]))

    def matrix_for(model: PomgModel) -> np.ndarray:
        tensors = game_tensors(
            model, pure_sets, value_budget=value_budget,
            tensor_budget=profile_budget, cache=cache, threads=n_threads,
        )
        return tensors[0].reshape(len(own_pures), len(opponent_profiles))

    def maximin_for(model: PomgModel) -> ZeroSumSolution:
        if cache is not None:
            key = (cache.fingerprint(model), _pure_sets_key(pure_sets))
            hit = cache.matrix_games.get(key)
            if hit is not None:
                return hit
        solution = solve_zero_sum(matrix_for(model))
        if cache is not None:
            cache.matrix_games[key] = solution
        return solution

    true_matrix = matrix_for(env)
    true_maximin = solve_zero_sum(true_matrix).value
    opponent.prepare(env, own_pures, opponent_profiles, true_matrix)
    played_value_cache: Dict[tuple, float] = {}

    logs: List[EpisodeLog] = []
    b = state.confidence_set()
    cumulative = 0.0
    for k in range(1, num_episodes + 1):
        started = time.perf_counter()
        members = sorted(b.member_indices)
        solutions = [(j, maximin_for(candidates.models[j])) for j in members]
        best_index, best_solution = max(
            solutions, key=lambda pair: (pair[1].value, -pair[0])
        )
        announced = np.asarray(best_solution.row_strategy, dtype=float)

        opp_policies = tuple(opponent.respond(k, announced.copy(), rng))
        if len(opp_policies) != spec.num_players - 1:
            raise ValueError(
                f"opponent returned {len(opp_policies)} policies for "
                f"{spec.num_players - 1} opponent players"
            )

        played_value = 0.0
        for s_idx in np.flatnonzero(announced > 0.0):
            key = (int(s_idx), opp_policies)
            if key not in played_value_cache:
                profile = JointDetPolicy(policies=(own_pures[int(s_idx)],) + opp_policies)
                played_value_cache[key] = policy_value(env, profile, 0, value_budget)
            played_value += float(announced[s_idx]) * played_value_cache[key]

        raw = true_maximin - played_value
        increment = max(raw, 0.0)
        cumulative += increment

        own_idx = _draw(rng, announced)
        mu = JointDetPolicy(policies=(own_pures[own_idx],) + opp_policies)
        trajectory = sample_trajectory(env, mu, rng)

        support = []
        weights = []
        for s_idx in np.flatnonzero(announced > 0.0):
            support.append(JointDetPolicy(policies=(own_pures[int(s_idx)],) + opp_policies))
            weights.append(float(announced[s_idx]))
        total = sum(weights)
        pi = MixedJointPolicy(
            support=tuple(support),
            weights=tuple(w / total for w in weights),
            product_form=True,
        )

        logs.append(
            EpisodeLog(
                episode=k,
                policy=pi,
                sampled=mu,
                trajectories=(trajectory,),
                set_size=len(members),
                member_indices=tuple(members),
                metric="maximin",
                increment=increment,
                raw_increment=raw,
                cumulative=cumulative,
                optimist_index=best_index,
                wall_time_s=time.perf_counter() - started,
            )
        )
        state.add([trajectory])
        b = state.confidence_set()
    return logs


# ---------------------------------------------------------------------------
# estimator wrappers
# ---------------------------------------------------------------------------

class OmleEquilibriumLearner(BaseEstimator):
    """Estimator wrapper around run_omle_equilibrium.

    fit(env) runs the loop and exposes episode_logs_, output_policy_, and
    final_confidence_set_.
    """

    def __init__(
        self,
        candidates: Optional[CandidateFamily] = None,
        num_episodes: int = 100,
        beta: Union[None, float, Callable[[int], float]] = None,
        eq_type: str = "CCE",
        policy_class: str = REACTIVE,
        alpha: float = 0.2,
        seed: int = 0,
        nash_budget: int = DEFAULT_NASH_BUDGET,
        profile_budget: int = DEFAULT_PROFILE_BUDGET,
        enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
        value_budget: int = DEFAULT_VALUE_BUDGET,
        threads: Optional[int] = None,
        cache: Optional[RunCache] = None,
    ) -> None:
        self.candidates = candidates
        self.num_episodes = num_episodes
        self.beta = beta
        self.eq_type = eq_type
        self.policy_class = policy_class
        self.alpha = alpha
        self.seed = seed
        self.nash_budget = nash_budget
        self.profile_budget = profile_budget
        self.enumeration_budget = enumeration_budget
        self.value_budget = value_budget
        self.threads = threads
        self.cache = cache

    def fit(self, env: PomgModel, y=None) -> "OmleEquilibriumLearner":
        if self.candidates is None:
            raise ValueError("candidates must be set before fitting")
        logs, output, final = _run_optimistic_equilibrium(
            env, self.candidates, self.num_episodes, self.beta, self.eq_type,
            self.policy_class, self.seed, self.alpha, None, self.nash_budget,
            self.profile_budget, self.enumeration_budget, self.value_budget,
            self.threads, self.cache,
        )
        self.episode_logs_ = logs
        self.output_policy_ = output
        self.final_confidence_set_ = final
        return self


class MultiStepOmleLearner(BaseEstimator):
    """Estimator wrapper around run_omle_multistep."""

    def __init__(
        self,
        candidates: Optional[CandidateFamily] = None,
        num_episodes: int = 100,
        beta: Union[None, float, Callable[[int], float]] = None,
        m: int = 2,
        eq_type: str = "CCE",
        policy_class: str = REACTIVE,
        alpha: float = 0.2,
        seed: int = 0,
        nash_budget: int = DEFAULT_NASH_BUDGET,
        profile_budget: int = DEFAULT_PROFILE_BUDGET,
        enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
        value_budget: int = DEFAULT_VALUE_BUDGET,
        threads: Optional[int] = None,
        cache: Optional[RunCache] = None,
    ) -> None:
        self.candidates = candidates
        self.num_episodes = num_episodes
        self.beta = beta
        self.m = m
        self.eq_type = eq_type
        self.policy_class = policy_class
        self.alpha = alpha
        self.seed = seed
        self.nash_budget = nash_budget
        self.profile_budget = profile_budget
        self.enumeration_budget = enumeration_budget
        self.value_budget = value_budget
        self.threads = threads
        self.cache = cache

    def fit(self, env: PomgModel, y=None) -> "MultiStepOmleLearner":
        if self.candidates is None:
            raise ValueError("candidates must be set before fitting")
        logs, output, final = _run_optimistic_equilibrium(
            env, self.candidates, self.num_episodes, self.beta, self.eq_type,
            self.policy_class, self.seed, self.alpha, self.m, self.nash_budget,
            self.profile_budget, self.enumeration_budget, self.value_budget,
            self.threads, self.cache,
        )
        self.episode_logs_ = logs
        self.output_policy_ = output
        self.final_confidence_set_ = final
        return self


class OmleAdversaryLearner(BaseEstimator):
    """Estimator wrapper around run_omle_adversary."""

    def __init__(
        self,
        candidates: Optional[CandidateFamily] = None,
        num_episodes: int = 100,
        beta: Union[None, float, Callable[[int], float]] = None,
        opponent: Optional[Opponent] = None,
        policy_class: str = REACTIVE,
        alpha: float = 0.2,
        seed: int = 0,
        enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
        profile_budget: int = DEFAULT_PROFILE_BUDGET,
        value_budget: int = DEFAULT_VALUE_BUDGET,
        threads: Optional[int] = None,
        cache: Optional[RunCache] = None,
    ) -> None:
        self.candidates = candidates
        self.num_episodes = num_episodes
        self.beta = beta
        self.opponent = opponent
        self.policy_class = policy_class
        self.alpha = alpha
        self.seed = seed
        self.enumeration_budget = enumeration_budget
        self.profile_budget = profile_budget
        self.value_budget = value_budget
        self.threads = threads
        self.cache = cache

    def fit(self, env: PomgModel, y=None) -> "OmleAdversaryLearner":
        if self.candidates is None:
            raise ValueError("candidates must be set before fitting")
        self.episode_logs_ = run_omle_adversary(
            env, self.candidates, self.num_episodes, self.beta, self.opponent,
            self.seed, self.policy_class, self.alpha, self.enumeration_budget,
            self.profile_budget, self.value_budget, self.threads, self.cache,
        )
        self.final_members_ = self.episode_logs_[-1].member_indices if self.episode_logs_ else ()
        return self
