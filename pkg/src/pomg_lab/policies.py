"""Deterministic history-dependent policies, mixtures, and modifications.

Two policy classes exist. The full-history class keys decisions on the
player's entire private history ``(o_1, a_1, ..., o_h)``; it is the default
and grows doubly exponentially. The reactive class keys decisions on the pair
``(h, o_h)`` only and is the explicit opt-in for larger specs. Enumeration
order is deterministic and defines the pure-strategy indices used everywhere.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .errors import BudgetExceededError, PolicyDomainError
from .model import PomgSpec

FULL_HISTORY = "full-history"
REACTIVE = "reactive"
POLICY_CLASSES = (FULL_HISTORY, REACTIVE)

DEFAULT_ENUMERATION_BUDGET = 1_000_000

HistoryKey = Tuple[int, ...]


def _check_class(policy_class: str) -> None:
    if policy_class not in POLICY_CLASSES:
        raise ValueError(f"unknown policy class {policy_class!r}, expected one of {POLICY_CLASSES}")


def history_keys(spec: PomgSpec, player: int, policy_class: str) -> List[HistoryKey]:
    """All decision keys for the player, in the canonical order.

    Full-history keys are every index-valid sequence (o_1,a_1,...,o_h) for
    h = 1..H, ordered by step then lexicographically. Reactive keys are all
    (h, o) pairs in the same order. The order is what makes enumerated
    pure-strategy indices reproducible.
    """
    _check_class(policy_class)
    n_obs = spec.observations_per_player[player]
    n_act = spec.actions_per_player[player]
    keys: List[HistoryKey] = []
    if policy_class == REACTIVE:
        for h in range(1, spec.horizon + 1):
            for o in range(n_obs):
                keys.append((h, o))
        return keys
    prefixes: List[HistoryKey] = [()]
    for _ in range(1, spec.horizon + 1):
        step_keys = [prefix + (o,) for prefix in prefixes for o in range(n_obs)]
        keys.extend(step_keys)
        prefixes = [key + (a,) for key in step_keys for a in range(n_act)]
    return keys


def reactive_key(history: HistoryKey) -> Tuple[int, int]:
    """Map a full private history (o_1,a_1,...,o_h) to its reactive key (h, o_h)."""
    if len(history) % 2 == 0:
        raise ValueError("a decision history must end with an observation")
    return ((len(history) + 1) // 2, history[-1])


@dataclass(frozen=True)
class DetPolicy:
    """A deterministic decision table for one player."""

    player: int
    policy_class: str
    entries: Tuple[Tuple[HistoryKey, int], ...]

    def __post_init__(self) -> None:
        _check_class(self.policy_class)
        normalized = tuple(sorted((tuple(key), int(action)) for key, action in self.entries))
        object.__setattr__(self, "entries", normalized)

    @classmethod
    def from_table(cls, player: int, policy_class: str, table: Mapping[HistoryKey, int]) -> "DetPolicy":
        return cls(player=player, policy_class=policy_class, entries=tuple(table.items()))

    @cached_property
    def table(self) -> Dict[HistoryKey, int]:
        return dict(self.entries)

    def decide(self, history: HistoryKey) -> int:
        """Action for the private history (o_1,a_1,...,o_h).

        Faults with the offending history when the table has no entry.
        """
        key = reactive_key(history) if self.policy_class == REACTIVE else tuple(history)
        try:
            return self.table[key]
        except KeyError:
            raise PolicyDomainError(
                f"player {self.player} {self.policy_class} policy has no entry for history {history!r} "
                f"(key {key!r})"
            ) from None


@dataclass(frozen=True)
class JointDetPolicy:
    """One DetPolicy per player, sharing a spec."""

    policies: Tuple[DetPolicy, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "policies", tuple(self.policies))
        for i, policy in enumerate(self.policies):
            if policy.player != i:
                raise ValueError(f"policy at position {i} is labeled for player {policy.player}")


@dataclass(frozen=True)
class Mixture:
    """A finite distribution over hashable items (policies or profiles)."""

    support: Tuple[object, ...]
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights must have equal length")
        if len(self.support) != len(set(self.support)):
            raise ValueError("mixture support has duplicate entries")
        if any(w < 0 for w in self.weights):
            raise ValueError("mixture weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {sum(self.weights)!r}, expected 1")


@dataclass(frozen=True)
class MixedJointPolicy:
    """A finite distribution over joint deterministic policies.

    ``product_form`` marks distributions that factor across players (Nash
    outputs); correlated distributions (CCE/CE outputs) leave it unset.
    """

    support: Tuple[JointDetPolicy, ...]
    weights: Tuple[float, ...]
    product_form: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights must have equal length")
        if len(self.support) != len(set(self.support)):
            raise ValueError("mixed policy support has duplicate profiles")
        if any(w < 0 for w in self.weights):
            raise ValueError("mixed policy weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError(f"mixed policy weights sum to {sum(self.weights)!r}, expected 1")

    @property
    def num_players(self) -> int:
        return len(self.support[0].policies)

    def check_product_form(self, tol: float = 1e-9) -> bool:
        """True iff every joint weight equals the product of its marginals."""
        marginals = [marginalize(self, i) for i in range(self.num_players)]
        lookup = [dict(zip(m.support, m.weights)) for m in marginals]
        for profile, weight in zip(self.support, self.weights):
            product = 1.0
            for i, policy in enumerate(profile.policies):
                product *= lookup[i].get(policy, 0.0)
            if abs(product - weight) > tol:
                return False
        return True


@dataclass(frozen=True)
class StrategyModification:
    """A pure-strategy swap map for one player.

    The swap must be total over the player's enumerated pure-strategy set;
    ``from_indices`` builds one from positions in that enumeration.
    """

    player: int
    swap: Tuple[Tuple[DetPolicy, DetPolicy], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "swap", tuple(self.swap))

    @classmethod
    def from_indices(
        cls, player: int, pure_set: Sequence[DetPolicy], mapping: Mapping[int, int]
    ) -> "StrategyModification":
        pairs = []
        for idx, policy in enumerate(pure_set):
            target = mapping.get(idx, idx)
            pairs.append((policy, pure_set[target]))
        return cls(player=player, swap=tuple(pairs))

    @cached_property
    def swap_table(self) -> Dict[DetPolicy, DetPolicy]:
        return dict(self.swap)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def count_det_policies(spec: PomgSpec, player: int, policy_class: str) -> int:
    return spec.actions_per_player[player] ** len(history_keys(spec, player, policy_class))


def enumerate_det_policies(
    spec: PomgSpec,
    player: int,
    policy_class: str = FULL_HISTORY,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> List[DetPolicy]:
    """All deterministic policies of the class, in canonical order.

    Policies are ordered lexicographically by their action assignment over
    the canonical key order (last key varies fastest), so index j in the
    returned list is the reproducible pure-strategy index used everywhere.
    """
    keys = history_keys(spec, player, policy_class)
    n_act = spec.actions_per_player[player]
    count = n_act ** len(keys)
    if count > budget:
        raise BudgetExceededError(
            f"player {player} has {count} {policy_class} policies, over the budget of {budget}"
        )
    policies = []
    for assignment in itertools.product(range(n_act), repeat=len(keys)):
        policies.append(
            DetPolicy(player=player, policy_class=policy_class, entries=tuple(zip(keys, assignment)))
        )
    return policies


def enumerate_pure_sets(
    spec: PomgSpec, policy_class: str = FULL_HISTORY, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> List[List[DetPolicy]]:
    return [enumerate_det_policies(spec, i, policy_class, budget) for i in range(spec.num_players)]


def product_policy(marginals: Sequence[Mixture]) -> MixedJointPolicy:
    """Independent per-player mixtures combined into one joint mixture."""
    support: List[JointDetPolicy] = []
    weights: List[float] = []
    for combo in itertools.product(*(zip(m.support, m.weights) for m in marginals)):
        policies = tuple(policy for policy, _ in combo)
        weight = 1.0
        for _, w in combo:
            weight *= w
        support.append(JointDetPolicy(policies=policies))
        weights.append(weight)
    return MixedJointPolicy(support=tuple(support), weights=tuple(weights), product_form=True)


def apply_modification(phi: StrategyModification, pi: MixedJointPolicy) -> MixedJointPolicy:
    """Swap player i's pure strategy inside every support profile.

    Correlation with the other players is preserved: profile (mu_i, mu_-i)
    with weight w becomes (phi(mu_i), mu_-i) with weight w, and weights of
    collided profiles merge.
    """
    table = phi.swap_table
    merged: Dict[JointDetPolicy, float] = {}
    order: List[JointDetPolicy] = []
    for profile, weight in zip(pi.support, pi.weights):
        original = profile.policies[phi.player]
        if original not in table:
            raise PolicyDomainError(
                f"strategy modification for player {phi.player} does not cover a support policy"
            )
        policies = list(profile.policies)
        policies[phi.player] = table[original]
        swapped = JointDetPolicy(policies=tuple(policies))
        if swapped not in merged:
            merged[swapped] = 0.0
            order.append(swapped)
        merged[swapped] += weight
    return MixedJointPolicy(
        support=tuple(order),
        weights=tuple(merged[p] for p in order),
        product_form=pi.product_form,
    )


def marginalize(pi: MixedJointPolicy, player: int) -> Mixture:
    """The player's marginal distribution over her own pure strategies."""
    merged: Dict[DetPolicy, float] = {}
    order: List[DetPolicy] = []
    for profile, weight in zip(pi.support, pi.weights):
        policy = profile.policies[player]
        if policy not in merged:
            merged[policy] = 0.0
            order.append(policy)
        merged[policy] += weight
    return Mixture(support=tuple(order), weights=tuple(merged[p] for p in order))


def exclude(pi: MixedJointPolicy, player: int) -> Mixture:
    """The joint distribution of every player except ``player``.

    Support items are tuples of the other players' DetPolicy objects, in
    player order.
    """
    merged: Dict[Tuple[DetPolicy, ...], float] = {}
    order: List[Tuple[DetPolicy, ...]] = []
    for profile, weight in zip(pi.support, pi.weights):
        others = tuple(p for i, p in enumerate(profile.policies) if i != player)
        if others not in merged:
            merged[others] = 0.0
            order.append(others)
        merged[others] += weight
    return Mixture(support=tuple(order), weights=tuple(merged[p] for p in order))


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def policy_to_dict(policy: DetPolicy) -> dict:
    return {
        "player": policy.player,
        "class": policy.policy_class,
        "entries": [[list(key), action] for key, action in policy.entries],
    }


def policy_from_dict(doc: dict) -> DetPolicy:
    return DetPolicy(
        player=int(doc["player"]),
        policy_class=doc["class"],
        entries=tuple((tuple(key), int(action)) for key, action in doc["entries"]),
    )


def joint_policy_to_dict(joint: JointDetPolicy) -> dict:
    return {"players": [policy_to_dict(p) for p in joint.policies]}


def joint_policy_from_dict(doc: dict) -> JointDetPolicy:
    return JointDetPolicy(policies=tuple(policy_from_dict(p) for p in doc["players"]))


def mixed_policy_to_dict(pi: MixedJointPolicy) -> dict:
    return {
        "support": [joint_policy_to_dict(p) for p in pi.support],
        "weights": list(pi.weights),
        "product_form": pi.product_form,
    }


def mixed_policy_from_dict(doc: dict) -> MixedJointPolicy:
    return MixedJointPolicy(
        support=tuple(joint_policy_from_dict(p) for p in doc["support"]),
        weights=tuple(float(w) for w in doc["weights"]),
        product_form=bool(doc["product_form"]),
    )
