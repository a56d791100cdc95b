"""Built-in environments.

Two hardness constructions (a single-step-revealing circle game whose value
hinges on information the min player only gets on designated red states, and
a multi-step-revealing chain where the max player must reproduce a hidden
bit string), a rejection-sampling generator for revealing instances, a
perturbation generator for finite candidate families, and the fixed
two-state benchmark instances used by the experiment configs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import BudgetExceededError, GateError
from .likelihood import CandidateFamily
from .model import PomgModel, PomgSpec, validate_model
from .policies import FULL_HISTORY, REACTIVE, DetPolicy
from .revealing import per_step_sigmas, sigma_s_min

REJECTION_BUDGET = 1000
REGENERATION_BUDGET = 1000


# ---------------------------------------------------------------------------
# single-step hardness construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SinglestepHardInstance:
    """Circle game plus the policies its analysis designates.

    scripted_min plays b0 until some observation reveals the current half,
    then denies that half (b0 against upper, b1 against lower). The two max
    policies steer through black circles only, or through red circles only.
    """

    model: PomgModel
    scripted_min: DetPolicy
    red_avoiding_max: DetPolicy
    always_red_max: DetPolicy


def _circle_index(level: int, upper: bool, which: int) -> int:
    if level == 1:
        return 0 if upper else 1
    return 2 + 4 * (level - 2) + (0 if upper else 2) + which


def hard_instance_singlestep(num_levels: int, seed: int = 0) -> SinglestepHardInstance:
    """Zero-sum circle game over ``num_levels`` levels (horizon L+1).

    The max player observes the state directly and steers among circle
    pairs; the min player sees a dummy symbol except on the per-level red
    circles and on the terminal rectangles, and her final action decides
    which rectangle is reached (b1 rewards the upper half, b0 the lower
    half). One circle per pair and half is designated red by the
    construction seed. Emissions are deterministic and injective, so every
    per-step emission matrix has smallest singular value exactly 1.
    """
    if num_levels < 2:
        raise ValueError("the construction needs at least 2 levels")
    levels = num_levels
    horizon = levels + 1
    n_states = 4 * levels
    win, lose = n_states - 2, n_states - 1
    rng = np.random.default_rng(seed)
    red_upper = [int(rng.integers(0, 2)) for _ in range(levels - 1)]  # levels 2..L
    red_lower = [int(rng.integers(0, 2)) for _ in range(levels - 1)]

    def is_upper(state: int) -> bool:
        if state == 0:
            return True
        if state == 1:
            return False
        if state >= n_states - 2:
            raise ValueError("rectangles have no half")
        return (state - 2) % 4 < 2

    red_states = {
        _circle_index(level, True, red_upper[level - 2]) for level in range(2, levels + 1)
    } | {
        _circle_index(level, False, red_lower[level - 2]) for level in range(2, levels + 1)
    }
    revealed = red_states | {win, lose}

    spec = PomgSpec(
        horizon=horizon,
        num_players=2,
        num_states=n_states,
        actions_per_player=(2, 2),
        observations_per_player=(n_states, n_states + 1),
    )

    # Min symbol 0 is the dummy; symbol 1+s names state s.
    def min_symbol(state: int) -> int:
        return 1 + state if state in revealed else 0

    emit_step = np.zeros((n_states * (n_states + 1), n_states))
    for s in range(n_states):
        emit_step[s * (n_states + 1) + min_symbol(s), s] = 1.0
    emit = tuple(emit_step for _ in range(horizon))

    trans: List[np.ndarray] = []
    for h in range(1, horizon + 1):
        t = np.zeros((n_states, n_states, 4))
        for s in range(n_states):
            for a_max in range(2):
                for b_min in range(2):
                    a_joint = a_max * 2 + b_min
                    if h < levels and s in _level_states(h, n_states):
                        nxt = _circle_index(h + 1, is_upper(s), a_max)
                    elif h == levels and s in _level_states(levels, n_states):
                        rewarded = b_min == (1 if is_upper(s) else 0)
                        nxt = win if rewarded else lose
                    else:
                        nxt = s
                    t[nxt, s, a_joint] = 1.0
        trans.append(t)

    r_max = np.zeros((horizon, n_states))
    r_max[horizon - 1, win] = 1.0
    r_min = np.ones((horizon, n_states + 1))
    r_min[horizon - 1, 1 + win] = 0.0

    mu1 = np.zeros(n_states)
    mu1[0] = mu1[1] = 0.5

    model = PomgModel(
        spec=spec,
        mu1=mu1,
        trans=tuple(trans),
        emit=emit,
        rewards=(r_max, r_min),
        metadata={
            "family": "hard-singlestep",
            "levels": levels,
            "construction_seed": seed,
            "red_upper": red_upper,
            "red_lower": red_lower,
            "win_state": win,
            "lose_state": lose,
        },
    )
    report = validate_model(model)
    assert report.ok, report.violations

    scripted_min = _scripted_min_policy(model, revealed)
    red_avoiding_max = _steering_max_policy(model, red_upper, red_lower, avoid=True)
    always_red_max = _steering_max_policy(model, red_upper, red_lower, avoid=False)
    return SinglestepHardInstance(
        model=model,
        scripted_min=scripted_min,
        red_avoiding_max=red_avoiding_max,
        always_red_max=always_red_max,
    )


def _level_states(level: int, n_states: int) -> Tuple[int, ...]:
    if level == 1:
        return (0, 1)
    base = 2 + 4 * (level - 2)
    return tuple(range(base, base + 4))


def _scripted_min_policy(model: PomgModel, revealed: set) -> DetPolicy:
    """Full-history min policy over the keys reachable under any max play.

    The decision rule scans the observation prefix for a circle sighting;
    a sighting pins the half, and the policy denies it (upper half gets b0,
    lower half gets b1). Without a sighting it defaults to b0.
    """
    spec = model.spec
    n_states = spec.num_states
    win, lose = n_states - 2, n_states - 1

    def rule(obs_prefix: Tuple[int, ...]) -> int:
        for symbol in obs_prefix:
            state = symbol - 1
            if symbol == 0 or state in (win, lose):
                continue
            upper = state == 0 or (state >= 2 and (state - 2) % 4 < 2)
            return 0 if upper else 1
        return 0

    table = {}
    # Branch over every max action sequence; the min action along each
    # branch is fixed by the rule, so the enumerated keys are exactly the
    # histories this policy can experience.
    frontier = [(s, ()) for s in np.flatnonzero(model.mu1)]
    for h in range(1, spec.horizon + 1):
        next_frontier = []
        for state, key in frontier:
            o_joint = int(np.argmax(model.emit[h - 1][:, state]))
            o_min = o_joint % (n_states + 1)
            new_key = key + (o_min,)
            obs_prefix = new_key[::2]
            action = rule(obs_prefix)
            table[new_key] = action
            if h < spec.horizon:
                for a_max in range(2):
                    a_joint = a_max * 2 + action
                    nxt = int(np.argmax(model.trans[h - 1][:, state, a_joint]))
                    next_frontier.append((nxt, new_key + (action,)))
        frontier = next_frontier
    return DetPolicy.from_table(1, FULL_HISTORY, table)


def _steering_max_policy(
    model: PomgModel, red_upper: List[int], red_lower: List[int], avoid: bool
) -> DetPolicy:
    spec = model.spec
    levels = spec.horizon - 1
    table = {}
    for h in range(1, spec.horizon + 1):
        for state in range(spec.num_states):
            action = 0
            if h < levels and state in _level_states(h, spec.num_states):
                upper = state == 0 or (state >= 2 and (state - 2) % 4 < 2)
                red = red_upper[h - 1] if upper else red_lower[h - 1]
                action = (1 - red) if avoid else red
            table[(h, state)] = action
    return DetPolicy.from_table(0, REACTIVE, table)


# ---------------------------------------------------------------------------
# multi-step hardness construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MultistepHardInstance:
    """Bit-chain game plus the designated policies of its analysis.

    designated_max reproduces the hidden bit string regardless of
    observations; fixed_b0_min always plays the opponent action the
    reduction fixes.
    """

    model: PomgModel
    designated_max: DetPolicy
    fixed_b0_min: DetPolicy


def hard_instance_multistep(horizon: int, seed: int = 0) -> MultistepHardInstance:
    """Zero-sum bit-guessing chain over states p0, p1, q0, q1.

    A hidden bit string x drives the transitions: from p1 the chain stays
    in p1 only when the max player plays a_{x_h} and the min player plays
    b0; b1 diverts p_i to q_i, anything else falls to the absorbing-ish p0
    (and q states drain to q1). Observations are shared three-symbol
    signals: q0 emits o0, q1 emits o1, p states emit a dummy until the
    final step, where they reveal their index. The max player is rewarded
    whenever she observes o1, so the maximin value is exactly 1.
    """
    if horizon < 3:
        raise ValueError("the construction needs horizon >= 3")
    rng = np.random.default_rng(seed)
    x_bits = [int(rng.integers(0, 2)) for _ in range(horizon)]

    p0, p1, q0, q1 = 0, 1, 2, 3
    o_dummy, o0, o1 = 0, 1, 2
    spec = PomgSpec(
        horizon=horizon,
        num_players=2,
        num_states=4,
        actions_per_player=(2, 2),
        observations_per_player=(3, 3),
    )

    def shared(symbol: int) -> int:
        return symbol * 3 + symbol

    trans: List[np.ndarray] = []
    for h in range(1, horizon + 1):
        t = np.zeros((4, 4, 4))
        for a_max in range(2):
            for b_min in range(2):
                a_joint = a_max * 2 + b_min
                t[q0 if b_min == 1 else p0, p0, a_joint] = 1.0
                if b_min == 1:
                    t[q1, p1, a_joint] = 1.0
                elif a_max == x_bits[h - 1]:
                    t[p1, p1, a_joint] = 1.0
                else:
                    t[p0, p1, a_joint] = 1.0
                t[q1, q0, a_joint] = 1.0
                t[q1, q1, a_joint] = 1.0
        trans.append(t)

    emit: List[np.ndarray] = []
    for h in range(1, horizon + 1):
        e = np.zeros((9, 4))
        e[shared(o_dummy if h < horizon else o0), p0] = 1.0
        e[shared(o_dummy if h < horizon else o1), p1] = 1.0
        e[shared(o0), q0] = 1.0
        e[shared(o1), q1] = 1.0
        emit.append(e)

    r_max = np.zeros((horizon, 3))
    r_max[:, o1] = 1.0
    r_min = 1.0 - r_max

    mu1 = np.zeros(4)
    mu1[p1] = 1.0

    model = PomgModel(
        spec=spec,
        mu1=mu1,
        trans=tuple(trans),
        emit=tuple(emit),
        rewards=(r_max, r_min.copy()),
        metadata={
            "family": "hard-multistep",
            "construction_seed": seed,
            "x_bits": x_bits,
        },
    )
    report = validate_model(model)
    assert report.ok, report.violations

    designated_max = DetPolicy.from_table(
        0,
        REACTIVE,
        {(h, o): x_bits[h - 1] for h in range(1, horizon + 1) for o in range(3)},
    )
    fixed_b0_min = DetPolicy.from_table(
        1, REACTIVE, {(h, o): 0 for h in range(1, horizon + 1) for o in range(3)}
    )
    return MultistepHardInstance(
        model=model, designated_max=designated_max, fixed_b0_min=fixed_b0_min
    )


# ---------------------------------------------------------------------------
# random generators
# ---------------------------------------------------------------------------

def _random_columns(rng: np.random.Generator, rows: int, cols_shape: Tuple[int, ...]) -> np.ndarray:
    raw = rng.gamma(1.0, 1.0, size=(rows,) + cols_shape) + 1e-9
    return raw / raw.sum(axis=0)


def random_revealing_pomg(
    spec: PomgSpec,
    alpha_target: float,
    seed: int,
    identity_emissions: bool = False,
    max_rejections: int = REJECTION_BUDGET,
) -> PomgModel:
    """Random instance whose every emission matrix clears ``alpha_target``.

    Transitions, rewards, and the start distribution are drawn once;
    emissions are redrawn until min_h sigma_S >= alpha_target. Generation
    is a pure function of (spec, alpha_target, seed). identity_emissions
    requires a square observation space and skips the rejection loop.
    """
    s = spec.num_states
    o = spec.num_joint_observations
    if o < s:
        raise GateError(
            f"single-step revealing needs at least as many joint observations as "
            f"states, got O={o} < S={s}"
        )
    rng = np.random.default_rng(seed)
    mu1 = _random_columns(rng, s, ())
    trans = tuple(
        _random_columns(rng, s, (s, spec.num_joint_actions)) for _ in range(spec.horizon)
    )
    rewards = tuple(
        rng.random((spec.horizon, spec.observations_per_player[i]))
        for i in range(spec.num_players)
    )
    if identity_emissions:
        if o != s:
            raise GateError("identity emissions need O == S")
        emit = tuple(np.eye(s) for _ in range(spec.horizon))
        return PomgModel(spec=spec, mu1=mu1, trans=trans, emit=emit, rewards=rewards,
                         metadata={"family": "random-revealing", "seed": seed})

    for _ in range(max_rejections + 1):
        emit = tuple(_random_columns(rng, o, (s,)) for _ in range(spec.horizon))
        if min(sigma_s_min(e) for e in emit) >= alpha_target:
            return PomgModel(
                spec=spec,
                mu1=mu1,
                trans=trans,
                emit=emit,
                rewards=rewards,
                metadata={"family": "random-revealing", "seed": seed},
            )
    raise BudgetExceededError(
        f"no emission draw reached alpha={alpha_target} within {max_rejections} rejections"
    )


def candidate_family_around(
    truth: PomgModel,
    count: int,
    scale: float,
    seed: int,
    revealing: Optional[Callable[[PomgModel], bool]] = None,
    max_regenerations: int = REGENERATION_BUDGET,
) -> CandidateFamily:
    """Finite family: the truth plus ``count - 1`` perturbed copies.

    Each copy reweights every transition and emission column toward a fresh
    flat-Dirichlet draw: col' = (col + scale * d) / (1 + scale). The start
    distribution and rewards are shared across the family. Members failing
    the ``revealing`` predicate are regenerated until the budget runs out.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    rng = np.random.default_rng(seed)
    spec = truth.spec

    def perturb_columns(matrix: np.ndarray) -> np.ndarray:
        rows = matrix.shape[0]
        flat = matrix.reshape(rows, -1).copy()
        for col in range(flat.shape[1]):
            noise = rng.dirichlet(np.ones(rows))
            flat[:, col] = (flat[:, col] + scale * noise) / (1.0 + scale)
        return flat.reshape(matrix.shape)

    members = [truth]
    regenerations = 0
    while len(members) < count:
        candidate = PomgModel(
            spec=spec,
            mu1=truth.mu1.copy(),
            trans=tuple(perturb_columns(t) for t in truth.trans),
            emit=tuple(perturb_columns(e) for e in truth.emit),
            rewards=tuple(r.copy() for r in truth.rewards),
            metadata={"family": "perturbed", "index": len(members)},
        )
        if revealing is not None and not revealing(candidate):
            regenerations += 1
            if regenerations > max_regenerations:
                raise BudgetExceededError(
                    f"exceeded {max_regenerations} regenerations while building a "
                    f"revealing candidate family"
                )
            continue
        members.append(candidate)
    return CandidateFamily(models=tuple(members), truth_index=0)


# ---------------------------------------------------------------------------
# fixed benchmark instances
# ---------------------------------------------------------------------------

def _two_state_transitions(stay_low: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    trans = []
    for _ in range(2):
        t = np.zeros((2, 2, 4))
        for s in range(2):
            for a in range(4):
                t[0, s, a] = stay_low[s, a]
                t[1, s, a] = 1.0 - stay_low[s, a]
        trans.append(t)
    return trans[0], trans[1]


def benchmark_two_state_general_sum() -> PomgModel:
    """Two-state, horizon-2 general-sum benchmark with spiky emissions.

    Player 1 is paid for low final observations, player 2 mostly for high
    ones, and each player's first action pulls the hidden state hard in her
    preferred direction (joint actions ordered (a1,a2) with a1 slowest), so
    uniform play leaves a lot of value on the table for both. The spiky
    emissions keep candidate models statistically well separated.
    """
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    emit_step = np.array(
        [
            [0.91, 0.03],
            [0.03, 0.03],
            [0.03, 0.03],
            [0.03, 0.91],
        ]
    )
    # P(next = 0) per (state, joint action): a1=0 pushes low, a2=1 pushes high.
    stay_low = np.array([[0.96, 0.60, 0.40, 0.04], [0.90, 0.55, 0.45, 0.10]])
    r1 = np.array([[0.0, 0.0], [1.0, 0.0]])
    r2 = np.array([[0.0, 0.0], [0.25, 1.0]])
    model = PomgModel(
        spec=spec,
        mu1=np.array([0.5, 0.5]),
        trans=_two_state_transitions(stay_low),
        emit=(emit_step, emit_step.copy()),
        rewards=(r1, r2),
        metadata={"family": "benchmark-two-state-general-sum"},
    )
    assert validate_model(model).ok
    return model


def benchmark_two_state_zero_sum() -> PomgModel:
    """Two-state constant-sum benchmark with shared observations.

    Both players see the same binary signal (the joint emission is
    diagonal), and per-step rewards satisfy r1 + r2 = 1, so the game is
    constant-sum and the Nash route applies. As in the general-sum
    benchmark, the first actions steer the hidden state strongly.
    """
    spec = PomgSpec(2, 2, 2, (2, 2), (2, 2))
    emit_step = np.array(
        [
            [0.93, 0.07],
            [0.0, 0.0],
            [0.0, 0.0],
            [0.07, 0.93],
        ]
    )
    stay_low = np.array([[0.95, 0.55, 0.45, 0.05], [0.88, 0.52, 0.48, 0.12]])
    r1 = np.array([[0.0, 0.0], [1.0, 0.0]])
    r2 = 1.0 - r1
    model = PomgModel(
        spec=spec,
        mu1=np.array([0.5, 0.5]),
        trans=_two_state_transitions(stay_low),
        emit=(emit_step, emit_step.copy()),
        rewards=(r1, r2),
        metadata={"family": "benchmark-two-state-zero-sum"},
    )
    assert validate_model(model).ok
    return model


def contrast_family(
    truth: PomgModel,
    seed: int = 0,
    floor: float = 5e-4,
) -> CandidateFamily:
    """Eight candidates with graded statistical contrast against the truth.

    Every member that distorts values also concentrates each state's
    emission on the wrong joint observation channel (a cyclic shift of the
    truth's modal channel, with a small floor elsewhere). Such a shift
    costs several nats per trajectory regardless of the policy played, so
    those members leave any likelihood ball quickly. The remaining two
    members are small jitters of the truth; they stay in the ball but
    their values are close to the truth's, so they barely move the
    optimistic game. Rewards and the start distribution are shared.
    """
    rng = np.random.default_rng(seed)
    spec = truth.spec
    n_obs = spec.num_joint_observations

    def shifted_emissions(shift: int) -> Tuple[np.ndarray, ...]:
        emit = []
        for e in truth.emit:
            out = np.full_like(e, floor)
            for s in range(spec.num_states):
                channel = (int(np.argmax(e[:, s])) + shift) % n_obs
                out[channel, s] = 0.0
                out[channel, s] = 1.0 - out[:, s].sum()
            emit.append(out)
        return tuple(emit)

    def reversed_transitions() -> Tuple[np.ndarray, ...]:
        return tuple(t[::-1, :, :].copy() for t in truth.trans)

    def jitter(trans, emit, scale: float):
        def pert(matrix: np.ndarray) -> np.ndarray:
            rows = matrix.shape[0]
            flat = matrix.reshape(rows, -1).copy()
            for col in range(flat.shape[1]):
                noise = rng.dirichlet(np.ones(rows))
                flat[:, col] = (flat[:, col] + scale * noise) / (1.0 + scale)
            return flat.reshape(matrix.shape)

        return tuple(pert(t) for t in trans), tuple(pert(e) for e in emit)

    def assemble(trans, emit, tag: str) -> PomgModel:
        return PomgModel(
            spec=spec,
            mu1=truth.mu1.copy(),
            trans=tuple(np.asarray(t).copy() for t in trans),
            emit=tuple(np.asarray(e).copy() for e in emit),
            rewards=tuple(r.copy() for r in truth.rewards),
            metadata={"family": "contrast", "variant": tag},
        )

    jit_shift = jitter(truth.trans, shifted_emissions(2), 0.1)
    jit_truth_a = jitter(truth.trans, truth.emit, 0.05)
    jit_truth_b = jitter(truth.trans, truth.emit, 0.05)
    members = (
        truth,
        assemble(truth.trans, shifted_emissions(1), "emit-shift-1"),
        assemble(truth.trans, shifted_emissions(2), "emit-shift-2"),
        assemble(reversed_transitions(), shifted_emissions(3), "rev-emit-shift-3"),
        assemble(reversed_transitions(), shifted_emissions(1), "rev-emit-shift-1"),
        assemble(jit_shift[0], jit_shift[1], "jitter-emit-shift-2"),
        assemble(jit_truth_a[0], jit_truth_a[1], "jitter-truth-a"),
        assemble(jit_truth_b[0], jit_truth_b[1], "jitter-truth-b"),
    )
    return CandidateFamily(models=members, truth_index=0)


def maximin_contrast_family(
    truth: PomgModel,
    seed: int = 0,
    floor: float = 5e-4,
) -> CandidateFamily:
    """Candidates for adversarial runs on two-state shared-signal games.

    The distorted members believe the high state is easy to reach under the
    protagonist's second action and that it emits the rewarded signal, so
    an optimistic learner that trusts them announces a genuinely bad
    policy. Their emissions are spiked on the wrong joint channels with a
    small floor elsewhere, which costs several nats per trajectory and
    expels them quickly. Two small jitters of the truth survive instead.

    Expects two states, two actions and a binary signal per player.
    """
    spec = truth.spec
    if (
        spec.num_states != 2
        or spec.actions_per_player != (2, 2)
        or spec.observations_per_player != (2, 2)
    ):
        raise GateError(
            "the maximin contrast family needs 2 states, 2 actions and "
            "binary per-player observations"
        )
    rng = np.random.default_rng(seed)
    modal_low = int(np.argmax(truth.emit[0][:, 0]))
    ch_low_wrong = next(
        c
        for c in range(4)
        if c != modal_low and c != int(np.argmax(truth.emit[0][:, 1])) and c // 2 != modal_low // 2
    )

    def swapped_emissions() -> Tuple[np.ndarray, ...]:
        emit = []
        for e in truth.emit:
            out = np.full_like(e, floor)
            out[ch_low_wrong, 0] = 1.0 - floor * (out.shape[0] - 1)
            out[modal_low, 1] = 1.0 - floor * (out.shape[0] - 1)
            emit.append(out)
        return tuple(emit)

    def high_push_transitions(stay0: float, stay1: float) -> Tuple[np.ndarray, ...]:
        trans = []
        for t in truth.trans:
            out = t.copy()
            for a in (2, 3):
                out[0, 0, a] = stay0
                out[1, 0, a] = 1.0 - stay0
                out[0, 1, a] = stay1
                out[1, 1, a] = 1.0 - stay1
            trans.append(out)
        return tuple(trans)

    def jitter(trans, emit, scale: float):
        def pert(matrix: np.ndarray) -> np.ndarray:
            rows = matrix.shape[0]
            flat = matrix.reshape(rows, -1).copy()
            for col in range(flat.shape[1]):
                noise = rng.dirichlet(np.ones(rows))
                flat[:, col] = (flat[:, col] + scale * noise) / (1.0 + scale)
            return flat.reshape(matrix.shape)

        return tuple(pert(t) for t in trans), tuple(pert(e) for e in emit)

    def assemble(trans, emit, tag: str) -> PomgModel:
        return PomgModel(
            spec=spec,
            mu1=truth.mu1.copy(),
            trans=tuple(np.asarray(t).copy() for t in trans),
            emit=tuple(np.asarray(e).copy() for e in emit),
            rewards=tuple(r.copy() for r in truth.rewards),
            metadata={"family": "maximin-contrast", "variant": tag},
        )

    swap = swapped_emissions()
    d1 = (high_push_transitions(0.05, 0.12), swap)
    d2 = jitter(*d1, 0.08)
    d3 = (high_push_transitions(0.08, 0.10), swap)
    d5 = jitter(high_push_transitions(0.06, 0.11), swap, 0.04)
    jit_a = jitter(truth.trans, truth.emit, 0.05)
    jit_b = jitter(truth.trans, truth.emit, 0.05)
    members = (
        truth,
        assemble(d1[0], d1[1], "high-push-a"),
        assemble(d2[0], d2[1], "high-push-a-jittered"),
        assemble(d3[0], d3[1], "high-push-b"),
        assemble(truth.trans, swap, "swap-only"),
        assemble(d5[0], d5[1], "high-push-c-jittered"),
        assemble(jit_a[0], jit_a[1], "jitter-truth-a"),
        assemble(jit_b[0], jit_b[1], "jitter-truth-b"),
    )
    return CandidateFamily(models=members, truth_index=0)


def benchmark_overcomplete_two_step() -> PomgModel:
    """Three-state benchmark that only the two-step check can certify.

    With two joint observations and three states the single-step check
    faults outright (O < S), but transitions separate the states within two
    steps: from p_i the max action a moves to the always-bright q exactly
    when a == i, so the two-step observation law is injective with margin
    well above 1.
    """
    p0, p1, q = 0, 1, 2
    spec = PomgSpec(3, 2, 3, (2, 2), (2, 1))
    emit = []
    for h in range(1, 4):
        e = np.zeros((2, 3))
        e[0, p0] = 1.0
        e[0, p1] = 1.0
        e[1, q] = 1.0
        emit.append(e)
    trans = []
    for h in range(1, 4):
        t = np.zeros((3, 3, 4))
        for a_max in range(2):
            for b_min in range(2):
                a_joint = a_max * 2 + b_min
                t[q if a_max == 0 else p0, p0, a_joint] = 1.0
                t[q if a_max == 1 else p1, p1, a_joint] = 1.0
                t[q, q, a_joint] = 1.0
        trans.append(t)
    r1 = np.zeros((3, 2))
    r1[2, 1] = 1.0
    r2 = np.full((3, 1), 0.5)
    model = PomgModel(
        spec=spec,
        mu1=np.array([0.35, 0.45, 0.2]),
        trans=tuple(trans),
        emit=tuple(emit),
        rewards=(r1, r2),
        metadata={"family": "benchmark-overcomplete-two-step"},
    )
    assert validate_model(model).ok
    return model


def min_multi_step_sigma(model: PomgModel, m: int) -> float:
    """Smallest m-step singular value across steps; convenience for reports."""
    return min(sigma for _, sigma in per_step_sigmas(model, m))
