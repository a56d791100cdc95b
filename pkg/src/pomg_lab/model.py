"""Tabular partially observable Markov game (POMG) representation.

A POMG runs for H steps. Each step h: the latent state s_h emits a joint
observation o_vec_h (one component per player), every player picks an action
from her own history, and the state transitions under the joint action.
Rewards are per-player lookup tables on individual observations, so a player's
return is computable from what she alone saw.

Canonical encodings shared by every module:

- Joint actions and joint observations flatten row-major over players, with
  player 1 varying slowest (``joint_index`` / ``split_joint``).
- Per-player history keys. Full-history key after observing o_h at step h:
  the tuple ``(o_1, a_1, o_2, a_2, ..., o_h)`` of that player's own indices.
  Reactive key: the pair ``(h, o_h)`` with h counted from 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ModelFormatError

STOCHASTIC_TOL = 1e-9
MODEL_FORMAT_VERSION = "pomg-v1"


# ---------------------------------------------------------------------------
# joint index flattening
# ---------------------------------------------------------------------------

def joint_index(parts: Sequence[int], sizes: Sequence[int]) -> int:
    """Flatten per-player indices into one joint index (player 1 slowest)."""
    if len(parts) != len(sizes):
        raise ValueError("parts and sizes must have equal length")
    out = 0
    for part, size in zip(parts, sizes):
        if not 0 <= part < size:
            raise ValueError(f"index {part} out of range for size {size}")
        out = out * size + part
    return out


def split_joint(index: int, sizes: Sequence[int]) -> Tuple[int, ...]:
    """Inverse of joint_index."""
    total = 1
    for size in sizes:
        total *= size
    if not 0 <= index < total:
        raise ValueError(f"joint index {index} out of range for sizes {sizes}")
    parts = []
    for size in reversed(sizes):
        parts.append(index % size)
        index //= size
    return tuple(reversed(parts))


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PomgSpec:
    """Shape of a tabular POMG: horizon, players, states, per-player sizes."""

    horizon: int
    num_players: int
    num_states: int
    actions_per_player: Tuple[int, ...]
    observations_per_player: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions_per_player", tuple(int(a) for a in self.actions_per_player))
        object.__setattr__(self, "observations_per_player", tuple(int(o) for o in self.observations_per_player))
        if self.horizon < 1 or self.num_players < 1 or self.num_states < 1:
            raise ValueError("horizon, num_players and num_states must be >= 1")
        if len(self.actions_per_player) != self.num_players:
            raise ValueError("actions_per_player must list one count per player")
        if len(self.observations_per_player) != self.num_players:
            raise ValueError("observations_per_player must list one count per player")
        if any(a < 1 for a in self.actions_per_player) or any(o < 1 for o in self.observations_per_player):
            raise ValueError("all per-player counts must be >= 1")

    @property
    def num_joint_actions(self) -> int:
        out = 1
        for a in self.actions_per_player:
            out *= a
        return out

    @property
    def num_joint_observations(self) -> int:
        out = 1
        for o in self.observations_per_player:
            out *= o
        return out


@dataclass(frozen=True, eq=False)
class PomgModel:
    """Full tabular parameterization of a POMG.

    mu1:     initial state distribution, shape (S,).
    trans:   one tensor per step h, shape (S, S, A); trans[h][s_next, s, a]
             is P_h(s_next | s, joint action a).
    emit:    one matrix per step h, shape (O, S); emit[h][o, s] is the
             probability of joint observation o in state s.
    rewards: one table per player, shape (H, O_i), values in [0, 1].
    """

    spec: PomgSpec
    mu1: np.ndarray
    trans: Tuple[np.ndarray, ...]
    emit: Tuple[np.ndarray, ...]
    rewards: Tuple[np.ndarray, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu1", np.asarray(self.mu1, dtype=float))
        object.__setattr__(self, "trans", tuple(np.asarray(t, dtype=float) for t in self.trans))
        object.__setattr__(self, "emit", tuple(np.asarray(e, dtype=float) for e in self.emit))
        object.__setattr__(self, "rewards", tuple(np.asarray(r, dtype=float) for r in self.rewards))


@dataclass(frozen=True)
class Trajectory:
    """One episode: per-step joint observations and joint actions.

    Components are tuples of per-player indices. The latent state record is
    debug-only and never consumed by learners.
    """

    observations: Tuple[Tuple[int, ...], ...]
    actions: Tuple[Tuple[int, ...], ...]
    states: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "observations", tuple(tuple(int(x) for x in o) for o in self.observations))
        object.__setattr__(self, "actions", tuple(tuple(int(x) for x in a) for a in self.actions))
        if self.states is not None:
            object.__setattr__(self, "states", tuple(int(s) for s in self.states))
        if len(self.observations) != len(self.actions):
            raise ValueError("observations and actions must cover the same steps")


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: Tuple[str, ...]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def validate_model(model: PomgModel) -> ValidationReport:
    """Check shapes, column stochasticity (1e-9 absolute) and reward ranges.

    Violations are returned as data, one message per failing column or entry;
    nothing raises.
    """
    spec = model.spec
    h_count, s_count = spec.horizon, spec.num_states
    a_count, o_count = spec.num_joint_actions, spec.num_joint_observations
    bad: List[str] = []

    if model.mu1.shape != (s_count,):
        bad.append(f"mu1 has shape {model.mu1.shape}, expected ({s_count},)")
    else:
        if np.any(model.mu1 < 0):
            bad.append("mu1 has a negative entry")
        residual = float(model.mu1.sum() - 1.0)
        if abs(residual) > STOCHASTIC_TOL:
            bad.append(f"mu1 sums to 1{residual:+.3e}")

    if len(model.trans) != h_count:
        bad.append(f"trans has {len(model.trans)} steps, expected {h_count}")
    if len(model.emit) != h_count:
        bad.append(f"emit has {len(model.emit)} steps, expected {h_count}")

    for h, tensor in enumerate(model.trans):
        if tensor.shape != (s_count, s_count, a_count):
            bad.append(f"trans[h={h + 1}] has shape {tensor.shape}, expected {(s_count, s_count, a_count)}")
            continue
        if np.any(tensor < 0):
            bad.append(f"trans[h={h + 1}] has a negative entry")
        sums = tensor.sum(axis=0)
        for s in range(s_count):
            for a in range(a_count):
                residual = float(sums[s, a] - 1.0)
                if abs(residual) > STOCHASTIC_TOL:
                    bad.append(f"transition column (h={h + 1}, s={s}, a={a}) sums to 1{residual:+.3e}")

    for h, matrix in enumerate(model.emit):
        if matrix.shape != (o_count, s_count):
            bad.append(f"emit[h={h + 1}] has shape {matrix.shape}, expected {(o_count, s_count)}")
            continue
        if np.any(matrix < 0):
            bad.append(f"emit[h={h + 1}] has a negative entry")
        sums = matrix.sum(axis=0)
        for s in range(s_count):
            residual = float(sums[s] - 1.0)
            if abs(residual) > STOCHASTIC_TOL:
                bad.append(f"emission column (h={h + 1}, s={s}) sums to 1{residual:+.3e}")

    if len(model.rewards) != spec.num_players:
        bad.append(f"rewards has {len(model.rewards)} players, expected {spec.num_players}")
    else:
        for i, table in enumerate(model.rewards):
            expected = (h_count, spec.observations_per_player[i])
            if table.shape != expected:
                bad.append(f"rewards[player={i}] has shape {table.shape}, expected {expected}")
                continue
            if np.any(table < 0) or np.any(table > 1):
                where = np.argwhere((table < 0) | (table > 1))[0]
                bad.append(
                    f"reward out of [0,1] at (player={i}, h={int(where[0]) + 1}, o={int(where[1])}): "
                    f"{float(table[tuple(where)])!r}"
                )

    return ValidationReport(ok=not bad, violations=tuple(bad))


def _draw(rng: np.random.Generator, probs: np.ndarray) -> int:
    """Sample an index from an (approximately) stochastic vector."""
    cumulative = np.cumsum(probs)
    idx = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return min(idx, len(probs) - 1)


def sample_trajectory(
    model: PomgModel,
    policy: "JointDetPolicy",
    rng: np.random.Generator,
    include_states: bool = False,
) -> Trajectory:
    """Roll one episode of ``policy`` in ``model``.

    Each player acts on her own history (observations and own past actions
    only). The final-step transition is never sampled because s_{H+1} is
    unobservable. With the same seed the result is bit-identical.
    """
    spec = model.spec
    n = spec.num_players
    histories: List[List[int]] = [[] for _ in range(n)]
    obs_steps: List[Tuple[int, ...]] = []
    act_steps: List[Tuple[int, ...]] = []
    states: List[int] = []

    state = _draw(rng, model.mu1)
    for h in range(spec.horizon):
        states.append(state)
        o_joint = _draw(rng, model.emit[h][:, state])
        o_parts = split_joint(o_joint, spec.observations_per_player)
        obs_steps.append(o_parts)
        actions = []
        for i in range(n):
            histories[i].append(o_parts[i])
            actions.append(policy.policies[i].decide(tuple(histories[i])))
            histories[i].append(actions[i])
        a_parts = tuple(actions)
        act_steps.append(a_parts)
        if h + 1 < spec.horizon:
            a_joint = joint_index(a_parts, spec.actions_per_player)
            state = _draw(rng, model.trans[h][:, state, a_joint])

    return Trajectory(
        observations=tuple(obs_steps),
        actions=tuple(act_steps),
        states=tuple(states) if include_states else None,
    )


def trajectory_return(traj: Trajectory, player: int, model: PomgModel) -> float:
    """Sum of the player's per-step rewards read off her observation stream."""
    if not 0 <= player < model.spec.num_players:
        raise ValueError(f"player {player} out of range")
    table = model.rewards[player]
    return float(sum(table[h, traj.observations[h][player]] for h in range(len(traj.observations))))


def trajectory_to_dict(traj: Trajectory) -> dict:
    doc = {
        "observations": [list(o) for o in traj.observations],
        "actions": [list(a) for a in traj.actions],
    }
    if traj.states is not None:
        doc["states"] = list(traj.states)
    return doc


def trajectory_from_dict(doc: dict) -> Trajectory:
    return Trajectory(
        observations=tuple(tuple(o) for o in doc["observations"]),
        actions=tuple(tuple(a) for a in doc["actions"]),
        states=tuple(doc["states"]) if "states" in doc else None,
    )


# ---------------------------------------------------------------------------
# pomg-v1 file format
# ---------------------------------------------------------------------------

def model_to_dict(model: PomgModel) -> dict:
    spec = model.spec
    return {
        "version": MODEL_FORMAT_VERSION,
        "horizon": spec.horizon,
        "num_players": spec.num_players,
        "num_states": spec.num_states,
        "actions_per_player": list(spec.actions_per_player),
        "observations_per_player": list(spec.observations_per_player),
        "mu1": model.mu1.tolist(),
        "trans": [t.tolist() for t in model.trans],
        "emit": [e.tolist() for e in model.emit],
        "rewards": [r.tolist() for r in model.rewards],
        "metadata": model.metadata,
    }


def model_from_dict(doc: dict) -> PomgModel:
    """Build and validate a PomgModel from a pomg-v1 document."""
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a mapping")
    version = doc.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model version {version!r}, expected {MODEL_FORMAT_VERSION!r}")
    required = ["horizon", "num_players", "num_states", "actions_per_player",
                "observations_per_player", "mu1", "trans", "emit", "rewards"]
    missing = [key for key in required if key not in doc]
    if missing:
        raise ModelFormatError(f"model document missing fields: {', '.join(missing)}")
    try:
        spec = PomgSpec(
            horizon=int(doc["horizon"]),
            num_players=int(doc["num_players"]),
            num_states=int(doc["num_states"]),
            actions_per_player=tuple(doc["actions_per_player"]),
            observations_per_player=tuple(doc["observations_per_player"]),
        )
        model = PomgModel(
            spec=spec,
            mu1=np.asarray(doc["mu1"], dtype=float),
            trans=tuple(np.asarray(t, dtype=float) for t in doc["trans"]),
            emit=tuple(np.asarray(e, dtype=float) for e in doc["emit"]),
            rewards=tuple(np.asarray(r, dtype=float) for r in doc["rewards"]),
            metadata=dict(doc.get("metadata", {})),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    report = validate_model(model)
    if not report.ok:
        raise ModelFormatError("model fails validation: " + "; ".join(report.violations[:5]))
    return model


def save_model(model: PomgModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_dict(model), handle, indent=1)
        handle.write("\n")


def load_model(path: str) -> PomgModel:
    """Read a pomg-v1 model from JSON (or TOML by extension)."""
    if str(path).endswith(".toml"):
        import tomli

        with open(path, "rb") as handle:
            try:
                doc = tomli.load(handle)
            except tomli.TOMLDecodeError as exc:
                raise ModelFormatError(f"{path}: {exc}") from exc
    else:
        with open(path, "r", encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ModelFormatError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return model_from_dict(doc)
