"""Shared helpers for the test suite."""
from __future__ import annotations

from typing import Optional

import numpy as np
import pytest

from pomg_lab.model import PomgModel, PomgSpec


def random_stochastic(rng: np.random.Generator, rows: int, cols_shape) -> np.ndarray:
    """Columns drawn from a flat Dirichlet: shape (rows, *cols_shape)."""
    raw = rng.gamma(1.0, 1.0, size=(rows,) + tuple(cols_shape)) + 1e-9
    return raw / raw.sum(axis=0)


def random_model(
    spec: PomgSpec,
    rng: np.random.Generator,
    rewards: Optional[list] = None,
) -> PomgModel:
    """A fully random valid model for the given spec."""
    s, a, o = spec.num_states, spec.num_joint_actions, spec.num_joint_observations
    mu1 = random_stochastic(rng, s, ())
    trans = tuple(random_stochastic(rng, s, (s, a)) for _ in range(spec.horizon))
    emit = tuple(random_stochastic(rng, o, (s,)) for _ in range(spec.horizon))
    if rewards is None:
        rewards = [
            rng.random((spec.horizon, spec.observations_per_player[i]))
            for i in range(spec.num_players)
        ]
    return PomgModel(spec=spec, mu1=mu1, trans=trans, emit=emit, rewards=tuple(rewards))


def random_small_spec(rng: np.random.Generator, max_states: int = 3, max_horizon: int = 3) -> PomgSpec:
    return PomgSpec(
        horizon=int(rng.integers(1, max_horizon + 1)),
        num_players=2,
        num_states=int(rng.integers(1, max_states + 1)),
        actions_per_player=(int(rng.integers(1, 3)), int(rng.integers(1, 3))),
        observations_per_player=(int(rng.integers(1, 3)), int(rng.integers(1, 3))),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
