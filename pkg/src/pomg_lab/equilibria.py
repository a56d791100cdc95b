"""Normal-form games and equilibrium solvers.

Covers the four solution routes used by the learners: zero-sum value via
linear programming, two-player Nash via support enumeration, and coarse
correlated / correlated equilibria via feasibility LPs. Selection among
multiple equilibria is deterministic: CCE and CE maximize the sum of the
players' expected payoffs over the feasible polytope, Nash returns the
first support pair found in ascending size and lexicographic order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._simplex import solve_lp
from .errors import BudgetExceededError, GateError, SolverError

DEFAULT_NASH_BUDGET = 12
DEFAULT_PROFILE_BUDGET = 4096
DIST_SUM_TOL = 1e-8
NASH_EXPLOITABILITY_TOL = 1e-6
LP_CONSTRAINT_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """One payoff tensor per player, all indexed by pure-strategy profiles.

    Axis i of every tensor ranges over player i's pure strategies. Labels
    are optional opaque identities for the pure strategies (policy indices
    in the learner pipeline); they ride along for reporting only.
    """

    payoffs: Tuple[np.ndarray, ...]
    labels: Optional[Tuple[Tuple[object, ...], ...]] = None

    def __post_init__(self) -> None:
        payoffs = tuple(np.asarray(p, dtype=float) for p in self.payoffs)
        object.__setattr__(self, "payoffs", payoffs)
        if not payoffs:
            raise ValueError("game needs at least one player")
        shape = payoffs[0].shape
        if len(shape) != len(payoffs):
            raise ValueError(
                f"tensor rank {len(shape)} does not match player count {len(payoffs)}"
            )
        for i, p in enumerate(payoffs):
            if p.shape != shape:
                raise ValueError(f"player {i} tensor has shape {p.shape}, expected {shape}")
            if not np.isfinite(p).all():
                raise ValueError(f"player {i} tensor has non-finite entries")
        if self.labels is not None:
            labels = tuple(tuple(per) for per in self.labels)
            object.__setattr__(self, "labels", labels)
            if len(labels) != len(shape) or any(
                len(per) != size for per, size in zip(labels, shape)
            ):
                raise ValueError("labels do not match the strategy counts")

    @property
    def num_players(self) -> int:
        return len(self.payoffs)

    @property
    def strategy_counts(self) -> Tuple[int, ...]:
        return self.payoffs[0].shape


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense probability tensor over pure-strategy profiles.

    ``factors`` holds per-player marginals when the distribution was built
    as an independent product (Nash output); it is None for genuinely
    correlated distributions.
    """

    probs: np.ndarray
    factors: Optional[Tuple[np.ndarray, ...]] = None

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", probs)
        if probs.min() < -1e-9:
            raise ValueError(f"negative probability {probs.min():.3e}")
        total = float(probs.sum())
        if abs(total - 1.0) > DIST_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if self.factors is not None:
            factors = tuple(np.asarray(f, dtype=float) for f in self.factors)
            object.__setattr__(self, "factors", factors)

    @classmethod
    def from_product(cls, factors: Sequence[np.ndarray]) -> "JointDistribution":
        factors = [np.asarray(f, dtype=float) for f in factors]
        probs = factors[0]
        for f in factors[1:]:
            probs = np.multiply.outer(probs, f)
        return cls(probs=probs, factors=tuple(factors))


@dataclass(frozen=True, eq=False)
class ZeroSumSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray


def _clean_distribution(raw: np.ndarray) -> np.ndarray:
    cleaned = np.where(raw < 0.0, 0.0, raw)
    total = cleaned.sum()
    if total <= 0.0:
        raise SolverError("solver returned an all-zero distribution")
    return cleaned / total


# ---------------------------------------------------------------------------
# zero-sum
# ---------------------------------------------------------------------------

def solve_zero_sum(matrix) -> ZeroSumSolution:
    """Value and optimal mixed strategies of a matrix game (payoff to row).

    Shifts the matrix positive and solves the standard bounded LP; the
    column strategy comes from the primal, the row strategy from the duals.
    Both guarantees are verified to 1e-7 before returning.
    """
    u = np.asarray(matrix, dtype=float)
    if u.ndim != 2 or u.size == 0:
        raise ValueError("expected a nonempty 2-d payoff matrix")
    if not np.isfinite(u).all():
        raise SolverError("payoff matrix has non-finite entries")
    shift = 1.0 - float(u.min())
    shifted = u + shift
    m, k = shifted.shape
    result = solve_lp(np.ones(k), a_ub=shifted, b_ub=np.ones(m))
    if result.objective <= 0.0:
        raise SolverError("degenerate zero-sum program")
    game_value = 1.0 / result.objective
    col = _clean_distribution(result.x * game_value)
    row = _clean_distribution(result.duals_ub * game_value)
    value = game_value - shift
    row_guarantee = float((row @ u).min())
    col_guarantee = float((u @ col).max())
    if col_guarantee - row_guarantee > LP_CONSTRAINT_TOL:
        raise SolverError(
            f"zero-sum duality gap {col_guarantee - row_guarantee:.3e} exceeds 1e-7"
        )
    return ZeroSumSolution(value=value, row_strategy=row, col_strategy=col)


# ---------------------------------------------------------------------------
# two-player Nash by support enumeration
# ---------------------------------------------------------------------------

def _mix_on_support(
    payoff: np.ndarray, own: Sequence[int], other: Sequence[int]
) -> Optional[np.ndarray]:
    """Mixed strategy over ``own`` rows of ``payoff`` that makes the
    ``other`` columns indifferent; None when no valid solution exists."""
    own, other = list(own), list(other)
    block = payoff[np.ix_(own, other)]
    # Unknowns: weights over own. Equations: consecutive indifference
    # differences plus normalization.
    rows = [block[:, j] - block[:, j + 1] for j in range(len(other) - 1)]
    rows.append(np.ones(len(own)))
    a = np.vstack(rows)
    b = np.zeros(len(rows))
    b[-1] = 1.0
    solution = np.linalg.lstsq(a, b, rcond=None)[0]
    if np.abs(a @ solution - b).max() > 1e-9:
        return None
    if solution.min() < -1e-9:
        return None
    weights = np.zeros(payoff.shape[0])
    for idx, w in zip(own, solution):
        weights[idx] = max(float(w), 0.0)
    total = weights.sum()
    if total <= 0.0:
        return None
    return weights / total


def solve_nash_2p(game: NormalFormGame, budget: int = DEFAULT_NASH_BUDGET) -> JointDistribution:
    """A Nash equilibrium of a two-player game as a product distribution.

    Constant-sum games route through the zero-sum LP. Otherwise supports
    are enumerated in ascending total size and lexicographic order, and the
    first pair whose indifference system yields mutual best responses is
    returned. Every output is re-verified against the exploitability
    oracle at 1e-6 before it is accepted.
    """
    if game.num_players != 2:
        raise GateError(
            f"Nash solving is gated to two players, got {game.num_players}"
        )
    m, k = game.strategy_counts
    if m > budget or k > budget:
        raise BudgetExceededError(
            f"strategy counts {m}x{k} exceed the Nash budget {budget} per player"
        )
    u1, u2 = game.payoffs

    total = u1 + u2
    if float(total.max() - total.min()) <= 1e-12:
        solution = solve_zero_sum(u1)
        dist = JointDistribution.from_product([solution.row_strategy, solution.col_strategy])
        if max(exploitability(game, dist, 0), exploitability(game, dist, 1)) <= NASH_EXPLOITABILITY_TOL:
            return dist
        # A failed verification falls through to support enumeration.

    for size_row, size_col in sorted(
        itertools.product(range(1, m + 1), range(1, k + 1)),
        key=lambda pair: (pair[0] + pair[1], pair[0], pair[1]),
    ):
        for rows in itertools.combinations(range(m), size_row):
            for cols in itertools.combinations(range(k), size_col):
                x = _mix_on_support(u2, rows, cols)
                if x is None:
                    continue
                y = _mix_on_support(u1.T, cols, rows)
                if y is None:
                    continue
                dist = JointDistribution.from_product([x, y])
                if (
                    exploitability(game, dist, 0) <= NASH_EXPLOITABILITY_TOL
                    and exploitability(game, dist, 1) <= NASH_EXPLOITABILITY_TOL
                ):
                    return dist
    raise SolverError(
        "support enumeration exhausted all supports without a verified equilibrium"
    )


# ---------------------------------------------------------------------------
# correlated solution concepts
# ---------------------------------------------------------------------------

def _deviation_rows_cce(game: NormalFormGame) -> List[np.ndarray]:
    rows = []
    for i, payoff in enumerate(game.payoffs):
        for dev in range(game.strategy_counts[i]):
            deviated = np.broadcast_to(
                np.expand_dims(np.take(payoff, dev, axis=i), axis=i), payoff.shape
            )
            rows.append((deviated - payoff).ravel())
    return rows


def _deviation_rows_ce(game: NormalFormGame) -> List[np.ndarray]:
    rows = []
    for i, payoff in enumerate(game.payoffs):
        count = game.strategy_counts[i]
        for rec in range(count):
            rec_slice = np.take(payoff, rec, axis=i)
            for dev in range(count):
                if dev == rec:
                    continue
                gain = np.take(payoff, dev, axis=i) - rec_slice
                full = np.zeros(payoff.shape)
                index = [slice(None)] * payoff.ndim
                index[i] = rec
                full[tuple(index)] = gain
                rows.append(full.ravel())
    return rows


def _solve_correlated(game: NormalFormGame, rows: List[np.ndarray], budget: int) -> JointDistribution:
    n_profiles = int(np.prod(game.strategy_counts))
    if n_profiles > budget:
        raise BudgetExceededError(
            f"{n_profiles} pure profiles exceed the correlated-solver budget {budget}"
        )
    objective = np.add.reduce([p.ravel() for p in game.payoffs])
    a_ub = np.vstack(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None
    result = solve_lp(
        objective,
        a_ub=a_ub,
        b_ub=b_ub,
        a_eq=np.ones((1, n_profiles)),
        b_eq=np.ones(1),
    )
    probs = _clean_distribution(result.x).reshape(game.strategy_counts)
    return JointDistribution(probs=probs)


def solve_cce(game: NormalFormGame, budget: int = DEFAULT_PROFILE_BUDGET) -> JointDistribution:
    """Max-total-payoff coarse correlated equilibrium.

    Feasible points satisfy, for every player and every pure deviation,
    E[U_i] >= E over the joint of the deviated payoff. The returned point
    is re-verified with the exploitability oracle rather than trusted from
    the LP residual.
    """
    dist = _solve_correlated(game, _deviation_rows_cce(game), budget)
    worst = max(exploitability(game, dist, i) for i in range(game.num_players))
    if worst > LP_CONSTRAINT_TOL:
        raise SolverError(f"CCE verification failed: deviation gain {worst:.3e}")
    return dist


def solve_ce(game: NormalFormGame, budget: int = DEFAULT_PROFILE_BUDGET) -> JointDistribution:
    """Max-total-payoff correlated equilibrium.

    Feasible points satisfy every swap constraint: conditioned on any
    recommended pure strategy with positive mass, no replacement improves
    the expected payoff. Verified post-hoc via best_swap_gain.
    """
    dist = _solve_correlated(game, _deviation_rows_ce(game), budget)
    worst = max(best_swap_gain(game, dist, i) for i in range(game.num_players))
    if worst > LP_CONSTRAINT_TOL * max(game.strategy_counts):
        raise SolverError(f"CE verification failed: swap gain {worst:.3e}")
    return dist


# ---------------------------------------------------------------------------
# deviation oracles
# ---------------------------------------------------------------------------

def expected_payoff(game: NormalFormGame, dist: JointDistribution, player: int) -> float:
    return float((game.payoffs[player] * dist.probs).sum())


def exploitability(game: NormalFormGame, dist: JointDistribution, player: int) -> float:
    """Best unilateral pure-deviation gain for ``player``, clamped at 0."""
    return max(raw_exploitability(game, dist, player), 0.0)


def raw_exploitability(game: NormalFormGame, dist: JointDistribution, player: int) -> float:
    """Unclamped deviation gain; negative when the player already overperforms."""
    payoff = game.payoffs[player]
    if dist.probs.shape != payoff.shape:
        raise ValueError("distribution shape does not match the game")
    marginal = dist.probs.sum(axis=player)
    current = float((payoff * dist.probs).sum())
    best = -math.inf
    for dev in range(game.strategy_counts[player]):
        value = float((np.take(payoff, dev, axis=player) * marginal).sum())
        best = max(best, value)
    return best - current


def best_swap_gain(game: NormalFormGame, dist: JointDistribution, player: int) -> float:
    """Total gain of the best strategy modification for ``player``, clamped at 0.

    The best swap map decomposes recommendation by recommendation, so the
    total is the sum over recommended strategies of the best per-strategy
    replacement gain.
    """
    return max(raw_best_swap_gain(game, dist, player), 0.0)


def raw_best_swap_gain(game: NormalFormGame, dist: JointDistribution, player: int) -> float:
    payoff = game.payoffs[player]
    if dist.probs.shape != payoff.shape:
        raise ValueError("distribution shape does not match the game")
    moved_probs = np.moveaxis(dist.probs, player, 0)
    moved_payoff = np.moveaxis(payoff, player, 0)
    count = game.strategy_counts[player]
    total = 0.0
    for rec in range(count):
        mass_slice = moved_probs[rec]
        base = float((moved_payoff[rec] * mass_slice).sum())
        best = max(
            float((moved_payoff[dev] * mass_slice).sum()) for dev in range(count)
        )
        total += best - base
    return total


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def game_to_dict(game: NormalFormGame) -> dict:
    doc = {
        "players": game.num_players,
        "strategy_counts": list(game.strategy_counts),
        "payoffs": [p.tolist() for p in game.payoffs],
    }
    if game.labels is not None:
        doc["labels"] = [list(per) for per in game.labels]
    return doc


def game_from_dict(doc: dict) -> NormalFormGame:
    payoffs = tuple(np.asarray(p, dtype=float) for p in doc["payoffs"])
    labels = doc.get("labels")
    return NormalFormGame(
        payoffs=payoffs,
        labels=tuple(tuple(per) for per in labels) if labels is not None else None,
    )


def dist_to_dict(dist: JointDistribution) -> dict:
    doc = {"probs": dist.probs.tolist()}
    if dist.factors is not None:
        doc["factors"] = [f.tolist() for f in dist.factors]
    return doc


def dist_from_dict(doc: dict) -> JointDistribution:
    factors = doc.get("factors")
    return JointDistribution(
        probs=np.asarray(doc["probs"], dtype=float),
        factors=tuple(np.asarray(f) for f in factors) if factors is not None else None,
    )
