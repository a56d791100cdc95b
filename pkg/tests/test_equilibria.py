"""Equilibrium solvers against brute-force and iterative oracles."""
from __future__ import annotations

import numpy as np
import pytest

from pomg_lab.equilibria import (
    JointDistribution,
    NormalFormGame,
    best_swap_gain,
    dist_from_dict,
    dist_to_dict,
    expected_payoff,
    exploitability,
    game_from_dict,
    game_to_dict,
    raw_exploitability,
    solve_cce,
    solve_ce,
    solve_nash_2p,
    solve_zero_sum,
)
from pomg_lab.errors import BudgetExceededError, GateError

from oracles import (
    audit_cce,
    audit_ce,
    best_swap_gain_by_enumeration,
    fictitious_play_value,
)

MATCHING_PENNIES = np.array([[1.0, -1.0], [-1.0, 1.0]])


def random_game(gen: np.random.Generator, shape) -> NormalFormGame:
    return NormalFormGame(payoffs=tuple(gen.random(shape) for _ in shape))


def random_dist(gen: np.random.Generator, shape) -> JointDistribution:
    raw = gen.random(shape) + 1e-3
    return JointDistribution(probs=raw / raw.sum())


# ---------------------------------------------------------------------------
# zero-sum
# ---------------------------------------------------------------------------

def test_zero_sum_matching_pennies():
    sol = solve_zero_sum(MATCHING_PENNIES)
    assert sol.value == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(sol.row_strategy, [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(sol.col_strategy, [0.5, 0.5], atol=1e-9)


def test_zero_sum_dominant_row():
    sol = solve_zero_sum(np.array([[2.0, 2.0], [0.0, 0.0]]))
    assert sol.value == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(sol.row_strategy, [1.0, 0.0], atol=1e-9)


def test_zero_sum_matches_fictitious_play():
    gen = np.random.default_rng(2024)
    matrix = gen.random((4, 5)) * 2.0 - 1.0
    sol = solve_zero_sum(matrix)
    estimate = fictitious_play_value(matrix, iterations=1_000_000)
    assert sol.value == pytest.approx(estimate, abs=1e-3)


def test_zero_sum_duality_gap_sweep():
    gen = np.random.default_rng(7)
    for _ in range(100):
        shape = (int(gen.integers(1, 5)), int(gen.integers(1, 5)))
        matrix = gen.normal(size=shape)
        sol = solve_zero_sum(matrix)
        row_guarantee = float((sol.row_strategy @ matrix).min())
        col_guarantee = float((matrix @ sol.col_strategy).max())
        assert col_guarantee - row_guarantee <= 1e-7
        assert row_guarantee - 1e-7 <= sol.value <= col_guarantee + 1e-7


def test_zero_sum_saddle_point():
    matrix = np.array([[3.0, 1.0], [2.0, 0.0]])  # saddle at (row 0, col 1)
    sol = solve_zero_sum(matrix)
    assert sol.value == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# Nash
# ---------------------------------------------------------------------------

def test_nash_dominant_profile():
    u1 = np.array([[3.0, 3.0], [0.0, 0.0]])  # row 0 strictly dominant
    u2 = np.array([[2.0, 0.0], [2.0, 0.0]])  # col 0 strictly dominant
    dist = solve_nash_2p(NormalFormGame(payoffs=(u1, u2)))
    assert dist.probs[0, 0] == pytest.approx(1.0)
    assert dist.factors is not None


def test_nash_matches_zero_sum_embedding():
    gen = np.random.default_rng(11)
    matrix = gen.random((3, 3))
    game = NormalFormGame(payoffs=(matrix, -matrix))
    dist = solve_nash_2p(game)
    sol = solve_zero_sum(matrix)
    value = float(np.einsum("ij,ij->", game.payoffs[0], dist.probs))
    assert value == pytest.approx(sol.value, abs=1e-6)


def test_nash_battle_of_sexes():
    u1 = np.array([[2.0, 0.0], [0.0, 1.0]])
    u2 = np.array([[1.0, 0.0], [0.0, 2.0]])
    game = NormalFormGame(payoffs=(u1, u2))
    dist = solve_nash_2p(game)
    assert exploitability(game, dist, 0) <= 1e-6
    assert exploitability(game, dist, 1) <= 1e-6


def test_nash_mixed_only_game():
    # No pure equilibrium; unique mixed Nash at ((2/3,1/3),(1/3,2/3)).
    u1 = np.array([[1.0, 0.0], [0.0, 2.0]])
    u2 = np.array([[0.0, 2.0], [1.0, 0.0]])
    game = NormalFormGame(payoffs=(u1, u2))
    dist = solve_nash_2p(game)
    assert exploitability(game, dist, 0) <= 1e-6
    assert exploitability(game, dist, 1) <= 1e-6
    assert dist.factors is not None
    np.testing.assert_allclose(dist.factors[0], [1 / 3, 2 / 3], atol=1e-7)
    np.testing.assert_allclose(dist.factors[1], [2 / 3, 1 / 3], atol=1e-7)


def test_nash_random_sweep():
    gen = np.random.default_rng(23)
    for _ in range(25):
        shape = (int(gen.integers(2, 5)), int(gen.integers(2, 5)))
        game = random_game(gen, shape)
        dist = solve_nash_2p(game)
        assert exploitability(game, dist, 0) <= 1e-6
        assert exploitability(game, dist, 1) <= 1e-6


def test_nash_gates():
    three = NormalFormGame(payoffs=tuple(np.zeros((2, 2, 2)) for _ in range(3)))
    with pytest.raises(GateError, match="two players"):
        solve_nash_2p(three)
    big = NormalFormGame(payoffs=(np.zeros((13, 2)), np.zeros((13, 2))))
    with pytest.raises(BudgetExceededError, match="budget 12"):
        solve_nash_2p(big)
    solve_nash_2p(big, budget=13)  # explicit budget lifts the gate


# ---------------------------------------------------------------------------
# CCE / CE
# ---------------------------------------------------------------------------

def test_cce_dominant_game():
    u1 = np.array([[3.0, 3.0], [0.0, 0.0]])
    u2 = np.array([[2.0, 0.0], [2.0, 0.0]])
    dist = solve_cce(NormalFormGame(payoffs=(u1, u2)))
    assert dist.probs[0, 0] == pytest.approx(1.0, abs=1e-9)


def test_nash_point_passes_cce_and_ce_audits():
    gen = np.random.default_rng(3)
    for _ in range(10):
        game = random_game(gen, (3, 3))
        dist = solve_nash_2p(game)
        assert audit_cce(game.payoffs, dist.probs, 1e-6)
        assert audit_ce(game.payoffs, dist.probs, 1e-6)


def test_cce_random_sweep_passes_audit():
    gen = np.random.default_rng(4)
    for _ in range(20):
        game = random_game(gen, (3, 3))
        dist = solve_cce(game)
        assert audit_cce(game.payoffs, dist.probs, 1e-6)


def test_ce_random_sweep_passes_audits():
    gen = np.random.default_rng(5)
    for _ in range(20):
        game = random_game(gen, (3, 3))
        dist = solve_ce(game)
        assert audit_ce(game.payoffs, dist.probs, 1e-6)
        assert audit_cce(game.payoffs, dist.probs, 1e-6)
        for player in range(2):
            assert best_swap_gain_by_enumeration(game.payoffs[player], dist.probs, player) <= 1e-6


def test_ce_point_mass_pure_nash():
    u1 = np.array([[3.0, 0.0], [1.0, 1.0]])
    u2 = np.array([[3.0, 1.0], [0.0, 1.0]])
    game = NormalFormGame(payoffs=(u1, u2))
    probs = np.zeros((2, 2))
    probs[0, 0] = 1.0  # (0,0) is a strict pure Nash
    dist = JointDistribution(probs=probs)
    assert audit_ce(game.payoffs, dist.probs, 1e-9)
    assert best_swap_gain(game, dist, 0) == 0.0


def test_cce_three_players():
    gen = np.random.default_rng(6)
    game = random_game(gen, (2, 3, 2))
    dist = solve_cce(game)
    assert audit_cce(game.payoffs, dist.probs, 1e-6)
    ce = solve_ce(game)
    assert audit_ce(game.payoffs, ce.probs, 1e-6)


def test_correlated_budget_fault():
    game = NormalFormGame(payoffs=(np.zeros((3, 3)), np.zeros((3, 3))))
    with pytest.raises(BudgetExceededError, match="budget 4"):
        solve_cce(game, budget=4)


def test_cce_maximizes_total_payoff_in_chicken():
    # Chicken: the welfare-best CCE puts no mass on the crash profile.
    u1 = np.array([[6.0, 2.0], [7.0, 0.0]])
    u2 = np.array([[6.0, 7.0], [2.0, 0.0]])
    game = NormalFormGame(payoffs=(u1, u2))
    dist = solve_ce(game)
    total = expected_payoff(game, dist, 0) + expected_payoff(game, dist, 1)
    assert total >= 10.5 - 1e-7  # known optimum of the CE polytope
    assert dist.probs[1, 1] == pytest.approx(0.0, abs=1e-9)


# ---------------------------------------------------------------------------
# deviation oracles
# ---------------------------------------------------------------------------

def test_exploitability_zero_at_nash():
    game = NormalFormGame(payoffs=(MATCHING_PENNIES, -MATCHING_PENNIES))
    dist = JointDistribution.from_product([np.array([0.5, 0.5]), np.array([0.5, 0.5])])
    assert exploitability(game, dist, 0) <= 1e-6
    assert exploitability(game, dist, 1) <= 1e-6
    assert best_swap_gain(game, dist, 0) <= 1e-6


def test_exploitability_equals_payoff_gap():
    u1 = np.array([[3.0, 3.0], [0.0, 0.0]])
    u2 = np.array([[2.0, 0.0], [2.0, 0.0]])
    game = NormalFormGame(payoffs=(u1, u2))
    probs = np.zeros((2, 2))
    probs[1, 1] = 1.0  # mass on the dominated profile
    dist = JointDistribution(probs=probs)
    assert exploitability(game, dist, 0) == pytest.approx(3.0)
    assert exploitability(game, dist, 1) == pytest.approx(2.0)


def test_deviation_oracles_match_brute_force():
    gen = np.random.default_rng(8)
    for _ in range(25):
        game = random_game(gen, (3, 3))
        dist = random_dist(gen, (3, 3))
        for player in range(2):
            swap = best_swap_gain(game, dist, player)
            enumerated = best_swap_gain_by_enumeration(game.payoffs[player], dist.probs, player)
            assert swap == pytest.approx(enumerated, abs=1e-9)
            marginal = dist.probs.sum(axis=player)
            devs = [
                float((np.take(game.payoffs[player], d, axis=player) * marginal).sum())
                for d in range(3)
            ]
            raw = max(devs) - expected_payoff(game, dist, player)
            assert raw_exploitability(game, dist, player) == pytest.approx(raw, abs=1e-9)


def test_swap_gain_dominates_exploitability():
    gen = np.random.default_rng(9)
    for _ in range(50):
        shape = (int(gen.integers(2, 4)), int(gen.integers(2, 4)))
        game = random_game(gen, shape)
        dist = random_dist(gen, shape)
        for player in range(2):
            assert (
                best_swap_gain(game, dist, player)
                >= exploitability(game, dist, player) - 1e-9
            )


def test_affine_shift_leaves_solutions_in_place():
    gen = np.random.default_rng(10)
    game = random_game(gen, (3, 3))
    shifted = NormalFormGame(payoffs=tuple(p + 7.5 for p in game.payoffs))
    for solver in (solve_cce, solve_ce):
        base = solver(game)
        moved = solver(shifted)
        np.testing.assert_allclose(base.probs, moved.probs, atol=1e-6)
        for player in range(2):
            assert exploitability(game, base, player) == pytest.approx(
                exploitability(shifted, moved, player), abs=1e-7
            )
    sol = solve_zero_sum(MATCHING_PENNIES)
    sol_shift = solve_zero_sum(MATCHING_PENNIES + 4.0)
    assert sol_shift.value == pytest.approx(sol.value + 4.0, abs=1e-9)
    np.testing.assert_allclose(sol.row_strategy, sol_shift.row_strategy, atol=1e-9)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_game_and_dist_roundtrip():
    gen = np.random.default_rng(12)
    game = NormalFormGame(
        payoffs=(gen.random((2, 3)), gen.random((2, 3))),
        labels=((0, 1), (0, 1, 2)),
    )
    doc = game_to_dict(game)
    back = game_from_dict(doc)
    for a, b in zip(game.payoffs, back.payoffs):
        np.testing.assert_array_equal(a, b)
    assert back.labels == game.labels

    dist = solve_cce(game)
    back_dist = dist_from_dict(dist_to_dict(dist))
    np.testing.assert_array_equal(dist.probs, back_dist.probs)


def test_invalid_games_rejected():
    with pytest.raises(ValueError, match="shape"):
        NormalFormGame(payoffs=(np.zeros((2, 2)), np.zeros((2, 3))))
    with pytest.raises(ValueError, match="rank"):
        NormalFormGame(payoffs=(np.zeros((2, 2)),))
    with pytest.raises(ValueError, match="finite"):
        NormalFormGame(payoffs=(np.full((2, 2), np.nan), np.zeros((2, 2))))
    with pytest.raises(ValueError, match="sum"):
        JointDistribution(probs=np.full((2, 2), 0.3))
