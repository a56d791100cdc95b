"""Acceptance gate: ten numbered criteria, one verdict line each.

Every test checks its criterion at the stated tolerance, prints a single
``criterion N: PASS/FAIL (...)`` line, and asserts the verdict. A red test
here means the criterion is genuinely unmet; nothing in this file relaxes
a threshold to stay green.
"""
import itertools
import json
import os
import time

import numpy as np
import pytest

from pomg_lab import envs, omle
from pomg_lab.cli import EXIT_OK, main as cli_main
from pomg_lab.equilibria import (
    JointDistribution,
    NormalFormGame,
    best_swap_gain,
    exploitability,
    solve_cce,
    solve_ce,
    solve_zero_sum,
)
from pomg_lab.likelihood import ConfidenceSet, forward_prob
from pomg_lab.policies import REACTIVE, MixedJointPolicy, JointDetPolicy, enumerate_pure_sets
from pomg_lab.revealing import check_multi_step, check_single_step, multi_step_predicate

from conftest import random_model, random_small_spec
from oracles import audit_cce, audit_ce, brute_force_forward_prob


def report(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def cache():
    return omle.RunCache()


@pytest.fixture(scope="module")
def gs_truth():
    return envs.benchmark_two_state_general_sum()


@pytest.fixture(scope="module")
def gs_family(gs_truth):
    return envs.contrast_family(gs_truth, seed=0)


@pytest.fixture(scope="module")
def zs_truth():
    return envs.benchmark_two_state_zero_sum()


@pytest.fixture(scope="module")
def zs_family(zs_truth):
    return envs.contrast_family(zs_truth, seed=0)


def uniform_mixture(spec, pure_sets, product_form=False):
    shape = tuple(len(ps) for ps in pure_sets)
    support, weights = [], []
    for combo in itertools.product(*(range(n) for n in shape)):
        support.append(JointDetPolicy(
            policies=tuple(ps[c] for ps, c in zip(pure_sets, combo))))
        weights.append(1.0 / float(np.prod(shape)))
    return MixedJointPolicy(support=tuple(support), weights=tuple(weights),
                            product_form=product_form)


def test_criterion_01_likelihood_matches_latent_enumeration():
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        model = random_model(random_small_spec(rng), rng)
        spec = model.spec
        horizon = spec.horizon
        actions = [tuple(int(rng.integers(0, a)) for a in spec.actions_per_player)
                   for _ in range(horizon)]
        per_player_obs = [range(o) for o in spec.observations_per_player]
        joint_obs = list(itertools.product(*per_player_obs))
        for observations in itertools.product(joint_obs, repeat=horizon):
            fast = forward_prob(model, actions, list(observations))
            slow = brute_force_forward_prob(model, actions, list(observations))
            worst = max(worst, abs(fast - slow))
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-12 and elapsed < 10.0
    report(1, ok, f"50 instances, max |forward - enumeration| = {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_hard_instances_clear_their_revealing_checks():
    single = envs.hard_instance_singlestep(3, seed=0).model
    single_big = envs.hard_instance_singlestep(4, seed=1).model
    multi = envs.hard_instance_multistep(3, seed=0).model
    multi_big = envs.hard_instance_multistep(4, seed=2).model
    ok = (
        check_single_step(single, 1.0)
        and check_single_step(single_big, 1.0)
        and check_multi_step(multi, 2, 1.0)
        and check_multi_step(multi_big, 2, 1.0)
        and not check_single_step(multi, 1.0)
        and not check_single_step(multi_big, 1.0)
    )
    report(2, ok, "single-step family passes at alpha=1; two-step family passes "
                  "(m=2, alpha=1) and fails the one-step check")


def test_criterion_03_equilibrium_solvers_survive_exhaustive_audits():
    rng = np.random.default_rng(7)
    worst_gap = 0.0
    audits_ok = True
    for _ in range(100):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(2, 5))
        matrix = rng.uniform(-1.0, 1.0, size=(rows, cols))
        sol = solve_zero_sum(matrix)
        x = np.asarray(sol.row_strategy)
        y = np.asarray(sol.col_strategy)
        gap = float(np.max(matrix @ y) - np.min(x @ matrix))
        worst_gap = max(worst_gap, gap)

        payoffs = (rng.uniform(size=(rows, cols)), rng.uniform(size=(rows, cols)))
        game = NormalFormGame(payoffs=payoffs)
        cce = solve_cce(game)
        ce = solve_ce(game)
        audits_ok = audits_ok and audit_cce(payoffs, cce.probs, 1e-6)
        audits_ok = audits_ok and audit_ce(payoffs, ce.probs, 1e-6)
        audits_ok = audits_ok and audit_cce(payoffs, ce.probs, 1e-6)
    ok = worst_gap <= 1e-7 and audits_ok
    report(3, ok, f"100 games, worst duality gap {worst_gap:.2e}, "
                  f"deviation/swap audits at 1e-6 {'clean' if audits_ok else 'violated'}")


def test_criterion_04_swap_gain_dominates_exploitability():
    rng = np.random.default_rng(11)
    worst_margin = np.inf
    for _ in range(50):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(2, 5))
        payoffs = (rng.uniform(size=(rows, cols)), rng.uniform(size=(rows, cols)))
        game = NormalFormGame(payoffs=payoffs)
        probs = rng.dirichlet(np.ones(rows * cols)).reshape(rows, cols)
        dist = JointDistribution(probs=probs)
        for player in range(2):
            margin = best_swap_gain(game, dist, player) - exploitability(game, dist, player)
            worst_margin = min(worst_margin, margin)
    ok = worst_margin >= -1e-9
    report(4, ok, f"50 mixtures, min(best_swap_gain - exploitability) = {worst_margin:.2e}")


def test_criterion_05_optimism_holds_whenever_truth_is_in_the_set(gs_truth, gs_family, cache):
    logs, _ = omle.run_omle_equilibrium(
        gs_truth, gs_family, 100, eq_type="CCE", seed=5, cache=cache)
    pure_sets = enumerate_pure_sets(gs_truth.spec, REACTIVE, 10**6)
    true_payoffs = omle.game_tensors(gs_truth, pure_sets, cache=cache)
    covered = 0
    worst = np.inf
    for log in logs:
        if gs_family.truth_index not in log.member_indices:
            continue
        covered += 1
        b = ConfidenceSet(member_indices=log.member_indices, beta=0.0,
                          max_log_likelihood=0.0)
        optimistic = omle.optimistic_game(gs_family, b, pure_sets, cache=cache)
        for u_i, t_i in zip(optimistic.payoffs, true_payoffs):
            worst = min(worst, float(np.min(u_i - t_i)))
    ok = covered > 0 and worst >= -1e-12
    report(5, ok, f"{covered}/100 covered episodes, min(optimistic - true) = {worst:.2e}")


def test_criterion_06_confidence_set_keeps_the_truth(gs_truth, gs_family, cache):
    started = time.perf_counter()
    runs = 200
    covered_runs = 0
    for seed in range(runs):
        logs, _ = omle.run_omle_equilibrium(
            gs_truth, gs_family, 200, eq_type="CCE", seed=seed, cache=cache)
        if all(gs_family.truth_index in log.member_indices for log in logs):
            covered_runs += 1
    elapsed = time.perf_counter() - started
    rate = covered_runs / runs
    ok = rate >= 0.95 and elapsed < 300.0
    report(6, ok, f"truth in B^k for all k<=200 in {covered_runs}/{runs} runs "
                  f"({rate:.1%}), {elapsed:.0f}s")


def test_criterion_07_regret_decays_and_beats_uniform_play(
        gs_truth, gs_family, zs_truth, zs_family, cache):
    started = time.perf_counter()
    gs_pures = enumerate_pure_sets(gs_truth.spec, REACTIVE, 10**6)
    zs_pures = enumerate_pure_sets(zs_truth.spec, REACTIVE, 10**6)
    uniform_gs = uniform_mixture(gs_truth.spec, gs_pures)
    uniform_zs = uniform_mixture(zs_truth.spec, zs_pures, product_form=True)
    cases = (
        ("CCE", gs_truth, gs_family, omle.cce_regret_increment(gs_truth, uniform_gs), {}),
        ("CE", gs_truth, gs_family, omle.ce_regret_increment(gs_truth, uniform_gs), {}),
        ("Nash", zs_truth, zs_family, omle.nash_regret_increment(zs_truth, uniform_zs),
         {"nash_budget": 16}),
    )
    details = []
    ok = True
    for eq_type, truth, family, baseline_increment, extra in cases:
        logs, _ = omle.run_omle_equilibrium(
            truth, family, 400, eq_type=eq_type, seed=0, cache=cache, **extra)
        r50 = logs[49].cumulative / 50.0
        r400 = logs[399].cumulative / 400.0
        ratio = r400 / r50
        baseline_cumulative = 400.0 * baseline_increment
        frac = logs[399].cumulative / baseline_cumulative
        ok = ok and ratio < 0.5 and frac <= 0.6
        details.append(f"{eq_type} ratio {ratio:.2f} vs-uniform {frac:.2f}")
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < 900.0
    report(7, ok, "; ".join(details) + f"; {elapsed:.0f}s")


def test_criterion_08_multistep_loop_keeps_coverage_and_window_counts(cache):
    started = time.perf_counter()
    truth = envs.benchmark_overcomplete_two_step()
    family = envs.candidate_family_around(
        truth, 8, 0.35, seed=3, revealing=multi_step_predicate(2, 0.2))
    runs = 200
    covered_runs = 0
    window_counts_ok = True
    expected_entries = truth.spec.horizon - 2 + 1
    for seed in range(runs):
        logs, _ = omle.run_omle_multistep(
            truth, family, 200, m=2, eq_type="CCE", seed=seed, cache=cache)
        if all(family.truth_index in log.member_indices for log in logs):
            covered_runs += 1
        window_counts_ok = window_counts_ok and all(
            len(log.trajectories) == expected_entries for log in logs)
    elapsed = time.perf_counter() - started
    rate = covered_runs / runs
    ok = rate >= 0.95 and window_counts_ok and elapsed < 300.0
    report(8, ok, f"coverage {covered_runs}/{runs} ({rate:.1%}), "
                  f"{expected_entries} roll-in entries per episode, {elapsed:.0f}s")


def test_criterion_09_adversary_regret_decays_and_singleton_is_exact(zs_truth, cache):
    family = envs.maximin_contrast_family(zs_truth, seed=0)
    logs = omle.run_omle_adversary(
        zs_truth, family, 400, opponent=omle.BestResponseOpponent(), seed=0, cache=cache)
    r50 = logs[49].cumulative / 50.0
    r400 = logs[399].cumulative / 400.0
    ratio = r400 / r50 if r50 > 0 else np.inf

    singleton = envs.candidate_family_around(zs_truth, 1, 0.0, seed=0)
    single_logs = omle.run_omle_adversary(
        zs_truth, singleton, 25, opponent=omle.BestResponseOpponent(), seed=0, cache=cache)
    worst_single = max(log.increment for log in single_logs)
    ok = ratio < 0.5 and worst_single <= 1e-6
    report(9, ok, f"maximin ratio {ratio:.2f}, singleton max increment {worst_single:.2e}")


CRITERION_10_CONFIG = """
[run]
algorithm = "omle-eq"
episodes = 25
seed = 7
eq_type = "CCE"

[env]
source = "benchmark-two-state-general-sum"

[candidates]
source = "contrast"
seed = 0
"""


def test_criterion_10_manifest_reruns_are_byte_identical(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(CRITERION_10_CONFIG, encoding="utf-8")
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert cli_main(["run", str(config), "--output-dir", str(first)]) == EXIT_OK
    manifest = first / "manifest.json"
    assert cli_main(["run", str(manifest), "--output-dir", str(second)]) == EXIT_OK
    same = (first / "episodes.jsonl").read_bytes() == (second / "episodes.jsonl").read_bytes()
    same_csv = (first / "summary.csv").read_bytes() == (second / "summary.csv").read_bytes()
    ok = same and same_csv
    report(10, ok, "manifest re-execution reproduced episodes.jsonl and summary.csv byte for byte")
