"""Exact tabular partially observable Markov games at desk scale.

Model and likelihood machinery, weakly-revealing condition checkers,
normal-form equilibrium solvers, optimistic-MLE learners with exact regret
oracles, hard-instance constructions, and a command-line driver.
"""
from .errors import (
    BudgetExceededError,
    ConfigError,
    EmptyConfidenceSetError,
    GateError,
    LikelihoodDegeneracyError,
    ModelFormatError,
    PolicyDomainError,
    PomgError,
    SolverError,
)
from .model import (
    PomgModel,
    PomgSpec,
    Trajectory,
    ValidationReport,
    joint_index,
    load_model,
    model_from_dict,
    model_to_dict,
    sample_trajectory,
    save_model,
    split_joint,
    trajectory_return,
    validate_model,
)
from .policies import (
    DetPolicy,
    JointDetPolicy,
    MixedJointPolicy,
    Mixture,
    StrategyModification,
    apply_modification,
    count_det_policies,
    enumerate_det_policies,
    enumerate_pure_sets,
    exclude,
    history_keys,
    marginalize,
    product_policy,
)
from .likelihood import (
    CandidateFamily,
    ConfidenceSet,
    build_confidence_set,
    dataset_from_jsonl,
    dataset_to_jsonl,
    default_beta,
    forward_prob,
    log_likelihood,
    mixed_value,
    policy_value,
)
from .revealing import (
    MStepMatrix,
    build_m_step_matrix,
    check_multi_step,
    check_single_step,
    multi_step_predicate,
    per_step_sigmas,
    sigma_s_min,
    single_step_predicate,
)
from .equilibria import (
    JointDistribution,
    NormalFormGame,
    ZeroSumSolution,
    best_swap_gain,
    dist_from_dict,
    dist_to_dict,
    expected_payoff,
    exploitability,
    game_from_dict,
    game_to_dict,
    raw_best_swap_gain,
    raw_exploitability,
    solve_cce,
    solve_ce,
    solve_nash_2p,
    solve_zero_sum,
)
from .envs import (
    MultistepHardInstance,
    SinglestepHardInstance,
    benchmark_overcomplete_two_step,
    benchmark_two_state_general_sum,
    benchmark_two_state_zero_sum,
    candidate_family_around,
    contrast_family,
    hard_instance_multistep,
    hard_instance_singlestep,
    maximin_contrast_family,
    random_revealing_pomg,
)
from .omle import (
    BestResponseOpponent,
    EpisodeLog,
    FixedOpponent,
    MultiStepOmleLearner,
    OmleAdversaryLearner,
    OmleEquilibriumLearner,
    Opponent,
    RandomOpponent,
    RunCache,
    ScriptedOpponent,
    cce_regret_increment,
    ce_regret_increment,
    episode_logs_from_jsonl,
    episode_logs_to_jsonl,
    game_tensors,
    model_fingerprint,
    nash_regret_increment,
    optimistic_game,
    regret_table,
    resolve_threads,
    run_omle_adversary,
    run_omle_equilibrium,
    run_omle_multistep,
)

__version__ = "0.1.0"
