"""Command-line entry points: seeded runs, structure checks, and reports.

Every run is driven by a TOML or JSON config and leaves three artifacts in
its output directory: the per-episode JSON-lines log, a summary CSV, and a
manifest embedding the fully resolved config plus a content hash and library
versions. Re-running from the manifest reproduces the log files byte for
byte. Exit codes: 0 success, 1 algorithm fault, 2 configuration error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .envs import (
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
from .equilibria import (
    NormalFormGame,
    game_from_dict,
    raw_best_swap_gain,
    raw_exploitability,
    solve_cce,
    solve_ce,
    solve_nash_2p,
    solve_zero_sum,
)
from .errors import ConfigError, PomgError
from .likelihood import CandidateFamily
from .model import PomgModel, PomgSpec, load_model, model_to_dict, save_model
from .omle import (
    BestResponseOpponent,
    RandomOpponent,
    episode_logs_from_jsonl,
    episode_logs_to_jsonl,
    regret_table,
    resolve_threads,
    run_omle_adversary,
    run_omle_equilibrium,
    run_omle_multistep,
)
from .policies import FULL_HISTORY, REACTIVE, mixed_policy_to_dict
from .revealing import per_step_sigmas

EXIT_OK = 0
EXIT_FAULT = 1
EXIT_CONFIG = 2

ALGORITHMS = ("omle-eq", "omle-multistep", "omle-adversary")
EQ_CHOICES = ("Nash", "CCE", "CE")
POLICY_CLASSES = (REACTIVE, FULL_HISTORY)
OPPONENTS = ("best-response", "random")
ENV_SOURCES = (
    "benchmark-two-state-general-sum",
    "benchmark-two-state-zero-sum",
    "benchmark-overcomplete-two-step",
    "hard-singlestep",
    "hard-multistep",
    "random-revealing",
    "file",
)
CANDIDATE_SOURCES = ("perturbed", "contrast", "maximin-contrast")
MANIFEST_KIND = "pomg-lab-run-manifest"


# ---------------------------------------------------------------------------
# config loading and validation
# ---------------------------------------------------------------------------

class _ConfigText:
    """Raw config text, kept around so errors can point at a line."""

    def __init__(self, path: str, text: str) -> None:
        self.path = path
        self.text = text

    def line_of(self, section: str, key: Optional[str] = None) -> int:
        current = None
        section_line = 1
        for lineno, raw in enumerate(self.text.splitlines(), 1):
            stripped = raw.split("#", 1)[0].strip()
            if stripped.startswith("[") and stripped.endswith("]"):
                current = stripped[1:-1].strip().strip('"')
                if current == section:
                    section_line = lineno
                continue
            if key is not None and current == section:
                name = stripped.split("=", 1)[0].strip().strip('"')
                if name == key:
                    return lineno
        return section_line

    def fail(self, section: str, key: Optional[str], message: str) -> "ConfigError":
        line = self.line_of(section, key)
        dotted = section if key is None else f"{section}.{key}"
        return ConfigError(f"{self.path}:{line}: {dotted}: {message}")


def _load_document(path: str) -> Tuple[dict, _ConfigText]:
    try:
        with open(path, "rb") as handle:
            blob = handle.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    text = blob.decode("utf-8", errors="replace")
    if path.endswith(".toml"):
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a table of sections")
    return doc, _ConfigText(path, text)


class _Section:
    """One config table with typed, line-precise accessors."""

    def __init__(self, source: _ConfigText, name: str, table: dict) -> None:
        if not isinstance(table, dict):
            raise source.fail(name, None, "must be a table")
        self.source = source
        self.name = name
        self.table = dict(table)
        self.seen = set()

    def _fetch(self, key: str, kind, required: bool, default):
        self.seen.add(key)
        if key not in self.table:
            if required:
                raise self.source.fail(self.name, None, f"missing required key {key!r}")
            return default
        value = self.table[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is not None and (not isinstance(value, kind) or isinstance(value, bool) != (kind is bool)):
            raise self.source.fail(
                self.name, key, f"expected {kind.__name__}, got {type(value).__name__}"
            )
        return value

    def str_choice(self, key: str, choices: Sequence[str], required=False, default=None):
        value = self._fetch(key, str, required, default)
        if value is not None and value not in choices:
            raise self.source.fail(
                self.name, key, f"must be one of {', '.join(choices)}; got {value!r}"
            )
        return value

    def integer(self, key: str, required=False, default=None, minimum=None):
        value = self._fetch(key, int, required, default)
        if value is not None and minimum is not None and value < minimum:
            raise self.source.fail(self.name, key, f"must be >= {minimum}, got {value}")
        return value

    def number(self, key: str, required=False, default=None, minimum=None):
        value = self._fetch(key, float, required, default)
        if value is not None and minimum is not None and value < minimum:
            raise self.source.fail(self.name, key, f"must be >= {minimum}, got {value}")
        return value

    def boolean(self, key: str, default=False):
        return self._fetch(key, bool, False, default)

    def string(self, key: str, required=False, default=None):
        return self._fetch(key, str, required, default)

    def int_list(self, key: str, required=False):
        value = self._fetch(key, list, required, None)
        if value is None:
            return None
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            raise self.source.fail(self.name, key, "must be a list of integers")
        return [int(v) for v in value]

    def reject_unknown(self) -> None:
        extra = sorted(set(self.table) - self.seen)
        if extra:
            raise self.source.fail(self.name, extra[0], "unknown key")


def _env_players(env: Dict[str, Any]) -> int:
    if env["source"] == "random-revealing":
        return env["players"]
    if env["source"] == "file":
        return load_model(env["path"]).spec.num_players
    return 2


def _resolve_run_config(doc: dict, source: _ConfigText, config_dir: str) -> Dict[str, Any]:
    """Validate a raw config document into a fully pinned run description."""
    for section in doc:
        if section not in ("run", "env", "candidates", "output"):
            raise source.fail(section, None, "unknown section")
    if "run" not in doc:
        raise ConfigError(f"{source.path}:1: missing [run] section")
    if "env" not in doc:
        raise ConfigError(f"{source.path}:1: missing [env] section")
    if "candidates" not in doc:
        raise ConfigError(f"{source.path}:1: missing [candidates] section")

    run = _Section(source, "run", doc["run"])
    algorithm = run.str_choice("algorithm", ALGORITHMS, required=True)
    resolved_run: Dict[str, Any] = {
        "algorithm": algorithm,
        "episodes": run.integer("episodes", required=True, minimum=1),
        "seed": run.integer("seed", default=0),
        "policy_class": run.str_choice("policy_class", POLICY_CLASSES, default=REACTIVE),
        "alpha": run.number("alpha", default=0.2, minimum=0.0),
    }
    beta = run.table.get("beta", "default")
    run.seen.add("beta")
    if isinstance(beta, (int, float)) and not isinstance(beta, bool):
        resolved_run["beta"] = float(beta)
    elif beta == "default":
        resolved_run["beta"] = "default"
    else:
        raise source.fail("run", "beta", f'must be "default" or a number, got {beta!r}')
    resolved_run["beta_c"] = run.number("beta_c", default=1.0, minimum=0.0)
    resolved_run["beta_delta"] = run.number("beta_delta", default=0.05)
    if not 0.0 < resolved_run["beta_delta"] < 1.0:
        raise source.fail("run", "beta_delta", "must lie strictly between 0 and 1")

    if algorithm == "omle-adversary":
        resolved_run["opponent"] = run.str_choice("opponent", OPPONENTS, default="best-response")
        if "eq_type" in run.table:
            raise source.fail("run", "eq_type", "does not apply to omle-adversary")
    else:
        resolved_run["eq_type"] = run.str_choice("eq_type", EQ_CHOICES, default="CCE")
        if "opponent" in run.table:
            raise source.fail("run", "opponent", f"only applies to omle-adversary, not {algorithm}")
    if algorithm == "omle-multistep":
        resolved_run["m"] = run.integer("m", default=2, minimum=1)
    elif "m" in run.table:
        raise source.fail("run", "m", f"only applies to omle-multistep, not {algorithm}")

    for budget in ("nash_budget", "profile_budget", "enumeration_budget", "value_budget"):
        value = run.integer(budget, minimum=1)
        if value is not None:
            resolved_run[budget] = value
    threads = run.integer("threads", minimum=1)
    if threads is not None:
        resolved_run["threads"] = threads
    run.reject_unknown()

    env = _Section(source, "env", doc["env"])
    env_source = env.str_choice("source", ENV_SOURCES, required=True)
    resolved_env: Dict[str, Any] = {"source": env_source}
    if env_source == "hard-singlestep":
        resolved_env["levels"] = env.integer("levels", required=True, minimum=2)
        resolved_env["seed"] = env.integer("seed", default=0)
    elif env_source == "hard-multistep":
        resolved_env["horizon"] = env.integer("horizon", required=True, minimum=3)
        resolved_env["seed"] = env.integer("seed", default=0)
    elif env_source == "random-revealing":
        resolved_env["horizon"] = env.integer("horizon", required=True, minimum=1)
        resolved_env["players"] = env.integer("players", required=True, minimum=1)
        resolved_env["states"] = env.integer("states", required=True, minimum=1)
        actions = env.int_list("actions", required=True)
        observations = env.int_list("observations", required=True)
        for name, values in (("actions", actions), ("observations", observations)):
            if len(values) != resolved_env["players"]:
                raise source.fail(
                    "env", name,
                    f"needs one entry per player ({resolved_env['players']}), got {len(values)}",
                )
        resolved_env["actions"] = actions
        resolved_env["observations"] = observations
        resolved_env["alpha_target"] = env.number("alpha_target", default=0.2, minimum=0.0)
        resolved_env["seed"] = env.integer("seed", default=0)
        resolved_env["identity_emissions"] = env.boolean("identity_emissions", default=False)
    elif env_source == "file":
        raw_path = env.string("path", required=True)
        resolved_env["path"] = os.path.normpath(os.path.join(config_dir, raw_path))
    env.reject_unknown()

    cand = _Section(source, "candidates", doc["candidates"])
    cand_source = cand.str_choice("source", CANDIDATE_SOURCES, required=True)
    resolved_cand: Dict[str, Any] = {"source": cand_source}
    if cand_source == "perturbed":
        resolved_cand["count"] = cand.integer("count", required=True, minimum=1)
        resolved_cand["scale"] = cand.number("scale", required=True, minimum=0.0)
        resolved_cand["seed"] = cand.integer("seed", default=0)
    else:
        resolved_cand["seed"] = cand.integer("seed", default=0)
        resolved_cand["floor"] = cand.number("floor", default=5e-4, minimum=0.0)
    cand.reject_unknown()

    resolved_output: Dict[str, Any] = {}
    if "output" in doc:
        output = _Section(source, "output", doc["output"])
        directory = output.string("dir")
        if directory is not None:
            resolved_output["dir"] = directory
        output.reject_unknown()

    if resolved_run.get("eq_type") == "Nash":
        players = _env_players(resolved_env)
        if players != 2:
            raise source.fail(
                "run", "eq_type",
                "Nash mode is gated to two-player games (the support-enumeration "
                f"solver is two-player only); this env has {players} players",
            )

    return {
        "run": resolved_run,
        "env": resolved_env,
        "candidates": resolved_cand,
        "output": resolved_output,
    }


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _build_env(env: Dict[str, Any]) -> PomgModel:
    source = env["source"]
    if source == "benchmark-two-state-general-sum":
        return benchmark_two_state_general_sum()
    if source == "benchmark-two-state-zero-sum":
        return benchmark_two_state_zero_sum()
    if source == "benchmark-overcomplete-two-step":
        return benchmark_overcomplete_two_step()
    if source == "hard-singlestep":
        return hard_instance_singlestep(env["levels"], seed=env["seed"]).model
    if source == "hard-multistep":
        return hard_instance_multistep(env["horizon"], seed=env["seed"]).model
    if source == "random-revealing":
        spec = PomgSpec(
            horizon=env["horizon"],
            num_players=env["players"],
            num_states=env["states"],
            actions_per_player=tuple(env["actions"]),
            observations_per_player=tuple(env["observations"]),
        )
        return random_revealing_pomg(
            spec, env["alpha_target"], seed=env["seed"],
            identity_emissions=env["identity_emissions"],
        )
    return load_model(env["path"])


def _build_candidates(cand: Dict[str, Any], truth: PomgModel) -> CandidateFamily:
    if cand["source"] == "perturbed":
        return candidate_family_around(truth, cand["count"], cand["scale"], seed=cand["seed"])
    if cand["source"] == "contrast":
        return contrast_family(truth, seed=cand["seed"], floor=cand["floor"])
    return maximin_contrast_family(truth, seed=cand["seed"], floor=cand["floor"])


def _config_hash(config: Dict[str, Any]) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# run subcommand
# ---------------------------------------------------------------------------

def _load_run_config(path: str) -> Dict[str, Any]:
    doc, source = _load_document(path)
    if doc.get("kind") == MANIFEST_KIND:
        config = doc.get("config")
        if not isinstance(config, dict):
            raise ConfigError(f"{path}: manifest has no embedded config table")
        recorded = doc.get("config_sha256")
        if recorded is not None and recorded != _config_hash(config):
            raise ConfigError(f"{path}: config_sha256 does not match the embedded config")
        return config
    return _resolve_run_config(doc, source, os.path.dirname(os.path.abspath(path)))


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_run_config(args.config)
    run = config["run"]
    out_dir = args.output_dir or config["output"].get("dir")
    if out_dir is None:
        stem = os.path.splitext(os.path.basename(args.config))[0]
        out_dir = os.path.join("runs", stem)
    os.makedirs(out_dir, exist_ok=True)

    env = _build_env(config["env"])
    candidates = _build_candidates(config["candidates"], env)
    beta = None if run["beta"] == "default" else run["beta"]
    try:
        threads = resolve_threads(args.threads if args.threads is not None else run.get("threads"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    common = dict(
        beta=beta,
        seed=run["seed"],
        policy_class=run["policy_class"],
        alpha=run["alpha"],
        threads=threads,
    )
    for budget in ("nash_budget", "profile_budget", "enumeration_budget", "value_budget"):
        if budget in run:
            common[budget] = run[budget]
    if beta is None and (run["beta_c"] != 1.0 or run["beta_delta"] != 0.05):
        from .likelihood import default_beta

        common["beta"] = default_beta(
            env.spec, run["episodes"], delta=run["beta_delta"], c=run["beta_c"]
        )

    output_policy = None
    if run["algorithm"] == "omle-eq":
        logs, output_policy = run_omle_equilibrium(
            env, candidates, run["episodes"], eq_type=run["eq_type"], **common
        )
    elif run["algorithm"] == "omle-multistep":
        logs, output_policy = run_omle_multistep(
            env, candidates, run["episodes"], m=run["m"], eq_type=run["eq_type"], **common
        )
    else:
        common.pop("nash_budget", None)
        opponent = BestResponseOpponent() if run["opponent"] == "best-response" else RandomOpponent()
        logs = run_omle_adversary(
            env, candidates, run["episodes"], opponent=opponent, **common
        )

    episodes_path = os.path.join(out_dir, "episodes.jsonl")
    summary_path = os.path.join(out_dir, "summary.csv")
    with open(episodes_path, "w", encoding="utf-8") as handle:
        handle.write(episode_logs_to_jsonl(logs))
    with open(summary_path, "w", encoding="utf-8") as handle:
        handle.write(regret_table(logs))
    artifacts = {"episodes": "episodes.jsonl", "summary": "summary.csv"}
    if output_policy is not None:
        policy_path = os.path.join(out_dir, "output_policy.json")
        with open(policy_path, "w", encoding="utf-8") as handle:
            json.dump(mixed_policy_to_dict(output_policy), handle, indent=1, sort_keys=True)
            handle.write("\n")
        artifacts["output_policy"] = "output_policy.json"

    manifest = {
        "kind": MANIFEST_KIND,
        "config": config,
        "config_sha256": _config_hash(config),
        "versions": {
            "pomg_lab": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "artifacts": artifacts,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=1, sort_keys=True)
        handle.write("\n")

    final = logs[-1]
    print(f"wrote {episodes_path}, {summary_path}, {manifest_path}")
    print(
        f"episodes={final.episode} metric={final.metric} "
        f"cumulative={final.cumulative:.6f} |B|={final.set_size}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# check-revealing subcommand
# ---------------------------------------------------------------------------

def _cmd_check_revealing(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    sigmas = per_step_sigmas(model, args.m)
    minimum = min(s for _, s in sigmas)
    result = "PASS" if minimum >= args.alpha - 1e-9 else "FAIL"
    report = {
        "m": args.m,
        "alpha": args.alpha,
        "per_step": [{"h": h, "sigma": s} for h, s in sigmas],
        "min_sigma": minimum,
        "result": result,
    }
    _emit(report, args.out)
    print(result)
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve-nf subcommand
# ---------------------------------------------------------------------------

def _load_game(path: str) -> NormalFormGame:
    doc, _ = _load_document(path)
    try:
        return game_from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed game document: {exc}") from exc


def _cmd_solve_nf(args: argparse.Namespace) -> int:
    game = _load_game(args.game)
    n_players = len(game.payoffs)
    report: Dict[str, Any] = {"mode": args.mode}
    if args.mode == "zero-sum":
        if n_players != 2:
            raise ConfigError("zero-sum mode needs exactly two players")
        totals = game.payoffs[0] + game.payoffs[1]
        if float(np.ptp(totals)) > 1e-9:
            raise ConfigError("zero-sum mode needs a constant-sum game")
        solution = solve_zero_sum(game.payoffs[0])
        report.update(
            value=solution.value,
            row_strategy=list(solution.row_strategy),
            col_strategy=list(solution.col_strategy),
        )
    elif args.mode == "nash":
        if n_players != 2:
            raise ConfigError(
                "Nash mode is gated to two-player games (the support-enumeration "
                f"solver is two-player only); this game has {n_players} players"
            )
        dist = solve_nash_2p(game, budget=args.budget)
        report.update(
            probs=dist.probs.tolist(),
            exploitability=[raw_exploitability(game, dist, i) for i in range(n_players)],
        )
    else:
        dist = solve_cce(game, budget=args.budget) if args.mode == "cce" else solve_ce(game, budget=args.budget)
        gains = (
            [raw_exploitability(game, dist, i) for i in range(n_players)]
            if args.mode == "cce"
            else [raw_best_swap_gain(game, dist, i) for i in range(n_players)]
        )
        report.update(probs=dist.probs.tolist(), deviation_gains=gains)
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# gen-env subcommand
# ---------------------------------------------------------------------------

def _cmd_gen_env(args: argparse.Namespace) -> int:
    kind = args.kind
    if kind == "benchmark-two-state-general-sum":
        model = benchmark_two_state_general_sum()
    elif kind == "benchmark-two-state-zero-sum":
        model = benchmark_two_state_zero_sum()
    elif kind == "benchmark-overcomplete-two-step":
        model = benchmark_overcomplete_two_step()
    elif kind == "hard-singlestep":
        if args.levels is None:
            raise ConfigError("hard-singlestep needs --levels")
        model = hard_instance_singlestep(args.levels, seed=args.seed).model
    elif kind == "hard-multistep":
        if args.horizon is None:
            raise ConfigError("hard-multistep needs --horizon")
        model = hard_instance_multistep(args.horizon, seed=args.seed).model
    else:
        needed = {"horizon": args.horizon, "players": args.players, "states": args.states,
                  "actions": args.actions, "observations": args.observations}
        missing = [k for k, v in needed.items() if v is None]
        if missing:
            raise ConfigError(f"random-revealing needs --{', --'.join(missing)}")
        if len(args.actions) != args.players or len(args.observations) != args.players:
            raise ConfigError("--actions and --observations need one entry per player")
        spec = PomgSpec(
            horizon=args.horizon,
            num_players=args.players,
            num_states=args.states,
            actions_per_player=tuple(args.actions),
            observations_per_player=tuple(args.observations),
        )
        model = random_revealing_pomg(
            spec, args.alpha_target, seed=args.seed,
            identity_emissions=args.identity_emissions,
        )
    save_model(model, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# regret-report subcommand
# ---------------------------------------------------------------------------

def _cmd_regret_report(args: argparse.Namespace) -> int:
    try:
        with open(args.logs, "r", encoding="utf-8") as handle:
            logs = episode_logs_from_jsonl(handle.read())
    except OSError as exc:
        raise ConfigError(f"{args.logs}: {exc.strerror or exc}") from exc
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{args.logs}: malformed episode log: {exc}") from exc
    if not logs:
        raise ConfigError(f"{args.logs}: no episodes found")
    report = {
        "metric": logs[0].metric,
        "episodes": len(logs),
        "k": [log.episode for log in logs],
        "increment": [log.increment for log in logs],
        "cumulative": [log.cumulative for log in logs],
        "average": [log.cumulative / log.episode for log in logs],
        "set_size": [log.set_size for log in logs],
    }
    _emit(report, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def _emit(report: Dict[str, Any], out: Optional[str]) -> None:
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pomg-lab",
        description="Exact tabular partially observable Markov games: seeded "
        "learner runs, revealing checks, equilibrium solves, and reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured learner run")
    p_run.add_argument("config", help="TOML/JSON config, or a manifest.json to re-execute")
    p_run.add_argument("--output-dir", help="override the config's output directory")
    p_run.add_argument("--threads", type=int, help="cap for parallel value evaluation")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check-revealing", help="per-step singular-value report")
    p_check.add_argument("model", help="pomg-v1 model file")
    p_check.add_argument("--m", type=int, default=1, help="window length (default 1)")
    p_check.add_argument("--alpha", type=float, default=0.2, help="threshold (default 0.2)")
    p_check.add_argument("--out", help="write the JSON report here instead of stdout")
    p_check.set_defaults(func=_cmd_check_revealing)

    p_solve = sub.add_parser("solve-nf", help="solve a normal-form game file")
    p_solve.add_argument("game", help="JSON game document")
    p_solve.add_argument("--mode", required=True, choices=("zero-sum", "nash", "cce", "ce"))
    p_solve.add_argument("--budget", type=int, default=10**6, help="solver budget")
    p_solve.add_argument("--out", help="write the JSON report here instead of stdout")
    p_solve.set_defaults(func=_cmd_solve_nf)

    p_gen = sub.add_parser("gen-env", help="write a pomg-v1 model file")
    p_gen.add_argument(
        "kind",
        choices=(
            "benchmark-two-state-general-sum",
            "benchmark-two-state-zero-sum",
            "benchmark-overcomplete-two-step",
            "hard-singlestep",
            "hard-multistep",
            "random-revealing",
        ),
    )
    p_gen.add_argument("--out", required=True, help="destination model file")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--levels", type=int, help="hard-singlestep level count")
    p_gen.add_argument("--horizon", type=int, help="horizon (hard-multistep, random-revealing)")
    p_gen.add_argument("--players", type=int, help="random-revealing player count")
    p_gen.add_argument("--states", type=int, help="random-revealing state count")
    p_gen.add_argument("--actions", type=int, nargs="+", help="per-player action counts")
    p_gen.add_argument("--observations", type=int, nargs="+", help="per-player observation counts")
    p_gen.add_argument("--alpha-target", type=float, default=0.2)
    p_gen.add_argument("--identity-emissions", action="store_true")
    p_gen.set_defaults(func=_cmd_gen_env)

    p_report = sub.add_parser("regret-report", help="cumulative and per-episode regret curves")
    p_report.add_argument("logs", help="episodes.jsonl from a run")
    p_report.add_argument("--out", help="write the JSON report here instead of stdout")
    p_report.set_defaults(func=_cmd_regret_report)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PomgError as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":
    sys.exit(main())
