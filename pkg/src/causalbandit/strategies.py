"""End-to-end arm-selection strategies and the regret metric.

Each strategy consumes a sampling environment and a horizon and returns the
arm it would commit to plus its per-arm value estimates. The two-phase
strategy estimates the conditional table and scores arms by exact inference on
the estimate; the baselines score arms by direct reward averages.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import SolverConfig
from .errors import ParameterError
from .inference import Environment, target_probabilities, target_probability
from .model import CausalDag, Instance, Intervention, InterventionSet
from .phase1 import run_phase1
from .phase2 import run_phase2


@dataclass(frozen=True)
class StrategyResult:
    chosen_index: int
    chosen: Intervention
    mu_hat: np.ndarray
    experiments_used: int


def default_trunc_scale(dag: CausalDag, arms: InterventionSet, mode: str) -> float:
    """Truncation scale used by the two-phase strategy: rows^3 / nodes in paper
    mode, disabled entirely in practical mode."""
    if mode == "practical":
        return 0.0
    rows = sum(dag.row_count(n) for n in range(dag.node_count) if bool(arms.ever_free[n]))
    return rows ** 3 / dag.node_count


def run_causal_bandit(env: Environment, dag: CausalDag, arms: InterventionSet,
                      horizon: int, mode: str, rng, trunc_scale: float | None = None,
                      solver_config: SolverConfig | None = None) -> StrategyResult:
    """Two-phase strategy: estimate the conditional table, then pick the arm
    whose inferred reward probability is highest (lowest index on ties)."""
    if mode not in ("paper", "practical"):
        raise ParameterError(f"mode must be 'paper' or 'practical', got {mode!r}")
    if trunc_scale is None:
        trunc_scale = default_trunc_scale(dag, arms, mode)
    before = env.experiments_used
    phase1 = run_phase1(env, dag, arms, trunc_scale, horizon,
                        record_shared=(mode == "practical"))
    phase2 = run_phase2(env, phase1, horizon, mode, rng, solver_config)
    mu_hat = target_probabilities(phase2.estimate, dag, arms)
    chosen = int(np.argmax(mu_hat))
    return StrategyResult(chosen, arms[chosen], mu_hat, env.experiments_used - before)


def run_uniform_baseline(env: Environment, dag: CausalDag, arms: InterventionSet,
                         horizon: int) -> StrategyResult:
    """Split the horizon as evenly as possible over the arms, remainder to the
    lowest indices; never-pulled arms keep estimate zero."""
    if horizon < 0:
        raise ParameterError("horizon must be nonnegative")
    k = len(arms)
    base, extra = divmod(horizon, k)
    mu_hat = np.zeros(k)
    before = env.experiments_used
    for i in range(k):
        count = base + (1 if i < extra else 0)
        if count == 0:
            continue
        omega = env.intervene_many(arms.matrix[i], count)
        mu_hat[i] = omega[:, -1].mean()
    chosen = int(np.argmax(mu_hat))
    return StrategyResult(chosen, arms[chosen], mu_hat, env.experiments_used - before)


def run_successive_rejects(env: Environment, dag: CausalDag, arms: InterventionSet,
                           horizon: int) -> StrategyResult:
    """Round-based elimination: each round tops every survivor up to a shared
    pull count, then retires the lowest empirical mean (lowest index on ties).
    Rounds whose schedule entry is not yet positive pull nothing, so tiny
    horizons degenerate to eliminating by index alone."""
    k = len(arms)
    if k < 2:
        raise ParameterError("need at least two arms")
    if horizon < 1:
        raise ParameterError("horizon must be positive")
    log_bar = 0.5 + sum(1.0 / i for i in range(2, k + 1))
    sums = np.zeros(k)
    pulls = np.zeros(k, dtype=np.int64)
    active = np.ones(k, dtype=bool)
    before = env.experiments_used
    level = 0
    for stage in range(1, k):
        target = int(np.ceil((horizon - k) / (log_bar * (k + 1 - stage))))
        add = max(0, target - level)
        level = max(level, target)
        if add > 0:
            for i in np.flatnonzero(active):
                omega = env.intervene_many(arms.matrix[i], add)
                sums[i] += omega[:, -1].sum()
                pulls[i] += add
        means = np.where(pulls > 0, sums / np.maximum(pulls, 1), 0.0)
        live = np.flatnonzero(active)
        worst = live[int(np.argmin(means[live]))]
        active[worst] = False
    survivor = int(np.flatnonzero(active)[0])
    mu_hat = np.where(pulls > 0, sums / np.maximum(pulls, 1), 0.0)
    return StrategyResult(survivor, arms[survivor], mu_hat,
                          env.experiments_used - before)


def simple_regret(instance: Instance, chosen) -> float:
    """Best achievable reward probability minus the mean over chosen arms."""
    if isinstance(chosen, Intervention):
        chosen = [chosen]
    chosen = list(chosen)
    if not chosen:
        raise ParameterError("need at least one chosen intervention")
    best = float(np.max(target_probabilities(instance.table, instance.dag, instance.arms)))
    vals = [target_probability(instance.table, instance.dag, arm) for arm in chosen]
    return best - float(np.mean(vals))
