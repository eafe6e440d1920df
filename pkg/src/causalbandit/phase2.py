"""Second estimation phase: shared-count refinement of the phase-1 estimates.

Part one replays each pair's recorded best arm for a batch of the same size as
in phase 1, but every free uncertain node of the applied arm absorbs counts
from every sample. Part two spends a third of the horizon on arms drawn from a
weight vector: either the minimizer of the phase-1 allocation objective
("paper") or the share of pairs that voted for each arm ("practical").
Practical mode additionally folds the shared counts recorded during phase 1
into the totals. Final rates are zeroed wherever phase 1 dropped the entry.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .allocation import (MinimizeResult, RatioObjective, SolverConfig, minimize)
from .errors import BudgetError, InternalConsistencyError, ParameterError
from .inference import Environment, parent_probabilities
from .model import FREE, ConditionalTable, ParentRealization, as_rng
from .phase1 import Phase1Result, accumulate_counts, rate_estimate

WEIGHT_CLIP = 1e-12


def build_allocation_objective(phase1: Phase1Result) -> RatioObjective:
    """Ratio objective over the surviving pairs, offsets best-value / row count.

    A pair survives when at least one of its two conditional values escaped
    truncation. A surviving pair whose recorded best reachability is zero while
    its recomputed probabilities are not signals a corrupted result.
    """
    dag, arms = phase1.dag, phase1.arms
    total_rows = sum(dag.row_count(n) for n in phase1.uncertain_nodes)
    free = arms.matrix.T == FREE
    rows, masks, offsets = [], [], []
    for n in phase1.uncertain_nodes:
        dropped = phase1.truncation.dropped_rows(n)
        for row_idx in range(dag.row_count(n)):
            if dropped[row_idx]:
                continue
            pi = ParentRealization.from_index(dag.parents[n], row_idx)
            vec = parent_probabilities(phase1.trimmed, dag, n, pi, arms)
            best = phase1.best_value[n][row_idx]
            if best == 0.0 and np.max(vec) > 0.0:
                raise InternalConsistencyError(
                    f"pair (node {n}, row {row_idx}) kept with zero recorded "
                    "reachability but nonzero recomputed probabilities")
            rows.append(vec)
            masks.append(free[n])
            offsets.append(best / total_rows)
    if not rows:
        return RatioObjective(np.zeros((0, len(arms))),
                              np.zeros((0, len(arms)), dtype=bool), np.zeros(0))
    return RatioObjective(np.array(rows), np.array(masks), np.array(offsets))


def heuristic_eta(phase1: Phase1Result) -> np.ndarray:
    """Per-arm share of pairs whose phase-1 scan picked that arm."""
    counts = np.zeros(len(phase1.arms))
    total = 0
    for n in phase1.uncertain_nodes:
        for arm_idx in phase1.best_arm[n]:
            counts[arm_idx] += 1
            total += 1
    return counts / total


@dataclass(frozen=True)
class Phase2Result:
    estimate: ConditionalTable
    seen: tuple[np.ndarray, ...]
    seen_one: tuple[np.ndarray, ...]
    weights: np.ndarray
    mode: str
    per_pair: int
    draws: int
    solver: MinimizeResult | None


def run_phase2(env: Environment, phase1: Phase1Result, horizon: int, mode: str,
               rng, solver_config: SolverConfig | None = None) -> Phase2Result:
    if mode not in ("paper", "practical"):
        raise ParameterError(f"mode must be 'paper' or 'practical', got {mode!r}")
    if mode == "practical" and phase1.shared_seen is None:
        raise ParameterError("practical mode needs phase-1 shared counts")
    dag, arms = phase1.dag, phase1.arms
    uncertain = phase1.uncertain_nodes
    total_rows = sum(dag.row_count(n) for n in uncertain)
    if horizon < 3 * total_rows:
        raise BudgetError(
            f"horizon {horizon} is below 3x the {total_rows} uncertain rows")
    per_pair = horizon // (3 * total_rows)
    rng = as_rng(rng)

    seen = [np.zeros(dag.row_count(n), dtype=np.int64) for n in range(dag.node_count)]
    seen_one = [np.zeros(dag.row_count(n), dtype=np.int64) for n in range(dag.node_count)]

    matrix = arms.matrix
    for n in uncertain:
        for row_idx in range(dag.row_count(n)):
            arm_idx = int(phase1.best_arm[n][row_idx])
            omega = env.intervene_many(matrix[arm_idx], per_pair)
            accumulate_counts(dag, uncertain, matrix[arm_idx], omega, seen, seen_one)

    solver = None
    if mode == "paper":
        solver = minimize(build_allocation_objective(phase1), solver_config)
        weights = solver.weights.copy()
    else:
        weights = heuristic_eta(phase1)
    weights[weights < WEIGHT_CLIP] = 0.0
    total = weights.sum()
    weights = weights / total if total > 0 else np.full(len(arms), 1.0 / len(arms))

    draws = horizon // 3
    picks = np.searchsorted(np.cumsum(weights), rng.random(draws), side="right")
    picks = np.clip(picks, 0, len(arms) - 1)
    pick_counts = np.bincount(picks, minlength=len(arms))
    for arm_idx in np.flatnonzero(pick_counts):
        omega = env.intervene_many(matrix[arm_idx], int(pick_counts[arm_idx]))
        accumulate_counts(dag, uncertain, matrix[arm_idx], omega, seen, seen_one)

    if mode == "practical":
        for n in uncertain:
            seen[n] += phase1.shared_seen[n]
            seen_one[n] += phase1.shared_seen_one[n]

    final = [np.zeros((dag.row_count(n), 2)) for n in range(dag.node_count)]
    for n in uncertain:
        dropped = phase1.truncation.dropped(n)
        for row_idx in range(dag.row_count(n)):
            for value in (0, 1):
                if not dropped[row_idx, value]:
                    final[n][row_idx, value] = rate_estimate(
                        seen[n][row_idx], seen_one[n][row_idx], value)

    return Phase2Result(
        estimate=ConditionalTable(tuple(final)),
        seen=tuple(seen),
        seen_one=tuple(seen_one),
        weights=weights,
        mode=mode,
        per_pair=per_pair,
        draws=draws,
        solver=solver,
    )
