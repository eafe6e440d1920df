"""First estimation phase: one batched scan per uncertain (node, parent-row)
pair.

Pairs are visited in node order, so every upstream estimate is final before it
feeds a downstream pair's reachability score. For each pair the arm with the
highest estimated chance of producing the wanted parent pattern is pulled for
the pair's whole batch; the conditional success rate is then read off the
matching samples. Rates whose (rate x reachability) product falls under the
truncation threshold are marked unreliable and zeroed in the returned table;
pairs whose best reachability itself is tiny are marked rare and only excluded
later, at final-estimate time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, ParameterError
from .inference import Environment, parent_probabilities
from .model import FREE, CausalDag, ConditionalTable, InterventionSet, ParentRealization


def truncation_threshold(trunc_scale: float, node_count: int, uncertain_rows: int,
                         horizon: int) -> float:
    """12 * scale * nodes^2 * uncertain rows * ln(horizon) / horizon."""
    if trunc_scale <= 0:
        raise ParameterError("trunc_scale must be positive")
    if node_count <= 0 or uncertain_rows <= 0:
        raise ParameterError("node and row counts must be positive")
    if horizon < 2:
        raise ParameterError("horizon must be at least 2")
    return 12.0 * trunc_scale * node_count ** 2 * uncertain_rows \
        * math.log(horizon) / horizon


def rate_estimate(seen: float, seen_one: float, value: int) -> float:
    """Empirical conditional rate; zero observations give zero for both values."""
    if seen == 0:
        return 0.0
    rate_one = seen_one / seen
    return rate_one if value == 1 else 1.0 - rate_one


@dataclass(frozen=True)
class TruncationSets:
    """Per-node boolean masks of shape (rows, 2), indexed [parent row, value]."""

    unreliable: tuple[np.ndarray, ...]
    rare: tuple[np.ndarray, ...]

    def dropped(self, n: int) -> np.ndarray:
        return self.unreliable[n] | self.rare[n]

    def dropped_rows(self, n: int) -> np.ndarray:
        """Parent rows of node n with both values dropped."""
        return self.dropped(n).all(axis=1)

    @property
    def unreliable_count(self) -> int:
        return int(sum(m.sum() for m in self.unreliable))

    @property
    def rare_count(self) -> int:
        return int(sum(m.sum() for m in self.rare))


def accumulate_counts(dag: CausalDag, uncertain_nodes, arm_row, omega,
                      seen, seen_one) -> None:
    """Fold a sample batch into per-row counts for every free uncertain node."""
    for m in uncertain_nodes:
        if arm_row[m] != FREE:
            continue
        idx = dag.parent_indices(m, omega)
        seen[m] += np.bincount(idx, minlength=seen[m].shape[0])
        seen_one[m] += np.bincount(idx[omega[:, m] == 1], minlength=seen[m].shape[0])


@dataclass(frozen=True)
class Phase1Result:
    dag: CausalDag
    arms: InterventionSet
    trimmed: ConditionalTable
    truncation: TruncationSets
    seen: tuple[np.ndarray, ...]
    seen_one: tuple[np.ndarray, ...]
    best_arm: tuple[np.ndarray, ...]
    best_value: tuple[np.ndarray, ...]
    shared_seen: tuple[np.ndarray, ...] | None
    shared_seen_one: tuple[np.ndarray, ...] | None
    trunc_scale: float
    horizon: int
    per_pair: int
    threshold: float
    uncertain_nodes: tuple[int, ...]


def run_phase1(env: Environment, dag: CausalDag, arms: InterventionSet,
               trunc_scale: float, horizon: int,
               record_shared: bool = True) -> Phase1Result:
    """Scan every uncertain pair once; trunc_scale zero disables truncation."""
    if trunc_scale < 0:
        raise ParameterError("trunc_scale must be nonnegative")
    uncertain = tuple(n for n in range(dag.node_count) if bool(arms.ever_free[n]))
    total_rows = sum(dag.row_count(n) for n in uncertain)
    if total_rows == 0:
        raise ParameterError("no arm leaves any node free")
    if horizon < 3 * total_rows:
        raise BudgetError(
            f"horizon {horizon} is below 3x the {total_rows} uncertain rows")
    per_pair = horizon // (3 * total_rows)
    threshold = (truncation_threshold(trunc_scale, dag.node_count, total_rows, horizon)
                 if trunc_scale > 0 else 0.0)

    working = [np.zeros((dag.row_count(n), 2)) for n in range(dag.node_count)]
    unreliable = [np.zeros((dag.row_count(n), 2), dtype=bool) for n in range(dag.node_count)]
    rare = [np.zeros((dag.row_count(n), 2), dtype=bool) for n in range(dag.node_count)]
    seen = [np.zeros(dag.row_count(n), dtype=np.int64) for n in range(dag.node_count)]
    seen_one = [np.zeros(dag.row_count(n), dtype=np.int64) for n in range(dag.node_count)]
    best_arm = [np.full(dag.row_count(n), -1, dtype=np.int64) for n in range(dag.node_count)]
    best_value = [np.zeros(dag.row_count(n)) for n in range(dag.node_count)]
    shared_seen = [np.zeros(dag.row_count(n), dtype=np.int64) for n in range(dag.node_count)] \
        if record_shared else None
    shared_seen_one = [np.zeros(dag.row_count(n), dtype=np.int64) for n in range(dag.node_count)] \
        if record_shared else None

    matrix = arms.matrix
    for n in uncertain:
        snapshot = ConditionalTable(tuple(working))
        for row_idx in range(dag.row_count(n)):
            pi = ParentRealization.from_index(dag.parents[n], row_idx)
            reach = parent_probabilities(snapshot, dag, n, pi, arms)
            arm_idx = int(np.argmax(reach))
            best_arm[n][row_idx] = arm_idx
            best_value[n][row_idx] = reach[arm_idx]
            omega = env.intervene_many(matrix[arm_idx], per_pair)
            parent_idx = dag.parent_indices(n, omega)
            match = parent_idx == row_idx
            t = int(match.sum())
            t1 = int((match & (omega[:, n] == 1)).sum())
            seen[n][row_idx] = t
            seen_one[n][row_idx] = t1
            for value in (0, 1):
                est = rate_estimate(t, t1, value)
                if trunc_scale > 0 and est * best_value[n][row_idx] <= 2.0 * math.e * threshold:
                    unreliable[n][row_idx, value] = True
                    working[n][row_idx, value] = 0.0
                else:
                    working[n][row_idx, value] = est
            if record_shared:
                accumulate_counts(dag, uncertain, matrix[arm_idx], omega,
                                  shared_seen, shared_seen_one)

    if trunc_scale > 0:
        rare_cut = 8.0 * math.e * total_rows ** 2 * threshold
        for n in uncertain:
            rare[n][best_value[n] <= rare_cut, :] = True

    return Phase1Result(
        dag=dag,
        arms=arms,
        trimmed=ConditionalTable(tuple(working)),
        truncation=TruncationSets(tuple(unreliable), tuple(rare)),
        seen=tuple(seen),
        seen_one=tuple(seen_one),
        best_arm=tuple(best_arm),
        best_value=tuple(best_value),
        shared_seen=tuple(shared_seen) if record_shared else None,
        shared_seen_one=tuple(shared_seen_one) if record_shared else None,
        trunc_scale=trunc_scale,
        horizon=horizon,
        per_pair=per_pair,
        threshold=threshold,
        uncertain_nodes=uncertain,
    )
