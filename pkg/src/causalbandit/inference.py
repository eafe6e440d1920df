"""Exact probabilities on intervened DAGs, plus the sampling environment.

Two independent engines compute the same quantities:

* a brute-force enumerator, written directly from the defining sums, used as
  the test oracle for everything else;
* a frontier sweep that walks nodes in topological order keeping a joint
  distribution only over nodes whose children are still pending, batched over
  an axis of interventions.

"Target probability" is P(last node = 1 | intervention); "parent probability"
is the marginal that a node's parents realize a given bit pattern under an
intervention (zero when the node itself is intervened).
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import BudgetError, CapacityError, ParameterError
from .model import (
    FREE,
    CausalDag,
    ConditionalTable,
    Instance,
    Intervention,
    InterventionSet,
    ParentRealization,
    as_rng,
)

FRONTIER_LIMIT = 20
BRUTE_FORCE_LIMIT = 20


# ---------------------------------------------------------------------------
# brute-force oracles (pure Python, no shortcuts)

def brute_force_target_probability(table: ConditionalTable, dag: CausalDag,
                                   arm: Intervention) -> float:
    """Enumerate every assignment of the free nodes; keep those with the last
    node equal to 1; sum the products of the free nodes' conditional values."""
    values = list(arm.values)
    n_nodes = dag.node_count
    free = [n for n in range(n_nodes) if values[n] == FREE]
    if len(free) > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"{len(free)} free nodes exceeds brute-force limit {BRUTE_FORCE_LIMIT}")
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(free)):
        omega = values[:]
        for n, b in zip(free, bits):
            omega[n] = b
        if omega[n_nodes - 1] != 1:
            continue
        prod = 1.0
        for n in free:
            idx = 0
            for p in dag.parents[n]:
                idx = (idx << 1) | omega[p]
            prod *= table.rows[n][idx, omega[n]]
        total += prod
    return total


def brute_force_parent_probability(table: ConditionalTable, dag: CausalDag, n: int,
                                   pi: ParentRealization, arm: Intervention) -> float:
    """Enumerate assignments of the nodes before n that agree with the
    intervention and realize pi on n's parents; zero if n is intervened."""
    values = list(arm.values)
    if values[n] != FREE:
        return 0.0
    free = [m for m in range(n) if values[m] == FREE]
    if len(free) > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"{len(free)} free nodes exceeds brute-force limit {BRUTE_FORCE_LIMIT}")
    want = dict(zip(pi.scope, pi.bits))
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(free)):
        omega = values[:]
        for m, b in zip(free, bits):
            omega[m] = b
        if any(omega[p] != want[p] for p in pi.scope):
            continue
        prod = 1.0
        for m in free:
            idx = 0
            for p in dag.parents[m]:
                idx = (idx << 1) | omega[p]
            prod *= table.rows[m][idx, omega[m]]
        total += prod
    return total


# ---------------------------------------------------------------------------
# frontier sweep

def _arm_matrix(arms) -> np.ndarray:
    if isinstance(arms, InterventionSet):
        return arms.matrix
    if isinstance(arms, Intervention):
        return np.asarray([arms.values], dtype=np.int8)
    m = np.asarray(arms, dtype=np.int8)
    return m[None, :] if m.ndim == 1 else m


def _sweep(table: ConditionalTable, dag: CausalDag, arms: np.ndarray,
           evidence: dict[int, int], prefix: int) -> np.ndarray:
    """Joint mass, per arm, of the evidence bits over the first `prefix` nodes,
    where each arm's free nodes contribute their conditional factors and its
    fixed nodes act as constants.

    Only nodes that can influence the answer are processed: the evidence, any
    node whose rows do not sum to 1 (sub-stochastic estimates must contribute
    their mass), and, transitively, parents of processed nodes that are free in
    at least one arm. Everything else marginalizes to exactly 1 and is skipped.
    """
    n_arms = arms.shape[0]
    free = arms == FREE
    free_any = free.any(axis=0)

    relevant = set(evidence)
    for m in range(prefix):
        if free_any[m] and not table.node_is_stochastic(m):
            relevant.add(m)
    work = list(relevant)
    closed = set()
    while work:
        m = work.pop()
        if m in closed:
            continue
        closed.add(m)
        if free_any[m]:
            for p in dag.parents[m]:
                if p not in relevant:
                    relevant.add(p)
                work.append(p)

    order: list[int] = []
    visited = set()

    def visit(m):
        visited.add(m)
        for p in dag.parents[m]:
            if p in relevant and p not in visited:
                visit(p)
        order.append(m)

    for m in sorted(relevant, reverse=True):
        if m not in visited:
            visit(m)

    pos = {m: i for i, m in enumerate(order)}
    last_read = {m: i for i, m in enumerate(order)}
    for m in order:
        if free_any[m]:
            for p in dag.parents[m]:
                last_read[p] = max(last_read[p], pos[m])

    state = np.ones((n_arms, 1))
    frontier: list[int] = []           # frontier[j] owns state bit weight 2^j
    det: dict[int, np.ndarray | int] = {}  # per-arm column or scalar constant

    def bit_of(p, n_states):
        if p in det:
            d = det[p]
            return d if np.isscalar(d) else d[:, None]
        j = frontier.index(p)
        return (np.arange(n_states, dtype=np.int64) >> j) & 1

    for step, m in enumerate(order):
        n_states = state.shape[1]
        if not free_any[m]:
            # fixed in every arm: value is the arm's clamp; evidence just filters
            if m in evidence:
                state = state * (arms[:, m] == evidence[m]).astype(np.float64)[:, None]
                det[m] = evidence[m]
            else:
                det[m] = arms[:, m].astype(np.int64)
        else:
            idx = np.int64(0)
            for p in dag.parents[m]:
                idx = (idx << 1) + bit_of(p, n_states)
            idx = np.broadcast_to(idx, (1, 1)) if np.isscalar(idx) or idx.ndim == 0 else np.atleast_2d(idx)
            rows = table.rows[m]
            clamp = arms[:, m].astype(np.int64)[:, None]
            fm = free[:, m][:, None]
            if m in evidence:
                v = evidence[m]
                w = np.where(fm, rows[idx, v], clamp == v)
                state = state * w
                det[m] = v
            else:
                w0 = np.where(fm, rows[idx, 0], clamp == 0)
                w1 = np.where(fm, rows[idx, 1], clamp == 1)
                if len(frontier) + 1 > FRONTIER_LIMIT:
                    raise CapacityError(
                        f"frontier width {len(frontier) + 1} exceeds limit {FRONTIER_LIMIT}")
                state = np.concatenate([state * w0, state * w1], axis=1)
                frontier.append(m)
        # retire frontier bits nothing later will read
        j = 0
        while j < len(frontier):
            node = frontier[j]
            if last_read[node] <= step:
                f = len(frontier)
                state = state.reshape(n_arms, 1 << (f - 1 - j), 2, 1 << j).sum(axis=2)
                state = state.reshape(n_arms, -1)
                frontier.pop(j)
            else:
                j += 1

    return state[:, 0].copy()


# ---------------------------------------------------------------------------
# public operations

def target_probabilities(table: ConditionalTable, dag: CausalDag, arms) -> np.ndarray:
    """P(last node = 1) for each intervention, evaluated with the given table."""
    m = _arm_matrix(arms)
    if m.shape[1] != dag.node_count:
        raise ParameterError("intervention length does not match the graph")
    return _sweep(table, dag, m, {dag.node_count - 1: 1}, dag.node_count)


def target_probability(table: ConditionalTable, dag: CausalDag, arm: Intervention) -> float:
    return float(target_probabilities(table, dag, arm)[0])


def parent_probabilities(table: ConditionalTable, dag: CausalDag, n: int,
                         pi: ParentRealization, arms) -> np.ndarray:
    """Marginal that n's parents realize pi, per intervention; zero where n is fixed."""
    m = _arm_matrix(arms)
    if tuple(pi.scope) != tuple(dag.parents[n]):
        raise ParameterError(f"realization scope {pi.scope} is not the parent set of node {n}")
    evidence = dict(zip(pi.scope, pi.bits))
    out = _sweep(table, dag, m, evidence, n)
    return np.where(m[:, n] == FREE, out, 0.0)


def parent_probability(table: ConditionalTable, dag: CausalDag, n: int,
                       pi: ParentRealization, arm: Intervention) -> float:
    return float(parent_probabilities(table, dag, n, pi, arm)[0])


def exact_target_probability(instance: Instance, arm: Intervention) -> float:
    """True P(reward node = 1 | intervention) for the instance's table."""
    return target_probability(instance.table, instance.dag, arm)


def exact_target_probabilities(instance: Instance) -> np.ndarray:
    """True target probability of every arm in the instance's set."""
    return target_probabilities(instance.table, instance.dag, instance.arms)


def exact_parent_probability(instance: Instance, n: int, pi: ParentRealization,
                             arm: Intervention) -> float:
    return parent_probability(instance.table, instance.dag, n, pi, arm)


# ---------------------------------------------------------------------------
# sampling

def sample_batch(table: ConditionalTable, dag: CausalDag, arm_values, count: int,
                 rng) -> np.ndarray:
    """Draw `count` realizations under one intervention, topological order."""
    rng = as_rng(rng)
    values = np.asarray(arm_values, dtype=np.int8)
    out = np.empty((count, dag.node_count), dtype=np.uint8)
    for n in range(dag.node_count):
        if values[n] != FREE:
            out[:, n] = values[n]
        else:
            idx = dag.parent_indices(n, out)
            out[:, n] = rng.random(count) < table.rows[n][idx, 1]
    return out


def sample(instance: Instance, arm: Intervention, rng) -> np.ndarray:
    """One realization of all nodes under the intervention."""
    return sample_batch(instance.table, instance.dag, arm.values, 1, rng)[0]


class Environment:
    """What a strategy is allowed to touch: apply interventions, observe
    realizations, and spend experiments; the true table stays hidden."""

    def intervene(self, arm) -> np.ndarray:
        return self.intervene_many(arm, 1)[0]

    def intervene_many(self, arm, count: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def experiments_used(self) -> int:
        raise NotImplementedError


class SimulatedEnvironment(Environment):
    """Forward sampler over a known instance, with an experiment ledger."""

    def __init__(self, instance: Instance, rng, max_experiments: int | None = None):
        self._instance = instance
        self._rng = as_rng(rng)
        self._used = 0
        self._max = max_experiments

    def intervene_many(self, arm, count: int) -> np.ndarray:
        if count < 0:
            raise ParameterError("count must be nonnegative")
        if self._max is not None and self._used + count > self._max:
            raise BudgetError(
                f"experiment budget exhausted: {self._used}+{count} > {self._max}")
        self._used += count
        values = arm.values if isinstance(arm, Intervention) else arm
        return sample_batch(self._instance.table, self._instance.dag, values,
                            count, self._rng)

    @property
    def experiments_used(self) -> int:
        return self._used
