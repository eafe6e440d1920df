"""Shared generators and enumeration helpers for the test suite."""
import itertools

import numpy as np
import pytest

from causalbandit.model import (
    FREE,
    CausalDag,
    ConditionalTable,
    Instance,
    Intervention,
    InterventionSet,
    random_conditional_table,
)


def random_dag(rng, n_nodes, max_parents=3):
    parents = []
    for n in range(n_nodes):
        k = int(rng.integers(0, min(n, max_parents) + 1))
        ps = sorted(rng.choice(n, size=k, replace=False).tolist()) if k else []
        parents.append(tuple(ps))
    return CausalDag(tuple(parents))


def random_arm(rng, n_nodes, free_prob=0.6):
    vals = [FREE if rng.random() < free_prob else int(rng.integers(0, 2))
            for _ in range(n_nodes)]
    return Intervention(tuple(vals))


def random_instance(rng, n_nodes, n_arms, max_parents=3, free_prob=0.6):
    dag = random_dag(rng, n_nodes, max_parents)
    table = random_conditional_table(dag, rng)
    arms = InterventionSet.from_interventions(
        [random_arm(rng, n_nodes, free_prob) for _ in range(n_arms)])
    return Instance(dag, table, arms)


def brute_joint(table, dag, arm):
    """Full joint over the arm's free nodes by direct enumeration.

    Returns {free-node bit tuple: probability}; fixed nodes are constants.
    """
    values = list(arm.values)
    free = [n for n in range(dag.node_count) if values[n] == FREE]
    out = {}
    for bits in itertools.product((0, 1), repeat=len(free)):
        omega = values[:]
        for n, b in zip(free, bits):
            omega[n] = b
        prod = 1.0
        for n in free:
            idx = 0
            for p in dag.parents[n]:
                idx = (idx << 1) | omega[p]
            prod *= table.rows[n][idx, omega[n]]
        out[bits] = prod
    return out
