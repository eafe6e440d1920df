"""Min-max allocation of sampling weight over the arm simplex.

The objective is a max over arms of sums of ratio terms: each term contributes
(numerator value)^2 divided by (weight-averaged values + offset). Every term is
convex in the weights, so the max is convex and is minimized over the simplex
with exponentiated-gradient steps on the active arm's subgradient. Feasible
iterates are tracked, so the reported value is always an upper bound on the
true optimum; a linearization bound gives the gap certificate.

`allocation_complexity` is the offset-free version built from an instance's
true parent probabilities; its optimum is the instance's intrinsic difficulty
constant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllPosedObjectiveError, ParameterError
from .inference import parent_probabilities
from .model import Instance, ParentRealization

NUMERATOR_CUTOFF = 1e-15


@dataclass
class SolverConfig:
    max_iters: int = 2000
    tolerance: float = 1e-4       # relative duality-gap target
    step_scale: float = 1.0       # step size step_scale / sqrt(iteration)


class RatioObjective:
    """Terms laid out as rows: values[i] over arms, offset[i], and a mask of
    which arms' inner sums the row belongs to."""

    def __init__(self, values, include, offset):
        self.values = np.asarray(values, dtype=np.float64)
        self.include = np.asarray(include, dtype=bool)
        self.offset = np.asarray(offset, dtype=np.float64)
        if self.values.ndim != 2 or self.include.shape != self.values.shape:
            raise ParameterError("values and include must be matching 2-d arrays")
        if self.offset.shape != (self.values.shape[0],):
            raise ParameterError("offset must have one entry per term row")
        # numerators below the cutoff are dropped: they contribute nothing but
        # can make a zero denominator look ill-posed
        self.include = self.include & (self.values ** 2 >= NUMERATOR_CUTOFF)
        self._numer = self.values ** 2 * self.include

    @property
    def n_arms(self) -> int:
        return self.values.shape[1]

    @property
    def n_terms(self) -> int:
        return self.values.shape[0]


@dataclass
class MinimizeResult:
    weights: np.ndarray
    value: float
    gap: float
    converged: bool
    iterations: int


def _denominators(objective: RatioObjective, weights: np.ndarray) -> np.ndarray:
    denom = objective.values @ weights + objective.offset
    live = objective.include.any(axis=1)
    if np.any(live & (denom <= 0.0)):
        raise IllPosedObjectiveError("zero denominator on a term with a nonzero numerator")
    return np.where(denom > 0.0, denom, 1.0)


def evaluate(objective: RatioObjective, weights) -> tuple[float, int]:
    """Max over arms of the row sums at the given weights, with the smallest
    maximizing arm index."""
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (objective.n_arms,):
        raise ParameterError(f"weights must have shape ({objective.n_arms},)")
    if objective.n_terms == 0:
        return 0.0, 0
    denom = _denominators(objective, w)
    vals = (objective._numer / denom[:, None]).sum(axis=0)
    arg = int(np.argmax(vals))
    return float(vals[arg]), arg


def _subgradient(objective: RatioObjective, weights, active: int) -> np.ndarray:
    denom = _denominators(objective, weights)
    coef = objective._numer[:, active] / denom ** 2
    return -(coef @ objective.values)


def minimize(objective: RatioObjective, config: SolverConfig | None = None,
             extra_starts=()) -> MinimizeResult:
    """Exponentiated-gradient descent from uniform weights; every candidate in
    `extra_starts` is also evaluated, and the best feasible point wins."""
    config = config or SolverConfig()
    k_arms = objective.n_arms
    w = np.full(k_arms, 1.0 / k_arms)
    best_w, best_val = w.copy(), np.inf
    best_lb = -np.inf
    converged = False
    iters = 0
    for it in range(1, config.max_iters + 1):
        iters = it
        val, active = evaluate(objective, w)
        if val < best_val:
            best_val, best_w = val, w.copy()
        g = _subgradient(objective, w, active)
        best_lb = max(best_lb, val + float(np.min(g)) - float(g @ w))
        gap = best_val - best_lb
        if gap <= config.tolerance * max(abs(best_val), 1e-12):
            converged = True
            break
        scale = np.max(np.abs(g))
        if scale > 0:
            w = w * np.exp(-(config.step_scale / np.sqrt(it)) * (g / scale))
            w = w / w.sum()
    for cand in extra_starts:
        cand = np.asarray(cand, dtype=np.float64)
        val, _ = evaluate(objective, cand)
        if val < best_val:
            best_val, best_w = val, cand.copy()
    gap = best_val - best_lb
    return MinimizeResult(best_w, float(best_val), float(max(gap, 0.0)), converged, iters)


@dataclass
class AllocationResult:
    value: float
    weights: np.ndarray
    gap: float
    converged: bool
    n_terms: int


def build_exact_objective(instance: Instance) -> tuple[RatioObjective, np.ndarray]:
    """Offset-free objective from the instance's true parent probabilities.

    Also returns the counting-based candidate weights: each (node, parent-row)
    pair votes for its highest-probability arm, votes normalized over all
    uncertain rows. That point's value never exceeds (node count) x (row
    count), which pins the upper end of the achievable range.
    """
    dag, arms = instance.dag, instance.arms
    free = arms.matrix.T == -1  # (nodes, arms)
    rows = []
    masks = []
    votes = np.zeros(len(arms))
    n_rows_total = 0
    for n in instance.uncertain_nodes:
        for idx in range(dag.row_count(n)):
            pi = ParentRealization.from_index(dag.parents[n], idx)
            vec = parent_probabilities(instance.table, dag, n, pi, arms)
            votes[int(np.argmax(vec))] += 1
            n_rows_total += 1
            keep = free[n] & (vec ** 2 >= NUMERATOR_CUTOFF)
            if keep.any():
                rows.append(vec)
                masks.append(keep)
    if rows:
        objective = RatioObjective(np.array(rows), np.array(masks), np.zeros(len(rows)))
    else:
        objective = RatioObjective(np.zeros((0, len(arms))), np.zeros((0, len(arms)), bool),
                                   np.zeros(0))
    return objective, votes / max(n_rows_total, 1)


def allocation_complexity(instance: Instance,
                          config: SolverConfig | None = None) -> AllocationResult:
    """Minimize the instance's exact allocation objective over the arm simplex."""
    objective, counting = build_exact_objective(instance)
    res = minimize(objective, config, extra_starts=[counting])
    return AllocationResult(res.value, res.weights, res.gap, res.converged,
                            objective.n_terms)
