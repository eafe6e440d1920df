"""Binary causal DAGs, conditional tables, hard interventions, and instance builders.

Node indices are topological: every parent index is strictly smaller than its
child's index, and the last node is the reward node. A parent realization over
a sorted scope is packed into a row index with the lowest-numbered node as the
most significant bit, so ascending row index enumerates realizations in
lexicographic bit order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ParameterError, ScopeError

FREE = -1  # "not intervened" entry of an intervention vector


def as_rng(seed_or_rng) -> np.random.Generator:
    """Accept either an integer seed or an already-built generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def pack_weights(k: int) -> np.ndarray:
    """Bit weights for packing a k-bit realization, first scope entry most significant."""
    return 1 << np.arange(k - 1, -1, -1, dtype=np.int64)


@dataclass(frozen=True)
class CausalDag:
    """Directed acyclic graph over binary nodes, stored as per-node parent tuples."""

    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        norm = tuple(tuple(int(p) for p in ps) for ps in self.parents)
        object.__setattr__(self, "parents", norm)

    @property
    def node_count(self) -> int:
        return len(self.parents)

    def row_count(self, n: int) -> int:
        """Number of parent realizations of node n."""
        return 1 << len(self.parents[n])

    @property
    def total_rows(self) -> int:
        """Conditional-table rows summed over every node."""
        return sum(self.row_count(n) for n in range(self.node_count))

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        out = [[] for _ in range(self.node_count)]
        for n, ps in enumerate(self.parents):
            for p in ps:
                out[p].append(n)
        return tuple(tuple(c) for c in out)

    @cached_property
    def roots(self) -> tuple[int, ...]:
        return tuple(n for n, ps in enumerate(self.parents) if not ps)

    def ancestors(self, nodes) -> tuple[int, ...]:
        """Strict ancestors of the given nodes, ascending."""
        seen = set()
        stack = list(nodes)
        while stack:
            for p in self.parents[stack.pop()]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return tuple(sorted(seen))

    def parent_indices(self, n: int, omega: np.ndarray) -> np.ndarray:
        """Row indices of node n's parent realization for each row of omega (m, N)."""
        ps = self.parents[n]
        if not ps:
            return np.zeros(omega.shape[0], dtype=np.int64)
        return omega[:, ps].astype(np.int64) @ pack_weights(len(ps))


@dataclass(frozen=True)
class ParentRealization:
    """Bit assignment over a sorted node scope (a parent set, possibly extended)."""

    scope: tuple[int, ...]
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(int(s) for s in self.scope))
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if len(self.scope) != len(self.bits):
            raise ParameterError("scope and bits must have equal length")
        if any(b not in (0, 1) for b in self.bits):
            raise ParameterError("bits must be 0/1")

    @classmethod
    def from_index(cls, scope, index: int) -> "ParentRealization":
        scope = tuple(scope)
        k = len(scope)
        bits = tuple((index >> (k - 1 - j)) & 1 for j in range(k))
        return cls(scope, bits)

    @property
    def index(self) -> int:
        idx = 0
        for b in self.bits:
            idx = (idx << 1) | b
        return idx

    def value(self, node: int) -> int:
        return self.bits[self.scope.index(node)]

    def restrict(self, sub_scope) -> "ParentRealization":
        sub = tuple(int(s) for s in sub_scope)
        missing = [s for s in sub if s not in self.scope]
        if missing:
            raise ScopeError(f"nodes {missing} not in scope {self.scope}")
        return ParentRealization(sub, tuple(self.value(s) for s in sub))

    def extend(self, node: int, bit: int) -> "ParentRealization":
        """Add one more node to the scope, keeping it sorted."""
        pairs = sorted(zip(self.scope + (node,), self.bits + (bit,)))
        return ParentRealization(tuple(s for s, _ in pairs), tuple(b for _, b in pairs))


@dataclass(frozen=True)
class ConditionalTable:
    """Per-node conditional probabilities: rows[n][i, v] = P(node n = v | parents = i).

    Estimated tables may be sub-stochastic (a row pair may sum to less than 1);
    true tables always have complementary pairs.
    """

    rows: tuple[np.ndarray, ...]

    def __post_init__(self):
        frozen = []
        for r in self.rows:
            arr = np.asarray(r, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ParameterError("each table must have shape (2^k, 2)")
            arr = arr.copy()
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "rows", tuple(frozen))

    @classmethod
    def from_success_probs(cls, success) -> "ConditionalTable":
        """Build from per-node vectors of P(node = 1 | parents = row)."""
        rows = []
        for p1 in success:
            p1 = np.asarray(p1, dtype=np.float64)
            rows.append(np.stack([1.0 - p1, p1], axis=1))
        return cls(tuple(rows))

    def prob(self, n: int, pi: ParentRealization, value: int) -> float:
        return float(self.rows[n][pi.index, value])

    def success(self, n: int) -> np.ndarray:
        """P(node n = 1 | parents = row) for every row."""
        return self.rows[n][:, 1]

    def node_is_stochastic(self, n: int, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.rows[n].sum(axis=1) - 1.0) <= tol))


@dataclass(frozen=True)
class Intervention:
    """Hard intervention: per-node entry in {FREE, 0, 1}."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if any(v not in (FREE, 0, 1) for v in vals):
            raise ParameterError("intervention entries must be in {*, 0, 1}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_string(cls, text: str) -> "Intervention":
        return cls(tuple(FREE if ch == "*" else int(ch) for ch in text))

    def __str__(self):
        return "".join("*" if v == FREE else str(v) for v in self.values)

    def __len__(self):
        return len(self.values)

    @property
    def fixed_count(self) -> int:
        return sum(1 for v in self.values if v != FREE)

    @property
    def free_nodes(self) -> tuple[int, ...]:
        return tuple(n for n, v in enumerate(self.values) if v == FREE)


class InterventionSet:
    """Ordered collection of interventions, stored as an (arms, nodes) int8 matrix."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=np.int8)
        if m.ndim != 2:
            raise ParameterError("intervention matrix must be 2-d")
        if not np.all(np.isin(m, (FREE, 0, 1))):
            raise ParameterError("intervention entries must be in {*, 0, 1}")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m

    @classmethod
    def from_interventions(cls, arms) -> "InterventionSet":
        return cls(np.array([a.values for a in arms], dtype=np.int8))

    def __len__(self):
        return self.matrix.shape[0]

    @property
    def node_count(self) -> int:
        return self.matrix.shape[1]

    def __getitem__(self, i: int) -> Intervention:
        return Intervention(tuple(int(v) for v in self.matrix[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @cached_property
    def ever_free(self) -> np.ndarray:
        """Per node: is it left free by at least one intervention."""
        return np.any(self.matrix == FREE, axis=0)


@dataclass(frozen=True)
class Instance:
    """A bandit instance: graph, true conditional table, and the arm set."""

    dag: CausalDag
    table: ConditionalTable
    arms: InterventionSet

    @cached_property
    def uncertain_nodes(self) -> tuple[int, ...]:
        """Nodes left free by at least one arm; only their rows ever need estimating."""
        return tuple(int(n) for n in np.flatnonzero(self.arms.ever_free))

    @property
    def uncertain_rows(self) -> int:
        """The budget unit: conditional rows of the uncertain nodes."""
        return sum(self.dag.row_count(n) for n in self.uncertain_nodes)


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate(dag: CausalDag, table: ConditionalTable | None = None,
             arms: InterventionSet | None = None) -> ValidationReport:
    """Check structural invariants, listing every violation instead of raising."""
    bad = []
    n_nodes = dag.node_count
    if n_nodes < 3:
        bad.append(f"node count {n_nodes} < 3")
    for n, ps in enumerate(dag.parents):
        if any(p >= n for p in ps):
            bad.append(f"node {n}: topological order violated by parent list {ps}")
        if any(p < 0 for p in ps):
            bad.append(f"node {n}: negative parent index")
        if list(ps) != sorted(set(ps)):
            bad.append(f"node {n}: parent list not sorted/duplicate-free")
    if table is not None:
        if len(table.rows) != n_nodes:
            bad.append(f"table covers {len(table.rows)} nodes, graph has {n_nodes}")
        for n, r in enumerate(table.rows[:n_nodes]):
            if r.shape[0] != dag.row_count(n):
                bad.append(f"node {n}: table has {r.shape[0]} rows, expected {dag.row_count(n)}")
                continue
            if np.any(r < -1e-12) or np.any(r > 1 + 1e-12):
                bad.append(f"node {n}: probabilities outside [0, 1]")
            sums = r.sum(axis=1)
            off = np.flatnonzero(np.abs(sums - 1.0) > 1e-9)
            for i in off:
                bad.append(f"node {n} row {i}: complement sum != 1 ({sums[i]:.6g})")
    if arms is not None:
        if len(arms) == 0:
            bad.append("intervention set is empty")
        if arms.node_count != n_nodes:
            bad.append(f"interventions have length {arms.node_count}, graph has {n_nodes}")
    return ValidationReport(bad)


def random_conditional_table(dag: CausalDag, rng_seed) -> ConditionalTable:
    """Uniform random table: each row's success probability is an independent U[0,1]."""
    rng = as_rng(rng_seed)
    return ConditionalTable.from_success_probs(
        [rng.random(dag.row_count(n)) for n in range(dag.node_count)]
    )


def make_binary_tree_dag(height: int) -> CausalDag:
    """Complete binary tree with edges oriented toward the root.

    Nodes are numbered level by level, leaves first, so the root is the last
    node and every internal node's parents are its two subtree children.
    """
    if height < 1:
        raise ParameterError("height must be >= 1")
    offsets = [0]
    for level in range(height):
        offsets.append(offsets[-1] + (1 << (height - level)))
    parents: list[tuple[int, ...]] = []
    for level in range(height + 1):
        width = 1 << (height - level)
        for j in range(width):
            if level == 0:
                parents.append(())
            else:
                below = offsets[level - 1]
                parents.append((below + 2 * j, below + 2 * j + 1))
    return CausalDag(tuple(parents))


def enumerate_budget_interventions(n_nodes: int, target_nodes, budget: int) -> InterventionSet:
    """One arm per size-budget subset of targets: chosen targets 1, other targets 0, rest free.

    Subsets are emitted in lexicographic order of the chosen node tuples.
    """
    targets = sorted(int(t) for t in target_nodes)
    if budget < 1 or budget > len(targets):
        raise ParameterError(f"budget {budget} not in [1, {len(targets)}]")
    rows = []
    for chosen in itertools.combinations(targets, budget):
        row = np.full(n_nodes, FREE, dtype=np.int8)
        row[targets] = 0
        row[list(chosen)] = 1
        rows.append(row)
    return InterventionSet(np.array(rows, dtype=np.int8))


def enumerate_root_interventions(n_nodes: int, target_nodes, budget: int) -> InterventionSet:
    """One arm per nonempty subset of targets with size <= budget: chosen 1, rest free.

    Ordered by subset size, lexicographic within each size.
    """
    targets = sorted(int(t) for t in target_nodes)
    if budget < 1 or budget > len(targets):
        raise ParameterError(f"budget {budget} not in [1, {len(targets)}]")
    rows = []
    for size in range(1, budget + 1):
        for chosen in itertools.combinations(targets, size):
            row = np.full(n_nodes, FREE, dtype=np.int8)
            row[list(chosen)] = 1
            rows.append(row)
    return InterventionSet(np.array(rows, dtype=np.int8))


def make_binary_tree_instance(height: int, budget: int, rng_seed) -> Instance:
    """Synthetic benchmark: tree DAG, random table, exact-budget leaf interventions."""
    dag = make_binary_tree_dag(height)
    leaves = list(range(1 << height))
    arms = enumerate_budget_interventions(dag.node_count, leaves, budget)
    table = random_conditional_table(dag, rng_seed)
    return Instance(dag, table, arms)


def soft_to_hard_reduction(dag: CausalDag, table: ConditionalTable, soft_node: int,
                           soft_rows) -> Instance:
    """Rebuild a soft-intervention problem as hard interventions on indicator nodes.

    Each label gets a fresh parentless indicator node wired into ``soft_node``;
    when exactly one indicator is on, the soft node follows that label's
    replacement rows. One arm per label turns its indicator on, zeroes the
    other indicators, and leaves every original node free. Indicator patterns
    that no arm can produce keep the original conditional rows, so the table
    stays row-stochastic; those rows are unreachable and do not affect any
    intervened joint.
    """
    labels = [np.asarray(r, dtype=np.float64) for r in soft_rows]
    if not labels:
        raise ParameterError("need at least one soft label")
    n_labels = len(labels)
    n_orig = dag.node_count
    pk = len(dag.parents[soft_node])
    rows_k = 1 << pk
    norm = []
    for r in labels:
        if r.ndim == 1:
            r = np.stack([1.0 - r, r], axis=1)
        if r.shape != (rows_k, 2):
            raise ParameterError(f"soft rows must have shape ({rows_k},) or ({rows_k}, 2)")
        norm.append(r)

    # indicators occupy indices 0..L-1, originals shift up by L
    new_parents: list[tuple[int, ...]] = [() for _ in range(n_labels)]
    for n in range(n_orig):
        shifted = tuple(p + n_labels for p in dag.parents[n])
        if n == soft_node:
            shifted = tuple(range(n_labels)) + shifted
        new_parents.append(shifted)
    new_dag = CausalDag(tuple(new_parents))

    new_rows: list[np.ndarray] = [np.array([[1.0, 0.0]]) for _ in range(n_labels)]
    for n in range(n_orig):
        if n != soft_node:
            new_rows.append(table.rows[n])
            continue
        # indicator bits are the high bits of the soft node's new row index
        full = np.tile(table.rows[n], (1 << n_labels, 1))
        for s, repl in enumerate(norm):
            high = 1 << (n_labels - 1 - s)
            full[high * rows_k:(high + 1) * rows_k] = repl
        new_rows.append(full)

    arm_rows = np.full((n_labels, new_dag.node_count), FREE, dtype=np.int8)
    arm_rows[:, :n_labels] = 0
    for s in range(n_labels):
        arm_rows[s, s] = 1
    return Instance(new_dag, ConditionalTable(tuple(new_rows)), InterventionSet(arm_rows))
