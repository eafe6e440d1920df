"""Seeded regret sweeps over budgets, horizons, and strategies, with CSV output.

Every sweep cell (budget, multiplier, strategy) is independent: each trial
rebuilds the instance with a fresh conditional table and runs the strategy
against a budget-capped environment. All randomness is derived from the base
seed through a 64-bit mix of the cell coordinates (see `mix_seed`), so reruns
of the same config produce byte-identical reports; the table seed omits the
strategy, so every strategy inside a cell faces the same instances. Cells may
be fanned out over processes via the CAUSALBANDIT_WORKERS environment
variable; results are reduced in a fixed order either way.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bif import load_bundled, parse_bif, to_causal_dag
from .errors import BudgetError, CapacityError, ParameterError
from .inference import SimulatedEnvironment
from .model import (
    CausalDag,
    Instance,
    enumerate_budget_interventions,
    enumerate_root_interventions,
    make_binary_tree_dag,
    random_conditional_table,
)
from .strategies import (
    run_causal_bandit,
    run_successive_rejects,
    run_uniform_baseline,
    simple_regret,
)

STRATEGIES = ("proposed-paper", "proposed-practical", "successive-rejects", "uniform")
PROPOSED = ("proposed-paper", "proposed-practical")

_MASK = (1 << 64) - 1

# domain tags keep the table, environment, and draw streams disjoint
_TABLE_TAG = 1
_ENV_TAG = 2
_DRAW_TAG = 3


def _splitmix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed: xor each part into the state and
    scramble with the splitmix64 finalizer. Stated so that other tooling can
    reproduce the per-cell streams."""
    state = 0
    for p in parts:
        state = _splitmix(state ^ (int(p) & _MASK))
    return state


@dataclass(frozen=True)
class ExperimentConfig:
    source: str = "tree"
    tree_height: int = 4
    bif: str | None = None
    budgets: tuple[int, ...] = (2,)
    multipliers: tuple[int, ...] = (3,)
    trials: int = 1
    seed: int = 0
    strategies: tuple[str, ...] = ("proposed-practical",)
    fix_alpha: bool = False
    timing: bool = False

    def validated(self) -> "ExperimentConfig":
        if self.source not in ("tree", "bif"):
            raise ParameterError(f"source must be 'tree' or 'bif', got {self.source!r}")
        if self.source == "tree" and self.tree_height < 1:
            raise ParameterError("tree_height must be >= 1")
        if self.source == "bif" and not self.bif:
            raise ParameterError("bif source needs a file path or bundled name")
        if not self.budgets or any(b < 1 for b in self.budgets):
            raise ParameterError("budgets must be positive integers")
        if not self.multipliers or any(m < 1 for m in self.multipliers):
            raise ParameterError("multipliers must be positive integers")
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not self.strategies:
            raise ParameterError("no strategies selected")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ParameterError(
                    f"unknown strategy {s!r}; choose from {', '.join(STRATEGIES)}")
        if any(s in PROPOSED for s in self.strategies):
            low = [m for m in self.multipliers if m < 3]
            if low:
                raise ParameterError(
                    f"multipliers {low} are below 3; the proposed strategies need "
                    "a horizon of at least 3 rows per uncertain entry")
        return self


_BOOL_WORDS = {"true": True, "1": True, "yes": True, "on": True,
               "false": False, "0": False, "no": False, "off": False}


def _parse_bool(key: str, value: str) -> bool:
    try:
        return _BOOL_WORDS[value.strip().lower()]
    except KeyError:
        raise ParameterError(f"{key} expects true/false, got {value!r}") from None


def _parse_int_list(key: str, value: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in value.replace(" ", "").split(",") if x)
    except ValueError:
        raise ParameterError(f"{key} expects comma-separated integers, got {value!r}") \
            from None


def parse_config_text(text: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and #-comments are skipped."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {lineno} is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def config_from_mapping(mapping: dict[str, str]) -> ExperimentConfig:
    config = ExperimentConfig()
    handlers = {
        "source": lambda v: replace(config, source=v),
        "tree_height": lambda v: replace(config, tree_height=int(v)),
        "bif": lambda v: replace(config, bif=v),
        "budgets": lambda v: replace(config, budgets=_parse_int_list("budgets", v)),
        "multipliers": lambda v: replace(config,
                                         multipliers=_parse_int_list("multipliers", v)),
        "trials": lambda v: replace(config, trials=int(v)),
        "seed": lambda v: replace(config, seed=int(v)),
        "strategies": lambda v: replace(
            config, strategies=tuple(s.strip() for s in v.split(",") if s.strip())),
        "fix_alpha": lambda v: replace(config, fix_alpha=_parse_bool("fix_alpha", v)),
        "timing": lambda v: replace(config, timing=_parse_bool("timing", v)),
    }
    for key, value in mapping.items():
        if key not in handlers:
            raise ParameterError(f"unknown config key {key!r}")
        try:
            config = handlers[key](value)
        except ValueError:
            raise ParameterError(f"bad value for {key}: {value!r}") from None
    return config.validated()


def load_structure(config: ExperimentConfig) -> tuple[str, CausalDag, tuple[int, ...]]:
    """Instance label, graph, and the intervention target nodes."""
    if config.source == "tree":
        dag = make_binary_tree_dag(config.tree_height)
        targets = tuple(range(1 << config.tree_height))
        return f"tree-h{config.tree_height}", dag, targets
    name = config.bif
    if os.path.exists(name):
        net = parse_bif(open(name).read())
        label = os.path.splitext(os.path.basename(name))[0]
    else:
        net = load_bundled(name)
        label = name
    dag, _ = to_causal_dag(net)
    return label, dag, dag.roots


def build_arms(config: ExperimentConfig, dag: CausalDag, targets, budget: int):
    """Tree sources fix every target (chosen 1, rest 0); graph-file sources
    set chosen roots to 1 and leave everything else free, one arm per nonempty
    subset up to the budget."""
    if config.source == "tree":
        return enumerate_budget_interventions(dag.node_count, targets, budget)
    return enumerate_root_interventions(dag.node_count, targets, budget)


@dataclass(frozen=True)
class RegretRow:
    instance: str
    strategy: str
    budget: int
    horizon: int
    trials: int
    mean_regret: float
    std_err: float
    runtime_ms: float


@dataclass(frozen=True)
class CellFailure:
    budget: int
    multiplier: int
    strategy: str
    message: str


@dataclass
class RegretReport:
    rows: list[RegretRow]
    failures: list[CellFailure]

    CSV_HEADER = "instance,strategy,budget,horizon,trials,mean_regret,std_err,runtime_ms"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(f"{r.instance},{r.strategy},{r.budget},{r.horizon},"
                         f"{r.trials},{r.mean_regret:.10g},{r.std_err:.10g},"
                         f"{r.runtime_ms:.10g}")
        return "\n".join(lines) + "\n"


def _run_trial(strategy: str, instance: Instance, horizon: int,
               env_seed: int, draw_seed: int) -> float:
    env = SimulatedEnvironment(instance, env_seed, max_experiments=horizon)
    if strategy in PROPOSED:
        mode = "paper" if strategy == "proposed-paper" else "practical"
        rng = np.random.default_rng(draw_seed)
        result = run_causal_bandit(env, instance.dag, instance.arms, horizon,
                                   mode, rng)
    elif strategy == "successive-rejects":
        result = run_successive_rejects(env, instance.dag, instance.arms, horizon)
    else:
        result = run_uniform_baseline(env, instance.dag, instance.arms, horizon)
    return simple_regret(instance, [result.chosen])


def _run_cell(payload):
    config, budget, multiplier, strategy = payload
    label, dag, targets = load_structure(config)
    arms = build_arms(config, dag, targets, budget)
    uncertain = sum(dag.row_count(int(n)) for n in np.flatnonzero(arms.ever_free))
    horizon = multiplier * uncertain
    strategy_id = STRATEGIES.index(strategy)
    regrets = []
    elapsed = []
    try:
        for trial in range(config.trials):
            table_trial = 0 if config.fix_alpha else trial
            table = random_conditional_table(
                dag, mix_seed(_TABLE_TAG, config.seed, budget, multiplier, table_trial))
            instance = Instance(dag, table, arms)
            env_seed = mix_seed(_ENV_TAG, config.seed, budget, multiplier,
                                strategy_id, trial)
            draw_seed = mix_seed(_DRAW_TAG, config.seed, budget, multiplier,
                                 strategy_id, trial)
            start = time.perf_counter()
            regrets.append(_run_trial(strategy, instance, horizon, env_seed, draw_seed))
            elapsed.append((time.perf_counter() - start) * 1000.0)
    except (BudgetError, ParameterError, CapacityError) as err:
        return CellFailure(budget, multiplier, strategy, str(err))
    vals = np.asarray(regrets)
    std_err = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    runtime = float(np.mean(elapsed)) if config.timing else 0.0
    return RegretRow(label, strategy, budget, horizon, config.trials,
                     float(np.mean(vals)), std_err, runtime)


def run_sweep(config: ExperimentConfig) -> RegretReport:
    config = config.validated()
    payloads = [(config, budget, multiplier, strategy)
                for budget in config.budgets
                for multiplier in config.multipliers
                for strategy in config.strategies]
    workers = int(os.environ.get("CAUSALBANDIT_WORKERS", "1"))
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, payloads))
    else:
        outcomes = [_run_cell(p) for p in payloads]
    report = RegretReport([], [])
    for outcome in outcomes:
        if isinstance(outcome, CellFailure):
            report.failures.append(outcome)
        else:
            report.rows.append(outcome)
    return report
