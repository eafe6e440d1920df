"""Best-arm identification on binary causal DAGs under hard interventions."""

from .bif import (
    BifNetwork,
    BifVariable,
    format_bif,
    load_bundled,
    parse_bif,
    to_causal_dag,
)
from .allocation import (
    AllocationResult,
    MinimizeResult,
    RatioObjective,
    SolverConfig,
    allocation_complexity,
    build_exact_objective,
    evaluate,
    minimize,
)
from .errors import (
    BifParseError,
    BudgetError,
    CapacityError,
    IllPosedObjectiveError,
    InternalConsistencyError,
    ParameterError,
    ScopeError,
)
from .inference import (
    Environment,
    SimulatedEnvironment,
    brute_force_parent_probability,
    brute_force_target_probability,
    exact_parent_probability,
    exact_target_probabilities,
    exact_target_probability,
    parent_probabilities,
    parent_probability,
    sample,
    sample_batch,
    target_probabilities,
    target_probability,
)
from .model import (
    FREE,
    CausalDag,
    ConditionalTable,
    Instance,
    Intervention,
    InterventionSet,
    ParentRealization,
    ValidationReport,
    enumerate_budget_interventions,
    enumerate_root_interventions,
    make_binary_tree_dag,
    make_binary_tree_instance,
    random_conditional_table,
    soft_to_hard_reduction,
    validate,
)
from .phase1 import (
    Phase1Result,
    TruncationSets,
    rate_estimate,
    run_phase1,
    truncation_threshold,
)
from .phase2 import (
    Phase2Result,
    build_allocation_objective,
    heuristic_eta,
    run_phase2,
)
from .strategies import (
    StrategyResult,
    default_trunc_scale,
    run_causal_bandit,
    run_successive_rejects,
    run_uniform_baseline,
    simple_regret,
)
from .sweep import (
    STRATEGIES,
    CellFailure,
    ExperimentConfig,
    RegretReport,
    RegretRow,
    build_arms,
    config_from_mapping,
    load_structure,
    mix_seed,
    parse_config_text,
    run_sweep,
)

__all__ = [
    "FREE",
    "STRATEGIES",
    "AllocationResult",
    "BifNetwork",
    "BifParseError",
    "BifVariable",
    "BudgetError",
    "CapacityError",
    "CausalDag",
    "CellFailure",
    "ConditionalTable",
    "Environment",
    "ExperimentConfig",
    "IllPosedObjectiveError",
    "Instance",
    "InternalConsistencyError",
    "Intervention",
    "InterventionSet",
    "MinimizeResult",
    "ParameterError",
    "ParentRealization",
    "Phase1Result",
    "Phase2Result",
    "RatioObjective",
    "RegretReport",
    "RegretRow",
    "ScopeError",
    "SimulatedEnvironment",
    "SolverConfig",
    "StrategyResult",
    "TruncationSets",
    "ValidationReport",
    "allocation_complexity",
    "brute_force_parent_probability",
    "brute_force_target_probability",
    "build_allocation_objective",
    "build_arms",
    "build_exact_objective",
    "config_from_mapping",
    "default_trunc_scale",
    "enumerate_budget_interventions",
    "enumerate_root_interventions",
    "evaluate",
    "exact_parent_probability",
    "exact_target_probabilities",
    "exact_target_probability",
    "format_bif",
    "heuristic_eta",
    "load_bundled",
    "load_structure",
    "make_binary_tree_dag",
    "make_binary_tree_instance",
    "minimize",
    "mix_seed",
    "parent_probabilities",
    "parent_probability",
    "parse_bif",
    "parse_config_text",
    "random_conditional_table",
    "rate_estimate",
    "run_causal_bandit",
    "run_phase1",
    "run_phase2",
    "run_successive_rejects",
    "run_sweep",
    "run_uniform_baseline",
    "sample",
    "sample_batch",
    "simple_regret",
    "soft_to_hard_reduction",
    "target_probabilities",
    "target_probability",
    "to_causal_dag",
    "truncation_threshold",
    "validate",
]
