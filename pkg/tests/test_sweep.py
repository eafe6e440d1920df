"""Sweep harness: seed mixing, config parsing, report shape, determinism."""
import math

import numpy as np
import pytest

from causalbandit.errors import ParameterError
from causalbandit.model import CausalDag, ConditionalTable, Instance, InterventionSet
from causalbandit.sweep import (
    STRATEGIES,
    ExperimentConfig,
    _run_trial,
    build_arms,
    config_from_mapping,
    load_structure,
    mix_seed,
    parse_config_text,
    run_sweep,
)


def test_mix_seed_is_deterministic_and_64_bit():
    a = mix_seed(1, 2, 3)
    assert a == mix_seed(1, 2, 3)
    assert 0 <= a < (1 << 64)


def test_mix_seed_separates_nearby_tuples():
    seen = {mix_seed(1, 2, 3), mix_seed(3, 2, 1), mix_seed(1, 2, 4),
            mix_seed(0, 2, 3), mix_seed(1, 2), mix_seed(1, 2, 3, 0)}
    assert len(seen) == 6


def test_parse_config_text_skips_comments_and_blanks():
    text = "# a comment\n\nseed = 9 # trailing\n trials=4 \n"
    assert parse_config_text(text) == {"seed": "9", "trials": "4"}


def test_parse_config_text_rejects_non_kv_lines():
    with pytest.raises(ParameterError):
        parse_config_text("seed=1\nnot a pair\n")


def test_config_from_mapping_round_trip():
    config = config_from_mapping({
        "source": "tree", "tree_height": "3", "budgets": "2,4",
        "multipliers": "3,5", "trials": "7", "seed": "42",
        "strategies": "uniform, successive-rejects",
        "fix_alpha": "true", "timing": "off",
    })
    assert config.tree_height == 3
    assert config.budgets == (2, 4)
    assert config.multipliers == (3, 5)
    assert config.trials == 7
    assert config.seed == 42
    assert config.strategies == ("uniform", "successive-rejects")
    assert config.fix_alpha is True
    assert config.timing is False


@pytest.mark.parametrize("mapping", [
    {"source": "csv"},
    {"tree_height": "0"},
    {"source": "bif"},
    {"budgets": "0"},
    {"budgets": ""},
    {"multipliers": "two"},
    {"trials": "0"},
    {"strategies": "warp-drive"},
    {"strategies": ""},
    {"fix_alpha": "maybe"},
    {"unknown_key": "1"},
    {"multipliers": "2", "strategies": "proposed-paper"},
    {"multipliers": "1,3", "strategies": "uniform,proposed-practical"},
])
def test_config_from_mapping_rejects_bad_values(mapping):
    with pytest.raises(ParameterError):
        config_from_mapping(mapping)


def test_low_multipliers_allowed_for_baselines_only():
    config = config_from_mapping(
        {"multipliers": "1,2", "strategies": "uniform,successive-rejects"})
    assert config.multipliers == (1, 2)


def test_report_row_cardinality():
    config = ExperimentConfig(tree_height=2, budgets=(1, 2), multipliers=(3, 4),
                              trials=1, strategies=("uniform", "successive-rejects"))
    report = run_sweep(config)
    assert len(report.rows) == 2 * 2 * 2
    assert report.failures == []


def test_report_rows_ordered_budget_multiplier_strategy():
    config = ExperimentConfig(tree_height=2, budgets=(1, 2), multipliers=(3, 4),
                              trials=1, strategies=("uniform", "successive-rejects"))
    report = run_sweep(config)
    keys = [(r.budget, r.horizon, r.strategy) for r in report.rows]
    assert keys == sorted(keys, key=lambda k: (k[0], k[1],
                                               ("uniform", "successive-rejects").index(k[2])))


def test_regret_and_std_err_ranges():
    config = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                              trials=4, seed=5, strategies=STRATEGIES)
    report = run_sweep(config)
    assert len(report.rows) == 4
    for row in report.rows:
        assert 0.0 <= row.mean_regret <= 1.0
        assert row.std_err >= 0.0
        assert row.trials == 4
        assert row.instance == "tree-h2"
        assert row.runtime_ms == 0.0


def test_single_trial_std_err_is_zero():
    config = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                              trials=1, strategies=("uniform",))
    report = run_sweep(config)
    assert report.rows[0].std_err == 0.0


def test_csv_is_deterministic_across_reruns():
    config = ExperimentConfig(tree_height=2, budgets=(1, 2), multipliers=(3,),
                              trials=3, seed=11,
                              strategies=("proposed-practical", "uniform"))
    first = run_sweep(config).to_csv()
    second = run_sweep(config).to_csv()
    assert first == second
    assert first.startswith(
        "instance,strategy,budget,horizon,trials,mean_regret,std_err,runtime_ms\n")


def test_worker_pool_matches_serial(monkeypatch):
    config = ExperimentConfig(tree_height=2, budgets=(1, 2), multipliers=(3,),
                              trials=2, seed=3,
                              strategies=("uniform", "successive-rejects"))
    serial = run_sweep(config).to_csv()
    monkeypatch.setenv("CAUSALBANDIT_WORKERS", "3")
    pooled = run_sweep(config).to_csv()
    assert pooled == serial


def test_different_seeds_change_the_report():
    base = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                            trials=3, seed=0, strategies=("uniform",))
    other = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                             trials=3, seed=1, strategies=("uniform",))
    assert run_sweep(base).to_csv() != run_sweep(other).to_csv()


def test_failed_cells_are_recorded_not_skipped():
    config = ExperimentConfig(tree_height=2, budgets=(4,), multipliers=(3,),
                              trials=1, strategies=("successive-rejects", "uniform"))
    report = run_sweep(config)
    assert len(report.rows) == 1
    assert len(report.failures) == 1
    failure = report.failures[0]
    assert failure.strategy == "successive-rejects"
    assert failure.budget == 4
    assert "two arms" in failure.message


def test_fix_alpha_reuses_the_first_trial_table(monkeypatch):
    recorded = []
    import causalbandit.sweep as sweep_module
    real = sweep_module.random_conditional_table

    def recording(dag, seed):
        recorded.append(seed)
        return real(dag, seed)

    monkeypatch.setattr(sweep_module, "random_conditional_table", recording)
    base = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                            trials=3, strategies=("uniform",))
    run_sweep(base)
    varying = list(recorded)
    recorded.clear()
    run_sweep(ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                               trials=3, strategies=("uniform",), fix_alpha=True))
    fixed = list(recorded)
    assert len(varying) == 3 and len(set(varying)) == 3
    assert len(fixed) == 3 and len(set(fixed)) == 1
    assert fixed[0] == varying[0]


def test_degenerate_instance_gives_zero_regret_rows():
    dag = CausalDag(((), (), (0, 1)))
    rows = (np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]]),
            np.array([[0.0, 1.0]] * 4))
    table = ConditionalTable(rows)
    arms = InterventionSet(np.array([[0, 1, -1], [1, 0, -1], [1, 1, -1]],
                                    dtype=np.int8))
    instance = Instance(dag, table, arms)
    for trial in range(3):
        regret = _run_trial("uniform", instance, 30, trial, trial)
        assert regret == 0.0


def test_doubling_trials_shrinks_std_err():
    ratios = []
    for seed in range(6):
        small = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(1,),
                                 trials=6, seed=seed, strategies=("uniform",))
        large = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(1,),
                                 trials=24, seed=seed, strategies=("uniform",))
        se_small = run_sweep(small).rows[0].std_err
        se_large = run_sweep(large).rows[0].std_err
        if se_large > 0:
            ratios.append(se_small / se_large)
    assert ratios, "every large-trial run had zero spread"
    mean_ratio = sum(ratios) / len(ratios)
    assert 1.2 <= mean_ratio <= 3.2


def test_timing_flag_fills_runtime_column():
    config = ExperimentConfig(tree_height=2, budgets=(1,), multipliers=(3,),
                              trials=2, strategies=("uniform",), timing=True)
    report = run_sweep(config)
    assert report.rows[0].runtime_ms > 0.0


def test_bif_source_loads_bundled_network():
    config = ExperimentConfig(source="bif", bif="alarm")
    label, dag, targets = load_structure(config)
    assert label == "alarm"
    assert dag.node_count == 37
    assert len(targets) == 12
    arms = build_arms(config, dag, targets, 2)
    assert len(arms) == 78


def test_tree_horizon_uses_uncertain_rows():
    config = ExperimentConfig(tree_height=4, budgets=(2,), multipliers=(5,),
                              trials=1, strategies=("uniform",))
    report = run_sweep(config)
    assert report.rows[0].horizon == 5 * 60
