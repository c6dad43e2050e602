from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit_joint.errors import ParameterError
from onebit_joint.harness import (
    CSV_HEADER,
    ExperimentConfig,
    Method,
    MetricsCell,
    emit_csv,
    format_csv,
    run_cell,
    run_sweep,
    run_trial,
    score_trial,
    trial_rng,
)
from onebit_joint.model import SupportSet
from onebit_joint.solver import KnownK, SolverConfig

GOLDEN = Path(__file__).parent / "data" / "golden_seed7.csv"


def golden_config(**kw):
    base = dict(sigma_v_sq=1e-4, m_values=(10, 20), p_values=(1, 3), n=30, k=3, trials=10, seed=7)
    base.update(kw)
    return ExperimentConfig(**base)


def small_config(**kw):
    base = dict(sigma_v_sq=1e-4, m_values=(8,), p_values=(2,), n=12, k=2, trials=3, seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


# score_trial


def test_score_exact():
    truth = SupportSet((0, 3, 5, 7, 9), 10)
    assert score_trial(truth, truth) == (100.0, True)


def test_score_empty_estimate():
    assert score_trial([], [1, 2]) == (0.0, False)


def test_score_partial():
    assert score_trial({0, 1, 2, 9, 8}, {0, 1, 2, 3, 4}) == (60.0, False)


def test_score_empty_truth():
    with pytest.raises(ParameterError):
        score_trial({1}, set())


@given(est=st.sets(st.integers(0, 20)), truth=st.sets(st.integers(0, 20), min_size=1))
def test_score_bounds(est, truth):
    pct, exact = score_trial(est, truth)
    assert 0 <= pct <= 100
    assert exact == (est == truth)
    assert (pct == 100) == truth.issubset(est)


# CSV


def test_csv_row_format(tmp_path):
    out = tmp_path / "x.csv"
    emit_csv([MetricsCell(50, 3, 60.0, 0.41, 0, 100)], out)
    assert out.read_text() == ",".join(CSV_HEADER) + "\n50,3,60.0000,0.410000,0,100\n"


def test_csv_empty(tmp_path):
    out = tmp_path / "e.csv"
    emit_csv([], out)
    assert out.read_text() == "m,p,pct_support_recovered,prob_exact_support,non_converged,trials\n"


def test_csv_sorted_rows():
    cells = [MetricsCell(20, 1, 1.0, 0.0, 0, 1), MetricsCell(10, 3, 1.0, 0.0, 0, 1), MetricsCell(10, 1, 1.0, 0.0, 0, 1)]
    rows = format_csv(cells).splitlines()[1:]
    assert [r.split(",")[:2] for r in rows] == [["10", "1"], ["10", "3"], ["20", "1"]]


def test_csv_io_error_has_path(tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv([], bad)


# config


@pytest.mark.parametrize(
    "kw",
    [dict(m_values=()), dict(p_values=()), dict(trials=0), dict(k=0), dict(k=40), dict(sigma_v_sq=0.0), dict(seed=-1)],
)
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        small_config(**kw)


def test_config_defaults():
    cfg = ExperimentConfig(sigma_v_sq=1e-4, m_values=[60], p_values=[3])
    assert (cfg.n, cfg.k, cfg.phi_variance, cfg.trials) == (100, 5, 0.004, 1000)
    assert cfg.extraction == KnownK(5)
    assert cfg.method is Method.JOINT
    assert cfg.to_dict()["solver"]["lam_ratio"] == 0.01


# seeding and trials


def test_trial_rngs_distinct():
    draws = {trial_rng(3, m, p, t).integers(2**62) for m in (10, 20) for p in (1, 2) for t in range(20)}
    assert len(draws) == 80


def test_trial_rng_reproducible():
    assert trial_rng(3, 10, 2, 5).random() == trial_rng(3, 10, 2, 5).random()
    assert trial_rng(3, 10, 2, 5).random() != trial_rng(4, 10, 2, 5).random()


def test_single_trial_repeatable():
    cfg = small_config(trials=1)
    assert run_cell(cfg, 8, 2) == run_cell(cfg, 8, 2)


def test_methods_share_instances():
    joint = small_config(p_values=(1,))
    base = small_config(p_values=(1,), method=Method.BASELINE)
    # with one sensor the baseline is the joint solver on the same draw
    for t in range(3):
        assert run_trial(joint, 8, 1, t) == run_trial(base, 8, 1, t)


def test_grid_order_irrelevant():
    a = run_sweep(small_config(m_values=(6, 8), p_values=(1, 2), trials=2))
    b = run_sweep(small_config(m_values=(8, 6), p_values=(2, 1), trials=2))
    assert a == b


def test_cell_independent_of_other_cells():
    full = run_sweep(small_config(m_values=(6, 8), trials=2))
    alone = run_sweep(small_config(m_values=(8,), trials=2))
    assert full[1] == alone[0]


def test_metric_bounds():
    for c in run_sweep(small_config(m_values=(4, 8), p_values=(1, 3), trials=3, sigma_v_sq=1e-2)):
        assert 0 <= c.pct_support_recovered <= 100
        assert 0 <= c.prob_exact_support <= 1
        assert 0 <= c.non_converged <= c.trials
        assert c.failed <= c.non_converged


def test_non_convergence_tallied():
    cfg = small_config(trials=2, solver=SolverConfig(epsilon=1e-14, max_total_iters=3))
    assert run_cell(cfg, 8, 2).non_converged == 2


def test_golden_csv():
    assert format_csv(run_sweep(golden_config())) == GOLDEN.read_text()


def test_workers_do_not_change_output():
    cfg = small_config(m_values=(6, 8), p_values=(1, 2), trials=2)
    assert format_csv(run_sweep(cfg, workers=1)) == format_csv(run_sweep(cfg, workers=3))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_seed_determinism(seed):
    cfg = small_config(seed=seed, trials=1)
    assert run_sweep(cfg) == run_sweep(cfg)


def test_baseline_sweep_runs():
    c = run_cell(small_config(method=Method.BASELINE, p_values=(3,)), 8, 3)
    assert c.trials == 3
    assert np.isfinite(c.pct_support_recovered)
