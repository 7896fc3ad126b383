"""Tests for trajectory ensembles, moment estimators and divergence statistics."""

from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from kerrq.analytic import mean_a_exact, stochastic_average_resummed
from kerrq.engine import KerrModel
from kerrq.ensemble import (
    agreement_horizon,
    analytic_series,
    averaging_order_experiment,
    divergence_statistics,
    initial_batch,
    product_moment_series,
    run_ensemble,
    sample_initial,
    simulate,
    validate_config,
)
from kerrq.errors import EnsembleError
from kerrq.types import (
    DivergenceRow,
    DivergenceTable,
    EnsembleConfig,
    InitialMode,
    MomentSeries,
    PhasePoint,
)

BETA = complex(0.001, 0.1)


def _reference(series, fn, point, mu=1.0):
    return np.array([fn(point, mu, t) for t in series.times])


# ==================================================================================
# Initial conditions
# ==================================================================================


def test_fixed_and_delta_modes_return_the_point():
    rng = np.random.default_rng(0)
    assert sample_initial(InitialMode.fixed_beta(BETA), rng) == PhasePoint.physical(BETA)
    assert sample_initial(InitialMode.delta_positive_p(1.0), rng) == PhasePoint(1 + 0j, 1 - 0j)


def test_q0_samples_are_unit_gaussian():
    rng = np.random.default_rng(1)
    mode = InitialMode.sample_q0(1.0 + 0.5j)
    draws = np.array([sample_initial(mode, rng).alpha for _ in range(20_000)])
    se = np.sqrt(0.5 / draws.size)
    assert abs(draws.real.mean() - 1.0) < 4 * se
    assert abs(draws.imag.mean() - 0.5) < 4 * se
    assert draws.real.var() == pytest.approx(0.5, abs=0.02)
    assert draws.imag.var() == pytest.approx(0.5, abs=0.02)


def test_q0_samples_keep_conjugate_pair():
    point = sample_initial(InitialMode.sample_q0(2.0), np.random.default_rng(2))
    assert point.alpha_plus == point.alpha.conjugate()


def test_initial_batch_depends_only_on_trajectory_index():
    mode = InitialMode.sample_q0(1.0)
    assert_array_equal(initial_batch(mode, 7, 10, 5), initial_batch(mode, 7, 0, 15)[10:])
    assert not np.array_equal(initial_batch(mode, 7, 0, 5), initial_batch(mode, 8, 0, 5))


# ==================================================================================
# Configuration and reproducibility
# ==================================================================================


@pytest.mark.parametrize(
    "changes",
    [
        {"n_trajectories": 0},
        {"t_final": 0.0},
        {"dt": -1e-3},
        {"record_stride": 0},
        {"divergence_threshold": 0.0},
        {"method": "euler"},
        {"workers": 0},
    ],
)
def test_invalid_ensemble_config(small_ensemble, changes):
    with pytest.raises(EnsembleError):
        validate_config(replace(small_ensemble, **changes))


def test_record_grid(small_ensemble):
    assert small_ensemble.n_steps == 200
    assert_array_equal(small_ensemble.record_steps, np.arange(0, 201, 20))
    odd = replace(small_ensemble, record_stride=60)
    assert odd.record_steps[-1] == 200


def test_runs_are_reproducible(q_model, small_ensemble):
    a = simulate(q_model, small_ensemble)
    b = simulate(q_model, small_ensemble)
    assert_array_equal(a.alpha, b.alpha)
    assert_array_equal(a.divergence_step, b.divergence_step)


def test_thread_pool_gives_identical_results(q_model, small_ensemble):
    serial = run_ensemble(q_model, small_ensemble)
    threaded = run_ensemble(q_model, replace(small_ensemble, workers=3, chunk_size=7))
    assert_array_equal(serial.mean_alpha, threaded.mean_alpha)
    assert_array_equal(serial.stderr_re, threaded.stderr_re)


def test_progress_counts_every_trajectory(q_model, small_ensemble):
    counts = []
    simulate(q_model, small_ensemble, counts.append)
    assert sum(counts) == small_ensemble.n_trajectories


def test_methods_agree(q_model, small_ensemble):
    exact = simulate(q_model, small_ensemble)
    heun = simulate(q_model, replace(small_ensemble, method="heun"))
    assert_allclose(heun.alpha, exact.alpha, atol=1e-3)


# ==================================================================================
# Moments
# ==================================================================================


def test_noise_free_ensemble_has_no_spread(q_model, small_ensemble):
    cfg = replace(small_ensemble, noise_free=True, initial_mode=InitialMode.fixed_beta(0.5))
    series = run_ensemble(q_model, cfg)
    expected = 0.5 * np.exp(1.5j * series.times)
    assert_allclose(series.mean_alpha, expected, atol=1e-12)
    assert_allclose(series.stderr_alpha, 0.0, atol=1e-12)
    assert_allclose(series.mean_alphaplus_alpha, 0.25, rtol=1e-12)
    assert not series.bias_warning.any()


def test_fixed_start_tracks_resummed_mean(q_model):
    cfg = EnsembleConfig(
        n_trajectories=4000,
        initial_mode=InitialMode.fixed_beta(BETA),
        t_final=0.5,
        dt=1e-3,
        record_stride=50,
        master_seed=42,
    )
    series = run_ensemble(q_model, cfg)
    z = series.z_scores(_reference(series, stochastic_average_resummed, BETA))
    assert np.all(z <= 4.0)
    assert series.n_alive[-1] == cfg.n_trajectories


def test_fixed_start_scores_zero_at_start(q_model):
    cfg = EnsembleConfig(
        n_trajectories=20_000,
        initial_mode=InitialMode.fixed_beta(BETA),
        t_final=0.5,
        dt=1e-3,
        record_stride=50,
        master_seed=42,
    )
    series = run_ensemble(q_model, cfg)
    assert series.mean_alpha[0] == pytest.approx(BETA, abs=1e-15)
    z = series.z_scores(_reference(series, stochastic_average_resummed, BETA))
    assert z[0] == 0.0
    assert agreement_horizon(series.times, z) == cfg.t_final


def test_spread_free_series_ignores_rounding():
    reference = np.array([BETA, 2 * BETA])
    series = MomentSeries(
        times=np.array([0.0, 0.1]),
        mean_alpha=reference + np.array([1e-17 - 3e-17j, 0j]),
        stderr_re=np.array([1e-19, 0.01]),
        stderr_im=np.array([1e-19, 0.01]),
        mean_alphaplus_alpha=np.full(2, abs(BETA) ** 2 + 0j),
        n_alive=np.array([10, 10]),
        divergence_times=np.array([]),
        n_trajectories=10,
    )
    assert_array_equal(series.z_scores(reference), [0.0, 0.0])
    shifted = series.z_scores(reference + 0.05)
    assert shifted[1] == pytest.approx(5.0)


def test_positive_p_delta_start_tracks_exact_mean(p_model):
    cfg = EnsembleConfig(
        n_trajectories=2000,
        initial_mode=InitialMode.delta_positive_p(1.0),
        t_final=0.3,
        dt=1e-3,
        record_stride=30,
        master_seed=3,
    )
    series = run_ensemble(p_model, cfg)
    z = series.z_scores(_reference(series, mean_a_exact, 1.0))
    assert np.all(z <= 4.0)


def test_product_moment_is_conserved_and_spreads(q_model):
    beta = complex(0.5, 0.5)
    cfg = EnsembleConfig(
        n_trajectories=2000,
        initial_mode=InitialMode.fixed_beta(beta),
        t_final=0.2,
        dt=1e-3,
        record_stride=20,
        master_seed=9,
    )
    series = product_moment_series(q_model, cfg)
    assert abs(series.mean[-1] - abs(beta) ** 2) <= 4 * series.stderr[-1]
    assert series.variance[0] == pytest.approx(0.0, abs=1e-20)
    assert series.variance_increasing


def test_bias_flag_follows_divergences(q_model):
    cfg = EnsembleConfig(
        n_trajectories=200,
        initial_mode=InitialMode.fixed_beta(1.0),
        t_final=1.0,
        dt=1e-3,
        record_stride=100,
        divergence_threshold=1.5,
        master_seed=5,
    )
    batch = simulate(q_model, cfg)
    series = run_ensemble(q_model, cfg)
    assert batch.diverged.any()
    assert not series.bias_warning[0]
    assert series.bias_warning[-1]
    assert np.all(np.diff(series.n_alive) <= 0)
    assert series.n_alive[-1] == cfg.n_trajectories - batch.diverged.sum()
    assert np.all(np.isfinite(series.mean_alpha))


def test_total_divergence_truncates_series(q_model, small_ensemble):
    cfg = replace(
        small_ensemble, initial_mode=InitialMode.fixed_beta(1.0), divergence_threshold=0.5
    )
    series = run_ensemble(q_model, cfg)
    assert series.truncated_at == 0.0
    assert np.all(series.n_alive == 0)


# ==================================================================================
# Divergence statistics
# ==================================================================================


def test_divergence_needs_enough_trajectories(q_model, small_ensemble):
    with pytest.raises(EnsembleError):
        divergence_statistics(q_model, [0.5], small_ensemble)


def test_vacuum_start_never_diverges(q_model, small_ensemble):
    cfg = replace(small_ensemble, n_trajectories=100, t_final=2.0, dt=2e-3)
    table = divergence_statistics(q_model, [0j], cfg)
    (row,) = table.rows
    assert row.fraction_diverged == 0.0
    assert row.median_divergence_time == np.inf


def test_larger_start_diverges_sooner(q_model):
    cfg = EnsembleConfig(
        n_trajectories=200,
        initial_mode=InitialMode.fixed_beta(0j),
        t_final=5.0,
        dt=2e-3,
        divergence_threshold=1e3,
        master_seed=42,
    )
    table = divergence_statistics(q_model, [0.5, 1.0, 2.0], cfg)
    fractions = [row.fraction_diverged for row in table.rows]
    assert fractions[2] >= fractions[0]
    assert table.median_non_increasing


def test_higher_threshold_delays_divergence(q_model):
    cfg = EnsembleConfig(
        n_trajectories=100,
        initial_mode=InitialMode.fixed_beta(0j),
        t_final=3.0,
        dt=2e-3,
        divergence_threshold=10.0,
        master_seed=1,
    )
    low = divergence_statistics(q_model, [1.0], cfg).rows[0]
    high = divergence_statistics(q_model, [1.0], replace(cfg, divergence_threshold=1e3)).rows[0]
    assert high.fraction_diverged <= low.fraction_diverged
    assert high.median_divergence_time >= low.median_divergence_time


def test_median_ordering_strict_and_weak():
    def table(*medians):
        rows = [DivergenceRow(b, 0.5, m, 500) for b, m in zip((0.5, 1.0, 2.0), medians)]
        return DivergenceTable(t_final=10.0, threshold=1e6, rows=tuple(reversed(rows)))

    decreasing = table(np.inf, 8.1, 2.8)
    assert decreasing.median_strictly_decreasing and decreasing.median_non_increasing
    tied = table(np.inf, np.inf, 2.8)
    assert tied.median_non_increasing and not tied.median_strictly_decreasing
    assert not table(2.8, 8.1, np.inf).median_non_increasing


# ==================================================================================
# Order of averaging
# ==================================================================================


def test_analytic_series_columns():
    times = np.linspace(0.0, 1.0, 5)
    series = analytic_series(1.0, 1.0, times)
    assert set(series) == {"exact", "fock", "resummed", "ordered", "positive_p"}
    assert_allclose(series["ordered"], series["exact"], atol=1e-10)
    assert_allclose(series["positive_p"], series["exact"], atol=1e-12)


def test_agreement_horizon():
    times = np.array([0.0, 0.1, 0.2, 0.3])
    assert agreement_horizon(times, np.array([0.0, 1.0, 2.0, 3.0])) == 0.3
    assert agreement_horizon(times, np.array([0.0, 1.0, 5.0, 3.0])) == 0.1
    assert agreement_horizon(times, np.array([np.nan, 1.0, 1.0, 1.0])) == 0.0


def test_averaging_order_report(q_model):
    cfg = EnsembleConfig(
        n_trajectories=500,
        initial_mode=InitialMode.fixed_beta(1.0),
        t_final=0.3,
        dt=1e-3,
        record_stride=50,
        master_seed=2,
    )
    report = averaging_order_experiment(1.0, 1.0, cfg)
    assert report.ordered_max_error < 1e-10
    assert 0.0 <= report.agreement_horizon <= 0.3
    assert report.times.shape == report.exact.shape == report.resummed.shape
    assert report.q0_sampled.n_trajectories == 500
    assert 0.0 <= report.q0_divergence_fraction <= 1.0


# ==================================================================================
# Acceptance-scale runs
# ==================================================================================


@pytest.mark.slow
def test_fixed_start_tracks_resummed_mean_at_scale(q_model):
    cfg = EnsembleConfig(
        n_trajectories=50_000,
        initial_mode=InitialMode.fixed_beta(BETA),
        t_final=0.5,
        dt=1e-4,
        record_stride=500,
        master_seed=42,
        workers=4,
    )
    series = run_ensemble(q_model, cfg)
    z = series.z_scores(_reference(series, stochastic_average_resummed, BETA))
    assert np.all(z <= 4.0)


@pytest.mark.slow
def test_fixed_start_agreement_breaks_down_at_long_times(q_model):
    cfg = EnsembleConfig(
        n_trajectories=20_000,
        initial_mode=InitialMode.fixed_beta(BETA),
        t_final=10.0,
        dt=1e-3,
        record_stride=500,
        master_seed=42,
        workers=4,
    )
    series = run_ensemble(q_model, cfg)
    z = series.z_scores(_reference(series, stochastic_average_resummed, BETA))
    assert np.any(z > 10.0) or series.bias_warning.any()
    assert series.n_alive[-1] < cfg.n_trajectories


@pytest.mark.slow
def test_positive_p_at_scale(p_model):
    cfg = EnsembleConfig(
        n_trajectories=100_000,
        initial_mode=InitialMode.delta_positive_p(1.0),
        t_final=0.3,
        dt=1e-4,
        record_stride=300,
        master_seed=42,
        workers=4,
    )
    series = run_ensemble(p_model, cfg)
    assert np.all(series.z_scores(_reference(series, mean_a_exact, 1.0)) <= 4.0)


@pytest.mark.slow
def test_q0_sampled_estimator_breaks_down(q_model):
    cfg = EnsembleConfig(
        n_trajectories=5000,
        initial_mode=InitialMode.fixed_beta(1.0),
        t_final=10.0,
        dt=1e-3,
        record_stride=500,
        master_seed=42,
        workers=4,
    )
    report = averaging_order_experiment(1.0, 1.0, cfg)
    assert report.q0_blowup_time is not None
    assert report.q0_divergence_fraction > 0.0


@pytest.mark.slow
def test_divergence_phenomenology_at_scale():
    cfg = EnsembleConfig(
        n_trajectories=500,
        initial_mode=InitialMode.fixed_beta(0j),
        t_final=10.0,
        dt=1e-3,
        divergence_threshold=1e6,
        master_seed=42,
    )
    model = KerrModel.q(1.0)
    vacuum = divergence_statistics(model, [0j], cfg)
    assert vacuum.rows[0].fraction_diverged == 0.0
    table = divergence_statistics(model, [0.5, 1.0, 2.0], cfg)
    assert table.median_strictly_decreasing
    assert table.median_non_increasing
