import logging
import time

import numpy as np
import pytest

from conftest import DESK_ITERATIONS, DESK_STUDENTS, DESK_TASKSETS, desk_config
from experiment_harness import (
    AttemptRecord,
    ExperimentConfig,
    LevelCurve,
    MetricsAggregate,
    UnknownBaselineError,
    level_curves,
    level_onsets,
    run_cohort,
    run_student,
    summary,
    sweep,
)
from knowledge_matrix import new_matrix
from sbts_policy import PolicyParams
from student_env import DynamicEpsilonStudent, StaticEpsilonStudent, StaticStudent
from task_types import CORRECT, NUM_LEVELS, WRONG, TaskCell
from utils import derive_run_seed


def small_config(model=None, **overrides):
    values = dict(num_students=4, tasksets_per_student=3, iterations=2, model=model or StaticStudent(0.7), master_seed=7)
    values.update(overrides)
    return ExperimentConfig(**values)


def aggregate_with_levels(*final_levels):
    return MetricsAggregate(
        level_curves={level + 1: LevelCurve.empty() for level in range(NUM_LEVELS)},
        final_levels=np.array(final_levels, dtype=float),
        onsets=np.full((len(final_levels), NUM_LEVELS), -1),
        attempts=0,
        successes=0,
    )


def record(task_index, level, outcome, student_id=0):
    return AttemptRecord(student_id, 0, task_index, TaskCell(0, level), outcome)


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(num_students=0)
    assert small_config().tasks_per_run == 30
    assert small_config().total_runs == 8


def test_one_taskset_gives_ten_records():
    run = run_student(small_config(tasksets_per_student=1), student_seed=1)
    assert len(run) == 10
    assert [r.task_index for r in run.records] == list(range(10))


def test_zero_lambda_keeps_initial_matrix():
    run = run_student(small_config(policy=PolicyParams(lam=0.0), tasksets_per_student=20), student_seed=3)
    assert run.matrix == new_matrix()
    assert all(r.cell == TaskCell(0, 0) for r in run.records)


def test_always_correct_student_advances():
    run = run_student(small_config(StaticStudent(1.0), tasksets_per_student=50), student_seed=5)
    assert run.final_expected_level > 1.0
    assert run.correct.all()


def test_run_student_is_deterministic():
    config = small_config(StaticEpsilonStudent(p_explore=0.7), tasksets_per_student=10)
    first = run_student(config, student_seed=11)
    second = run_student(config, student_seed=11)
    np.testing.assert_array_equal(first.levels, second.levels)
    np.testing.assert_array_equal(first.topics, second.topics)
    np.testing.assert_array_equal(first.correct, second.correct)
    assert first.matrix == second.matrix


def test_cohort_is_reproducible():
    config = small_config(DynamicEpsilonStudent())
    assert run_cohort(config) == run_cohort(config)


def test_cohort_independent_of_worker_count():
    config = small_config(StaticEpsilonStudent(p_explore=0.2))
    assert run_cohort(config, workers=1, by_topic=True) == run_cohort(config, workers=2, by_topic=True)


def test_cohort_folds_runs_in_index_order():
    config = small_config()
    aggregate = run_cohort(config)
    expected = [
        run_student(config, derive_run_seed(config.master_seed, i, s), s, i).final_expected_level
        for i in range(config.iterations)
        for s in range(config.num_students)
    ]
    np.testing.assert_array_equal(aggregate.final_levels, expected)
    assert aggregate.attempts == config.total_runs * config.tasks_per_run


def test_topic_curves_add_up_to_level_curves():
    aggregate = run_cohort(small_config(tasksets_per_student=8), by_topic=True)
    for level, curve in aggregate.level_curves.items():
        topic_total = sum(c.total_samples for (_, l), c in aggregate.topic_curves.items() if l == level)
        assert topic_total == curve.total_samples


def test_level_curve_cumulative_rate():
    curves = level_curves([record(0, 0, CORRECT), record(1, 0, WRONG)])
    np.testing.assert_array_equal(curves[1].task_index, [0, 1])
    np.testing.assert_allclose(curves[1].mean_success_rate, [1.0, 0.5])
    np.testing.assert_array_equal(curves[1].sample_count, [1, 1])


def test_level_curve_for_unattempted_level_is_empty():
    curves = level_curves([record(0, 0, CORRECT)])
    assert len(curves[10]) == 0
    assert curves[10].total_samples == 0


def test_level_curve_mean_over_students():
    curves = level_curves([record(0, 0, CORRECT, student_id=0), record(0, 0, WRONG, student_id=1)])
    assert curves[1].points[0].mean_success_rate == 0.5
    assert curves[1].points[0].sample_count == 2


def test_level_curve_only_counts_its_own_attempts():
    curves = level_curves([record(0, 0, CORRECT), record(1, 1, WRONG), record(2, 0, WRONG)])
    np.testing.assert_array_equal(curves[1].task_index, [0, 2])
    np.testing.assert_allclose(curves[1].mean_success_rate, [1.0, 0.5])
    np.testing.assert_allclose(curves[2].mean_success_rate, [0.0])


def test_level_curves_of_no_records():
    assert all(len(curve) == 0 for curve in level_curves([]).values())


def test_records_reproduce_cohort_curves():
    config = small_config(tasksets_per_student=5)
    aggregate = run_cohort(config)
    records = [
        r
        for i in range(config.iterations)
        for s in range(config.num_students)
        for r in run_student(config, derive_run_seed(config.master_seed, i, s), s, i).records
    ]
    assert level_curves(records) == aggregate.level_curves


def test_summary_percent_change():
    rows = summary({"base": aggregate_with_levels(5.0), "variant": aggregate_with_levels(6.0)})
    assert [r.label for r in rows] == ["base", "variant"]
    assert rows[0].pct_change_vs_baseline == 0.0
    assert rows[1].pct_change_vs_baseline == pytest.approx(20.0)


def test_summary_baseline_row_first():
    rows = summary({"a": aggregate_with_levels(4.0, 6.0), "b": aggregate_with_levels(2.0)}, baseline="b")
    assert [r.label for r in rows] == ["b", "a"]
    assert rows[1].expected_level_mean == 5.0
    assert rows[1].expected_level_std == 1.0
    assert rows[1].pct_change_vs_baseline == pytest.approx(150.0)


def test_summary_single_aggregate():
    rows = summary({"only": aggregate_with_levels(3.0)})
    assert len(rows) == 1
    assert rows[0].pct_change_vs_baseline == 0.0


def test_summary_errors():
    with pytest.raises(UnknownBaselineError):
        summary({"a": aggregate_with_levels(1.0)}, baseline="missing")
    with pytest.raises(ValueError):
        summary({})


def test_onsets_of_unreached_levels_are_nan():
    aggregate = run_cohort(small_config(StaticStudent(0.0), tasksets_per_student=2))
    onsets = level_onsets(aggregate)
    assert onsets[1].runs == 8
    assert onsets[1].p50 == 0.0
    assert onsets[10].runs == 0
    assert np.isnan(onsets[10].p50)


@pytest.mark.slow
def test_sweep_is_monotone_in_p():
    p_values = [0.2, 0.5, 0.7, 0.9]
    results = sweep(desk_config(StaticStudent(0.5), num_students=50, iterations=1), p_values)
    assert list(results) == ["static-p0.2", "static-p0.5", "static-p0.7", "static-p0.9"]
    means = [results[label].final_expected_level[0] for label in results]
    assert np.all(np.diff(means) > 0)


def test_cohort_logs_each_folded_iteration(caplog):
    caplog.set_level(logging.DEBUG, logger="experiment_harness")
    run_cohort(small_config(iterations=3))
    folded = [r.getMessage() for r in caplog.records if r.getMessage().startswith("Folded iteration")]
    assert folded == ["Folded iteration 1/3", "Folded iteration 2/3", "Folded iteration 3/3"]


@pytest.fixture(scope="module")
def desk_runs():
    started = time.perf_counter()
    good = run_cohort(desk_config(StaticStudent(0.7)))
    good_seconds = time.perf_counter() - started
    return {
        "static-good": good,
        "static-good-seconds": good_seconds,
        "static-bad": run_cohort(desk_config(StaticStudent(0.2))),
        "static-eps-good": run_cohort(desk_config(StaticEpsilonStudent(p_explore=0.7))),
        "static-eps-bad": run_cohort(desk_config(StaticEpsilonStudent(p_explore=0.2))),
        "dynamic-neutral": run_cohort(desk_config(DynamicEpsilonStudent(p_explore=0.5))),
    }


def mean_level(aggregate):
    return aggregate.final_expected_level[0]


@pytest.mark.slow
def test_desk_scale_single_cohort_time(desk_runs):
    assert desk_runs["static-good-seconds"] < 30.0


@pytest.mark.slow
def test_good_student_beats_bad_student(desk_runs):
    assert mean_level(desk_runs["static-good"]) - mean_level(desk_runs["static-bad"]) >= 1.5


@pytest.mark.slow
def test_exploration_helps_both_students(desk_runs):
    good_gain = mean_level(desk_runs["static-eps-good"]) / mean_level(desk_runs["static-good"]) - 1
    bad_gain = mean_level(desk_runs["static-eps-bad"]) / mean_level(desk_runs["static-bad"]) - 1
    assert good_gain > 0
    assert bad_gain > 0
    assert bad_gain > good_gain


@pytest.mark.slow
def test_dynamic_student_falls_below_static_epsilon(desk_runs):
    assert mean_level(desk_runs["dynamic-neutral"]) < mean_level(desk_runs["static-eps-good"])


@pytest.mark.slow
def test_high_levels_are_sparsely_sampled(desk_runs):
    curves = desk_runs["static-bad"].level_curves
    for level in (8, 9, 10):
        assert curves[level].total_samples < 0.25 * curves[1].total_samples


@pytest.mark.slow
def test_levels_are_reached_in_order(desk_runs):
    aggregate = desk_runs["static-good"]
    for run_onsets in aggregate.onsets:
        reached = run_onsets[run_onsets >= 0]
        # reached levels form a prefix and are first attempted in increasing order
        assert np.all(run_onsets[: reached.size] >= 0)
        assert np.all(np.diff(reached) > 0)

    total = DESK_STUDENTS * DESK_ITERATIONS
    onsets = level_onsets(aggregate)
    full = [onsets[level] for level in sorted(onsets) if onsets[level].runs == total]
    assert len(full) >= 2
    for lower, higher in zip(full, full[1:]):
        assert higher.p5 > lower.p5
        assert higher.p50 > lower.p50
        assert higher.p95 > lower.p95


@pytest.mark.slow
def test_pooled_success_rate_matches_static_p(desk_runs):
    aggregate = desk_runs["static-good"]
    assert aggregate.attempts == DESK_STUDENTS * DESK_ITERATIONS * DESK_TASKSETS * 10
    sigma = np.sqrt(0.7 * 0.3 / aggregate.attempts)
    assert abs(aggregate.success_rate - 0.7) < 4 * sigma
