import numpy as np
import pytest

from knowledge_matrix import KnowledgeMatrix, new_matrix
from task_generation import (
    DecayParams,
    EmptySupportError,
    TaskSet,
    generate_taskset,
    sample_cell,
    transient_weights,
)
from task_types import GRID_SHAPE, NUM_LEVELS, NUM_TOPICS, TASKS_PER_SET, TaskCell


def test_single_support_always_sampled(rng):
    weights = np.full(GRID_SHAPE, 0.3)
    for _ in range(100):
        assert sample_cell(new_matrix(), weights, rng) == TaskCell(0, 0)


def test_empty_support_is_reported(rng):
    weights = np.ones(GRID_SHAPE)
    weights[0, 0] = 0.0
    with pytest.raises(EmptySupportError):
        sample_cell(new_matrix(), weights, rng)


def test_uniform_sampling_frequencies(rng):
    m = KnowledgeMatrix(np.full(GRID_SHAPE, 1.0 / 80))
    weights = np.ones(GRID_SHAPE)
    draws = 100_000
    counts = np.zeros(80)
    for _ in range(draws):
        counts[sample_cell(m, weights, rng).index] += 1

    expected = draws / 80
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    # 79 degrees of freedom; mean 79, sd ~12.6
    assert chi2 < 79 + 3 * np.sqrt(2 * 79)
    sigma = np.sqrt(draws * (1 / 80) * (79 / 80))
    assert np.all(np.abs(counts - expected) < 5 * sigma)


def test_sampling_follows_mass_ratio(rng):
    a, b = TaskCell(2, 3), TaskCell(5, 1)
    m = KnowledgeMatrix.from_cells({a: 0.75, b: 0.25})
    weights = np.ones(GRID_SHAPE)
    draws = 100_000
    hits = sum(sample_cell(m, weights, rng) == a for _ in range(draws))
    sigma = np.sqrt(draws * 0.75 * 0.25)
    assert abs(hits - 0.75 * draws) < 3 * sigma


def test_weights_scale_the_mass(rng):
    a, b = TaskCell(0, 0), TaskCell(0, 1)
    m = KnowledgeMatrix.from_cells({a: 0.5, b: 0.5})
    weights = np.ones(GRID_SHAPE)
    weights[0, 0] = 1.0 / 3.0
    draws = 40_000
    hits = sum(sample_cell(m, weights, rng) == a for _ in range(draws))
    sigma = np.sqrt(draws * 0.25 * 0.75)
    assert abs(hits - 0.25 * draws) < 4 * sigma


def test_taskset_has_ten_tasks(rng):
    m = KnowledgeMatrix(np.full(GRID_SHAPE, 1.0 / 80))
    taskset = generate_taskset(m, DecayParams(), rng)
    assert isinstance(taskset, TaskSet)
    assert len(taskset) == TASKS_PER_SET


def test_taskset_rejects_wrong_length():
    with pytest.raises(ValueError):
        TaskSet((TaskCell(0, 0),) * 9)


def test_sole_support_repeats_without_decay(rng):
    taskset = generate_taskset(new_matrix(), DecayParams(factor=1.0), rng)
    assert list(taskset) == [TaskCell(0, 0)] * TASKS_PER_SET


def test_sole_support_repeats_with_decay_and_matrix_untouched(rng):
    m = new_matrix()
    before = m.cells.copy()
    decay = DecayParams(factor=0.5)

    taskset = generate_taskset(m, decay, rng)

    assert list(taskset) == [TaskCell(0, 0)] * TASKS_PER_SET
    assert transient_weights(taskset, decay)[0, 0] == 0.5 ** 10
    np.testing.assert_array_equal(m.cells, before)


def test_topic_scope_decays_whole_row():
    weights = transient_weights([TaskCell(3, 2), TaskCell(3, 7)], DecayParams(factor=0.5, scope="topic"))
    np.testing.assert_array_equal(weights[3], np.full(NUM_LEVELS, 0.25))
    assert np.all(np.delete(weights, 3, axis=0) == 1.0)


def test_weights_stay_positive():
    cells = [TaskCell(t % NUM_TOPICS, t % NUM_LEVELS) for t in range(200)]
    assert np.all(transient_weights(cells, DecayParams(factor=0.01)) > 0.0)


def test_decay_params_validation():
    with pytest.raises(ValueError):
        DecayParams(factor=0.0)
    with pytest.raises(ValueError):
        DecayParams(factor=1.5)
    with pytest.raises(ValueError):
        DecayParams(scope="row")


def test_decay_reduces_repeats():
    a, b = TaskCell(1, 1), TaskCell(1, 2)
    m = KnowledgeMatrix.from_cells({a: 0.5, b: 0.5})

    def mean_majority(decay, seed):
        rng = np.random.default_rng(seed)
        total = 0
        for _ in range(10_000):
            hits = sum(cell == a for cell in generate_taskset(m, decay, rng))
            total += max(hits, TASKS_PER_SET - hits)
        return total / 10_000

    assert mean_majority(DecayParams(factor=0.5), 1) < mean_majority(DecayParams(factor=1.0), 1)


def test_same_seed_same_taskset():
    m = KnowledgeMatrix(np.full(GRID_SHAPE, 1.0 / 80))
    first = generate_taskset(m, DecayParams(), np.random.default_rng(99))
    second = generate_taskset(m, DecayParams(), np.random.default_rng(99))
    assert first == second
