import numpy as np
import pytest

from experiment_harness import ExperimentConfig
from knowledge_matrix import KnowledgeMatrix
from sbts_policy import PolicyParams
from task_generation import DecayParams
from task_types import GRID_SHAPE

DESK_STUDENTS = 100
DESK_TASKSETS = 50
DESK_ITERATIONS = 10
DESK_SEED = 42
DESK_LAMBDA = 0.5


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_matrix(rng: np.random.Generator, sparsity: float = 0.5) -> KnowledgeMatrix:
    """A random unit-mass matrix with roughly `sparsity` of its cells empty."""
    grid = rng.random(GRID_SHAPE)
    grid[rng.random(GRID_SHAPE) < sparsity] = 0.0
    if grid.sum() == 0.0:
        grid[0, 0] = 1.0
    return KnowledgeMatrix(grid / grid.sum())


def desk_config(model, **overrides) -> ExperimentConfig:
    values = dict(
        num_students=DESK_STUDENTS,
        tasksets_per_student=DESK_TASKSETS,
        iterations=DESK_ITERATIONS,
        model=model,
        policy=PolicyParams(lam=DESK_LAMBDA),
        decay=DecayParams(),
        master_seed=DESK_SEED,
    )
    values.update(overrides)
    return ExperimentConfig(**values)
