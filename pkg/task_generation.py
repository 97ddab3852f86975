"""
task_generation.py — Sampling task-sets of ten cells from the knowledge matrix.

Cells are drawn categorically with probability proportional to
matrix value x transient weight. The transient weights start at 1.0 for every
task-set and each draw multiplies the drawn cell's weight (or its whole topic
row) by the decay factor, lowering the chance of recurring tasks without
touching the knowledge matrix itself.

License: MIT
"""

from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple

import numpy as np

from knowledge_matrix import KnowledgeMatrix
from task_types import GRID_SHAPE, TASKS_PER_SET, TaskCell

__all__ = [
    "EmptySupportError",
    "DecayParams",
    "TaskSet",
    "sample_cell",
    "generate_taskset",
    "transient_weights",
    "DEFAULT_DECAY",
]

DEFAULT_DECAY = 0.5
DECAY_SCOPES = ("cell", "topic")


class EmptySupportError(ValueError):
    """Raised when no cell has a positive effective sampling weight."""


@dataclass(frozen=True)
class DecayParams:
    """
    Within-set decay of sampling weights.

    Attributes:
        factor (float): Multiplier in (0, 1] applied after each draw; 1.0 disables decay.
        scope (str): "cell" decays only the drawn cell, "topic" its whole topic row.
    """

    factor: float = DEFAULT_DECAY
    scope: str = "cell"

    def __post_init__(self):
        if not 0.0 < self.factor <= 1.0:
            raise ValueError(f"decay factor must be within (0, 1], got {self.factor}")
        if self.scope not in DECAY_SCOPES:
            raise ValueError(f"decay scope must be one of {DECAY_SCOPES}, got {self.scope!r}")


@dataclass(frozen=True)
class TaskSet:
    tasks: Tuple[TaskCell, ...]

    def __post_init__(self):
        if len(self.tasks) != TASKS_PER_SET:
            raise ValueError(f"a task-set holds exactly {TASKS_PER_SET} tasks, got {len(self.tasks)}")

    def __iter__(self) -> Iterator[TaskCell]:
        return iter(self.tasks)

    def __len__(self):
        return len(self.tasks)

    def __getitem__(self, i):
        return self.tasks[i]


def sample_cell(m: KnowledgeMatrix, weights: np.ndarray, rng: np.random.Generator) -> TaskCell:
    """
    Draw one cell with probability proportional to m(cell) x weights(cell).

    Args:
        m (KnowledgeMatrix): Knowledge matrix.
        weights (np.ndarray): (8, 10) transient weights, non-negative.
        rng (np.random.Generator): Random stream; consumes exactly one uniform.

    Returns:
        TaskCell: The drawn cell.

    Raises:
        EmptySupportError: If every effective weight is zero.
    """
    effective = (m.cells * weights).ravel()
    cumulative = np.cumsum(effective)
    total = cumulative[-1]
    if not total > 0.0:
        raise EmptySupportError("no cell has a positive sampling weight")
    u = rng.random() * total
    index = int(np.searchsorted(cumulative, u, side="right"))
    if index >= effective.size:
        # u rounded up to the total; take the last cell with positive weight
        index = int(np.flatnonzero(effective)[-1])
    return TaskCell.from_index(index)


def _decay(weights: np.ndarray, cell: TaskCell, decay: DecayParams) -> None:
    if decay.scope == "topic":
        weights[cell.topic, :] *= decay.factor
    else:
        weights[cell.topic, cell.level] *= decay.factor


def generate_taskset(m: KnowledgeMatrix, decay: DecayParams, rng: np.random.Generator) -> TaskSet:
    """
    Sample a task-set of ten cells from the matrix.

    The matrix is never modified; decay acts on weights local to this call.

    Raises:
        EmptySupportError: Only for a matrix without mass.
    """
    weights = np.ones(GRID_SHAPE)
    tasks = []
    for _ in range(TASKS_PER_SET):
        cell = sample_cell(m, weights, rng)
        tasks.append(cell)
        _decay(weights, cell, decay)
    return TaskSet(tuple(tasks))


def transient_weights(tasks: Iterable[TaskCell], decay: DecayParams) -> np.ndarray:
    """The weight grid left after drawing `tasks` in order."""
    weights = np.ones(GRID_SHAPE)
    for cell in tasks:
        _decay(weights, cell, decay)
    return weights
