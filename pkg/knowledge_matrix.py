"""
knowledge_matrix.py — The SBTS knowledge matrix and the skill estimates derived from it.

The knowledge matrix is the tutor's estimate of which task cell suits a student:
an 8x10 grid (topics x difficulty levels) of selection probabilities that must
always sum to 1.0. It is NOT the student's actual knowledge; that lives in
student_env.

Key Components:
    - KnowledgeMatrix: immutable wrapper around a float64 (8, 10) array
    - new_matrix(): all mass at (if, 0), the state every student starts from
    - cell_skill(): skill required to solve a cell, ((level + 1) / 10) x (topic + 1)
    - user_skill(): probability-weighted mean of cell_skill over the matrix
    - expected_level(): probability-weighted mean level on the 1..10 scale

License: MIT
"""

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from task_types import GRID_SHAPE, NUM_LEVELS, TaskCell

__all__ = [
    "DegenerateMassError",
    "KnowledgeMatrix",
    "new_matrix",
    "total_mass",
    "cell_skill",
    "user_skill",
    "expected_level",
    "SKILL_GRID",
    "LEVEL_GRID",
]

MASS_TOLERANCE = 1e-6


class DegenerateMassError(ValueError):
    """Raised when a matrix no longer carries a unit of probability mass."""

    def __init__(self, mass: float):
        super().__init__(f"knowledge matrix mass is {mass!r}, expected 1.0 (tolerance {MASS_TOLERANCE})")
        self.mass = mass


@dataclass(frozen=True, eq=False)
class KnowledgeMatrix:
    """
    An 8x10 grid of selection probabilities with value semantics.

    The wrapped array is made read-only; updates build a new matrix.
    Construction validates that every cell is in [0, 1]. The unit-mass
    invariant is checked by the operations that depend on it, so that
    degenerate fixtures can still be built for tests.
    """

    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.float64)
        if cells.shape != GRID_SHAPE:
            raise ValueError(f"knowledge matrix must have shape {GRID_SHAPE}, got {cells.shape}")
        if np.any(cells < 0.0) or np.any(cells > 1.0) or not np.all(np.isfinite(cells)):
            raise ValueError("knowledge matrix cells must be finite and within [0, 1]")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_cells(cls, masses: Mapping[TaskCell, float]) -> "KnowledgeMatrix":
        """Build a matrix from a sparse {cell: probability} mapping."""
        grid = np.zeros(GRID_SHAPE)
        for cell, p in masses.items():
            grid[cell.topic, cell.level] += p
        return cls(grid)

    @classmethod
    def _wrap(cls, cells: np.ndarray) -> "KnowledgeMatrix":
        # Skips validation; only for arrays produced by the update rule.
        matrix = object.__new__(cls)
        cells.setflags(write=False)
        object.__setattr__(matrix, "cells", cells)
        return matrix

    def __getitem__(self, cell: TaskCell) -> float:
        return float(self.cells[cell.topic, cell.level])

    def __eq__(self, other):
        if not isinstance(other, KnowledgeMatrix):
            return NotImplemented
        return bool(np.array_equal(self.cells, other.cells))

    def __hash__(self):
        return hash(self.cells.tobytes())


def _skill_grid() -> np.ndarray:
    topics = np.arange(GRID_SHAPE[0], dtype=np.float64)[:, None]
    levels = np.arange(GRID_SHAPE[1], dtype=np.float64)[None, :]
    grid = ((levels + 1.0) / NUM_LEVELS) * (topics + 1.0)
    grid.setflags(write=False)
    return grid


def _level_grid() -> np.ndarray:
    grid = np.broadcast_to(np.arange(1, NUM_LEVELS + 1, dtype=np.float64), GRID_SHAPE).copy()
    grid.setflags(write=False)
    return grid


SKILL_GRID = _skill_grid()
LEVEL_GRID = _level_grid()


def new_matrix() -> KnowledgeMatrix:
    """Every student starts at skill level zero: the whole mass sits on (if, 0)."""
    grid = np.zeros(GRID_SHAPE)
    grid[0, 0] = 1.0
    return KnowledgeMatrix(grid)


def total_mass(m: KnowledgeMatrix) -> float:
    return float(m.cells.sum())


def cell_skill(cell: TaskCell) -> float:
    """
    Expected skill level required to solve the task in `cell`.

    Args:
        cell (TaskCell): Grid coordinate.

    Returns:
        float: ((level + 1) / 10) x (topic + 1), from 0.1 at (if, 0) to 8.0 at (reflection, 9).
    """
    return ((cell.level + 1) / NUM_LEVELS) * (cell.topic + 1)


def _check_mass(m: KnowledgeMatrix) -> None:
    mass = total_mass(m)
    if abs(mass - 1.0) > MASS_TOLERANCE:
        raise DegenerateMassError(mass)


def user_skill(m: KnowledgeMatrix) -> float:
    """
    The student's approximated skill: the mean of cell_skill weighted by the matrix.

    Raises:
        DegenerateMassError: If the matrix mass deviates from 1.0 by more than 1e-6.
    """
    _check_mass(m)
    return float(np.vdot(m.cells, SKILL_GRID))


def expected_level(m: KnowledgeMatrix) -> float:
    """
    Probability-weighted mean difficulty on the 1..10 scale; the reported "skill level".

    Raises:
        DegenerateMassError: If the matrix mass deviates from 1.0 by more than 1e-6.
    """
    _check_mass(m)
    return float(np.vdot(m.cells, LEVEL_GRID))
