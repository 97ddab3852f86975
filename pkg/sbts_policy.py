"""
sbts_policy.py — Reward / punish update rule of the Skill-Based Task Selection.

After every answer the selected cell loses a share of its probability and the
removed mass is handed to its neighbours: "down and right" (harder topic, higher
level) on a correct answer, "up and left" on a wrong one.

The update:
1. beta = (cell_skill - user_skill)^2 + 0.5, large when the task was far from the
   student's estimated skill
2. new_prob = old_prob x clamp(1 - lambda x beta, 0, 1)
3. diff = (old_prob - new_prob) / len(targets) is added to each target cell

Out-of-bounds neighbours are dropped; with no target left the update is a no-op,
so the matrix always sums to 1.0.

License: MIT
"""

from dataclasses import dataclass
from typing import List

from knowledge_matrix import KnowledgeMatrix, cell_skill, user_skill
from task_types import AttemptOutcome, TaskCell, in_bounds

__all__ = ["PolicyParams", "beta", "update_targets", "apply_update", "DEFAULT_LAMBDA", "DEFAULT_SPAN"]

DEFAULT_LAMBDA = 0.1
DEFAULT_SPAN = 1


@dataclass(frozen=True)
class PolicyParams:
    """
    Tunables of the update rule.

    Attributes:
        lam (float): Learning speed lambda in [0, 1].
        neighbor_span (int): Cells included per axis in the reward / punish pattern.
    """

    lam: float = DEFAULT_LAMBDA
    neighbor_span: int = DEFAULT_SPAN

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be within [0, 1], got {self.lam}")
        if self.neighbor_span < 1:
            raise ValueError(f"neighbor span must be at least 1, got {self.neighbor_span}")


def beta(task_skill: float, user_skill: float) -> float:
    """Surprise factor: 1 * x^2 + 0.5 with x = task_skill - user_skill."""
    x = task_skill - user_skill
    return x * x + 0.5


def update_targets(cell: TaskCell, outcome: AttemptOutcome, span: int = DEFAULT_SPAN) -> List[TaskCell]:
    """
    Neighbour cells receiving the mass removed from `cell`.

    Args:
        cell (TaskCell): The answered cell.
        outcome (AttemptOutcome): Correct answers reward right/down, wrong ones punish left/up.
        span (int): Number of cells per axis.

    Returns:
        list[TaskCell]: In-bounds targets, nearest first, level axis before topic axis.
        May be empty at the (if, 0) and (reflection, 9) corners.
    """
    step = 1 if outcome.correct else -1
    targets = []
    for distance in range(1, span + 1):
        offset = step * distance
        if in_bounds(cell.topic, cell.level + offset):
            targets.append(TaskCell(cell.topic, cell.level + offset))
        if in_bounds(cell.topic + offset, cell.level):
            targets.append(TaskCell(cell.topic + offset, cell.level))
    return targets


def apply_update(m: KnowledgeMatrix, cell: TaskCell, outcome: AttemptOutcome, params: PolicyParams) -> KnowledgeMatrix:
    """
    Reward or punish `cell` and redistribute the removed mass.

    Args:
        m (KnowledgeMatrix): Current matrix, unit mass.
        cell (TaskCell): The cell the student answered.
        outcome (AttemptOutcome): The student's answer.
        params (PolicyParams): Learning speed and neighbour span.

    Returns:
        KnowledgeMatrix: The updated matrix; `m` itself when nothing moves.

    Raises:
        DegenerateMassError: Propagated from user_skill.
    """
    old_prob = m[cell]
    if old_prob == 0.0 or params.lam == 0.0:
        return m
    targets = update_targets(cell, outcome, params.neighbor_span)
    if not targets:
        return m

    b = beta(cell_skill(cell), user_skill(m))
    factor = min(max(1.0 - params.lam * b, 0.0), 1.0)
    new_prob = old_prob * factor
    diff = (old_prob - new_prob) / len(targets)

    cells = m.cells.copy()
    cells[cell.topic, cell.level] = new_prob
    for target in targets:
        cells[target.topic, target.level] += diff
    return KnowledgeMatrix._wrap(cells)
