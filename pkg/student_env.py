"""
student_env.py — Simulated students answering task cells.

Three student models provide the environment the SBTS interacts with:

- StaticStudent: answers correctly with a constant probability p.
- StaticEpsilonStudent: epsilon-greedy with a fixed epsilon. Exploration passes
  with probability p_explore; exploitation passes when the student's actual
  knowledge of the topic reaches the level threshold (level + 1) / 10.
- DynamicEpsilonStudent: like the above, but epsilon starts at epsilon0 (70%)
  and decays exponentially to pure exploitation after `cutoff` tasks.

The epsilon students keep a per-topic knowledge vector that grows on every
correct answer: k <- k + eta x (1 - k).

License: MIT
"""

import math
from dataclasses import dataclass, field, replace
from typing import Tuple, Union

import numpy as np

from task_types import CORRECT, NUM_LEVELS, NUM_TOPICS, WRONG, AttemptOutcome, TaskCell

__all__ = [
    "StudentKnowledge",
    "StaticStudent",
    "StaticEpsilonStudent",
    "DynamicEpsilonStudent",
    "StudentModel",
    "SimulatedStudent",
    "epsilon_at",
    "attempt",
    "update_knowledge",
    "level_threshold",
]

DEFAULT_ETA = 0.1
DEFAULT_EPSILON = 0.3
DEFAULT_EPSILON0 = 0.7
DEFAULT_CUTOFF = 100
DEFAULT_P_EXPLORE_NEUTRAL = 0.5


def _check_probability(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be within [0, 1], got {value}")


@dataclass(frozen=True)
class StudentKnowledge:
    """The student's actual knowledge per topic row, each value in [0, 1]."""

    per_topic: Tuple[float, ...] = (0.0,) * NUM_TOPICS

    def __post_init__(self):
        values = tuple(float(v) for v in self.per_topic)
        if len(values) != NUM_TOPICS:
            raise ValueError(f"knowledge needs {NUM_TOPICS} topic values, got {len(values)}")
        for v in values:
            _check_probability("topic knowledge", v)
        object.__setattr__(self, "per_topic", values)

    def __getitem__(self, topic: int) -> float:
        return self.per_topic[topic]


@dataclass(frozen=True)
class StaticStudent:
    p_success: float

    def __post_init__(self):
        _check_probability("p_success", self.p_success)


@dataclass(frozen=True)
class StaticEpsilonStudent:
    p_explore: float
    epsilon: float = DEFAULT_EPSILON
    eta: float = DEFAULT_ETA
    knowledge: StudentKnowledge = field(default_factory=StudentKnowledge)

    def __post_init__(self):
        _check_probability("epsilon", self.epsilon)
        _check_probability("p_explore", self.p_explore)
        _check_probability("eta", self.eta)


@dataclass(frozen=True)
class DynamicEpsilonStudent:
    p_explore: float = DEFAULT_P_EXPLORE_NEUTRAL
    epsilon0: float = DEFAULT_EPSILON0
    cutoff: int = DEFAULT_CUTOFF
    eta: float = DEFAULT_ETA
    knowledge: StudentKnowledge = field(default_factory=StudentKnowledge)

    def __post_init__(self):
        _check_probability("epsilon0", self.epsilon0)
        _check_probability("p_explore", self.p_explore)
        _check_probability("eta", self.eta)
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be at least 1, got {self.cutoff}")


StudentModel = Union[StaticStudent, StaticEpsilonStudent, DynamicEpsilonStudent]
EpsilonStudent = Union[StaticEpsilonStudent, DynamicEpsilonStudent]


def epsilon_at(model: StudentModel, t: int) -> float:
    """
    Exploration probability after `t` tasks.

    The dynamic schedule is epsilon0 x exp(-t / tau) with tau = cutoff / 5,
    and exactly 0 from t = cutoff on.
    """
    if isinstance(model, StaticStudent):
        return 0.0
    if isinstance(model, StaticEpsilonStudent):
        return model.epsilon
    if t >= model.cutoff:
        return 0.0
    tau = model.cutoff / 5.0
    return model.epsilon0 * math.exp(-t / tau)


def level_threshold(cell: TaskCell) -> float:
    """Knowledge a student needs to pass `cell` by exploitation."""
    return (cell.level + 1) / NUM_LEVELS


def attempt(model: StudentModel, cell: TaskCell, t: int, rng: np.random.Generator) -> AttemptOutcome:
    """
    Let the student answer `cell` as its `t`-th task.

    Args:
        model (StudentModel): Student configuration and knowledge state.
        cell (TaskCell): The task.
        t (int): Tasks answered so far in this run.
        rng (np.random.Generator): The student's random stream.

    Returns:
        AttemptOutcome: The answer. Knowledge is not updated here, see update_knowledge.
    """
    if isinstance(model, StaticStudent):
        return CORRECT if rng.random() < model.p_success else WRONG

    if rng.random() < epsilon_at(model, t):
        return CORRECT if rng.random() < model.p_explore else WRONG
    return CORRECT if model.knowledge[cell.topic] >= level_threshold(cell) else WRONG


def update_knowledge(
    k: StudentKnowledge, cell: TaskCell, outcome: AttemptOutcome, eta: float = DEFAULT_ETA
) -> StudentKnowledge:
    """Move the topic's knowledge a fraction `eta` of the way to 1.0 on a correct answer."""
    if not outcome.correct:
        return k
    values = list(k.per_topic)
    values[cell.topic] = min(1.0, values[cell.topic] + eta * (1.0 - values[cell.topic]))
    return StudentKnowledge(tuple(values))


class SimulatedStudent:
    """
    A single student in a simulation run.

    Owns the evolving model (for epsilon students, its knowledge state) and
    answers tasks through `attempt`, applying `update_knowledge` afterwards.
    """

    def __init__(self, model: StudentModel):
        self.model = model

    @property
    def knowledge(self):
        return getattr(self.model, "knowledge", None)

    def answer(self, cell: TaskCell, t: int, rng: np.random.Generator) -> AttemptOutcome:
        outcome = attempt(self.model, cell, t, rng)
        if outcome.correct and not isinstance(self.model, StaticStudent):
            knowledge = update_knowledge(self.model.knowledge, cell, outcome, self.model.eta)
            self.model = replace(self.model, knowledge=knowledge)
        return outcome
