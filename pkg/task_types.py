"""
task_types.py — Centralised task grid types & constants for the SBTS simulator
"""

from dataclasses import dataclass

TOPICS = [
    "if",
    "for",
    "while",
    "methods",
    "classes",
    "exceptions",
    "gui",
    "reflection",
]

NUM_TOPICS = len(TOPICS)
NUM_LEVELS = 10
GRID_SHAPE = (NUM_TOPICS, NUM_LEVELS)
TASKS_PER_SET = 10


@dataclass(frozen=True, order=True)
class TaskCell:
    """A (topic, level) coordinate of the knowledge matrix, both 0-based."""

    topic: int
    level: int

    def __post_init__(self):
        if not 0 <= self.topic < NUM_TOPICS:
            raise ValueError(f"topic must be in 0..{NUM_TOPICS - 1}, got {self.topic}")
        if not 0 <= self.level < NUM_LEVELS:
            raise ValueError(f"level must be in 0..{NUM_LEVELS - 1}, got {self.level}")

    @property
    def topic_name(self) -> str:
        return TOPICS[self.topic]

    @property
    def index(self) -> int:
        """Row-major position in a flattened 8x10 grid."""
        return self.topic * NUM_LEVELS + self.level

    @classmethod
    def from_index(cls, index: int) -> "TaskCell":
        return cls(*divmod(int(index), NUM_LEVELS))

    def __str__(self):
        return f"({self.topic_name}, {self.level})"


@dataclass(frozen=True)
class AttemptOutcome:
    correct: bool

    def __bool__(self):
        return self.correct


CORRECT = AttemptOutcome(True)
WRONG = AttemptOutcome(False)


def in_bounds(topic: int, level: int) -> bool:
    return 0 <= topic < NUM_TOPICS and 0 <= level < NUM_LEVELS
