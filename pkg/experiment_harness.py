"""
experiment_harness.py — Seeded cohort simulations and their aggregate metrics.

This module runs the evaluation cases: many independent simulated students,
each with its own SBTS knowledge matrix, answering task-sets for a fixed
number of rounds, repeated over several iterations and averaged.

The flow:
1. Every (iteration, student) pair gets a seed derived from the master seed
2. run_student() plays one student through all task-sets and records the trace
3. run_cohort() maps the runs (optionally over a process pool) and folds the
   traces in (iteration, student) order into a MetricsAggregate
4. summary() turns labelled aggregates into a comparison table

Key Components:
    - ExperimentConfig: cohort size, task-set count, iterations, student, policy, decay, seed
    - level_curves(): cumulative success rate per difficulty level over the task index
    - level_onsets(): percentiles of the task index at which students first reach a level
    - sweep(): final expected level as a function of the static success probability

Because per-run seeds depend only on indices and the fold is ordered, results
are bit-identical for any worker count.

License: MIT
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from knowledge_matrix import KnowledgeMatrix, expected_level, new_matrix
from sbts_policy import PolicyParams, apply_update
from student_env import SimulatedStudent, StaticStudent, StudentModel
from task_generation import DecayParams, generate_taskset
from task_types import NUM_LEVELS, NUM_TOPICS, TASKS_PER_SET, AttemptOutcome, TaskCell
from utils import derive_run_seed, make_generator

__all__ = [
    "ExperimentConfig",
    "AttemptRecord",
    "StudentRun",
    "CurvePoint",
    "LevelCurve",
    "LevelOnset",
    "MetricsAggregate",
    "SummaryRow",
    "UnknownBaselineError",
    "run_student",
    "run_cohort",
    "level_curves",
    "level_onsets",
    "summary",
    "sweep",
]

logger = logging.getLogger(__name__)

ONSET_PERCENTILES = (5, 50, 95)


class UnknownBaselineError(ValueError):
    def __init__(self, label: str, labels: Iterable[str]):
        super().__init__(f"unknown baseline {label!r}; expected one of: {', '.join(labels)}")
        self.label = label


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Everything needed to reproduce a cohort simulation.

    Attributes:
        num_students (int): Students per iteration.
        tasksets_per_student (int): Task-sets (of ten tasks) each student answers.
        iterations (int): Independent repetitions averaged together.
        model (StudentModel): Template every student starts from.
        policy (PolicyParams): Update rule tunables.
        decay (DecayParams): Within-set decay.
        master_seed (int): Root of all per-run seeds.
    """

    num_students: int
    tasksets_per_student: int
    iterations: int
    model: StudentModel
    policy: PolicyParams = field(default_factory=PolicyParams)
    decay: DecayParams = field(default_factory=DecayParams)
    master_seed: int = 0

    def __post_init__(self):
        for name in ("num_students", "tasksets_per_student", "iterations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")

    @property
    def tasks_per_run(self) -> int:
        return self.tasksets_per_student * TASKS_PER_SET

    @property
    def total_runs(self) -> int:
        return self.num_students * self.iterations


@dataclass(frozen=True)
class AttemptRecord:
    student_id: int
    iteration: int
    task_index: int
    cell: TaskCell
    outcome: AttemptOutcome


@dataclass(frozen=True, eq=False)
class StudentRun:
    """The trace of one student run, stored column-wise, and the final matrix."""

    student_id: int
    iteration: int
    seed: int
    topics: np.ndarray
    levels: np.ndarray
    correct: np.ndarray
    matrix: KnowledgeMatrix

    @property
    def final_expected_level(self) -> float:
        return expected_level(self.matrix)

    @property
    def records(self) -> List[AttemptRecord]:
        return [
            AttemptRecord(
                student_id=self.student_id,
                iteration=self.iteration,
                task_index=i,
                cell=TaskCell(int(topic), int(level)),
                outcome=AttemptOutcome(bool(ok)),
            )
            for i, (topic, level, ok) in enumerate(zip(self.topics, self.levels, self.correct))
        ]

    def __len__(self):
        return len(self.correct)


@dataclass(frozen=True)
class CurvePoint:
    task_index: int
    mean_success_rate: float
    sample_count: int


@dataclass(frozen=True, eq=False)
class LevelCurve:
    """Mean cumulative success rate at each task index where the level was attempted."""

    task_index: np.ndarray
    mean_success_rate: np.ndarray
    sample_count: np.ndarray

    def __len__(self):
        return len(self.task_index)

    def __eq__(self, other):
        if not isinstance(other, LevelCurve):
            return NotImplemented
        return (
            np.array_equal(self.task_index, other.task_index)
            and np.array_equal(self.mean_success_rate, other.mean_success_rate)
            and np.array_equal(self.sample_count, other.sample_count)
        )

    @property
    def points(self) -> List[CurvePoint]:
        return [
            CurvePoint(int(i), float(r), int(n))
            for i, r, n in zip(self.task_index, self.mean_success_rate, self.sample_count)
        ]

    @property
    def total_samples(self) -> int:
        return int(self.sample_count.sum())

    @classmethod
    def empty(cls) -> "LevelCurve":
        return cls(np.empty(0, dtype=np.int64), np.empty(0), np.empty(0, dtype=np.int64))


@dataclass(frozen=True)
class LevelOnset:
    """Spread of the task index at which runs first attempted a level (1-based)."""

    level: int
    runs: int
    p5: float
    p50: float
    p95: float


@dataclass(frozen=True, eq=False)
class MetricsAggregate:
    """
    Cohort metrics.

    Attributes:
        level_curves (dict): Level 1..10 -> LevelCurve.
        final_levels (np.ndarray): Final expected level of every run, in (iteration, student) order.
        onsets (np.ndarray): (runs, 10) first task index per level, -1 when never attempted.
        attempts (int): Pooled number of attempts.
        successes (int): Pooled number of correct answers.
        topic_curves (dict): Optional (topic, level 1..10) -> LevelCurve breakdown.
    """

    level_curves: Dict[int, LevelCurve]
    final_levels: np.ndarray
    onsets: np.ndarray
    attempts: int
    successes: int
    topic_curves: Optional[Dict[Tuple[int, int], LevelCurve]] = None

    @property
    def final_expected_level(self) -> Tuple[float, float]:
        """(mean, population standard deviation) over all runs."""
        return float(np.mean(self.final_levels)), float(np.std(self.final_levels))

    @property
    def success_rate(self) -> float:
        return self.successes / self.attempts if self.attempts else 0.0

    def __eq__(self, other):
        if not isinstance(other, MetricsAggregate):
            return NotImplemented
        return (
            self.level_curves == other.level_curves
            and np.array_equal(self.final_levels, other.final_levels)
            and np.array_equal(self.onsets, other.onsets)
            and self.attempts == other.attempts
            and self.successes == other.successes
            and self.topic_curves == other.topic_curves
        )


@dataclass(frozen=True)
class SummaryRow:
    label: str
    expected_level_mean: float
    expected_level_std: float
    pct_change_vs_baseline: float


class _CurveAccumulator:
    """Sums of per-run cumulative success rates, indexed by (group, task index)."""

    def __init__(self, groups: int, length: int):
        self.sums = np.zeros((groups, length))
        self.counts = np.zeros((groups, length), dtype=np.int64)

    def add(self, group_of_task: np.ndarray, correct: np.ndarray, positions: Optional[np.ndarray] = None) -> None:
        """Add one run; `positions` maps trace entries to task indices (default 0..n-1)."""
        if positions is None:
            positions = np.arange(group_of_task.size)
        for g in np.unique(group_of_task):
            mask = group_of_task == g
            idx = positions[mask]
            rates = np.cumsum(correct[mask]) / np.arange(1, idx.size + 1)
            self.sums[g, idx] += rates
            self.counts[g, idx] += 1

    def curve(self, group: int) -> LevelCurve:
        idx = np.flatnonzero(self.counts[group])
        if idx.size == 0:
            return LevelCurve.empty()
        counts = self.counts[group, idx]
        return LevelCurve(idx.astype(np.int64), self.sums[group, idx] / counts, counts)


def _first_attempts(levels: np.ndarray) -> np.ndarray:
    onsets = np.full(NUM_LEVELS, -1, dtype=np.int64)
    for level in range(NUM_LEVELS):
        idx = np.flatnonzero(levels == level)
        if idx.size:
            onsets[level] = idx[0]
    return onsets


def run_student(
    config: ExperimentConfig, student_seed: int, student_id: int = 0, iteration: int = 0
) -> StudentRun:
    """
    Play one student through all task-sets of the configuration.

    Each task-set is sampled from the matrix as it stands at the start of the
    set; within the set every answer updates the matrix immediately.

    Args:
        config (ExperimentConfig): Experiment parameters.
        student_seed (int): Seed of the run's random stream.
        student_id (int): Student index, recorded in the trace.
        iteration (int): Iteration index, recorded in the trace.

    Returns:
        StudentRun: Trace and final knowledge matrix; deterministic given the seed.
    """
    rng = make_generator(student_seed)
    student = SimulatedStudent(config.model)
    matrix = new_matrix()
    n = config.tasks_per_run
    topics = np.empty(n, dtype=np.int8)
    levels = np.empty(n, dtype=np.int8)
    correct = np.empty(n, dtype=bool)

    t = 0
    for _ in range(config.tasksets_per_student):
        taskset = generate_taskset(matrix, config.decay, rng)
        for cell in taskset:
            outcome = student.answer(cell, t, rng)
            matrix = apply_update(matrix, cell, outcome, config.policy)
            topics[t] = cell.topic
            levels[t] = cell.level
            correct[t] = outcome.correct
            t += 1

    return StudentRun(student_id, iteration, student_seed, topics, levels, correct, matrix)


def _run_indexed(args):
    config, iteration, student = args
    seed = derive_run_seed(config.master_seed, iteration, student)
    return run_student(config, seed, student_id=student, iteration=iteration)


def _run_indices(config: ExperimentConfig) -> List[Tuple[ExperimentConfig, int, int]]:
    return [
        (config, iteration, student)
        for iteration in range(config.iterations)
        for student in range(config.num_students)
    ]


def _fold(runs: Iterable[StudentRun], config: ExperimentConfig, by_topic: bool) -> MetricsAggregate:
    total_runs, length = config.total_runs, config.tasks_per_run
    per_level = _CurveAccumulator(NUM_LEVELS, length)
    per_cell = _CurveAccumulator(NUM_TOPICS * NUM_LEVELS, length) if by_topic else None
    final_levels = np.empty(total_runs)
    onsets = np.empty((total_runs, NUM_LEVELS), dtype=np.int64)
    attempts = successes = 0

    count = 0
    for run in runs:
        logger.debug("Run iteration=%d student=%d seed=%#018x", run.iteration, run.student_id, run.seed)
        levels = run.levels.astype(np.int64)
        per_level.add(levels, run.correct)
        if per_cell is not None:
            per_cell.add(run.topics.astype(np.int64) * NUM_LEVELS + levels, run.correct)
        final_levels[count] = run.final_expected_level
        onsets[count] = _first_attempts(levels)
        attempts += len(run)
        successes += int(run.correct.sum())
        count += 1
        if count % config.num_students == 0:
            logger.debug("Folded iteration %d/%d", count // config.num_students, config.iterations)

    if count != total_runs:
        raise RuntimeError(f"expected {total_runs} runs, folded {count}")

    topic_curves = None
    if per_cell is not None:
        topic_curves = {
            (topic, level + 1): per_cell.curve(topic * NUM_LEVELS + level)
            for topic in range(NUM_TOPICS)
            for level in range(NUM_LEVELS)
        }
    return MetricsAggregate(
        level_curves={level + 1: per_level.curve(level) for level in range(NUM_LEVELS)},
        final_levels=final_levels,
        onsets=onsets,
        attempts=attempts,
        successes=successes,
        topic_curves=topic_curves,
    )


def run_cohort(config: ExperimentConfig, workers: int = 1, by_topic: bool = False) -> MetricsAggregate:
    """
    Run num_students x iterations independent students and aggregate them.

    Args:
        config (ExperimentConfig): Experiment parameters.
        workers (int, optional): Worker processes; 1 runs in-process. Defaults to 1.
        by_topic (bool, optional): Also build per-(topic, level) curves. Defaults to False.

    Returns:
        MetricsAggregate: Identical for identical configs regardless of `workers`.
    """
    started = time.perf_counter()
    items = _run_indices(config)
    logger.info(
        "Running cohort: %d students x %d iterations, %d task-sets each (%d workers)",
        config.num_students, config.iterations, config.tasksets_per_student, workers,
    )

    if workers <= 1:
        aggregate = _fold(map(_run_indexed, items), config, by_topic)
    else:
        chunksize = max(1, len(items) // (workers * 16))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            aggregate = _fold(pool.map(_run_indexed, items, chunksize=chunksize), config, by_topic)

    mean, std = aggregate.final_expected_level
    logger.info(
        "Cohort finished in %.2fs: final expected level %.3f ± %.3f, success rate %.3f",
        time.perf_counter() - started, mean, std, aggregate.success_rate,
    )
    return aggregate


def level_curves(records: Sequence[AttemptRecord]) -> Dict[int, LevelCurve]:
    """
    Per-level cumulative success curves from a flat list of attempt records.

    For each level, every run contributes its cumulative success rate at each
    task index where it attempted that level; the curve is the mean over runs
    and sample_count the number of contributing runs.

    Returns:
        dict: Level 1..10 -> LevelCurve, empty curves for unattempted levels.
    """
    if not records:
        return {level + 1: LevelCurve.empty() for level in range(NUM_LEVELS)}

    by_run: Dict[Tuple[int, int], List[AttemptRecord]] = {}
    for record in records:
        by_run.setdefault((record.iteration, record.student_id), []).append(record)

    length = max(r.task_index for r in records) + 1
    acc = _CurveAccumulator(NUM_LEVELS, length)
    for key in sorted(by_run):
        run = sorted(by_run[key], key=lambda r: r.task_index)
        acc.add(
            np.array([r.cell.level for r in run], dtype=np.int64),
            np.array([r.outcome.correct for r in run], dtype=bool),
            positions=np.array([r.task_index for r in run], dtype=np.int64),
        )
    return {level + 1: acc.curve(level) for level in range(NUM_LEVELS)}


def level_onsets(aggregate: MetricsAggregate) -> Dict[int, LevelOnset]:
    """5th, 50th and 95th percentile of the first task index per level, over runs that reached it."""
    onsets = {}
    for level in range(NUM_LEVELS):
        column = aggregate.onsets[:, level]
        reached = column[column >= 0]
        if reached.size:
            p5, p50, p95 = (float(v) for v in np.percentile(reached, ONSET_PERCENTILES))
        else:
            p5 = p50 = p95 = float("nan")
        onsets[level + 1] = LevelOnset(level + 1, int(reached.size), p5, p50, p95)
    return onsets


def summary(aggregates: Mapping[str, MetricsAggregate], baseline: Optional[str] = None) -> List[SummaryRow]:
    """
    Comparison table of final expected levels.

    Args:
        aggregates (Mapping[str, MetricsAggregate]): Labelled results, in display order.
        baseline (str, optional): Label to compare against; defaults to the first label.

    Returns:
        list[SummaryRow]: Baseline row first, then the remaining labels in order.

    Raises:
        ValueError: If `aggregates` is empty.
        UnknownBaselineError: If `baseline` is not one of the labels.
    """
    if not aggregates:
        raise ValueError("summary needs at least one aggregate")
    labels = list(aggregates)
    if baseline is None:
        baseline = labels[0]
    if baseline not in aggregates:
        raise UnknownBaselineError(baseline, labels)

    base_mean, _ = aggregates[baseline].final_expected_level
    rows = []
    for label in [baseline] + [l for l in labels if l != baseline]:
        mean, std = aggregates[label].final_expected_level
        change = 0.0 if label == baseline else (mean - base_mean) / base_mean * 100.0
        rows.append(SummaryRow(label, mean, std, change))
    return rows


def sweep(config: ExperimentConfig, p_values: Sequence[float], workers: int = 1) -> Dict[str, MetricsAggregate]:
    """
    Final expected level as a function of a static student's success probability.

    Every p runs with the same seeds, so the comparison is paired.
    """
    results = {}
    for p in p_values:
        label = f"static-p{p:g}"
        logger.info("Sweep point %s", label)
        results[label] = run_cohort(replace(config, model=StaticStudent(p)), workers=workers)
    return results
