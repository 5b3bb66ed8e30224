"""Training-set construction from recorded demonstrations.

Three constructions for the priority model (pairwise differences, pointwise
per-task rows, and a fixed-width concatenation) plus the schedule-vs-idle
set for the act classifier.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .demonstrator import Demonstration
from .features import CONTEXT_FEATURE_NAMES, TASK_FEATURE_NAMES


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...] = field(default=("0", "1"))

    def __len__(self) -> int:
        return len(self.y)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.feature_names) + ["label"])
            for row, label in zip(self.X, self.y):
                writer.writerow([repr(float(v)) for v in row] + [int(label)])


PAIRWISE_FEATURE_NAMES = tuple(CONTEXT_FEATURE_NAMES) + tuple(
    f"delta_{name}" for name in TASK_FEATURE_NAMES
)
POINTWISE_FEATURE_NAMES = tuple(CONTEXT_FEATURE_NAMES) + tuple(TASK_FEATURE_NAMES)


def pair_vector(context, features_a, features_b) -> list[float]:
    ctx = list(context.as_tuple())
    a = features_a.as_tuple()
    b = features_b.as_tuple()
    return ctx + [x - y for x, y in zip(a, b)]


def point_vector(context, features) -> list[float]:
    return list(context.as_tuple()) + list(features.as_tuple())


def build_pairwise_dataset(demos: list[Demonstration]) -> Dataset:
    """One positive and one mirrored negative per (scheduled, other) pair.

    Idle observations contribute nothing; the result is exactly
    label-balanced by construction.
    """
    rows, labels = [], []
    for demo in demos:
        for obs in demo.observations:
            if obs.scheduled is None:
                continue
            sched_id = obs.scheduled[0]
            gamma_i = obs.task_features[sched_id]
            for other_id in sorted(obs.task_features):
                if other_id == sched_id:
                    continue
                gamma_j = obs.task_features[other_id]
                rows.append(pair_vector(obs.context, gamma_i, gamma_j))
                labels.append(1)
                rows.append(pair_vector(obs.context, gamma_j, gamma_i))
                labels.append(0)
    return Dataset(
        X=np.array(rows, dtype=float).reshape(len(rows), len(PAIRWISE_FEATURE_NAMES)),
        y=np.array(labels, dtype=int),
        feature_names=PAIRWISE_FEATURE_NAMES,
    )


def build_act_dataset(demos: list[Demonstration]) -> Dataset:
    """Positives from scheduling observations, one negative per unfinished
    task at each idle observation."""
    rows, labels = [], []
    for demo in demos:
        for obs in demo.observations:
            if obs.scheduled is not None:
                rows.append(point_vector(obs.context, obs.task_features[obs.scheduled[0]]))
                labels.append(1)
            else:
                for tid in sorted(obs.task_features):
                    rows.append(point_vector(obs.context, obs.task_features[tid]))
                    labels.append(0)
    return Dataset(
        X=np.array(rows, dtype=float).reshape(len(rows), len(POINTWISE_FEATURE_NAMES)),
        y=np.array(labels, dtype=int),
        feature_names=POINTWISE_FEATURE_NAMES,
    )


def build_pointwise_dataset(demos: list[Demonstration]) -> Dataset:
    """Per-task rows from scheduling observations, labelled 1 only for the
    task the expert picked."""
    rows, labels = [], []
    for demo in demos:
        for obs in demo.observations:
            if obs.scheduled is None:
                continue
            sched_id = obs.scheduled[0]
            for tid in sorted(obs.task_features):
                rows.append(point_vector(obs.context, obs.task_features[tid]))
                labels.append(1 if tid == sched_id else 0)
    return Dataset(
        X=np.array(rows, dtype=float).reshape(len(rows), len(POINTWISE_FEATURE_NAMES)),
        y=np.array(labels, dtype=int),
        feature_names=POINTWISE_FEATURE_NAMES,
    )


class HeterogeneousTaskCountError(ValueError):
    """The fixed-width construction needs the same task count everywhere."""


def build_naive_dataset(demos: list[Demonstration]) -> Dataset:
    """Concatenate all task blocks into one wide row per scheduling
    observation; the label is the scheduled task's index. Finished tasks'
    blocks are zeroed."""
    task_counts = {len(d.problem.tasks) for d in demos}
    if len(task_counts) != 1:
        raise HeterogeneousTaskCountError(
            f"task counts differ across demonstrations: {sorted(task_counts)}"
        )
    n = task_counts.pop()
    block = len(TASK_FEATURE_NAMES)
    rows, labels = [], []
    for demo in demos:
        task_ids = sorted(t.id for t in demo.problem.tasks)
        index = {tid: k for k, tid in enumerate(task_ids)}
        for obs in demo.observations:
            if obs.scheduled is None:
                continue
            vec = list(obs.context.as_tuple()) + [0.0] * (n * block)
            offset = len(CONTEXT_FEATURE_NAMES)
            for tid, tf in obs.task_features.items():
                k = index[tid]
                vec[offset + k * block : offset + (k + 1) * block] = tf.as_tuple()
            rows.append(vec)
            labels.append(index[obs.scheduled[0]])
    names = tuple(CONTEXT_FEATURE_NAMES) + tuple(
        f"task{k}_{name}" for k in range(n) for name in TASK_FEATURE_NAMES
    )
    return Dataset(
        X=np.array(rows, dtype=float).reshape(len(rows), len(names)),
        y=np.array(labels, dtype=int),
        feature_names=names,
        class_names=tuple(str(k) for k in range(n)),
    )
