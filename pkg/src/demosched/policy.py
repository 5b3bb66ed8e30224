"""Trained scheduling policies and their evaluation.

A policy answers two questions from recorded or live features: which task in
a pool ranks first, and whether the top task should be scheduled now or the
agent should stay idle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import SCHEMA_VERSION
from .datasets import (
    Dataset,
    build_act_dataset,
    build_naive_dataset,
    build_pairwise_dataset,
    build_pointwise_dataset,
    pair_vector,
    point_vector,
)
from .demonstrator import Demonstration
from .features import CONTEXT_FEATURE_NAMES, TASK_FEATURE_NAMES, ContextFeatures, TaskFeatures
from .heuristics import RuleKind, rule_score_from_features
from .tree import DecisionTree

FEATURE_SCHEMA = "v1"

MIN_LEAF_GRID = (1, 5, 10, 25, 50, 100, 250, 500, 1000)


def _tie_min(ids, score) -> str:
    return min(ids, key=lambda tid: (-score[tid], tid))


class PolicyModel:
    """Pairwise-ranking priority tree plus a schedule-vs-idle act tree."""

    def __init__(self, priority_tree: DecisionTree, act_tree: DecisionTree):
        self.priority_tree = priority_tree
        self.act_tree = act_tree
        self.feature_schema = FEATURE_SCHEMA

    def pair_probability(
        self, context: ContextFeatures, a: TaskFeatures, b: TaskFeatures
    ) -> float:
        return float(self.priority_tree.predict_proba([pair_vector(context, a, b)])[0])

    def cumulative_scores(
        self,
        context: ContextFeatures,
        task_features: dict[str, TaskFeatures],
        pool: list[str],
    ) -> dict[str, float]:
        """Sum of pairwise win probabilities of each pool task against every
        pool task (the self term is a constant offset shared by all)."""
        rows = [
            pair_vector(context, task_features[i], task_features[j])
            for i in pool
            for j in pool
        ]
        probs = self.priority_tree.predict_proba(np.array(rows)).reshape(len(pool), len(pool))
        return {tid: float(s) for tid, s in zip(pool, probs.sum(axis=1))}

    def select_task(
        self,
        context: ContextFeatures,
        task_features: dict[str, TaskFeatures],
        pool: list[str],
        mode: str = "best",
    ) -> str:
        if not pool:
            raise ValueError("empty candidate pool")
        if mode not in ("best", "worst"):
            raise ValueError(f"unknown mode {mode!r}")
        scores = self.cumulative_scores(context, task_features, list(pool))
        if mode == "worst":
            scores = {tid: -s for tid, s in scores.items()}
        return _tie_min(pool, scores)

    def predict_act(self, context: ContextFeatures, tf: TaskFeatures) -> bool:
        """True = schedule. A probability of exactly 0.5 schedules."""
        prob = float(self.act_tree.predict_proba([point_vector(context, tf)])[0])
        return prob >= 0.5

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "feature_schema": self.feature_schema,
            "kind": "pairwise",
            "priority_tree": self.priority_tree.to_dict(),
            "act_tree": self.act_tree.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PolicyModel":
        if data.get("feature_schema") != FEATURE_SCHEMA:
            raise ValueError(f"unsupported feature schema {data.get('feature_schema')!r}")
        return cls(
            priority_tree=DecisionTree.from_dict(data["priority_tree"]),
            act_tree=DecisionTree.from_dict(data["act_tree"]),
        )


class HeuristicPolicy:
    """The mock expert's rule wrapped behind the policy interface, used as a
    self-consistency oracle and as a drop-in scheduler policy."""

    def __init__(self, rule: RuleKind):
        self.rule = rule

    def select_task(self, context, task_features, pool, mode="best"):
        if not pool:
            raise ValueError("empty candidate pool")
        scores = {
            tid: -rule_score_from_features(self.rule, task_features[tid]) for tid in pool
        }
        if mode == "worst":
            scores = {tid: -s for tid, s in scores.items()}
        return _tie_min(pool, scores)

    def predict_act(self, context, tf) -> bool:
        return (
            tf.precedence_satisfied >= 1.0
            and tf.resource_available >= 1.0
            and tf.travel_time_remaining <= 0.0
        )


class PointwisePolicy:
    """Baseline: score each task independently; highest probability wins."""

    def __init__(self, priority_tree: DecisionTree, act_tree: DecisionTree):
        self.priority_tree = priority_tree
        self.act_tree = act_tree

    def select_task(self, context, task_features, pool, mode="best"):
        if not pool:
            raise ValueError("empty candidate pool")
        rows = np.array([point_vector(context, task_features[tid]) for tid in pool])
        probs = self.priority_tree.predict_proba(rows)
        scores = {tid: float(p) for tid, p in zip(pool, probs)}
        if mode == "worst":
            scores = {tid: -s for tid, s in scores.items()}
        return _tie_min(pool, scores)

    def predict_act(self, context, tf) -> bool:
        return float(self.act_tree.predict_proba([point_vector(context, tf)])[0]) >= 0.5


class NaivePolicy:
    """Baseline: fixed-width concatenation with one-vs-rest trees per task
    index. Parametric in the task count by construction."""

    def __init__(self, class_trees: list[DecisionTree], task_ids: list[str],
                 act_tree: DecisionTree):
        self.class_trees = class_trees
        self.task_ids = list(task_ids)
        self.index = {tid: k for k, tid in enumerate(task_ids)}
        self.act_tree = act_tree

    def _wide_vector(self, context, task_features) -> np.ndarray:
        block = len(TASK_FEATURE_NAMES)
        vec = list(context.as_tuple()) + [0.0] * (len(self.task_ids) * block)
        offset = len(CONTEXT_FEATURE_NAMES)
        for tid, tf in task_features.items():
            k = self.index[tid]
            vec[offset + k * block : offset + (k + 1) * block] = tf.as_tuple()
        return np.array([vec])

    def select_task(self, context, task_features, pool, mode="best"):
        if not pool:
            raise ValueError("empty candidate pool")
        vec = self._wide_vector(context, task_features)
        scores = {
            tid: float(self.class_trees[self.index[tid]].predict_proba(vec)[0])
            for tid in pool
        }
        if mode == "worst":
            scores = {tid: -s for tid, s in scores.items()}
        return _tie_min(pool, scores)

    def predict_act(self, context, tf) -> bool:
        return float(self.act_tree.predict_proba([point_vector(context, tf)])[0]) >= 0.5


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train_policy(demos: list[Demonstration], min_leaf: int = 1) -> PolicyModel:
    pairwise = build_pairwise_dataset(demos)
    act = build_act_dataset(demos)
    return PolicyModel(
        priority_tree=DecisionTree(min_leaf=min_leaf).fit(pairwise.X, pairwise.y),
        act_tree=DecisionTree(min_leaf=min_leaf).fit(act.X, act.y),
    )


def train_pointwise(demos: list[Demonstration], min_leaf: int = 1,
                    act_tree: DecisionTree | None = None) -> PointwisePolicy:
    data = build_pointwise_dataset(demos)
    if act_tree is None:
        act = build_act_dataset(demos)
        act_tree = DecisionTree(min_leaf=min_leaf).fit(act.X, act.y)
    return PointwisePolicy(
        priority_tree=DecisionTree(min_leaf=min_leaf).fit(data.X, data.y),
        act_tree=act_tree,
    )


def train_naive(demos: list[Demonstration], min_leaf: int = 1,
                act_tree: DecisionTree | None = None) -> NaivePolicy:
    data = build_naive_dataset(demos)
    task_ids = sorted(t.id for t in demos[0].problem.tasks)
    trees = []
    for k in range(len(task_ids)):
        trees.append(DecisionTree(min_leaf=min_leaf).fit(data.X, (data.y == k).astype(int)))
    if act_tree is None:
        act = build_act_dataset(demos)
        act_tree = DecisionTree(min_leaf=min_leaf).fit(act.X, act.y)
    return NaivePolicy(class_trees=trees, task_ids=task_ids, act_tree=act_tree)


def cross_validate_min_leaf(
    dataset: Dataset, candidates: tuple[int, ...] = MIN_LEAF_GRID, folds: int = 5
) -> int:
    """Mean accuracy over contiguous folds; ties go to the larger (more
    regularized) leaf size."""
    n = len(dataset)
    if n < folds:
        raise ValueError(f"need at least {folds} examples, got {n}")
    splits = np.array_split(np.arange(n), folds)
    best_acc, best_value = -1.0, None
    for value in candidates:
        accs = []
        for fold in splits:
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            tree = DecisionTree(min_leaf=value).fit(dataset.X[mask], dataset.y[mask])
            accs.append(float((tree.predict(dataset.X[fold]) == dataset.y[fold]).mean()))
        acc = round(float(np.mean(accs)), 12)
        if acc > best_acc or (acc == best_acc and value > best_value):
            best_acc, best_value = acc, value
    return best_value


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Metrics:
    sensitivity: float | None
    specificity: float | None
    num_scheduling_obs: int
    num_idle_obs: int


def evaluate(policy, demos: list[Demonstration]) -> Metrics:
    """Sensitivity: the policy picks the expert's task among the feasible
    candidates and elects to schedule it. Specificity: at expert-idle ticks
    the act model keeps the policy's top task idle."""
    sched_hits = sched_total = idle_hits = idle_total = 0
    for demo in demos:
        for obs in demo.observations:
            if obs.scheduled is not None:
                pool = list(obs.candidates)
                sched_total += 1
                top = policy.select_task(obs.context, obs.task_features, pool)
                if top == obs.scheduled[0] and policy.predict_act(
                    obs.context, obs.task_features[top]
                ):
                    sched_hits += 1
            else:
                idle_total += 1
                pool = list(obs.candidates) or sorted(obs.task_features)
                if not pool:
                    idle_hits += 1  # nothing left to schedule
                    continue
                top = policy.select_task(obs.context, obs.task_features, pool)
                if not policy.predict_act(obs.context, obs.task_features[top]):
                    idle_hits += 1
    return Metrics(
        sensitivity=sched_hits / sched_total if sched_total else None,
        specificity=idle_hits / idle_total if idle_total else None,
        num_scheduling_obs=sched_total,
        num_idle_obs=idle_total,
    )


def split_demos(
    demos: list[Demonstration], train_fraction: float = 0.85, rng_seed: int = 0
) -> tuple[list[Demonstration], list[Demonstration]]:
    """Split by whole demonstrations to avoid leakage within a playthrough."""
    order = np.random.default_rng(rng_seed).permutation(len(demos))
    cut = max(1, int(round(train_fraction * len(demos))))
    cut = min(cut, len(demos) - 1) if len(demos) > 1 else cut
    train = [demos[i] for i in order[:cut]]
    test = [demos[i] for i in order[cut:]]
    return train, test


# ---------------------------------------------------------------------------
# Ranking anomaly detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnomalyReport:
    cycles: tuple[tuple[str, str, str], ...]
    disagreements: tuple[tuple[str, str], ...]

    @property
    def clean(self) -> bool:
        return not self.cycles and not self.disagreements


def detect_anomalies(
    model: PolicyModel,
    context: ContextFeatures,
    task_features: dict[str, TaskFeatures],
    pool: list[str] | None = None,
) -> AnomalyReport:
    """Find intransitive pairwise triples and pairs where the pairwise
    winner loses the cumulative ranking."""
    ids = sorted(pool if pool is not None else task_features)
    if not ids:
        raise ValueError("empty candidate pool")
    if len(ids) == 1:
        return AnomalyReport(cycles=(), disagreements=())
    wins = {
        (i, j): model.pair_probability(context, task_features[i], task_features[j]) > 0.5
        for i in ids
        for j in ids
        if i != j
    }
    cycles = []
    for i, j, k in itertools.combinations(ids, 3):
        if wins[(i, j)] and wins[(j, k)] and wins[(k, i)]:
            cycles.append((i, j, k))
        elif wins[(j, i)] and wins[(k, j)] and wins[(i, k)]:
            cycles.append((i, k, j))
    scores = model.cumulative_scores(context, task_features, ids)
    disagreements = [
        (i, j)
        for i in ids
        for j in ids
        if i != j and wins[(i, j)] and scores[j] > scores[i]
    ]
    return AnomalyReport(cycles=tuple(cycles), disagreements=tuple(disagreements))
