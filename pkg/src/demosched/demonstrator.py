"""Mock expert: plays a problem tick by tick with the selected rule and
records one observation per (tick, idle agent), optionally corrupted by
epsilon-greedy noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProblemInstance, Schedule, problem_from_dict, problem_to_dict
from .features import (
    Observation,
    context_features,
    extract_all_features,
    observation_from_dict,
    observation_to_dict,
)
from .heuristics import (
    ALPHA1,
    ALPHA2,
    ALPHA3,
    CONTENTION_THRESHOLD,
    RuleKind,
    rule_choice,
    select_rule,
)
from .simulate import run_simulation


class IncompleteDemonstrationError(RuntimeError):
    """The expert hit the horizon with unfinished tasks."""


@dataclass(frozen=True)
class Demonstration:
    problem: ProblemInstance
    observations: tuple[Observation, ...]
    rule_used: RuleKind
    epsilon: float
    rng_seed: int
    schedule: Schedule


def demonstrate(
    problem: ProblemInstance,
    epsilon: float = 0.0,
    rng_seed: int = 0,
    contention_threshold: int = CONTENTION_THRESHOLD,
    alpha1: float = ALPHA1,
    alpha2: float = ALPHA2,
    alpha3: float = ALPHA3,
) -> Demonstration:
    """Run the rule-based expert once and record its playthrough.

    With probability epsilon a decision is replaced by a uniform draw over
    the currently feasible candidates, so even noisy runs stay executable.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    rule = select_rule(problem, contention_threshold)
    rng = np.random.default_rng(rng_seed)
    observations: list[Observation] = []
    contexts = {a.id: context_features(problem, a) for a in problem.agents}

    def decide(state, agent_id, candidates):
        agent = problem.agent(agent_id)
        chosen = None
        if candidates:
            best = rule_choice(
                rule, state, agent_id, candidates, problem, alpha1, alpha2, alpha3
            )
            if epsilon > 0.0 and rng.random() < epsilon:
                ids = sorted(t.id for t in candidates)
                chosen = ids[int(rng.integers(len(ids)))]
            else:
                chosen = best
        observations.append(
            Observation(
                tick=state.time,
                context=contexts[agent_id],
                task_features=extract_all_features(state, agent, problem),
                candidates=tuple(sorted(t.id for t in candidates)),
                scheduled=(chosen, agent_id) if chosen is not None else None,
            )
        )
        return chosen

    state, schedule = run_simulation(problem, decide)
    if not schedule.complete or len(state.finished) != len(problem.tasks):
        raise IncompleteDemonstrationError(
            f"horizon {problem.horizon} reached with "
            f"{len(problem.tasks) - len(state.finished)} unfinished tasks"
        )
    return Demonstration(
        problem=problem,
        observations=tuple(observations),
        rule_used=rule,
        epsilon=epsilon,
        rng_seed=rng_seed,
        schedule=schedule,
    )


def demonstration_to_dict(demo: Demonstration) -> dict:
    from .core import SCHEMA_VERSION, schedule_to_dict

    return {
        "schema_version": SCHEMA_VERSION,
        "problem": problem_to_dict(demo.problem),
        "observations": [observation_to_dict(o) for o in demo.observations],
        "rule_used": demo.rule_used.value,
        "epsilon": demo.epsilon,
        "rng_seed": demo.rng_seed,
        "schedule": schedule_to_dict(demo.schedule),
    }


def demonstration_from_dict(data: dict) -> Demonstration:
    from .core import schedule_from_dict

    return Demonstration(
        problem=problem_from_dict(data["problem"]),
        observations=tuple(observation_from_dict(o) for o in data["observations"]),
        rule_used=RuleKind(data["rule_used"]),
        epsilon=float(data["epsilon"]),
        rng_seed=int(data["rng_seed"]),
        schedule=schedule_from_dict(data["schedule"]),
    )
