"""Schedule construction by replaying a learned policy tick by tick.

The policy ranks the feasible candidates, the act model decides whether to
schedule at all, and an optional schedulability test can veto the top pick
in favour of the next-ranked candidate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    ProblemInstance,
    Schedule,
    SimState,
    apply_action,
    euclidean,
    travel_ticks,
)
from .features import context_features, extract_features
from .simulate import run_simulation


@dataclass(frozen=True)
class SchedulerConfig:
    use_schedulability_test: bool = True
    fallback_depth: int = 3  # how many ranked candidates the test may try


def schedulability_test(state: SimState, problem: ProblemInstance) -> bool:
    """Optimistic check that no task is already doomed to miss its deadline.

    Uses lower bounds (ignores resource contention and future congestion),
    so a False answer is a certain miss while True is only a maybe.
    """
    for tid, finish in state.pending_finish.items():
        task = problem.task(tid)
        if task.abs_deadline is not None and finish > task.abs_deadline:
            return False
    for task in state.unfinished(problem):
        enable = state.time
        for pred, gap in task.waits:
            f = state.finished.get(pred)
            if f is None:
                f = state.pending_finish.get(pred)
            if f is not None:
                enable = max(enable, f + gap)
        deadline = problem.effective_deadline(task)
        ok = False
        for agent_id in task.capable_agents():
            agent = problem.agent(agent_id)
            dist = euclidean(state.agent_location[agent_id], task.location)
            ready = state.agent_busy_until[agent_id] + travel_ticks(dist, agent.speed)
            start = max(enable, ready)
            if start + task.duration_for(agent_id) <= deadline:
                ok = True
                break
        if not ok:
            return False
    return True


def _ranked(policy, context, task_features, pool: list[str], limit: int) -> list[str]:
    """Top `limit` candidates in the policy's preference order."""
    remaining = list(pool)
    out = []
    while remaining and len(out) < limit:
        pick = policy.select_task(context, task_features, remaining)
        out.append(pick)
        remaining.remove(pick)
    return out


def construct_schedule(
    problem: ProblemInstance,
    policy,
    config: SchedulerConfig = SchedulerConfig(),
) -> Schedule:
    """Play the policy through the simulation loop and return the result.

    The returned schedule may be incomplete if the policy stalls past the
    horizon; callers check `schedule.complete`.
    """

    def decide(state, agent_id, candidates):
        if not candidates:
            return None
        agent = problem.agent(agent_id)
        context = context_features(problem, agent)
        feats = {
            t.id: extract_features(state, agent, t, problem) for t in candidates
        }
        pool = sorted(feats)
        top = policy.select_task(context, feats, pool)
        if not policy.predict_act(context, feats[top]):
            return None
        if not config.use_schedulability_test:
            return top
        depth = max(1, config.fallback_depth)
        for pick in _ranked(policy, context, feats, pool, depth):
            hypothetical = apply_action(state, problem, pick, agent_id)
            if schedulability_test(hypothetical, problem):
                return pick
        return top  # every fallback looked doomed; commit to the favourite

    _, schedule = run_simulation(problem, decide)
    return schedule
