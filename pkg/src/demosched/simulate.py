"""Shared tick-by-tick simulation driver.

Both the mock expert and the learned-policy scheduler run through this loop,
so a policy that wraps the expert's rule reproduces the expert's schedule
entry for entry.
"""

from __future__ import annotations

from typing import Callable

from .core import (
    ProblemInstance,
    Schedule,
    ScheduleEntry,
    SimState,
    agent_can_reach,
    apply_action,
    is_alive_enabled,
)

# decide(state, agent_id, candidates) -> task id to start now, or None
DecideFn = Callable[[SimState, str, list], str | None]


def feasible_candidates(state: SimState, agent_id: str, problem: ProblemInstance) -> list:
    """Tasks the given idle agent could start at the current tick."""
    agent = problem.agent(agent_id)
    out = []
    for task in state.unfinished(problem):
        if (
            agent_id in task.durations  # capable agents only
            and is_alive_enabled(state, task)
            and state.resource_free(task.resource)
            and agent_can_reach(state, agent, task)
        ):
            out.append(task)
    return out


def run_simulation(problem: ProblemInstance, decide: DecideFn) -> tuple[SimState, Schedule]:
    """Advance one tick at a time, letting each idle agent (ascending id)
    pick at most one task per tick. Stops when every task has finished or the
    horizon is reached."""
    state = SimState.initial(problem)
    agent_order = sorted(a.id for a in problem.agents)
    all_ids = {t.id for t in problem.tasks}
    for t in range(problem.horizon + 1):
        state = state.advanced_to(t)
        if set(state.finished) == all_ids:
            break
        for agent_id in agent_order:
            if not state.agent_idle(agent_id):
                continue
            candidates = feasible_candidates(state, agent_id, problem)
            chosen = decide(state, agent_id, candidates)
            if chosen is not None:
                state = apply_action(state, problem, chosen, agent_id)
    return state, schedule_from_state(state, problem)


def schedule_from_state(state: SimState, problem: ProblemInstance) -> Schedule:
    entries = []
    finish_times = dict(state.finished)
    finish_times.update(state.pending_finish)
    for task_id, (agent_id, start) in state.started.items():
        entries.append(ScheduleEntry(task_id, agent_id, start, finish_times[task_id]))
    return Schedule.from_entries(entries, problem)
