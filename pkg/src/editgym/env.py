"""The game environment: validates and executes actions, refuses invalid
ones, and controls termination.

Transitions are deterministic. A refused action leaves the state untouched
but still consumes one step of the budget, so a broken agent cannot loop
forever. The all-DONE action ends the game and the current state becomes
the game's output.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .codec import MalformedActionError, decode_action
from .editops import OutOfRangeError, apply_op
from .types import (
    ActionSeq,
    EditGymError,
    GameOutcome,
    State,
    TERM_DONE,
    TERM_STEP_LIMIT,
    TaskSpec,
)

RUNNING = "RUNNING"
FINISHED_DONE = "FINISHED_DONE"
FINISHED_LIMIT = "FINISHED_LIMIT"


class SessionFinishedError(EditGymError):
    """step() was called on a terminated session; a caller bug, not a refusal."""


class AgentFailure(EditGymError):
    """An agent could not produce an action for a query."""


@dataclass
class StepReport:
    state: State
    refused: bool = False
    reason: str | None = None
    done: bool = False


class GameSession:
    """Single-owner state of one episode; create one per game."""

    def __init__(self, spec: TaskSpec, initial: State):
        self.spec = spec
        self.current = initial
        self.step_count = 0
        self.refused = 0
        self.status = RUNNING

    def step(self, action: ActionSeq) -> StepReport:
        if self.status != RUNNING:
            raise SessionFinishedError(f"session already {self.status}")
        self.step_count += 1
        try:
            op = decode_action(tuple(action), self.spec)
        except MalformedActionError as e:
            report = self._refuse(str(e))
        else:
            if op is None:
                self.status = FINISHED_DONE
                return StepReport(self.current, done=True)
            try:
                self.current = apply_op(self.current, op)
                report = StepReport(self.current)
            except OutOfRangeError as e:
                report = self._refuse(str(e))
        if self.status == RUNNING and self.step_count >= self.spec.max_steps:
            self.status = FINISHED_LIMIT
        return report

    def _refuse(self, reason: str) -> StepReport:
        self.refused += 1
        return StepReport(self.current, refused=True, reason=reason)


def run_game(spec: TaskSpec, x: State, agent, episode: int = 0,
             max_steps: int | None = None) -> GameOutcome:
    """Play one episode: query the agent, step the environment, repeat.

    Per-step latency is measured around the agent call only; total latency
    covers the whole episode. Agent failures end the game early and are
    reported on the outcome so the caller can score them as losses.
    """
    if max_steps is not None:
        spec = spec.with_overrides(max_steps=max_steps)
    session = GameSession(spec, x)
    latencies: list[float] = []
    error: str | None = None
    episode_start = time.perf_counter()
    try:
        agent.begin_episode(episode, x)
        while session.status == RUNNING:
            query_start = time.perf_counter()
            action = agent.act(session.current, session.step_count)
            latencies.append(time.perf_counter() - query_start)
            session.step(tuple(action))
    except AgentFailure as e:
        error = str(e)
    total = time.perf_counter() - episode_start
    terminated = TERM_DONE if session.status == FINISHED_DONE else TERM_STEP_LIMIT
    return GameOutcome(
        final_state=session.current,
        steps_taken=session.step_count,
        refused_count=session.refused,
        terminated_by=terminated,
        per_step_latency=latencies,
        total_latency=total,
        agent_error=error,
    )
