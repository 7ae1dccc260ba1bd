import pytest

from editgym.agents import ScriptedAgent, expert_policy
from editgym.env import (
    FINISHED_DONE,
    FINISHED_LIMIT,
    GameSession,
    RUNNING,
    SessionFinishedError,
    run_game,
)
from editgym.types import parse_state as S


def test_published_aec_step(aec_spec):
    session = GameSession(aec_spec, S("- 2 + 4 10 + 8 / 8 = 8"))
    report = session.step(("DELETE", "POS_3", "POS_3"))
    assert report.state == S("- 2 + 10 + 8 / 8 = 8")
    assert not report.refused
    assert session.step_count == 1


def test_out_of_range_is_refused(aor_spec):
    session = GameSession(aor_spec, S("1 1 2"))
    report = session.step(("POS_9", "+"))
    assert report.refused
    assert session.current == S("1 1 2")
    assert session.refused == 1
    assert session.step_count == 1
    assert session.status == RUNNING


def test_done_returns_current_state(aor_spec):
    session = GameSession(aor_spec, S("1 + 1 = 2"))
    report = session.step(("DONE", "DONE"))
    assert report.done
    assert session.status == FINISHED_DONE
    assert session.current == S("1 + 1 = 2")


def test_stepping_finished_session_is_a_bug(aor_spec):
    session = GameSession(aor_spec, S("1 1 2"))
    session.step(("DONE", "DONE"))
    with pytest.raises(SessionFinishedError):
        session.step(("DONE", "DONE"))


def test_malformed_action_is_refused(aec_spec):
    session = GameSession(aec_spec, S("1 = 1"))
    report = session.step(("POS_1", "POS_1", "POS_1"))
    assert report.refused and session.current == S("1 = 1")


def test_expert_game_matches_figure(aor_spec):
    x, y = S("1 1 2"), S("1 + 1 = 2")
    outcome = run_game(aor_spec, x, expert_policy(x, y, aor_spec))
    assert outcome.final_state == y
    assert outcome.steps_taken == 3
    assert outcome.refused_count == 0
    assert outcome.terminated_by == "DONE"
    assert len(outcome.per_step_latency) == 3
    assert outcome.total_latency >= sum(outcome.per_step_latency)


def test_always_done_policy(aor_spec):
    x = S("1 1 2")
    outcome = run_game(aor_spec, x, ScriptedAgent([], aor_spec))
    assert outcome.final_state == x
    assert outcome.steps_taken == 1
    assert outcome.terminated_by == "DONE"


class _BrokenAgent:
    def begin_episode(self, episode, x):
        pass

    def act(self, state, step):
        return ("garbage",)


def test_refusal_saturation(aor_spec):
    spec = aor_spec.with_overrides(max_steps=7)
    x = S("1 1 2")
    outcome = run_game(spec, x, _BrokenAgent())
    assert outcome.terminated_by == "STEP_LIMIT"
    assert outcome.final_state == x
    assert outcome.refused_count == spec.max_steps == outcome.steps_taken


def test_expert_session_reproduces_trajectory(aec_spec):
    from editgym.traj import generate_trajectory

    x, y = S("- 2 * + 4 10 + 8 / 8 = 8"), S("- 2 + 10 * 8 / 8 = 8")
    traj = generate_trajectory(x, y, aec_spec)
    session = GameSession(aec_spec, x)
    for state, action in traj.steps:
        assert session.current == state
        session.step(action)
    assert session.status == FINISHED_DONE
    assert session.current == y
    assert session.refused == 0


def test_step_limit_cuts_expert_short(aor_spec):
    x, y = S("1 1 2"), S("1 + 1 = 2")
    outcome = run_game(aor_spec, x, expert_policy(x, y, aor_spec), max_steps=1)
    assert outcome.terminated_by == "STEP_LIMIT"
    assert outcome.steps_taken == 1
    assert outcome.final_state != y
