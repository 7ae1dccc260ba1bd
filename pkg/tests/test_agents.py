import json
import sys
import textwrap

import pytest

from editgym.agents import (
    AgentTimeout,
    ExpertAgent,
    ExternalAgent,
    ProtocolViolation,
    SpawnFailedError,
    decode_message,
    encode_message,
    expert_policy,
)
from editgym.datagen import gen_aec
from editgym.env import run_game
from editgym.evaluate import evaluate_split
from editgym.traj import generate_trajectory, write_trajectories
from editgym.types import TaskSpec, parse_state as S


def test_expert_policy_emits_expected_actions(aor_spec):
    agent = expert_policy(S("1 1 2"), S("1 + 1 = 2"), aor_spec)
    agent.begin_episode(0, S("1 1 2"))
    assert agent.act(S("1 1 2"), 0) == ("POS_1", "+")
    assert agent.act(S("1 + 1 2"), 1) == ("POS_3", "=")
    assert agent.act(S("1 + 1 = 2"), 2) == ("DONE", "DONE")
    # keeps answering all-DONE if queried again
    assert agent.act(S("1 + 1 = 2"), 3) == ("DONE", "DONE")


def test_expert_policy_identity(aor_spec):
    y = S("1 + 1 = 2")
    agent = expert_policy(y, y, aor_spec)
    agent.begin_episode(0, y)
    assert agent.act(y, 0) == ("DONE", "DONE")


def test_expert_policy_aec_table_pair(aec_spec):
    x, y = S("- 2 * + 4 10 + 8 / 8 = 8"), S("- 2 + 10 * 8 / 8 = 8")
    traj = generate_trajectory(x, y, aec_spec)
    assert len(traj.steps) <= 4
    outcome = run_game(aec_spec, x, expert_policy(x, y, aec_spec))
    assert outcome.final_state == y and outcome.refused_count == 0


def test_protocol_round_trip():
    messages = [
        {"type": "hello", "manifest": {"task": "aor", "action_length": 2}},
        {"type": "reset", "task": "aor", "episode": 7},
        {"type": "act", "state": ["1", "1", "2"], "step": 0},
        {"action": ["POS_1", "+"]},
        {"ok": True},
    ]
    for msg in messages:
        assert decode_message(encode_message(msg)) == msg
    with pytest.raises(ValueError):
        decode_message("[1, 2]")


def _script_agent(tmp_path, body):
    path = tmp_path / "agent.py"
    path.write_text(textwrap.dedent(body))
    return f"{sys.executable} {path}"


ECHO_EXPERT = """
    import json, sys
    # answers the first AOR expert move for "1 1 2", then DONE
    for line in sys.stdin:
        msg = json.loads(line)
        t = msg["type"]
        if t == "hello" or t == "reset":
            out = {"ok": True}
        elif t == "act":
            out = {"action": ["POS_1", "+"] if msg["step"] == 0 else ["DONE", "DONE"]}
        else:
            break
        print(json.dumps(out), flush=True)
"""


def test_external_agent_happy_path(tmp_path, aor_spec):
    agent = ExternalAgent(_script_agent(tmp_path, ECHO_EXPERT), aor_spec)
    try:
        agent.begin_episode(0, S("1 1 2"))
        assert agent.act(S("1 1 2"), 0) == ("POS_1", "+")
        assert agent.act(S("1 + 1 2"), 1) == ("DONE", "DONE")
    finally:
        agent.close()
    assert agent.proc.poll() is not None


def test_external_agent_short_action_is_violation(tmp_path, aor_spec):
    body = """
        import json, sys
        for line in sys.stdin:
            msg = json.loads(line)
            if msg["type"] in ("hello", "reset"):
                print(json.dumps({"ok": True}), flush=True)
            elif msg["type"] == "act":
                print(json.dumps({"action": ["POS_1"]}), flush=True)
            else:
                break
    """
    agent = ExternalAgent(_script_agent(tmp_path, body), aor_spec)
    try:
        agent.begin_episode(0, S("1 1 2"))
        with pytest.raises(ProtocolViolation):
            agent.act(S("1 1 2"), 0)
    finally:
        agent.close()


def test_external_agent_garbage_line(tmp_path, aor_spec):
    body = """
        import json, sys
        for line in sys.stdin:
            msg = json.loads(line)
            if msg["type"] == "hello":
                print(json.dumps({"ok": True}), flush=True)
            else:
                print("not json at all", flush=True)
    """
    agent = ExternalAgent(_script_agent(tmp_path, body), aor_spec)
    try:
        with pytest.raises(ProtocolViolation):
            agent.begin_episode(0, S("1 1 2"))
    finally:
        agent.close()


def test_external_agent_timeout(tmp_path, aor_spec):
    body = """
        import json, sys, time
        for line in sys.stdin:
            msg = json.loads(line)
            if msg["type"] == "hello":
                print(json.dumps({"ok": True}), flush=True)
            else:
                time.sleep(60)
    """
    agent = ExternalAgent(_script_agent(tmp_path, body), aor_spec, timeout=0.3)
    try:
        with pytest.raises(AgentTimeout):
            agent.begin_episode(0, S("1 1 2"))
    finally:
        agent.proc.kill()
        agent.proc.wait()


def test_spawn_failure(aor_spec):
    with pytest.raises(SpawnFailedError):
        ExternalAgent("/no/such/binary --flag", aor_spec)


def test_external_replay_matches_in_process_expert(tmp_path):
    bundle = gen_aec(TaskSpec.for_task("aec", 10, 5, 20), seed=13)
    spec = bundle.spec
    pairs = bundle.test
    traj_file = tmp_path / "expert.jsonl"
    write_trajectories(traj_file, [generate_trajectory(x, y, spec) for x, y in pairs])

    in_process = evaluate_split(spec, pairs, ExpertAgent(spec, pairs), keep_outcomes=True)
    command = f"{sys.executable} -m editgym.replay_agent {traj_file}"
    agent = ExternalAgent(command, spec, manifest=bundle.manifest)
    try:
        external = evaluate_split(spec, pairs, agent, keep_outcomes=True)
    finally:
        agent.close()

    assert external.report.token_acc == in_process.report.token_acc == 1.0
    assert external.report.seq_acc == in_process.report.seq_acc == 1.0
    assert external.report.eq_acc == in_process.report.eq_acc == 1.0
    for a, b in zip(external.outcomes, in_process.outcomes):
        assert a.final_state == b.final_state
        assert a.steps_taken == b.steps_taken
        assert a.refused_count == b.refused_count == 0
