"""Policies that play the game.

In-process agents implement begin_episode/act directly. Out-of-process
agents speak a line protocol on their standard streams: every request and
response is one JSON object per LF-terminated UTF-8 line, unknown fields
are ignored on both sides.

    -> {"type": "hello", "manifest": {...}}          <- {"ok": true}
    -> {"type": "reset", "task": "aor", "episode": 7} <- {"ok": true}
    -> {"type": "act", "state": [...], "step": 0}     <- {"action": [...]}
    -> {"type": "shutdown"}                           (no response)
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading

from .env import AgentFailure
from .traj import generate_trajectory
from .types import ActionSeq, State, TaskSpec

DEFAULT_TIMEOUT = 30.0


class SpawnFailedError(AgentFailure):
    pass


class ProtocolViolation(AgentFailure):
    pass


class AgentTimeout(AgentFailure):
    pass


class Agent:
    """Behavior contract: one action per query, every query answered."""

    def begin_episode(self, episode: int, x: State) -> None:
        pass

    def act(self, state: State, step: int) -> ActionSeq:
        raise NotImplementedError

    def close(self) -> None:
        pass


class ScriptedAgent(Agent):
    """Plays a fixed action list in order, then all-DONE forever."""

    def __init__(self, actions: list[ActionSeq], spec: TaskSpec):
        self.actions = list(actions)
        self.spec = spec
        self.cursor = 0

    def begin_episode(self, episode: int, x: State) -> None:
        self.cursor = 0

    def act(self, state: State, step: int) -> ActionSeq:
        if self.cursor < len(self.actions):
            action = self.actions[self.cursor]
            self.cursor += 1
            return action
        return self.spec.done_action()


def expert_policy(x: State, y: State, spec: TaskSpec) -> Agent:
    """The edit-script expert for one (x, y) pair."""
    traj = generate_trajectory(x, y, spec)
    return ScriptedAgent([a for _, a in traj.steps], spec)


class ExpertAgent(Agent):
    """Replays the expert for each (x, y) pair of a split, keyed by episode."""

    def __init__(self, spec: TaskSpec, pairs: list[tuple[State, State]]):
        self.spec = spec
        self.pairs = pairs
        self.script: list[ActionSeq] = []
        self.cursor = 0

    def begin_episode(self, episode: int, x: State) -> None:
        _, y = self.pairs[episode]
        traj = generate_trajectory(x, y, self.spec)
        self.script = [a for _, a in traj.steps]
        self.cursor = 0

    def act(self, state: State, step: int) -> ActionSeq:
        if self.cursor < len(self.script):
            action = self.script[self.cursor]
            self.cursor += 1
            return action
        return self.spec.done_action()


def encode_message(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False)


def decode_message(line: str) -> dict:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("protocol messages are JSON objects")
    return obj


class ExternalAgent(Agent):
    """Child process speaking the line protocol on stdin/stdout."""

    def __init__(self, command: str, spec: TaskSpec, manifest: dict | None = None,
                 timeout: float = DEFAULT_TIMEOUT):
        self.spec = spec
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                shlex.split(command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as e:
            raise SpawnFailedError(f"could not start {command!r}: {e}") from None
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        hello = {"type": "hello", "manifest": manifest or {}}
        reply = self._roundtrip(hello)
        if not reply.get("ok", False):
            raise ProtocolViolation(f"agent rejected hello: {reply!r}")

    def _pump(self):
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _roundtrip(self, request: dict) -> dict:
        try:
            self.proc.stdin.write(encode_message(request) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError, OSError) as e:
            raise ProtocolViolation(f"agent stdin closed: {e}") from None
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise AgentTimeout(f"no response within {self.timeout}s to {request['type']}") from None
        if line is None:
            raise ProtocolViolation("agent closed its output stream")
        try:
            return decode_message(line)
        except ValueError as e:
            raise ProtocolViolation(f"bad response line {line!r}: {e}") from None

    def begin_episode(self, episode: int, x: State) -> None:
        reply = self._roundtrip({"type": "reset", "task": self.spec.task, "episode": episode})
        if not reply.get("ok", False):
            raise ProtocolViolation(f"agent rejected reset: {reply!r}")

    def act(self, state: State, step: int) -> ActionSeq:
        reply = self._roundtrip({"type": "act", "state": list(state), "step": step})
        action = reply.get("action")
        if (not isinstance(action, list)
                or len(action) != self.spec.action_length
                or not all(isinstance(t, str) for t in action)):
            raise ProtocolViolation(
                f"action must be {self.spec.action_length} strings, got {action!r}"
            )
        return tuple(action)

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.proc.stdin.write(encode_message({"type": "shutdown"}) + "\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, ValueError, OSError):
                pass
            try:
                self.proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self.proc.kill()
                self.proc.wait()
