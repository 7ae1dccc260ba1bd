"""Stdio agent that replays a trajectory file over the line protocol.

Run: python -m editgym.replay_agent TRAJECTORY_FILE

Episode i answers its queries with the i-th trajectory's actions in order
(all-DONE once they run out). Useful as a protocol smoke agent and for
checking that an out-of-process replay scores exactly like the in-process
expert.
"""

from __future__ import annotations

import json
import sys

from .traj import read_trajectories


def serve(path: str, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    trajectories = read_trajectories(path)
    actions: list[list[list[str]]] = [[list(a) for _, a in t.steps] for t in trajectories]
    current: list[list[str]] = []
    cursor = 0
    done: list[str] = []

    for line in stdin:
        if not line.strip():
            continue
        msg = json.loads(line)
        kind = msg.get("type")
        if kind == "hello":
            length = msg.get("manifest", {}).get("action_length", 2)
            done = ["DONE"] * length
            reply = {"ok": True}
        elif kind == "reset":
            episode = msg["episode"]
            current = actions[episode] if episode < len(actions) else []
            cursor = 0
            reply = {"ok": True}
        elif kind == "act":
            if cursor < len(current):
                action = current[cursor]
                cursor += 1
            else:
                action = done
            reply = {"action": action}
        elif kind == "shutdown":
            return 0
        else:
            reply = {"ok": False, "error": f"unknown request {kind!r}"}
        stdout.write(json.dumps(reply) + "\n")
        stdout.flush()
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m editgym.replay_agent TRAJECTORY_FILE", file=sys.stderr)
        return 1
    return serve(argv[0])


if __name__ == "__main__":
    sys.exit(main())
