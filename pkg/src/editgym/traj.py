"""Expert demonstrations and their augmentation.

Trajectory generation turns an (input, goal) pair into (state, action)
steps by running the edit-script expert through the environment's apply
function. Augmentation walks the execute/skip tree of an expert action
list, rebasing the position tokens of the not-yet-executed actions after
every skip, and collects the off-path states it reaches; each one becomes
the start of a fresh expert trajectory toward the same goal.
"""

from __future__ import annotations

import json
from pathlib import Path

from .codec import decode_action, encode_action
from .editops import apply_op, dp_ops
from .types import (
    AUGMENTED,
    ActionSeq,
    EXPERT,
    EditGymError,
    SpanReplace,
    State,
    TaskSpec,
    Trajectory,
    parse_pos,
    pos_token,
)


class NegativePositionError(EditGymError):
    """Rebasing drove a position below zero; the script was not left-to-right."""


def generate_trajectory(x: State, y: State, spec: TaskSpec,
                        provenance: str = EXPERT) -> Trajectory:
    """Expert demonstration for one pair: one step per edit, then all-DONE."""
    ops = dp_ops(x, y, spec.metric)
    steps: list[tuple[State, ActionSeq]] = []
    state = x
    for op in ops:
        steps.append((state, encode_action(op, spec)))
        state = apply_op(state, op)
    if state != y:
        raise EditGymError(f"script did not reach the goal: {state} != {y}")
    steps.append((state, spec.done_action()))
    return Trajectory(x=x, y=y, steps=steps, provenance=provenance)


def rebase_actions(remaining: list[ActionSeq], skipped: ActionSeq,
                   s_t: State, s_t1: State, spec: TaskSpec) -> list[ActionSeq]:
    """Adjust downstream actions after `skipped` was dropped.

    Positions strictly past the skipped edit shift by the length change the
    skipped edit would have caused; everything else, including the all-DONE
    action, passes through unchanged.
    """
    op = decode_action(skipped, spec)
    if op is None:
        return list(remaining)
    delta = len(s_t) - len(s_t1)
    anchor = op.left if isinstance(op, SpanReplace) else op.pos
    rebased: list[ActionSeq] = []
    for action in remaining:
        tokens = []
        for tok in action:
            k = parse_pos(tok)
            if k is not None and k > anchor:
                if k + delta < 0:
                    raise NegativePositionError(f"{tok} shifted by {delta} in {action!r}")
                tok = pos_token(k + delta)
            tokens.append(tok)
        rebased.append(tuple(tokens))
    return rebased


def augment(traj: Trajectory, spec: TaskSpec) -> set[State]:
    """Shifted states reachable by skipping some of the trajectory's edits.

    Explores every execute/skip choice (cost grows with 2^edits, so keep
    trajectories short); states already on the expert path are excluded.
    """
    expert_states = {s for s, _ in traj.steps}
    shifted: set[State] = set()
    seen: set[tuple[State, tuple[ActionSeq, ...]]] = set()

    def explore(state: State, remaining: tuple[ActionSeq, ...]):
        key = (state, remaining)
        if key in seen:
            return
        seen.add(key)
        if len(remaining) > 1:
            head, rest = remaining[0], remaining[1:]
            op = decode_action(head, spec)
            nxt = apply_op(state, op)
            explore(nxt, rest)  # execute head
            explore(state, tuple(rebase_actions(list(rest), head, state, nxt, spec)))  # skip head
        elif state not in expert_states:
            shifted.add(state)

    explore(traj.x, tuple(a for _, a in traj.steps))
    return shifted


def augment_demoset(demos: list[Trajectory], spec: TaskSpec) -> list[Trajectory]:
    """Expert trajectories plus one fresh trajectory per shifted state.

    Existing augmented entries are kept and never duplicated, so running
    this twice adds nothing.
    """
    existing = {(t.x, t.y) for t in demos if t.provenance == AUGMENTED}
    out = list(demos)
    for traj in demos:
        if traj.provenance != EXPERT:
            continue
        for state in sorted(augment(traj, spec)):
            if (state, traj.y) in existing:
                continue
            existing.add((state, traj.y))
            out.append(generate_trajectory(state, traj.y, spec, provenance=AUGMENTED))
    return out


def write_trajectories(path: str | Path, trajectories: list[Trajectory]) -> None:
    """One JSON record per line, LF-terminated, UTF-8."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for traj in trajectories:
            record = {
                "x": list(traj.x),
                "y": list(traj.y),
                "steps": [{"s": list(s), "a": list(a)} for s, a in traj.steps],
                "provenance": traj.provenance,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def read_trajectories(path: str | Path) -> list[Trajectory]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out.append(Trajectory(
                x=tuple(rec["x"]),
                y=tuple(rec["y"]),
                steps=[(tuple(st["s"]), tuple(st["a"])) for st in rec["steps"]],
                provenance=rec.get("provenance", EXPERT),
            ))
    return out
