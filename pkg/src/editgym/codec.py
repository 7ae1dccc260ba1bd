"""Bijection between edit operations and fixed-length action sequences.

Each task fixes one schema:
  aor                 [POS_p, token]            insertions only
  aes (span metric)   permutation of {POS_left, POS_right, token} per design
  aes (token metrics) [VERB, POS_p, arg]        same schema as aec
  aec                 [VERB, POS_p, arg]        arg repeats POS_p for DELETE

Decoding is strict: anything that does not match the schema is a
malformed action, which the environment turns into a refusal.
"""

from __future__ import annotations

from .types import (
    AEC,
    AES,
    AOR,
    DELETE,
    DONE,
    INSERT,
    REPLACE,
    SELF,
    VERBS,
    ActionSeq,
    Delete,
    EditGymError,
    EditOp,
    Insert,
    Replace,
    SpanReplace,
    TaskSpec,
    is_content_token,
    parse_pos,
    pos_token,
)

# Slot orders for the three span-action designs: left paren, right paren, token.
DESIGN_ORDERS = {1: ("L", "R", "T"), 2: ("L", "T", "R"), 3: ("T", "L", "R")}


class UnsupportedOpError(EditGymError):
    """The task's action schema cannot express this operation."""


class MalformedActionError(EditGymError):
    """Token kinds do not match the task's slot schema."""


def uses_verb_schema(spec: TaskSpec) -> bool:
    """aec always speaks [VERB, POS, ARG]; aes falls back to it when driven
    by a token-level metric instead of span collapsing."""
    return spec.task == AEC or (spec.task == AES and spec.metric != SELF)


def _content(token: str) -> str:
    if not is_content_token(token):
        raise ValueError(f"not a writable content token: {token!r}")
    return token


def encode_action(op: EditOp, spec: TaskSpec) -> ActionSeq:
    """Express a permitted operation as the task's fixed-length action."""
    if spec.task == AOR:
        if not isinstance(op, Insert):
            raise UnsupportedOpError(f"aor actions are insertions only, got {op!r}")
        return (pos_token(op.pos), _content(op.token))
    if spec.task == AES and spec.metric == SELF:
        if not isinstance(op, SpanReplace):
            raise UnsupportedOpError(f"span-metric aes actions replace spans only, got {op!r}")
        slots = {"L": pos_token(op.left), "R": pos_token(op.right), "T": _content(op.token)}
        return tuple(slots[name] for name in DESIGN_ORDERS[spec.action_design])
    if uses_verb_schema(spec):
        if isinstance(op, Insert):
            return (INSERT, pos_token(op.pos), _content(op.token))
        if isinstance(op, Delete):
            p = pos_token(op.pos)
            return (DELETE, p, p)
        if isinstance(op, Replace):
            return (REPLACE, pos_token(op.pos), _content(op.token))
        raise UnsupportedOpError(f"verb schema covers insert/delete/replace, got {op!r}")
    raise UnsupportedOpError(f"no action schema for task {spec.task!r}")


def decode_action(action: ActionSeq, spec: TaskSpec) -> EditOp | None:
    """Inverse of encode_action; the all-DONE sequence decodes to None."""
    if len(action) != spec.action_length:
        raise MalformedActionError(
            f"expected {spec.action_length} action tokens, got {len(action)}"
        )
    done_count = sum(1 for t in action if t == DONE)
    if done_count == len(action):
        return None
    if done_count:
        raise MalformedActionError(f"partial DONE sequence {action!r}")

    if spec.task == AOR:
        p = parse_pos(action[0])
        if p is None or not is_content_token(action[1]):
            raise MalformedActionError(f"aor action must be [POS, token], got {action!r}")
        return Insert(p, action[1])

    if spec.task == AES and spec.metric == SELF:
        slots = dict(zip(DESIGN_ORDERS[spec.action_design], action))
        left, right = parse_pos(slots["L"]), parse_pos(slots["R"])
        if left is None or right is None or not is_content_token(slots["T"]):
            raise MalformedActionError(f"span action slots do not match design, got {action!r}")
        if not left < right:
            raise MalformedActionError(f"span order violated: {left} >= {right}")
        return SpanReplace(left, right, slots["T"])

    verb, pos_slot, arg = action
    if verb not in VERBS:
        raise MalformedActionError(f"unknown verb {verb!r}")
    p = parse_pos(pos_slot)
    if p is None:
        raise MalformedActionError(f"verb action needs a position, got {pos_slot!r}")
    if verb == DELETE:
        if arg != pos_slot:
            raise MalformedActionError("delete argument must repeat the position token")
        return Delete(p)
    if not is_content_token(arg):
        raise MalformedActionError(f"{verb} argument must be a content token, got {arg!r}")
    return Insert(p, arg) if verb == INSERT else Replace(p, arg)
