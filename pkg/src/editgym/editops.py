"""Edit-script search for the expert policies.

The two token-level metrics (levenshtein, lcs) run a suffix-cost dynamic
program and then walk it forward, so the emitted operations are already in
left-to-right order with positions expressed in the evolving state, ready
to be replayed one by one. The span metric (self) aligns parenthesized
groups against their computed values instead.
"""

from __future__ import annotations

from .types import (
    LCS,
    LEVENSHTEIN,
    SELF,
    Delete,
    EditGymError,
    EditOp,
    Insert,
    Replace,
    SpanReplace,
    State,
)


class UnsupportedMetricError(EditGymError):
    pass


class SelfMalformedError(EditGymError):
    """The span metric got a state without clean depth-1 parenthesized groups."""


class IncompatiblePairError(EditGymError):
    """No script under the metric's primitives can turn x into y."""


class OutOfRangeError(EditGymError):
    """An operation's position falls outside the state it is applied to."""


def apply_op(state: State, op: EditOp) -> State:
    """Apply one edit, returning a new state."""
    m = len(state)
    if isinstance(op, Insert):
        if not 0 <= op.pos <= m:
            raise OutOfRangeError(f"insert at {op.pos} outside 0..{m}")
        return state[: op.pos] + (op.token,) + state[op.pos :]
    if isinstance(op, Delete):
        if not 0 <= op.pos < m:
            raise OutOfRangeError(f"delete at {op.pos} outside 0..{m - 1}")
        return state[: op.pos] + state[op.pos + 1 :]
    if isinstance(op, Replace):
        if not 0 <= op.pos < m:
            raise OutOfRangeError(f"replace at {op.pos} outside 0..{m - 1}")
        return state[: op.pos] + (op.token,) + state[op.pos + 1 :]
    if isinstance(op, SpanReplace):
        if not 0 <= op.left < op.right < m:
            raise OutOfRangeError(f"span {op.left}..{op.right} outside state of length {m}")
        return state[: op.left] + (op.token,) + state[op.right + 1 :]
    raise TypeError(f"not an edit operation: {op!r}")


def apply_script(state: State, ops: list[EditOp]) -> State:
    """Apply ops in order; the round-trip oracle for dp_ops."""
    for idx, op in enumerate(ops):
        try:
            state = apply_op(state, op)
        except OutOfRangeError as e:
            raise OutOfRangeError(f"op {idx}: {e}") from None
    return state


def _suffix_costs(x: State, y: State, allow_replace: bool) -> list[list[int]]:
    # cost[i][j] = minimal ops to turn x[i:] into y[j:]
    m, n = len(x), len(y)
    cost = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        cost[i][n] = m - i
    for j in range(n + 1):
        cost[m][j] = n - j
    for i in range(m - 1, -1, -1):
        row, below = cost[i], cost[i + 1]
        xi = x[i]
        for j in range(n - 1, -1, -1):
            if xi == y[j]:
                row[j] = below[j + 1]
            elif allow_replace:
                row[j] = 1 + min(below[j + 1], below[j], row[j + 1])
            else:
                row[j] = 1 + min(below[j], row[j + 1])
    return cost


def _walk(x: State, y: State, cost: list[list[int]], allow_replace: bool) -> list[EditOp]:
    # Forward walk over the suffix table. Tie-break in emission order:
    # match, then replace, then delete, then insert. pos tracks the index
    # in the evolving state, so ops come out ready to apply sequentially.
    ops: list[EditOp] = []
    m, n = len(x), len(y)
    i = j = pos = 0
    while i < m or j < n:
        c = cost[i][j]
        if i < m and j < n and x[i] == y[j] and cost[i + 1][j + 1] == c:
            i += 1
            j += 1
            pos += 1
        elif allow_replace and i < m and j < n and cost[i + 1][j + 1] + 1 == c:
            ops.append(Replace(pos, y[j]))
            i += 1
            j += 1
            pos += 1
        elif i < m and cost[i + 1][j] + 1 == c:
            ops.append(Delete(pos))
            i += 1
        else:
            ops.append(Insert(pos, y[j]))
            j += 1
            pos += 1
    return ops


def _check_groups(x: State) -> None:
    depth = 0
    for i, tok in enumerate(x):
        if tok == "(":
            depth += 1
            if depth > 1:
                raise SelfMalformedError(f"nested group at {i}")
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise SelfMalformedError(f"unmatched ')' at {i}")
    if depth:
        raise SelfMalformedError("unclosed group")


def _span_ops(x: State, y: State) -> list[EditOp]:
    # Align x against y token by token; each depth-1 "( ... )" group in x
    # corresponds to exactly one y token (its computed value).
    _check_groups(x)
    if "(" in y or ")" in y:
        raise IncompatiblePairError("goal state still contains parentheses")
    ops: list[EditOp] = []
    i = j = pos = 0
    m, n = len(x), len(y)
    while i < m:
        tok = x[i]
        if tok == "(":
            r = i + 1
            while x[r] != ")":
                r += 1
            if j >= n:
                raise IncompatiblePairError("more groups than goal tokens")
            width = r - i + 1
            ops.append(SpanReplace(pos, pos + width - 1, y[j]))
            i = r + 1
            j += 1
            pos += 1
        else:
            if j >= n or tok != y[j]:
                raise IncompatiblePairError(f"token {tok!r} at {i} does not align with goal")
            i += 1
            j += 1
            pos += 1
    if j != n:
        raise IncompatiblePairError("goal has tokens left over after alignment")
    return ops


def dp_ops(x: State, y: State, metric: str) -> list[EditOp]:
    """Minimal left-to-right operation list turning x into y under the metric."""
    if metric == LEVENSHTEIN:
        return _walk(x, y, _suffix_costs(x, y, True), True)
    if metric == LCS:
        return _walk(x, y, _suffix_costs(x, y, False), False)
    if metric == SELF:
        return _span_ops(x, y)
    raise UnsupportedMetricError(f"unknown metric {metric!r}")


def edit_distance(x: State, y: State, metric: str) -> int:
    """Number of ops in the minimal script; token-level metrics only."""
    if metric not in (LEVENSHTEIN, LCS):
        raise UnsupportedMetricError(f"edit_distance undefined for metric {metric!r}")
    return len(dp_ops(x, y, metric))
