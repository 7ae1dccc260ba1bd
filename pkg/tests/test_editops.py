from collections import deque
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from editgym.editops import (
    IncompatiblePairError,
    OutOfRangeError,
    SelfMalformedError,
    UnsupportedMetricError,
    apply_op,
    apply_script,
    dp_ops,
    edit_distance,
)
from editgym.types import Delete, Insert, Replace, SpanReplace, parse_state as S


def bfs_min_edits(x, y, alphabet, allow_replace, cap=None):
    """Independent oracle: breadth-first search over token sequences.

    Explores every single-token edit over the alphabet, capping lengths at
    the longer of the two sequences (a minimal solution that does deletions
    first never needs more room).
    """
    if x == y:
        return 0
    cap = cap or max(len(x), len(y))
    dist = {x: 0}
    frontier = deque([x])
    while frontier:
        s = frontier.popleft()
        d = dist[s] + 1
        nxt = []
        if len(s) < cap:
            nxt += [s[:i] + (t,) + s[i:] for i in range(len(s) + 1) for t in alphabet]
        nxt += [s[:i] + s[i + 1:] for i in range(len(s))]
        if allow_replace:
            nxt += [s[:i] + (t,) + s[i + 1:] for i in range(len(s)) for t in alphabet
                    if t != s[i]]
        for t in nxt:
            if t not in dist:
                if t == y:
                    return d
                dist[t] = d
                frontier.append(t)
    raise AssertionError(f"{y} unreachable from {x}")


def test_levenshtein_paper_example():
    ops = dp_ops(S("1 1 2"), S("1 + 1 = 2"), "levenshtein")
    assert ops == [Insert(1, "+"), Insert(3, "=")]


def test_self_metric_table_chain():
    x = S("65 + ( 25 - 20 ) - ( 64 + 32 ) + ( 83 - 24 ) = ( - 25 + 58 )")
    y = S("65 + 5 - 96 + 59 = 33")
    ops = dp_ops(x, y, "self")
    assert ops == [
        SpanReplace(2, 6, "5"),
        SpanReplace(4, 8, "96"),
        SpanReplace(6, 10, "59"),
        SpanReplace(8, 13, "33"),
    ]
    # the intermediate chain passes through the published state and its successor
    s = apply_op(x, ops[0])
    assert s == S("65 + 5 - ( 64 + 32 ) + ( 83 - 24 ) = ( - 25 + 58 )")
    s = apply_op(s, ops[1])
    assert s == S("65 + 5 - 96 + ( 83 - 24 ) = ( - 25 + 58 )")
    assert apply_script(x, ops) == y


def test_lcs_substitution_decomposes():
    assert dp_ops(S("2"), S("3"), "lcs") == [Delete(0), Insert(0, "3")]


@pytest.mark.parametrize("metric", ["levenshtein", "lcs"])
def test_identity_pair(metric):
    s = S("1 + 1 = 2")
    assert dp_ops(s, s, metric) == []


def test_self_identity():
    s = S("1 + 1 = 2")
    assert dp_ops(s, s, "self") == []


def test_apply_script_examples():
    assert apply_script(S("1 1 2"), [Insert(1, "+"), Insert(3, "=")]) == S("1 + 1 = 2")
    s = S("a b c")
    assert apply_script(s, []) == s
    assert apply_script(S("2"), [Delete(0)]) == ()


def test_apply_out_of_range_reports_index():
    with pytest.raises(OutOfRangeError, match="op 1"):
        apply_script(S("a b"), [Delete(0), Delete(5)])
    with pytest.raises(OutOfRangeError):
        apply_op((), Replace(0, "x"))
    with pytest.raises(OutOfRangeError):
        apply_op(S("a b"), SpanReplace(1, 1, "x"))


def test_edit_distance_examples():
    assert edit_distance(S("1 1 2"), S("1 + 1 = 2"), "levenshtein") == 2
    s = S("x y z")
    assert edit_distance(s, s, "levenshtein") == 0
    assert edit_distance(S("2"), S("3"), "lcs") == 2
    with pytest.raises(UnsupportedMetricError):
        edit_distance(S("( 1 + 1 )"), S("2"), "self")


def test_unknown_metric_rejected():
    with pytest.raises(UnsupportedMetricError):
        dp_ops(S("a"), S("b"), "hamming")


tokens = st.lists(st.sampled_from(["a", "b", "c"]), max_size=7).map(tuple)


@settings(max_examples=300, deadline=None)
@given(tokens, tokens, st.sampled_from(["levenshtein", "lcs"]))
def test_round_trip_and_determinism(x, y, metric):
    ops = dp_ops(x, y, metric)
    assert apply_script(x, ops) == y
    assert dp_ops(x, y, metric) == ops


@settings(max_examples=200, deadline=None)
@given(tokens, tokens)
def test_lcs_never_replaces_and_cost_bounds(x, y):
    lev = dp_ops(x, y, "levenshtein")
    lcs = dp_ops(x, y, "lcs")
    assert not any(isinstance(op, Replace) for op in lcs)
    assert len(lev) <= len(lcs) <= 2 * len(lev)


def _lcs_length(x, y):
    # textbook recursion, memoized; independent of the module under test
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(x) or j == len(y):
            return 0
        if x[i] == y[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


@settings(max_examples=200, deadline=None)
@given(tokens, tokens)
def test_lcs_cost_identity(x, y):
    assert len(dp_ops(x, y, "lcs")) == len(x) + len(y) - 2 * _lcs_length(x, y)


@settings(max_examples=200, deadline=None)
@given(tokens, tokens, st.sampled_from(["levenshtein", "lcs"]))
def test_ops_come_out_left_to_right(x, y, metric):
    # each op starts at or after the point where the previous one finished
    finished = 0
    for op in dp_ops(x, y, metric):
        pos = op.left if isinstance(op, SpanReplace) else op.pos
        assert pos >= finished
        if isinstance(op, Delete):
            finished = pos
        else:
            finished = pos + 1


@pytest.mark.parametrize("allow_replace,metric", [(True, "levenshtein"), (False, "lcs")])
def test_minimality_small_exhaustive(allow_replace, metric):
    alphabet = ("a", "b")
    states = [tuple(p) for n in range(4) for p in product(alphabet, repeat=n)]
    for x in states:
        for y in states:
            expected = bfs_min_edits(x, y, alphabet, allow_replace)
            assert len(dp_ops(x, y, metric)) == expected, (x, y, metric)


def test_self_errors():
    with pytest.raises(SelfMalformedError):
        dp_ops(S("( 1 + ( 2 ) )"), S("3"), "self")  # nested
    with pytest.raises(SelfMalformedError):
        dp_ops(S("( 1 + 2"), S("3"), "self")  # unclosed
    with pytest.raises(SelfMalformedError):
        dp_ops(S("1 ) 2"), S("3"), "self")  # stray close
    with pytest.raises(IncompatiblePairError):
        dp_ops(S("1 + ( 2 + 2 )"), S("2 + 4"), "self")  # misaligned prefix
    with pytest.raises(IncompatiblePairError):
        dp_ops(S("1 + 2"), S("1 + ( 2 )"), "self")  # goal keeps parens


def test_self_on_partially_simplified_state():
    x = S("65 + 5 - ( 64 + 32 ) + 59 = ( - 25 + 58 )")
    y = S("65 + 5 - 96 + 59 = 33")
    ops = dp_ops(x, y, "self")
    assert ops == [SpanReplace(4, 8, "96"), SpanReplace(8, 13, "33")]
    assert apply_script(x, ops) == y
