from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from editgym.equations import INVALID, MALFORMED, VALID, check_equation
from editgym.types import parse_state as S


@pytest.mark.parametrize("text,verdict", [
    ("- 3 - 6 / 2 + 9 = 3", VALID),
    ("1 1 2", MALFORMED),
    ("- 2 + 10 * 8 / 8 = 8", VALID),
    ("1 + 1 = 3", INVALID),
])
def test_published_examples(text, verdict):
    assert check_equation(S(text)) == verdict


@pytest.mark.parametrize("text,verdict", [
    ("", MALFORMED),
    ("=", MALFORMED),
    ("1 =", MALFORMED),
    ("= 1", MALFORMED),
    ("1 = 1 = 1", MALFORMED),
    ("1 + = 2", MALFORMED),
    ("( 1 + 1 = 2", MALFORMED),
    ("1 + 1 ) = 2", MALFORMED),
    ("1 - - 1 = 2", MALFORMED),
    ("3 / 2 = 1", INVALID),
    ("3 / 2 * 2 = 3", VALID),
    ("( 1 + 1 ) * 2 = 4", VALID),
    ("( ( 1 + 1 ) ) = 2", VALID),
    ("- ( 2 + 3 ) = - 5", VALID),  # unary minus may negate a parenthesized first term
    ("0 - 2 - 3 = 1 - 6", VALID),
    ("1 / 0 = 5", INVALID),
    ("1 = 1 / 0", INVALID),
    ("1 / 0 ) = 2", MALFORMED),  # structure checked before evaluation
])
def test_edge_cases(text, verdict):
    assert check_equation(S(text)) == verdict


def test_leading_minus_negates_first_term_only():
    # - 6 / 2 + 9 reads as -(6/2) + 9 = 6, not -(6/2 + 9)
    assert check_equation(S("- 6 / 2 + 9 = 6")) == VALID
    assert check_equation(S("- 2 + 4 = 2")) == VALID


def _oracle_eval(tokens):
    """Independent evaluation via Fraction and Python's own parser, made
    safe by the restricted token alphabet."""
    pieces = []
    for tok in tokens:
        pieces.append(f"Fraction({tok})" if tok.isdigit() else tok)
    return eval(" ".join(pieces), {"Fraction": Fraction})


ints = st.integers(min_value=1, max_value=12).map(str)
ops = st.sampled_from(["+", "-", "*", "/"])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(ops, ints), min_size=1, max_size=4), ints, ints)
def test_flat_equations_match_python_semantics(chain, first, rhs):
    lhs_tokens = [first]
    for op, val in chain:
        lhs_tokens += [op, val]
    tokens = tuple(lhs_tokens + ["=", rhs])
    expected = VALID if _oracle_eval(lhs_tokens) == Fraction(int(rhs)) else INVALID
    assert check_equation(tokens) == expected


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(["1", "2", "+", "-", "*", "/", "=", "(", ")"]), max_size=8))
def test_checker_is_total(tokens):
    assert check_equation(tuple(tokens)) in (VALID, INVALID, MALFORMED)
