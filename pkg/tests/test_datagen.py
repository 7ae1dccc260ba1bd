import json

import pytest

from editgym.datagen import (
    ExhaustedError,
    gen_aec,
    gen_aes,
    gen_aor,
    generate,
    load_manifest,
    read_split,
    spec_from_manifest,
    split_sizes,
    write_bundle,
)
from editgym.editops import apply_script, dp_ops, edit_distance
from editgym.equations import VALID, check_equation
from editgym.types import Replace, TaskSpec, parse_state as S


@pytest.fixture(scope="module")
def aor_bundle():
    return gen_aor(TaskSpec.for_task("aor", 10, 5, 80), seed=3)


@pytest.fixture(scope="module")
def aes_bundle():
    return gen_aes(TaskSpec.for_task("aes", 100, 5, 80), seed=3)


@pytest.fixture(scope="module")
def aec_bundle():
    return gen_aec(TaskSpec.for_task("aec", 10, 5, 80), seed=3)


def test_split_sizes():
    assert split_sizes(10_000) == (7000, 1500, 1500)
    assert split_sizes(10) == (7, 1, 2)
    assert split_sizes(80) == (56, 12, 12)
    assert split_sizes(1) == (0, 0, 1)


def test_aor_structure(aor_bundle):
    operators = {"+", "-", "*", "/"}
    for x, y in aor_bundle.all_pairs:
        assert check_equation(y) == VALID
        assert y.count("=") == 1
        # x is y with operators and the leading sign removed
        assert x == tuple(t for t in y if t.isdigit())
        assert all(1 <= int(t) <= 10 for t in x)
        assert len(x) == 5
        body = y[1:] if y[0] == "-" else y
        assert set(body[1::2]) <= operators | {"="}


def test_aes_structure(aes_bundle):
    for x, y in aes_bundle.all_pairs:
        assert check_equation(y) == VALID
        assert "(" not in y and ")" not in y
        assert set(y) <= {"+", "-", "="} | {t for t in y if t.isdigit()}
        assert "(" in x and x != y
        # every group collapses to the aligned operand: the span expert must
        # reproduce y exactly
        assert apply_script(x, dp_ops(x, y, "self")) == y


def test_aes_groups_evaluate_to_operand(aes_bundle):
    for x, y in aes_bundle.all_pairs:
        ops = dp_ops(x, y, "self")
        state = x
        for op in ops:
            inner = state[op.left + 1 : op.right]
            value = int(op.token)
            if inner[0] == "-":
                assert -int(inner[1]) + int(inner[3]) == value
            elif inner[1] == "+":
                assert int(inner[0]) + int(inner[2]) == value
            else:
                assert int(inner[0]) - int(inner[2]) == value
            from editgym.editops import apply_op

            state = apply_op(state, op)


def test_aec_structure(aec_bundle):
    for x, y in aec_bundle.all_pairs:
        assert check_equation(y) == VALID
        assert x != y
        assert edit_distance(x, y, "levenshtein") <= 3


def test_aec_replace_flags(aec_bundle):
    flags = aec_bundle.manifest["replace_flags"]
    assert sorted(flags) == ["test", "train", "valid"]
    for name in ("train", "valid", "test"):
        pairs = aec_bundle.split(name)
        assert len(flags[name]) == len(pairs)
        for (x, y), flag in zip(pairs, flags[name]):
            has_replace = any(isinstance(op, Replace) for op in dp_ops(x, y, "levenshtein"))
            assert flag == has_replace


def test_sources_unique_across_bundle(aor_bundle, aes_bundle, aec_bundle):
    for bundle in (aor_bundle, aes_bundle, aec_bundle):
        xs = [x for x, _ in bundle.all_pairs]
        assert len(set(xs)) == len(xs)


def test_determinism(aor_bundle):
    again = gen_aor(TaskSpec.for_task("aor", 10, 5, 80), seed=3)
    assert again.all_pairs == aor_bundle.all_pairs
    assert again.manifest == aor_bundle.manifest
    different = gen_aor(TaskSpec.for_task("aor", 10, 5, 80), seed=4)
    assert different.all_pairs != aor_bundle.all_pairs


def test_manifest_stats(aor_bundle, aec_bundle):
    m = aor_bundle.manifest
    assert m["t_max"] == 1 + max(
        len(dp_ops(x, y, "levenshtein")) for x, y in aor_bundle.all_pairs)
    assert m["max_steps"] == 2 * m["t_max"]
    longest = max(max(len(x), len(y)) for x, y in aor_bundle.train)
    assert m["pos_vocab_bound"] == longest + 1
    assert "DONE" in m["action_vocab"]
    assert "INSERT" not in m["action_vocab"]  # aor actions have no verbs
    assert "INSERT" in aec_bundle.manifest["action_vocab"]
    assert f"POS_{m['pos_vocab_bound']}" in m["action_vocab"]
    state_tokens = {t for x, y in aor_bundle.all_pairs for t in x + y}
    assert set(m["state_vocab"]) == state_tokens


def test_exhaustion():
    with pytest.raises(ExhaustedError):
        gen_aor(TaskSpec.for_task("aor", 2, 2, 1000), seed=0)


def test_bundle_files_round_trip(tmp_path, aec_bundle):
    write_bundle(aec_bundle, tmp_path)
    manifest = load_manifest(tmp_path)
    assert manifest == json.loads(json.dumps(aec_bundle.manifest))
    assert spec_from_manifest(manifest) == aec_bundle.spec
    for name in ("train", "valid", "test"):
        assert read_split(tmp_path, name) == aec_bundle.split(name)


def test_generate_dispatch():
    spec = TaskSpec.for_task("aor", 10, 5, 10)
    assert generate(spec, 0).all_pairs == gen_aor(spec, 0).all_pairs


def test_aes_metric_override_changes_manifest_only():
    base = gen_aes(TaskSpec.for_task("aes", 100, 5, 40), seed=1)
    lev = gen_aes(TaskSpec.for_task("aes", 100, 5, 40, metric="levenshtein"), seed=1)
    assert lev.all_pairs == base.all_pairs
    assert lev.manifest["t_max"] > base.manifest["t_max"]
    assert lev.manifest["t_max"] == 1 + max(
        len(dp_ops(x, y, "levenshtein")) for x, y in lev.all_pairs)
    assert "REPLACE" in lev.manifest["action_vocab"]
