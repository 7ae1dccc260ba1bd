"""Seeded generators for the three arithmetic-equation editing benchmarks.

Every sample index gets its own deterministic random stream derived from
(task, seed, index), so regeneration with the same arguments is
byte-identical. Sources (the x side) are unique across the whole bundle,
which also keeps the 0.7/0.15/0.15 splits disjoint.

aor: the goal is a true equation over the drawn integers; the source is
just the integers. aes: the source wraps some goal operands in depth-1
parenthesized groups that evaluate back to them. aec: the source is the
goal damaged by random token edits.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from math import gcd
from pathlib import Path

from .codec import uses_verb_schema
from .editops import apply_op, dp_ops
from .types import (
    AEC,
    AES,
    AOR,
    DONE,
    LEVENSHTEIN,
    Delete,
    EditGymError,
    Replace,
    State,
    TaskSpec,
    VERBS,
    pos_token,
)

OPERATORS = ("+", "-", "*", "/")
SPLITS = ("train", "valid", "test")

# attempts per sample index before giving up on the whole dataset
_ATTEMPTS = 2000


class ExhaustedError(EditGymError):
    """The sample space ran dry before the requested dataset size."""


@dataclass
class DatasetBundle:
    spec: TaskSpec  # with pos_vocab_bound and max_steps resolved from the data
    seed: int
    train: list[tuple[State, State]]
    valid: list[tuple[State, State]]
    test: list[tuple[State, State]]
    manifest: dict

    def split(self, name: str) -> list[tuple[State, State]]:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}")
        return getattr(self, name)

    @property
    def all_pairs(self) -> list[tuple[State, State]]:
        return self.train + self.valid + self.test


def split_sizes(d: int) -> tuple[int, int, int]:
    """floor(0.7 d) / floor(0.15 d) / remainder."""
    train = (7 * d) // 10
    valid = (15 * d) // 100
    return train, valid, d - train - valid


def _eval_chain(ints, ops, leading_minus: bool) -> tuple[int, int]:
    """Exact rational value of a flat operator chain, as a reduced
    (numerator, denominator) pair. Integers are positive, so division
    never hits zero."""
    total_n, total_d = 0, 1
    term_n, term_d = ints[0], 1
    sign = -1 if leading_minus else 1
    for op, nxt in zip(ops, ints[1:]):
        if op == "*":
            term_n *= nxt
        elif op == "/":
            term_d *= nxt
        else:
            total_n = total_n * term_d + sign * term_n * total_d
            total_d *= term_d
            sign = 1 if op == "+" else -1
            term_n, term_d = nxt, 1
    total_n = total_n * term_d + sign * term_n * total_d
    total_d *= term_d
    g = gcd(total_n, total_d)
    return total_n // g, total_d // g


def _value_buckets(ints, alphabet, leading_minus):
    buckets: dict[tuple[int, int], list[tuple[str, ...]]] = {}
    for ops in itertools.product(alphabet, repeat=len(ints) - 1):
        buckets.setdefault(_eval_chain(ints, ops, leading_minus), []).append(ops)
    return buckets


def _sample_flat_equation(rng, ints, alphabet):
    """Uniform draw over every valid (sign, operators-with-one-'=')
    assignment for the integer tuple; None if the tuple admits none."""
    L = len(ints)
    right_buckets = {eq: _value_buckets(ints[eq:], alphabet, False) for eq in range(1, L)}
    choices = []
    total = 0
    for sign in (False, True):
        for eq in range(1, L):
            rights = right_buckets[eq]
            matches = []
            count = 0
            for value, left_ops in _value_buckets(ints[:eq], alphabet, sign).items():
                right_ops = rights.get(value)
                if right_ops:
                    matches.append((left_ops, right_ops))
                    count += len(left_ops) * len(right_ops)
            if count:
                choices.append((count, sign, matches))
                total += count
    if total == 0:
        return None
    r = rng.randrange(total)
    for count, sign, matches in choices:
        if r >= count:
            r -= count
            continue
        for left_ops, right_ops in matches:
            pairs = len(left_ops) * len(right_ops)
            if r >= pairs:
                r -= pairs
                continue
            ops = left_ops[r // len(right_ops)] + ("=",) + right_ops[r % len(right_ops)]
            return sign, ops
    raise AssertionError("uniform draw fell off the end")


def _render_flat(ints, ops, sign: bool) -> State:
    tokens = ["-"] if sign else []
    tokens.append(str(ints[0]))
    for op, value in zip(ops, ints[1:]):
        tokens += [op, str(value)]
    return tuple(tokens)


def _draw_ints(rng, spec: TaskSpec):
    return tuple(rng.randint(1, spec.max_int) for _ in range(spec.n_ints))


def gen_aor(spec: TaskSpec, seed: int) -> DatasetBundle:
    """Operator restoration: x is the integer array, y a true equation over it."""
    if spec.task != AOR:
        raise ValueError(f"gen_aor needs an aor spec, got {spec.task}")
    pairs: list[tuple[State, State]] = []
    seen: set[State] = set()
    for i in range(spec.n_samples):
        rng = random.Random(f"aor:{seed}:{i}")
        for _ in range(_ATTEMPTS):
            ints = _draw_ints(rng, spec)
            x = tuple(str(v) for v in ints)
            if x in seen:
                continue
            picked = _sample_flat_equation(rng, ints, OPERATORS)
            if picked is None:
                continue
            sign, ops = picked
            seen.add(x)
            pairs.append((x, _render_flat(ints, ops, sign)))
            break
        else:
            raise ExhaustedError(f"aor: no fresh sample found for index {i}")
    return _finish_bundle(spec, seed, pairs)


def _sample_group(rng, value: int, max_int: int) -> tuple[str, ...]:
    """A depth-1 parenthesized group over [1, max_int] integers evaluating
    exactly to the positive operand it replaces."""
    shapes = []
    if value >= 2:
        shapes.append("sum")  # a + b
    if value <= max_int - 1:
        shapes.append("diff")  # a - b
        shapes.append("neg")  # - a + b
    shape = rng.choice(shapes)
    if shape == "sum":
        a = rng.randint(max(1, value - max_int), value - 1)
        return ("(", str(a), "+", str(value - a), ")")
    b = rng.randint(1, max_int - value)
    if shape == "diff":
        return ("(", str(value + b), "-", str(b), ")")
    return ("(", "-", str(b), "+", str(value + b), ")")


def gen_aes(spec: TaskSpec, seed: int) -> DatasetBundle:
    """Simplification: y is a flat +/- equation, x has 1..L operands expanded
    into groups; signs and operators outside the groups stay untouched."""
    if spec.task != AES:
        raise ValueError(f"gen_aes needs an aes spec, got {spec.task}")
    if spec.max_int < 2:
        raise ValueError("aes needs max_int >= 2 to form groups")
    pairs: list[tuple[State, State]] = []
    seen: set[State] = set()
    for i in range(spec.n_samples):
        rng = random.Random(f"aes:{seed}:{i}")
        for _ in range(_ATTEMPTS):
            ints = _draw_ints(rng, spec)
            picked = _sample_flat_equation(rng, ints, ("+", "-"))
            if picked is None:
                continue
            sign, ops = picked
            k = rng.randint(1, spec.n_ints)
            chosen = set(rng.sample(range(spec.n_ints), k))
            parts: list[str] = ["-"] if sign else []
            for j, value in enumerate(ints):
                if j:
                    parts.append(ops[j - 1])
                if j in chosen:
                    parts.extend(_sample_group(rng, value, spec.max_int))
                else:
                    parts.append(str(value))
            x = tuple(parts)
            if x in seen:
                continue
            seen.add(x)
            pairs.append((x, _render_flat(ints, ops, sign)))
            break
        else:
            raise ExhaustedError(f"aes: no fresh sample found for index {i}")
    return _finish_bundle(spec, seed, pairs)


def gen_aec(spec: TaskSpec, seed: int) -> DatasetBundle:
    """Correction: y as in aor; x is y damaged by three random token edits.

    Draws may overlap or cancel each other, so the net error count varies
    over 1..3; an x identical to y is redrawn.
    """
    if spec.task != AEC:
        raise ValueError(f"gen_aec needs an aec spec, got {spec.task}")
    vocab = [str(v) for v in range(1, spec.max_int + 1)] + list(OPERATORS) + ["="]
    pairs: list[tuple[State, State]] = []
    seen: set[State] = set()
    for i in range(spec.n_samples):
        rng = random.Random(f"aec:{seed}:{i}")
        for _ in range(_ATTEMPTS):
            ints = _draw_ints(rng, spec)
            picked = _sample_flat_equation(rng, ints, OPERATORS)
            if picked is None:
                continue
            sign, ops = picked
            y = _render_flat(ints, ops, sign)
            x = _perturb(rng, y, vocab)
            if x == y or x in seen:
                continue
            seen.add(x)
            pairs.append((x, y))
            break
        else:
            raise ExhaustedError(f"aec: no fresh sample found for index {i}")
    return _finish_bundle(spec, seed, pairs)


def _perturb(rng, y: State, vocab: list[str]) -> State:
    state = list(y)
    for _ in range(3):
        kind = rng.choice(("insert", "delete", "replace"))
        if kind == "insert":
            state.insert(rng.randint(0, len(state)), rng.choice(vocab))
        elif kind == "delete" and state:
            del state[rng.randrange(len(state))]
        elif state:
            p = rng.randrange(len(state))
            tok = rng.choice(vocab)
            while tok == state[p]:
                tok = rng.choice(vocab)
            state[p] = tok
    return tuple(state)


def generate(spec: TaskSpec, seed: int) -> DatasetBundle:
    return {AOR: gen_aor, AES: gen_aes, AEC: gen_aec}[spec.task](spec, seed)


def _finish_bundle(spec: TaskSpec, seed: int, pairs) -> DatasetBundle:
    n_train, n_valid, _ = split_sizes(len(pairs))
    scripts = [dp_ops(x, y, spec.metric) for x, y in pairs]
    t_max = 1 + max((len(s) for s in scripts), default=0)

    # longest state seen while replaying the training split's scripts
    max_len = 0
    for (x, _), ops in zip(pairs[:n_train], scripts[:n_train]):
        state = x
        max_len = max(max_len, len(state))
        for op in ops:
            state = apply_op(state, op)
            max_len = max(max_len, len(state))
    pos_bound = max_len + 1

    resolved = spec.with_overrides(pos_vocab_bound=pos_bound, max_steps=2 * t_max)
    state_vocab = sorted({t for x, y in pairs for t in x + y})
    content = sorted({op.token for script in scripts
                      for op in script if not isinstance(op, Delete)})
    action_vocab = [DONE]
    if uses_verb_schema(resolved):
        action_vocab += list(VERBS)
    action_vocab += [pos_token(k) for k in range(pos_bound + 1)]
    action_vocab += content

    manifest = {
        "task": spec.task,
        "n": spec.max_int,
        "l": spec.n_ints,
        "d": spec.n_samples,
        "metric": spec.metric,
        "action_design": spec.action_design,
        "action_length": spec.action_length,
        "seed": seed,
        "t_max": t_max,
        "max_steps": 2 * t_max,
        "pos_vocab_bound": pos_bound,
        "splits": {"train": n_train, "valid": n_valid, "test": len(pairs) - n_train - n_valid},
        "state_vocab": state_vocab,
        "action_vocab": action_vocab,
    }
    if spec.task == AEC:
        if spec.metric == LEVENSHTEIN:
            lev_scripts = scripts
        else:
            lev_scripts = [dp_ops(x, y, LEVENSHTEIN) for x, y in pairs]
        flags = [any(isinstance(op, Replace) for op in s) for s in lev_scripts]
        manifest["replace_flags"] = {
            "train": flags[:n_train],
            "valid": flags[n_train:n_train + n_valid],
            "test": flags[n_train + n_valid:],
        }
    return DatasetBundle(
        spec=resolved,
        seed=seed,
        train=pairs[:n_train],
        valid=pairs[n_train:n_train + n_valid],
        test=pairs[n_train + n_valid:],
        manifest=manifest,
    )


# --- Files ------------------------------------------------------------------


def write_bundle(bundle: DatasetBundle, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in SPLITS:
        with open(out / f"{name}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for x, y in bundle.split(name):
                fh.write(json.dumps({"x": list(x), "y": list(y)}, ensure_ascii=False) + "\n")
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(bundle.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_split(data_dir: str | Path, name: str) -> list[tuple[State, State]]:
    pairs = []
    with open(Path(data_dir) / f"{name}.jsonl", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                pairs.append((tuple(rec["x"]), tuple(rec["y"])))
    return pairs


def load_manifest(data_dir: str | Path) -> dict:
    with open(Path(data_dir) / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)


def spec_from_manifest(manifest: dict) -> TaskSpec:
    return TaskSpec(
        task=manifest["task"],
        max_int=manifest["n"],
        n_ints=manifest["l"],
        n_samples=manifest["d"],
        metric=manifest["metric"],
        action_design=manifest["action_design"],
        pos_vocab_bound=manifest["pos_vocab_bound"],
        max_steps=manifest["max_steps"],
    )
