"""Shared vocabulary of the editing game: states, action tokens, edit
operations, trajectories, and task configuration.

States and actions are plain tuples of strings so they stay hashable,
comparable, and trivially serializable; the structured view of an action
lives in the codec, not the tokens themselves.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

State = tuple[str, ...]
ActionSeq = tuple[str, ...]

# Reserved action-token spellings. Everything else is a content token.
DONE = "DONE"
INSERT = "INSERT"
DELETE = "DELETE"
REPLACE = "REPLACE"
VERBS = (INSERT, DELETE, REPLACE)

AOR = "aor"
AES = "aes"
AEC = "aec"
TASKS = (AOR, AES, AEC)

LEVENSHTEIN = "levenshtein"
LCS = "lcs"
SELF = "self"
METRICS = (LEVENSHTEIN, LCS, SELF)

# Default expert metric per task.
DEFAULT_METRIC = {AOR: LEVENSHTEIN, AES: SELF, AEC: LEVENSHTEIN}

_POS_RE = re.compile(r"^POS_(0|[1-9][0-9]*)$")


class EditGymError(Exception):
    """Base class for engine errors with a contract meaning."""


def pos_token(k: int) -> str:
    """Canonical spelling of a position token."""
    if k < 0:
        raise ValueError(f"position tokens are non-negative, got {k}")
    return f"POS_{k}"


def parse_pos(token: str) -> int | None:
    """Position index of a POS_k token, or None for any other token."""
    m = _POS_RE.match(token)
    return int(m.group(1)) if m else None


def is_content_token(token: str) -> bool:
    """True for plain text tokens: non-empty, whitespace-free, and not one
    of the reserved action spellings."""
    if not token or any(c.isspace() for c in token):
        return False
    return token != DONE and token not in VERBS and parse_pos(token) is None


def parse_state(text: str) -> State:
    """Split on runs of whitespace; the empty string is the empty state."""
    return tuple(text.split())


def render_state(state: State) -> str:
    """Single-space join; inverse of parse_state for whitespace-free tokens."""
    return " ".join(state)


# --- Edit operations --------------------------------------------------------
# Positions are 0-indexed into the state the op applies to; Insert uses
# insert-before semantics (pos == len(state) appends).


@dataclass(frozen=True)
class Insert:
    pos: int
    token: str


@dataclass(frozen=True)
class Delete:
    pos: int


@dataclass(frozen=True)
class Replace:
    pos: int
    token: str


@dataclass(frozen=True)
class SpanReplace:
    """Replace the tokens at positions left..right (inclusive) with one token."""

    left: int
    right: int
    token: str


EditOp = Insert | Delete | Replace | SpanReplace


@dataclass(frozen=True)
class TaskSpec:
    """Benchmark identity plus the knobs every module keys off.

    max_int, n_ints and n_samples are the N / L / D dataset parameters:
    integers are drawn from [1, max_int], each equation uses n_ints base
    integers, and n_samples is the total dataset size across splits.
    """

    task: str
    max_int: int
    n_ints: int
    n_samples: int
    metric: str
    action_design: int = 1
    pos_vocab_bound: int = 64
    max_steps: int = 32

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.metric == SELF and self.task != AES:
            raise ValueError("metric 'self' only applies to the aes task")
        if self.action_design not in (1, 2, 3):
            raise ValueError(f"action_design must be 1, 2 or 3, got {self.action_design}")
        if self.max_int < 1 or self.n_ints < 2 or self.n_samples < 1:
            raise ValueError("max_int >= 1, n_ints >= 2 and n_samples >= 1 required")
        if self.pos_vocab_bound < 1 or self.max_steps < 1:
            raise ValueError("pos_vocab_bound and max_steps must be positive")

    @property
    def action_length(self) -> int:
        return 2 if self.task == AOR else 3

    def done_action(self) -> ActionSeq:
        """The unique terminal action: every slot is DONE."""
        return (DONE,) * self.action_length

    def with_overrides(self, **kw) -> "TaskSpec":
        return replace(self, **kw)

    @classmethod
    def for_task(cls, task: str, max_int: int, n_ints: int, n_samples: int,
                 metric: str | None = None, action_design: int = 1) -> "TaskSpec":
        return cls(task=task, max_int=max_int, n_ints=n_ints, n_samples=n_samples,
                   metric=metric or DEFAULT_METRIC.get(task, LEVENSHTEIN),
                   action_design=action_design)


# --- Demonstrations and game outcomes ---------------------------------------

EXPERT = "expert"
AUGMENTED = "augmented"

TERM_DONE = "DONE"
TERM_STEP_LIMIT = "STEP_LIMIT"


@dataclass
class Trajectory:
    """Ordered (state, action) demonstrations ending in the all-DONE action."""

    x: State
    y: State
    steps: list[tuple[State, ActionSeq]]
    provenance: str = EXPERT


@dataclass
class GameOutcome:
    final_state: State
    steps_taken: int
    refused_count: int
    terminated_by: str  # TERM_DONE or TERM_STEP_LIMIT
    per_step_latency: list[float] = field(default_factory=list)
    total_latency: float = 0.0
    agent_error: str | None = None
