"""Scoring of played games: token, sequence, and equation accuracy over a
split, plus latency aggregation."""

from __future__ import annotations

import json
import statistics
from dataclasses import asdict, dataclass, field

from .env import run_game
from .equations import VALID, check_equation
from .types import GameOutcome, State, TaskSpec


def token_accuracy(pred: State, gold: State) -> float:
    """Positional matches over max(len(pred), len(gold)); empty vs empty is 1."""
    if not pred and not gold:
        return 1.0
    matches = sum(1 for a, b in zip(pred, gold) if a == b)
    return matches / max(len(pred), len(gold))


@dataclass
class EvalReport:
    n_samples: int
    token_acc: float
    seq_acc: float
    eq_acc: float
    refusal_rate: float
    termination: dict[str, int]
    mean_step_latency: float
    median_step_latency: float
    mean_episode_latency: float
    agent_failures: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def table(self) -> str:
        rows = [
            ("samples", f"{self.n_samples}"),
            ("token accuracy", f"{self.token_acc:.4f}"),
            ("sequence accuracy", f"{self.seq_acc:.4f}"),
            ("equation accuracy", f"{self.eq_acc:.4f}"),
            ("refusal rate", f"{self.refusal_rate:.4f}"),
            ("terminations", " ".join(f"{k}={v}" for k, v in sorted(self.termination.items()))),
            ("mean step latency", f"{self.mean_step_latency * 1e3:.3f} ms"),
            ("median step latency", f"{self.median_step_latency * 1e3:.3f} ms"),
            ("mean episode latency", f"{self.mean_episode_latency * 1e3:.3f} ms"),
            ("agent failures", f"{self.agent_failures}"),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


@dataclass
class SplitResult:
    report: EvalReport
    outcomes: list[GameOutcome] = field(default_factory=list)


def evaluate_split(spec: TaskSpec, pairs: list[tuple[State, State]], agent,
                   max_steps: int | None = None, keep_outcomes: bool = False) -> SplitResult:
    """Play every pair through run_game and reduce to an EvalReport.

    A sample whose agent failed mid-episode scores zero on all three
    accuracies, whatever state it happened to stop in.
    """
    token_sum = 0.0
    seq_hits = 0
    eq_hits = 0
    failures = 0
    refused = 0
    steps_total = 0
    termination: dict[str, int] = {}
    step_latencies: list[float] = []
    episode_latencies: list[float] = []
    outcomes: list[GameOutcome] = []

    for episode, (x, y) in enumerate(pairs):
        outcome = run_game(spec, x, agent, episode=episode, max_steps=max_steps)
        if keep_outcomes:
            outcomes.append(outcome)
        termination[outcome.terminated_by] = termination.get(outcome.terminated_by, 0) + 1
        refused += outcome.refused_count
        steps_total += outcome.steps_taken
        step_latencies.extend(outcome.per_step_latency)
        episode_latencies.append(outcome.total_latency)
        if outcome.agent_error is not None:
            failures += 1
            continue
        token_sum += token_accuracy(outcome.final_state, y)
        seq_hits += outcome.final_state == y
        eq_hits += check_equation(outcome.final_state) == VALID

    n = len(pairs)
    report = EvalReport(
        n_samples=n,
        token_acc=token_sum / n if n else 0.0,
        seq_acc=seq_hits / n if n else 0.0,
        eq_acc=eq_hits / n if n else 0.0,
        refusal_rate=refused / steps_total if steps_total else 0.0,
        termination=termination,
        mean_step_latency=sum(step_latencies) / len(step_latencies) if step_latencies else 0.0,
        median_step_latency=statistics.median(step_latencies) if step_latencies else 0.0,
        mean_episode_latency=sum(episode_latencies) / n if n else 0.0,
        agent_failures=failures,
    )
    return SplitResult(report=report, outcomes=outcomes)
