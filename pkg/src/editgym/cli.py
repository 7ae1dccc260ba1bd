"""Command-line surface tying generation, trajectory building, and agent
evaluation into reproducible runs.

Exit codes: 0 success, 1 usage error, 2 data error, 3 agent or protocol
error. EDITGYM_LOG (error, info, debug) controls diagnostics on stderr;
stdout carries results only.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from .agents import ExpertAgent, ExternalAgent, DEFAULT_TIMEOUT
from .datagen import (
    ExhaustedError,
    generate,
    load_manifest,
    read_split,
    spec_from_manifest,
    write_bundle,
)
from .env import AgentFailure
from .evaluate import evaluate_split
from .traj import augment_demoset, generate_trajectory, write_trajectories
from .types import AES, EditGymError, METRICS, SELF, TASKS, TaskSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_AGENT = 3

log = logging.getLogger("editgym")


class MetricTaskMismatch(EditGymError):
    pass


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _write_config(path: str | Path, config: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_spec(manifest: dict, metric: str | None, design: int | None) -> TaskSpec:
    spec = spec_from_manifest(manifest)
    if metric and metric != spec.metric:
        if metric == SELF and spec.task != AES:
            raise MetricTaskMismatch(f"metric 'self' does not apply to task {spec.task!r}")
        spec = spec.with_overrides(metric=metric)
    if design:
        spec = spec.with_overrides(action_design=design)
    return spec


def _cmd_gen(args) -> int:
    spec = TaskSpec.for_task(args.task, args.n, args.l, args.d,
                             metric=args.metric, action_design=args.design)
    log.info("generating %s dataset: n=%d l=%d d=%d seed=%d",
             spec.task, spec.max_int, spec.n_ints, spec.n_samples, args.seed)
    bundle = generate(spec, args.seed)
    write_bundle(bundle, args.out)
    _write_config(Path(args.out) / "run_config.json", {
        "command": "gen",
        "seed": args.seed,
        "out": str(args.out),
        "spec": asdict(bundle.spec),
    })
    splits = bundle.manifest["splits"]
    print(f"task={spec.task} splits={splits['train']}/{splits['valid']}/{splits['test']} "
          f"t_max={bundle.manifest['t_max']} pos_vocab_bound={bundle.manifest['pos_vocab_bound']}")
    return EXIT_OK


def _cmd_traj(args) -> int:
    manifest = load_manifest(args.data)
    spec = _resolve_spec(manifest, args.metric, args.design)
    pairs = read_split(args.data, args.split)
    log.info("building %d expert trajectories (%s, metric=%s)",
             len(pairs), args.split, spec.metric)
    trajectories = [generate_trajectory(x, y, spec) for x, y in pairs]
    n_expert = len(trajectories)
    if args.augment:
        trajectories = augment_demoset(trajectories, spec)
    write_trajectories(args.out, trajectories)
    _write_config(f"{args.out}.config.json", {
        "command": "traj",
        "data": str(args.data),
        "split": args.split,
        "augment": bool(args.augment),
        "out": str(args.out),
        "spec": asdict(spec),
    })
    max_len = max(len(t.steps) for t in trajectories)
    print(f"expert={n_expert} augmented={len(trajectories) - n_expert} max_len={max_len}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    manifest = load_manifest(args.data)
    spec = _resolve_spec(manifest, args.metric, args.design)
    pairs = read_split(args.data, args.split)
    if args.agent == "expert":
        agent = ExpertAgent(spec, pairs)
    elif args.agent.startswith("cmd:"):
        agent = ExternalAgent(args.agent[4:], spec, manifest=manifest, timeout=args.timeout)
    else:
        raise _UsageError(f"--agent must be 'expert' or 'cmd:\"...\"', got {args.agent!r}")
    log.info("evaluating %s on %s/%s (%d samples)",
             args.agent, args.data, args.split, len(pairs))
    try:
        result = evaluate_split(spec, pairs, agent, max_steps=args.max_steps)
    finally:
        agent.close()
    print(result.report.table())
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(result.report.to_json() + "\n")
        _write_config(f"{args.report}.config.json", {
            "command": "eval",
            "data": str(args.data),
            "split": args.split,
            "agent": args.agent,
            "max_steps": args.max_steps,
            "report": str(args.report),
            "spec": asdict(spec),
        })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="editgym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a benchmark dataset")
    gen.add_argument("--task", required=True, choices=TASKS)
    gen.add_argument("--n", required=True, type=int, help="integer size bound")
    gen.add_argument("--l", required=True, type=int, help="number of base integers")
    gen.add_argument("--d", required=True, type=int, help="dataset size")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--metric", choices=METRICS, default=None,
                     help="expert metric recorded in the manifest (default: per task)")
    gen.add_argument("--design", type=int, choices=(1, 2, 3), default=1)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)

    traj = sub.add_parser("traj", help="build expert (and augmented) trajectories")
    traj.add_argument("--data", required=True)
    traj.add_argument("--split", default="train", choices=("train", "valid", "test"))
    traj.add_argument("--metric", choices=METRICS, default=None)
    traj.add_argument("--design", type=int, choices=(1, 2, 3), default=None)
    traj.add_argument("--augment", action="store_true")
    traj.add_argument("--out", required=True)
    traj.set_defaults(func=_cmd_traj)

    ev = sub.add_parser("eval", help="score an agent on a split")
    ev.add_argument("--data", required=True)
    ev.add_argument("--split", default="test", choices=("train", "valid", "test"))
    ev.add_argument("--agent", default="expert",
                    help="'expert' or 'cmd:\"program args\"' for an external agent")
    ev.add_argument("--metric", choices=METRICS, default=None)
    ev.add_argument("--design", type=int, choices=(1, 2, 3), default=None)
    ev.add_argument("--max-steps", type=int, default=None)
    ev.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT,
                    help="per-query deadline for external agents (seconds)")
    ev.add_argument("--report", default=None)
    ev.set_defaults(func=_cmd_eval)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("EDITGYM_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(stream=sys.stderr, level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except AgentFailure as e:
        print(f"agent error: {e}", file=sys.stderr)
        return EXIT_AGENT
    except (EditGymError, ExhaustedError, OSError, json.JSONDecodeError, ValueError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
