"""Text editing as a turn-based game.

Input/output pairs become expert state-action trajectories through
edit-script search; an environment replays and referees the actions; three
arithmetic-equation benchmarks supply data; and any policy, in-process or
spoken to over a line protocol, can be scored on them.
"""

from .agents import Agent, ExpertAgent, ExternalAgent, ScriptedAgent, expert_policy
from .codec import decode_action, encode_action
from .datagen import DatasetBundle, generate, gen_aec, gen_aes, gen_aor, split_sizes
from .editops import apply_op, apply_script, dp_ops, edit_distance
from .env import GameSession, run_game
from .equations import INVALID, MALFORMED, VALID, check_equation
from .evaluate import EvalReport, evaluate_split, token_accuracy
from .traj import augment, augment_demoset, generate_trajectory, rebase_actions
from .types import (
    ActionSeq,
    Delete,
    EditOp,
    GameOutcome,
    Insert,
    Replace,
    SpanReplace,
    State,
    TaskSpec,
    Trajectory,
    parse_state,
    render_state,
)

__version__ = "0.1.0"
