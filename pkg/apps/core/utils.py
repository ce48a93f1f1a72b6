"""
Common utilities for the softReasoner management commands.

Shared command-line flags, NeptError to exit-code mapping, and small
file and formatting helpers.
"""

import json
import logging
from contextlib import contextmanager
from pathlib import Path

from django.core.management.base import CommandError

from apps.core.config import RunConfig
from apps.core.exceptions import ConfigurationError, NeptError
from apps.executor.options import TASKS
from apps.grounding.factory import GROUNDERS

logger = logging.getLogger(__name__)


def add_config_arguments(parser):
    """
    Register the run-configuration flags shared by every command.

    Unset flags default to None, so settings and config files keep their
    values unless a flag is given.
    """
    parser.add_argument('--config', help='Env-style file of NEPT_* settings')
    parser.add_argument('--grounder', choices=GROUNDERS, help='Perception backend')
    parser.add_argument('--endpoint', help='Remote grounding endpoint (falls back to NEPT_ENDPOINT)')
    parser.add_argument('--task', choices=TASKS, help='Answer type: vqa or reg')
    parser.add_argument('--tau', type=float, help='Smoothing temperature of soft comparisons')
    parser.add_argument('--gamma', type=float, help='Smoothing margin of soft comparisons')
    parser.add_argument('--gate-preset', help='Named confidence-gating profile')
    parser.add_argument('--gate-tau', type=float, help='Confidence-gating threshold')
    parser.add_argument('--gate-temp', type=float, help='Confidence-gating softmax temperature')
    parser.add_argument('--seed', type=int, help='Random seed')
    parser.add_argument('--jobs', type=int, help='Worker threads (0 = all cores)')
    parser.add_argument('--noise', type=float, help='Uniform score noise epsilon added to the grounder')
    parser.add_argument('--objects', nargs='+', help='Propose candidate objects of these classes first')
    parser.add_argument(
        '--gradients', action='store_true', default=None,
        help='Export gradients of the answer with respect to each score call',
    )
    parser.add_argument(
        '--relate-literal', action='store_true', default=None,
        help='Use the literal relational conjunction instead of filter-then-relate',
    )
    parser.add_argument('--out', help='Write the structured result to this file')


def config_overrides(options) -> dict:
    names = (
        'grounder', 'endpoint', 'task', 'tau', 'gamma', 'gate_preset', 'gate_tau', 'gate_temp',
        'seed', 'jobs', 'noise', 'objects', 'gradients', 'relate_literal',
    )
    return {name: options.get(name) for name in names}


def load_config(options) -> RunConfig:
    return RunConfig.load(options.get('config'), **config_overrides(options))


@contextmanager
def command_errors():
    """Re-raise engine errors as CommandError carrying the error's exit code."""
    try:
        yield
    except NeptError as e:
        logger.info(f'Command failed with {type(e).__name__}: {e}')
        raise CommandError(f'{type(e).__name__}: {e}', returncode=e.exit_code)


def read_source(path) -> str:
    path = Path(path)
    try:
        return path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigurationError(f'cannot read {path}: {e}')


def write_json(data, path):
    """Write ``data`` as indented JSON, creating parent directories."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    except OSError as e:
        raise ConfigurationError(f'cannot write {path}: {e}')
    logger.info(f'Wrote {path}')


def render_outcome(outcome) -> str:
    answer = outcome.answer
    lines = [f'answer: {answer.render()}']
    details = answer.to_dict()
    raw = {k: v for k, v in details.items() if k not in ('type', 'value')}
    if raw:
        lines.append(f'raw: {json.dumps(raw)}')
    lines.append(f'steps: {outcome.steps}')
    lines.append(f'grounder calls: {outcome.grounder_calls}')
    for entry in outcome.trace:
        detail = f'num_objects={entry.num_objects}' if entry.kind == 'score' else f'target={entry.target}'
        if entry.kind == 'detect':
            detail = f'{entry.shape[0]} objects'
        result = f' -> {entry.text!r}' if entry.text is not None else f' -> shape {list(entry.shape)}'
        lines.append(f'  {entry.site} {entry.kind} {entry.question!r} ({detail}){result}')
    return '\n'.join(lines)
