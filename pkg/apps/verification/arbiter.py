"""
Pairwise arbiter: a perception model picks between two candidate objects.

Candidate 0 is drawn in the red box, candidate 1 in the green box. Replies
that do not start with a 0 or 1 keep the symbolic answer.
"""

import logging
import re
from dataclasses import dataclass
from typing import Optional

from apps.core.exceptions import VerificationError

logger = logging.getLogger(__name__)

ARBITER_TEMPLATE = (
    "You're an image analyst designed to check if the highlighted objects in the image meets the query "
    "description, and which one is more likely to meet the query description.\n"
    "\n"
    'The query is: "{query}"\n'
    "\n"
    'Please check the highlighted object "0" [in the red bounding box] and "1" [in the green bounding box] '
    'in the image and answer the question: Which object is more likely to meet the query description? '
    'Your answer should be "0", "1". Answer with one word or phrase.'
)

SYMBOLIC_CANDIDATE = 0
BACKBONE_CANDIDATE = 1

_LEADING_CHOICE = re.compile(r'^[\s"\'`\[\(\.\:\-]*([01])(?![0-9])')


@dataclass(frozen=True)
class ArbiterDecision:
    choice: int
    parsed: bool
    reply: str


def arbiter_prompt(query: str) -> str:
    if not query or not query.strip():
        raise VerificationError('the arbiter needs a non-empty query')
    return ARBITER_TEMPLATE.format(query=query.strip())


def parse_choice(reply: str) -> Optional[int]:
    match = _LEADING_CHOICE.match(reply or '')
    return int(match.group(1)) if match else None


def arbiter_decide(grounder_text_answer: str) -> ArbiterDecision:
    """Candidate chosen by the arbiter reply; unparseable replies keep the symbolic one."""
    choice = parse_choice(grounder_text_answer)
    if choice is None:
        logger.warning(f'Unparseable arbiter reply {grounder_text_answer!r}; keeping the symbolic answer')
        return ArbiterDecision(SYMBOLIC_CANDIDATE, False, grounder_text_answer)
    return ArbiterDecision(choice, True, grounder_text_answer)
