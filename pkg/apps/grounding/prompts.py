"""
Natural-language grounding prompts.

Programs name predicates with bare tokens ("red", "behind", "same color").
A remote perception model receives them rendered into visual-prompt
questions, with the primary object in a red box and the secondary one in
a green box; the oracle grounder inverts the same templates back to
tokens.
"""

import re
from typing import Optional

PRIMARY_BOX = 'red'
SECONDARY_BOX = 'green'

ATTRIBUTE_PROMPT = 'Is the object in the red bounding box {concept}?'
CLASS_PROMPT = 'Is the object in the red bounding box {article} {concept}?'
RELATION_PROMPT = 'Is the object in the red bounding box {concept} the object in the green bounding box?'
ANALOGY_PROMPT = 'Does the object in the red bounding box have the {concept} as the object in the green bounding box?'
IMAGE_PROMPT = 'Is the photo {concept}?'

QUERY_OBJECT_PROMPT = 'What {category} is the object in the red bounding box?'

# Spatial predicate phrasings used in relation prompts
RELATION_PHRASES = {
    'left': 'to the left of',
    'right': 'to the right of',
    'front': 'in front of',
    'behind': 'behind',
}

_PROMPT_PATTERNS = [
    re.compile(r'^does the object in the red bounding box have the (?P<concept>.+?) as the object in the green bounding box\??$'),
    re.compile(r'^is the object in the red bounding box (?P<concept>.+?) the object in the green bounding box\??$'),
    re.compile(r'^is the object (?:inside of |in )the red bounding box (?:an? )?(?P<concept>.+?)\??$'),
    re.compile(r'^is the (?:\w+ )?in the red bounding box (?P<concept>.+?)\??$'),
    re.compile(r'^is the photo (?:taken )?(?P<concept>.+?)\??$'),
]

_PHRASE_TO_RELATION = {phrase: token for token, phrase in RELATION_PHRASES.items()}


def article(word: str) -> str:
    return 'an' if word[:1].lower() in 'aeiou' else 'a'


def render(token: str, num_objects: int, is_class: bool = False) -> str:
    """Full question for a bare predicate token of the given arity."""
    if num_objects == 0:
        return IMAGE_PROMPT.format(concept=token)
    if num_objects == 1:
        if is_class:
            return CLASS_PROMPT.format(article=article(token), concept=token)
        return ATTRIBUTE_PROMPT.format(concept=token)
    if token.startswith('same '):
        return ANALOGY_PROMPT.format(concept=token)
    return RELATION_PROMPT.format(concept=RELATION_PHRASES.get(token, token))


def invert(question: str) -> str:
    """
    Bare predicate token behind a rendered question.

    Questions that match no template are returned normalized (lower case,
    trailing '?' and surrounding whitespace removed).
    """
    text = ' '.join(question.strip().lower().split())
    for pattern in _PROMPT_PATTERNS:
        match = pattern.match(text)
        if match:
            concept = match.group('concept').strip()
            return _PHRASE_TO_RELATION.get(concept, concept)
    return text.rstrip('?').strip()


def query_category(question: str) -> Optional[str]:
    """Attribute category asked for by a "what ..." question, if any."""
    match = re.match(r'^\s*what\s+(?:is\s+the\s+)?(\w+)', question.lower())
    return match.group(1) if match else None
