"""
Append-only tape for reverse-mode differentiation of soft logic.

Nodes are recorded in execution order, so node inputs always precede the
node itself and a single reverse sweep is a valid topological traversal.
Backward rules are registered per op name by the modules defining the ops.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from apps.core.exceptions import TapeError
from .soft import SoftValue

logger = logging.getLogger(__name__)

LEAF = 'leaf'
CONST = 'const'

# op name -> rule(node, upstream adjoint, input values) -> adjoint per input
BACKWARD_RULES: Dict[str, Callable] = {}


def backward_rule(op: str):
    """Register the backward rule for ``op``."""
    def register(rule):
        BACKWARD_RULES[op] = rule
        return rule
    return register


@dataclass(frozen=True)
class TapeNode:
    op: str
    inputs: Tuple[int, ...]
    value: np.ndarray
    saved: tuple = ()
    label: Optional[str] = None


class Tape:
    """Records soft-logic operations of a single execution."""

    def __init__(self):
        self.nodes: List[TapeNode] = []

    def __len__(self):
        return len(self.nodes)

    def leaf(self, data, label: Optional[str] = None) -> SoftValue:
        """Record an input tensor (a grounding score) whose adjoint is reported."""
        return self._append(LEAF, (), data, label=label)

    def constant(self, data, is_count: bool = False) -> SoftValue:
        """Record a promoted crisp number; constants receive no reported adjoint."""
        return self._append(CONST, (), data, is_count=is_count)

    def record(self, op: str, inputs: Sequence[SoftValue], data,
               saved: tuple = (), is_count: bool = False) -> SoftValue:
        for value in inputs:
            self.check(value)
        return self._append(op, tuple(v.node for v in inputs), data, saved=saved, is_count=is_count)

    def _append(self, op: str, inputs: Tuple[int, ...], data, saved: tuple = (),
                is_count: bool = False, label: Optional[str] = None) -> SoftValue:
        value = SoftValue(data, node=len(self.nodes), is_count=is_count)
        self.nodes.append(TapeNode(op, inputs, value.data, saved, label))
        return value

    def check(self, value: SoftValue):
        node = value.node
        if node is None or not 0 <= node < len(self.nodes) or self.nodes[node].value is not value.data:
            raise TapeError(f'{value!r} is not recorded on this tape')

    def leaves(self) -> List[int]:
        return [i for i, node in enumerate(self.nodes) if node.op == LEAF]

    def backward(self, output: SoftValue) -> Dict[int, np.ndarray]:
        """
        Reverse accumulation from a scalar output.

        Returns the adjoint of every leaf on the tape; leaves the output does
        not depend on get zeros.
        """
        self.check(output)
        if output.data.ndim != 0:
            raise TapeError(f'backward() needs a scalar output, got a {output.shape}')

        adjoints: List[Optional[np.ndarray]] = [None] * (output.node + 1)
        adjoints[output.node] = np.ones((), dtype=np.float64)

        for node_id in range(output.node, -1, -1):
            upstream = adjoints[node_id]
            node = self.nodes[node_id]
            if upstream is None or not node.inputs:
                continue
            try:
                rule = BACKWARD_RULES[node.op]
            except KeyError:
                raise TapeError(f'no backward rule registered for {node.op!r}')
            inputs = [self.nodes[i].value for i in node.inputs]
            for input_id, grad in zip(node.inputs, rule(node, upstream, inputs)):
                if adjoints[input_id] is None:
                    adjoints[input_id] = np.array(grad, dtype=np.float64)
                else:
                    adjoints[input_id] = adjoints[input_id] + grad

        gradients = {}
        for leaf_id in self.leaves():
            grad = adjoints[leaf_id] if leaf_id < len(adjoints) else None
            if grad is None:
                grad = np.zeros_like(self.nodes[leaf_id].value)
            if not np.all(np.isfinite(grad)):
                raise TapeError(f'non-finite adjoint for leaf {leaf_id}')
            gradients[leaf_id] = grad
        logger.debug(f'backward from node {output.node}: {len(gradients)} leaves')
        return gradients
