from dataclasses import dataclass, field
from typing import Tuple

from apps.core.exceptions import ConfigurationError
from apps.tensor.soft import SmoothingParams

VQA = 'vqa'
REG = 'reg'
TASKS = (VQA, REG)


@dataclass(frozen=True)
class ExecOptions:
    """Per-run executor settings."""
    task: str = VQA
    gradients: bool = False
    relate_literal: bool = False
    step_budget: int = 100_000
    call_budget: int = 1_000
    smoothing: SmoothingParams = field(default_factory=SmoothingParams)
    # When set, the run first proposes candidate objects of these classes
    object_names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigurationError(f"unknown task '{self.task}', expected vqa or reg")
        if self.step_budget < 1 or self.call_budget < 1:
            raise ConfigurationError('step and call budgets must be positive')
