"""
Run configuration for the management commands.

Values are layered: ``settings.NEPT`` (itself read from NEPT_* environment
variables), then an optional env-style config file, then command-line
flags. The result is validated once and turned into executor options,
gate parameters and grounders.
"""

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, FrozenSet, Optional, Tuple

import environ
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from apps.core.exceptions import ConfigurationError, NeptError
from apps.executor.options import TASKS, ExecOptions
from apps.grounding.factory import GROUNDERS, REMOTE, build_grounder
from apps.grounding.scene import Scene
from apps.tensor.soft import SmoothingParams
from apps.verification.gating import GateParams

logger = logging.getLogger(__name__)

# RunConfig field -> (NEPT settings key, config file cast)
SETTINGS_KEYS = {
    'grounder': ('GROUNDER', str),
    'endpoint': ('ENDPOINT', str),
    'task': ('TASK', str),
    'tau': ('TAU', float),
    'gamma': ('GAMMA', float),
    'relate_literal': ('RELATE_LITERAL', bool),
    'gradients': ('GRADIENTS', bool),
    'step_budget': ('STEP_BUDGET', int),
    'call_budget': ('CALL_BUDGET', int),
    'remote_timeout': ('REMOTE_TIMEOUT', float),
    'remote_retries': ('REMOTE_RETRIES', int),
    'remote_max_in_flight': ('REMOTE_MAX_IN_FLIGHT', int),
    'gate_preset': ('GATE_PRESET', str),
    'gate_tau': ('GATE_TAU', float),
    'gate_temp': ('GATE_TEMP', float),
    'seed': ('SEED', int),
    'jobs': ('JOBS', int),
    'include_self': ('ANALOGICAL_INCLUDE_SELF', bool),
    'noise': ('NOISE', float),
}


@dataclass(frozen=True)
class RunConfig:
    grounder: str = 'oracle'
    endpoint: str = ''
    task: str = 'vqa'
    tau: float = 0.25
    gamma: float = 0.25
    relate_literal: bool = False
    gradients: bool = False
    step_budget: int = 100_000
    call_budget: int = 1_000
    remote_timeout: float = 30.0
    remote_retries: int = 2
    remote_max_in_flight: int = 4
    gate_preset: str = ''
    gate_tau: float = 0.5
    gate_temp: float = 1.0
    seed: int = 0
    jobs: int = 0
    include_self: bool = False
    noise: float = 0.0
    objects: Tuple[str, ...] = ()
    # Fields set by a config file or a flag rather than by settings
    explicit: FrozenSet[str] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        if self.grounder not in GROUNDERS:
            raise ConfigurationError(f"unknown grounder '{self.grounder}', expected one of {', '.join(GROUNDERS)}")
        if self.grounder == REMOTE and not self.endpoint:
            raise ConfigurationError('the remote grounder needs an endpoint (--endpoint or NEPT_ENDPOINT)')
        if self.task not in TASKS:
            raise ConfigurationError(f"unknown task '{self.task}', expected vqa or reg")
        if self.remote_timeout <= 0 or self.remote_retries < 0 or self.remote_max_in_flight < 1:
            raise ConfigurationError('remote timeout, retries and in-flight limit are out of range')
        if self.jobs < 0:
            raise ConfigurationError(f'jobs must be 0 (all cores) or positive, got {self.jobs}')
        if self.seed < 0:
            raise ConfigurationError(f'seed must be non-negative, got {self.seed}')
        if not 0.0 <= self.noise <= 1.0:
            raise ConfigurationError(f'noise epsilon must lie in [0, 1], got {self.noise}')
        SmoothingParams(self.tau, self.gamma)
        self.gate_params()

    @classmethod
    def load(cls, config_file=None, **overrides) -> 'RunConfig':
        """
        Build a configuration from settings, a config file and flag overrides.

        Args:
            config_file: Optional env-style file of NEPT_* assignments
            **overrides: Flag values; None means the flag was not given

        Returns:
            A validated RunConfig
        """
        values: Dict[str, Any] = {name: settings.NEPT.get(key) for name, (key, _) in SETTINGS_KEYS.items()}
        values = {name: value for name, value in values.items() if value is not None}
        explicit = set()

        if config_file:
            from_file = read_config_file(config_file)
            values.update(from_file)
            explicit.update(from_file)

        known = {f.name for f in fields(cls)} - {'explicit'}
        for name, value in overrides.items():
            if name not in known:
                raise ConfigurationError(f"unknown configuration option '{name}'")
            if value is not None:
                values[name] = value
                explicit.add(name)

        if 'objects' in values:
            values['objects'] = tuple(values['objects'])
        try:
            return cls(explicit=frozenset(explicit), **values)
        except ConfigurationError:
            raise
        except NeptError as e:
            raise ConfigurationError(str(e))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f'invalid configuration: {e}')

    # Products

    @property
    def smoothing(self) -> SmoothingParams:
        return SmoothingParams(self.tau, self.gamma)

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1

    def exec_options(self, task: Optional[str] = None) -> ExecOptions:
        return ExecOptions(
            task=task or self.task,
            gradients=self.gradients,
            relate_literal=self.relate_literal,
            step_budget=self.step_budget,
            call_budget=self.call_budget,
            smoothing=self.smoothing,
            object_names=self.objects,
        )

    def gate_params(self) -> GateParams:
        """Preset gate parameters, with explicitly given threshold or temperature taking precedence."""
        try:
            if self.gate_preset:
                preset = GateParams.preset(self.gate_preset)
                tau = self.gate_tau if 'gate_tau' in self.explicit else preset.tau_gate
                temp = self.gate_temp if 'gate_temp' in self.explicit else preset.temp
                return GateParams(tau, temp)
            return GateParams(self.gate_tau, self.gate_temp)
        except NeptError as e:
            raise ConfigurationError(str(e))

    def build_grounder(self, scene: Scene):
        return build_grounder(
            self.grounder, scene, self.endpoint,
            include_self=self.include_self,
            timeout=self.remote_timeout,
            retries=self.remote_retries,
            max_in_flight=self.remote_max_in_flight,
            noise=self.noise,
            seed=self.seed,
        )


def read_config_file(path) -> Dict[str, Any]:
    """
    RunConfig values assigned in an env-style file.

    The file is parsed into a private mapping, so it never leaks into the
    process environment.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f'config file {path} does not exist')
    file_env = type('ConfigFileEnv', (environ.Env,), {'ENVIRON': {}})
    file_env.read_env(str(path), overwrite=True)
    reader = file_env()

    values = {}
    for name, (key, cast) in SETTINGS_KEYS.items():
        var = f'NEPT_{key}'
        if var not in file_env.ENVIRON:
            continue
        try:
            if cast is bool:
                values[name] = reader.bool(var)
            elif cast is int:
                values[name] = reader.int(var)
            elif cast is float:
                values[name] = reader.float(var)
            else:
                values[name] = reader.str(var)
        except (ValueError, ImproperlyConfigured) as e:
            raise ConfigurationError(f'{path}: invalid value for {var}: {e}')
    logger.info(f'Loaded {len(values)} settings from {path}')
    return values
