from typing import Optional

from apps.core.exceptions import ConfigurationError
from .base import Grounder
from .geometric import GeometricGrounder
from .oracle import OracleGrounder
from .perturbed import PerturbedGrounder
from .remote import RemoteGrounder
from .scene import Scene

ORACLE = 'oracle'
GEOMETRIC = 'geometric'
REMOTE = 'remote'
GROUNDERS = (ORACLE, GEOMETRIC, REMOTE)


def build_grounder(kind: str, scene: Scene, endpoint: Optional[str] = None, *,
                   include_self: bool = False, timeout: float = 30.0, retries: int = 2,
                   max_in_flight: int = 4, noise: float = 0.0, seed: int = 0) -> Grounder:
    """Grounder of the configured kind bound to ``scene``."""
    if kind == ORACLE:
        grounder = OracleGrounder(scene, include_self=include_self)
    elif kind == GEOMETRIC:
        grounder = GeometricGrounder(scene, include_self=include_self)
    elif kind == REMOTE:
        if not endpoint:
            raise ConfigurationError('the remote grounder needs an endpoint (--endpoint or NEPT_ENDPOINT)')
        grounder = RemoteGrounder(scene, endpoint, timeout=timeout, retries=retries,
                                  max_in_flight=max_in_flight)
    else:
        raise ConfigurationError(f"unknown grounder '{kind}', expected one of {', '.join(GROUNDERS)}")
    if noise > 0.0:
        grounder = PerturbedGrounder(grounder, noise, seed=seed)
    return grounder
