"""
Random-vortex dynamics for viscous flow.

Each step transports the blobs with the inviscid scheme and then adds an
independent Gaussian displacement of variance 2 nu dt per coordinate
(Lie splitting). Ensemble averages over seeds approximate the viscous flow.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .euler import EulerStepConfig, Integration, _finish, transport
from .exceptions import InputError, StepConfigError
from .rng import RngStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NsStepConfig:
    """
    ``transport.dt`` is ignored; ``dt`` governs both sub-steps.
    With ``freeze_transport`` the blobs only diffuse.
    """
    dt: float
    transport: EulerStepConfig = field(default_factory=lambda: EulerStepConfig(dt=1.0))
    rng_seed: int = 0
    ensemble_id: int = 0
    freeze_transport: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise StepConfigError({'dt': 'time step must be positive and finite'})
        if self.transport.adaptive:
            raise StepConfigError({'adaptive': 'adaptive transport is not available for viscous runs'})

    @property
    def stream(self):
        return RngStream(self.rng_seed, self.ensemble_id)

    def to_dict(self):
        return {
            'dt': self.dt,
            'scheme': self.transport.scheme.value,
            'rng_seed': self.rng_seed,
            'ensemble_id': self.ensemble_id,
            'freeze_transport': self.freeze_transport,
        }


def ns_step(state, cfg):
    """One transport-then-diffuse step; increments are keyed by (seed, ensemble, step, blob)."""
    if not state.viscosity > 0.0:
        raise InputError({'viscosity': 'ns_step requires a positive viscosity'})
    stream = state.rng or cfg.stream
    if cfg.freeze_transport:
        moved = np.array(state.positions)
    else:
        moved = transport(state, cfg.dt, cfg.transport.scheme)
    noise = stream.normals(state.step_index, state.n_blobs)
    moved = moved + math.sqrt(2.0 * state.viscosity * cfg.dt) * noise
    return replace(_finish(state, moved, cfg.dt), rng=stream)


class NsRun(Integration):

    def __init__(self, state, t_end, cfg, schedule, diagnostics=None, on_record=None):
        if not state.viscosity > 0.0:
            raise InputError({'viscosity': 'run_ns requires a positive viscosity'})
        if state.rng is None:
            state = replace(state, rng=cfg.stream)
        super().__init__(state, t_end, schedule, cfg.dt, diagnostics, on_record,
                         ensemble_id=state.rng.ensemble_id, seed=state.rng.seed)
        self.cfg = cfg

    def _step(self, state, dt):
        return ns_step(state, replace(self.cfg, dt=dt)), dt, self.cfg.dt


def run_ns(s0, t_end, cfg, schedule, diagnostics=None, on_record=None):
    """Lazily integrate one ensemble member; iterate the result for records."""
    return NsRun(s0, t_end, cfg, schedule, diagnostics, on_record)
