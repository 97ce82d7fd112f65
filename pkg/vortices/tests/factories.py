"""Small builders shared by the test modules."""

import math

import numpy as np

from vortices.kernel import KernelConfig
from vortices.state import DiagnosticsRecord, FlowState


def blob_state(positions, gamma=1.0, core_radius=0.0, normalization=1.0 / (2 * math.pi), **kwargs):
    positions = np.asarray(positions, dtype=float)
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), (positions.shape[0],))
    cfg = KernelConfig(normalization=normalization, core_radius=core_radius)
    return FlowState.create(positions, gamma, kernel_cfg=cfg, **kwargs)


def scattered_state(n, seed=0, spread=1.0, core_radius=0.2, **kwargs):
    """n blobs of positive circulation scattered around (0, pi)."""
    rng = np.random.default_rng(seed)
    positions = np.column_stack([
        rng.uniform(-spread, spread, n),
        math.pi + rng.uniform(-spread, spread, n),
    ])
    gamma = rng.uniform(0.5, 1.5, n) / n
    return blob_state(positions, gamma, core_radius=core_radius, **kwargs)


def record(t, diameter, tails=(), total_mass=1.0):
    return DiagnosticsRecord(
        time=t,
        total_mass=total_mass,
        diameter=diameter,
        max_abs_x1=diameter / 2,
        center_x1=0.0,
        first_moment_x1=0.0,
        hamiltonian=0.0,
        tail_mass=tuple(tails),
    )
