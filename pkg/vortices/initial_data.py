"""
Initial vorticity patches and their discretization into blobs.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import qmc

from .exceptions import InvalidPatchError
from .kernel import KernelConfig, wrap_difference
from .state import FlowState

logger = logging.getLogger(__name__)

SUBSAMPLES = 16
CELL_BATCH = 4096


class PatchShape(str, Enum):
    UNIFORM_DISK = 'uniform_disk'
    GAUSSIAN_TRUNCATED = 'gaussian_truncated'
    RING = 'ring'


class Seeding(str, Enum):
    GRID = 'grid'
    QUASI_RANDOM = 'quasi_random'


@dataclass(frozen=True)
class PatchSpec:
    """
    A compactly supported, non-negative vorticity patch centred at ``center``.

    Shape parameters: ``radius`` and ``omega_level`` for uniform_disk;
    ``sigma``, ``cutoff_radius`` and ``amplitude`` for gaussian_truncated;
    ``r_in``, ``r_out`` and ``omega_level`` for ring.
    """
    shape: PatchShape = PatchShape.UNIFORM_DISK
    center: tuple = (0.0, math.pi)
    radius: float | None = 1.0
    omega_level: float | None = 1.0
    sigma: float | None = None
    cutoff_radius: float | None = None
    amplitude: float | None = None
    r_in: float | None = None
    r_out: float | None = None
    n_blobs: int = 1000
    seeding: Seeding = Seeding.GRID
    core_factor: float = 1.5

    def __post_init__(self):
        try:
            object.__setattr__(self, 'shape', PatchShape(self.shape))
            object.__setattr__(self, 'seeding', Seeding(self.seeding))
        except ValueError as exc:
            raise InvalidPatchError(str(exc))
        object.__setattr__(self, 'center', (float(self.center[0]), float(self.center[1])))
        self.clean()

    def clean(self):
        errors = {}

        def positive(name):
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value <= 0:
                errors[name] = f'{self.shape.value} patches need a positive {name}.'

        if self.shape == PatchShape.UNIFORM_DISK:
            positive('radius')
            positive('omega_level')
        elif self.shape == PatchShape.GAUSSIAN_TRUNCATED:
            positive('sigma')
            positive('cutoff_radius')
            positive('amplitude')
        else:
            positive('r_out')
            positive('omega_level')
            if self.r_in is None or self.r_in < 0:
                errors['r_in'] = 'ring patches need a non-negative inner radius.'
            elif self.r_out is not None and self.r_in >= self.r_out:
                errors['r_in'] = 'ring inner radius must be smaller than the outer radius (zero mass).'
        if self.n_blobs < 1:
            errors['n_blobs'] = 'at least one blob is required.'
        if not self.core_factor > 0:
            errors['core_factor'] = 'core factor must be positive.'
        if errors:
            raise InvalidPatchError(errors)

    @property
    def support_radius(self):
        if self.shape == PatchShape.UNIFORM_DISK:
            return self.radius
        if self.shape == PatchShape.GAUSSIAN_TRUNCATED:
            return self.cutoff_radius
        return self.r_out

    @property
    def support_x1_bound(self):
        """Largest |x1| reached by the support."""
        return abs(self.center[0]) + self.support_radius

    @property
    def support_area(self):
        if self.shape == PatchShape.RING:
            return math.pi * (self.r_out ** 2 - self.r_in ** 2)
        return math.pi * self.support_radius ** 2

    @property
    def peak(self):
        if self.shape == PatchShape.GAUSSIAN_TRUNCATED:
            return self.amplitude
        return self.omega_level

    def analytic_mass(self):
        if self.shape == PatchShape.UNIFORM_DISK:
            return self.omega_level * self.support_area
        if self.shape == PatchShape.RING:
            return self.omega_level * self.support_area
        s2 = self.sigma ** 2
        return self.amplitude * 2.0 * math.pi * s2 * (1.0 - math.exp(-self.cutoff_radius ** 2 / (2.0 * s2)))

    def omega(self, x1, x2):
        """Vorticity at (x1, x2), measuring x2 offsets the short way round."""
        d1 = np.asarray(x1, dtype=float) - self.center[0]
        d2 = wrap_difference(np.asarray(x2, dtype=float) - self.center[1])
        r2 = d1 * d1 + d2 * d2
        if self.shape == PatchShape.UNIFORM_DISK:
            return np.where(r2 <= self.radius ** 2, self.omega_level, 0.0)
        if self.shape == PatchShape.RING:
            return np.where((r2 <= self.r_out ** 2) & (r2 >= self.r_in ** 2), self.omega_level, 0.0)
        inside = r2 <= self.cutoff_radius ** 2
        return np.where(inside, self.amplitude * np.exp(-r2 / (2.0 * self.sigma ** 2)), 0.0)

    def to_dict(self):
        return {
            'shape': self.shape.value,
            'center': list(self.center),
            'radius': self.radius,
            'omega_level': self.omega_level,
            'sigma': self.sigma,
            'cutoff_radius': self.cutoff_radius,
            'amplitude': self.amplitude,
            'r_in': self.r_in,
            'r_out': self.r_out,
            'n_blobs': self.n_blobs,
            'seeding': self.seeding.value,
            'core_factor': self.core_factor,
        }


def _grid_blobs(spec, spacing):
    """Lattice cells of side ``spacing``; circulation and centroid by sub-cell quadrature."""
    reach = int(math.ceil(spec.support_radius / spacing)) + 1
    index = np.arange(-reach, reach + 1)
    c1 = spec.center[0] + index * spacing
    c2 = spec.center[1] + index * spacing
    cells = np.stack(np.meshgrid(c1, c2, indexing='ij'), axis=-1).reshape(-1, 2)
    offsets = (np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES - 0.5
    o1, o2 = np.meshgrid(offsets * spacing, offsets * spacing, indexing='ij')
    o1, o2 = o1.reshape(-1), o2.reshape(-1)
    sub_area = (spacing / SUBSAMPLES) ** 2

    positions, gammas = [], []
    for start in range(0, cells.shape[0], CELL_BATCH):
        batch = cells[start:start + CELL_BATCH]
        s1 = batch[:, 0:1] + o1[None, :]
        s2 = batch[:, 1:2] + o2[None, :]
        w = spec.omega(s1, s2)
        gamma = w.sum(axis=1) * sub_area
        keep = gamma > 0
        if not keep.any():
            continue
        w, s1, s2 = w[keep], s1[keep], s2[keep]
        weight = w.sum(axis=1)
        positions.append(np.column_stack([(w * s1).sum(axis=1) / weight, (w * s2).sum(axis=1) / weight]))
        gammas.append(gamma[keep])
    if not gammas:
        return np.zeros((0, 2)), np.zeros(0)
    return np.concatenate(positions), np.concatenate(gammas)


def _quasi_random_blobs(spec, spacing):
    """Sobol points in the bounding square; each carries omega times its share of the square."""
    half = spec.support_radius
    box_area = (2.0 * half) ** 2
    inside_fraction = spec.support_area / box_area
    count = int(math.ceil(spec.n_blobs / inside_fraction))
    points = qmc.Sobol(d=2, scramble=False).random_base2(max(1, math.ceil(math.log2(count))))[:count]
    x1 = spec.center[0] + (2.0 * points[:, 0] - 1.0) * half
    x2 = spec.center[1] + (2.0 * points[:, 1] - 1.0) * half
    w = spec.omega(x1, x2)
    keep = w > 0
    gammas = w[keep] * box_area / count
    return np.column_stack([x1[keep], x2[keep]]), gammas


def discretize(spec, kernel_cfg=None, viscosity=0.0):
    """
    Place roughly ``spec.n_blobs`` blobs on the patch.

    Circulations are scaled so the total equals the patch's analytic mass.
    Blob cores are ``core_factor`` times the inter-blob spacing. Without an
    explicit kernel configuration the kernel core is set to the blob core.
    """
    if spec.support_radius >= math.pi:
        logger.warning('patch support radius %.4g reaches pi: the patch overlaps itself in x2',
                       spec.support_radius)
    spacing = math.sqrt(spec.support_area / spec.n_blobs)
    core = spec.core_factor * spacing
    if spec.n_blobs == 1:
        positions = np.array([spec.center])
        gammas = np.array([spec.analytic_mass()])
    elif spec.seeding == Seeding.GRID:
        positions, gammas = _grid_blobs(spec, spacing)
    else:
        positions, gammas = _quasi_random_blobs(spec, spacing)

    if gammas.size == 0 or not np.sum(gammas) > 0:
        raise InvalidPatchError('patch discretizes to zero circulation')
    gammas = gammas * (spec.analytic_mass() / float(np.sum(gammas)))
    if kernel_cfg is None:
        kernel_cfg = KernelConfig(core_radius=core)
    logger.info('discretized %s patch into %d blobs (spacing %.4g, mass %.6g)',
                spec.shape.value, gammas.size, spacing, float(np.sum(gammas)))
    return FlowState.create(positions, gammas, core=core, kernel_cfg=kernel_cfg, viscosity=viscosity)
