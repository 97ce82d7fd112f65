"""
Blob ensembles and the diagnostics computed from them.

A FlowState is an immutable struct of arrays (positions, circulations,
cores) plus time, viscosity, kernel configuration and the random stream for
viscous runs. Steps return new states; arrays are read-only.
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import (
    CoincidentBlobsError, EmptyEnsembleError, InputError, InvalidStateError,
    OutOfGridError, SingularKernelError,
)
from .kernel import (
    TWO_PI, CylPoint, KernelConfig, as_positions, induced_velocity,
    kernel_terms, vorticity_profile, wrap_angle, wrap_difference,
)
from .mollifier import make_mollifier
from .rng import RngStream

logger = logging.getLogger(__name__)

DEFAULT_BLOB_CORE = 0.1
HAMILTONIAN_ROWS = 256


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# ==============================================================================
# Flow state
# ==============================================================================

@dataclass(frozen=True)
class Blob:
    pos: CylPoint
    gamma: float
    core: float = DEFAULT_BLOB_CORE


@dataclass(frozen=True, eq=False)
class FlowState:
    """
    Blob ensemble at one instant.

    ``core`` is the rasterization radius of each blob; the Biot-Savart
    desingularization is set by ``kernel_cfg.core_radius``.
    """
    positions: np.ndarray
    gamma: np.ndarray
    core: np.ndarray
    time: float = 0.0
    viscosity: float = 0.0
    kernel_cfg: KernelConfig = field(default_factory=KernelConfig)
    rng: RngStream | None = None
    step_index: int = 0

    def __post_init__(self):
        positions = as_positions(self.positions).copy()
        n = positions.shape[0]
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        core = np.broadcast_to(np.asarray(self.core, dtype=float), (n,))
        if gamma.shape != (n,):
            raise InvalidStateError({'gamma': f'expected {n} circulations, got {gamma.shape[0]}'})
        if not np.all(np.isfinite(positions)):
            raise InvalidStateError({'positions': 'blob positions must be finite'})
        if not np.all(np.isfinite(gamma)):
            raise InvalidStateError({'gamma': 'circulations must be finite'})
        if n and not np.all(core > 0):
            raise InvalidStateError({'core': 'blob cores must be positive'})
        if not (math.isfinite(self.time) and self.time >= 0):
            raise InvalidStateError({'time': 'time must be finite and non-negative'})
        if not (math.isfinite(self.viscosity) and self.viscosity >= 0):
            raise InvalidStateError({'viscosity': 'viscosity must be finite and non-negative'})
        positions[:, 1] = wrap_angle(positions[:, 1])
        object.__setattr__(self, 'positions', _frozen(positions))
        object.__setattr__(self, 'gamma', _frozen(gamma))
        object.__setattr__(self, 'core', _frozen(core))
        object.__setattr__(self, 'time', float(self.time))
        object.__setattr__(self, 'viscosity', float(self.viscosity))
        object.__setattr__(self, 'step_index', int(self.step_index))

    @classmethod
    def create(cls, positions, gamma, core=DEFAULT_BLOB_CORE, **kwargs):
        """Build a state, rejecting coincident blobs when the kernel is singular."""
        state = cls(positions=positions, gamma=gamma, core=core, **kwargs)
        if state.kernel_cfg.is_singular and state.n_blobs > 1:
            _, counts = np.unique(state.positions, axis=0, return_counts=True)
            if np.any(counts > 1):
                raise CoincidentBlobsError(
                    'coincident blob positions are not allowed with a zero core radius'
                )
        return state

    @classmethod
    def from_blobs(cls, blobs, **kwargs):
        blobs = list(blobs)
        return cls.create(
            positions=[b.pos.as_tuple() for b in blobs],
            gamma=[b.gamma for b in blobs],
            core=[b.core for b in blobs],
            **kwargs,
        )

    @property
    def n_blobs(self):
        return self.positions.shape[0]

    @property
    def x1(self):
        return self.positions[:, 0]

    @property
    def x2(self):
        return self.positions[:, 1]

    @property
    def blobs(self):
        return [
            Blob(CylPoint(x1, x2), float(g), float(c))
            for (x1, x2), g, c in zip(self.positions, self.gamma, self.core)
        ]

    def advanced(self, positions, dt):
        """State after one step of length dt with new positions."""
        return replace(self, positions=positions, time=self.time + dt, step_index=self.step_index + 1)

    def at_time(self, time):
        return replace(self, time=time)

    def velocities(self, positions=None):
        """Velocity of every blob (or of blobs moved to ``positions``)."""
        positions = self.positions if positions is None else positions
        return induced_velocity(positions, positions, self.gamma, self.kernel_cfg)

    def translated(self, shift_x1=0.0, shift_x2=0.0):
        moved = self.positions + np.array([shift_x1, shift_x2])
        return replace(self, positions=moved)


# ==============================================================================
# Scalar diagnostics
# ==============================================================================

def _require_blobs(state, what):
    if state.n_blobs == 0:
        raise EmptyEnsembleError(f'{what} is undefined for an empty ensemble')


def total_mass(state):
    return float(np.sum(state.gamma))


def tail_mass(state, h):
    """Circulation carried by blobs with |x1| > h."""
    if h < 0:
        raise InputError({'h': 'tail radius must be non-negative'})
    return float(np.sum(state.gamma[np.abs(state.x1) > h]))


def mollified_tail(state, profile):
    """Sum of gamma_i * (1 - W(x1_i))."""
    return float(np.sum(state.gamma * (1.0 - profile.eval(state.x1))))


def diameter_x1(state):
    _require_blobs(state, 'diameter')
    return float(np.max(state.x1) - np.min(state.x1))


def max_abs_x1(state):
    _require_blobs(state, 'maximum extent')
    return float(np.max(np.abs(state.x1)))


def center_x1(state):
    """Circulation-weighted mean of x1; NaN when the total circulation is zero."""
    _require_blobs(state, 'center')
    mass = np.sum(state.gamma)
    if mass == 0.0:
        return math.nan
    return float(np.sum(state.gamma * state.x1) / mass)


def first_moment_x1(state):
    """Sum of gamma_i * |x1_i|."""
    return float(np.sum(state.gamma * np.abs(state.x1)))


def hamiltonian(state):
    """
    kappa * sum over i < j of gamma_i gamma_j G(x_i, x_j), with the same core
    as the dynamics and no truncation.
    """
    n = state.n_blobs
    cfg = state.kernel_cfg
    total = 0.0
    for start in range(0, n, HAMILTONIAN_ROWS):
        stop = min(start + HAMILTONIAN_ROWS, n)
        rows = state.positions[start:stop]
        cols = state.positions[start + 1:]
        if cols.shape[0] == 0:
            continue
        d1 = rows[:, 0:1] - cols[None, :, 0]
        d2 = rows[:, 1:2] - cols[None, :, 1]
        terms = kernel_terms(d1, d2, cfg.core_term, with_log=True)
        # column k of this block is blob start + 1 + k; keep j > i only
        upper = np.arange(cols.shape[0])[None, :] >= np.arange(stop - start)[:, None]
        if np.any(terms.singular & upper):
            raise SingularKernelError('Hamiltonian is singular for coincident blobs with a zero core')
        weights = state.gamma[start:stop, None] * state.gamma[None, start + 1:]
        green_values = np.where(upper, -0.5 * terms.log_denominator, 0.0)
        total += float(np.sum(np.where(upper, weights * green_values, 0.0)))
    return cfg.normalization * total


# ==============================================================================
# Mollified tail rate
# ==============================================================================

def mollified_tail_rate(state, profile):
    """
    Time derivative of the mollified tail, -sum gamma_i W'(x1_i) u1_i - nu sum gamma_i W''(x1_i).

    The viscous term is the expected drift of the random-walk step.
    """
    if state.n_blobs == 0:
        return 0.0
    u1 = state.velocities()[:, 0]
    transport = -np.sum(state.gamma * profile.eval_d1(state.x1) * u1)
    diffusion = -state.viscosity * np.sum(state.gamma * profile.eval_d2(state.x1))
    return float(transport + diffusion)


def mollified_tail_rate_pairs(state, profile):
    """
    The same rate written as a pair sum,
    -kappa/2 sum_{i,j} gamma_i gamma_j (W'(x1_i) - W'(x1_j)) dG/dx2(x_i, x_j),
    which only involves pairs straddling the transition band.
    """
    n = state.n_blobs
    if n == 0:
        return 0.0
    cfg = state.kernel_cfg
    slope = profile.eval_d1(state.x1)
    transport = 0.0
    for start in range(0, n, HAMILTONIAN_ROWS):
        stop = min(start + HAMILTONIAN_ROWS, n)
        d1 = state.x1[start:stop, None] - state.x1[None, :]
        d2 = state.x2[start:stop, None] - state.x2[None, :]
        g2 = kernel_terms(d1, d2, cfg.core_term).dG_dx2
        if cfg.truncation_radius is not None:
            g2 = np.where(np.abs(d1) > cfg.truncation_radius, 0.0, g2)
        jump = slope[start:stop, None] - slope[None, :]
        weights = state.gamma[start:stop, None] * state.gamma[None, :]
        transport += float(np.sum(weights * jump * g2))
    diffusion = -state.viscosity * np.sum(state.gamma * profile.eval_d2(state.x1))
    return float(-0.5 * cfg.normalization * transport + diffusion)


# ==============================================================================
# Rasterization
# ==============================================================================

@dataclass(frozen=True)
class GridSpec:
    """Cell-centred grid; x2 is periodic when the box spans the full circle."""
    x1_min: float
    x1_max: float
    n1: int
    x2_min: float = 0.0
    x2_max: float = TWO_PI
    n2: int = 64

    def __post_init__(self):
        if not (self.x1_max > self.x1_min and self.x2_max > self.x2_min):
            raise InputError('grid bounds must satisfy min < max on both axes')
        if self.n1 < 1 or self.n2 < 1:
            raise InputError('grid needs at least one cell per axis')
        if self.x2_max - self.x2_min > TWO_PI * (1 + 1e-12):
            raise InputError('grid x2 span cannot exceed one period')

    @property
    def dx1(self):
        return (self.x1_max - self.x1_min) / self.n1

    @property
    def dx2(self):
        return (self.x2_max - self.x2_min) / self.n2

    @property
    def cell_area(self):
        return self.dx1 * self.dx2

    @property
    def periodic(self):
        return math.isclose(self.x2_max - self.x2_min, TWO_PI, rel_tol=1e-12)

    @property
    def x1_centers(self):
        return self.x1_min + (np.arange(self.n1) + 0.5) * self.dx1

    @property
    def x2_centers(self):
        return self.x2_min + (np.arange(self.n2) + 0.5) * self.dx2

    def translated(self, shift_x1=0.0, shift_x2=0.0):
        return replace(self, x1_min=self.x1_min + shift_x1, x1_max=self.x1_max + shift_x1,
                       x2_min=self.x2_min + shift_x2, x2_max=self.x2_max + shift_x2)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Values on a GridSpec, indexed [i1, i2]."""
    grid: GridSpec
    values: np.ndarray

    def integral(self):
        return float(np.sum(self.values) * self.grid.cell_area)

    def max(self):
        return float(np.max(self.values))


def _covers(grid, state):
    x1 = state.x1
    inside = (x1 >= grid.x1_min) & (x1 <= grid.x1_max)
    if not grid.periodic:
        offset = wrap_angle(state.x2 - grid.x2_min)
        inside &= offset <= grid.x2_max - grid.x2_min
    return inside


def rasterize(state, grid, profile='bump'):
    """
    Spread each blob's circulation over the grid.

    ``bump`` uses the compact profile (1 - q**2)**3 of radius equal to the blob
    core; ``kernel`` uses the vorticity profile of the desingularized kernel,
    so the field is the curl of the induced velocity. Each blob's weights are
    normalized to its circulation; a blob narrower than a cell is deposited in
    the nearest cell.
    """
    if profile not in ('bump', 'kernel'):
        raise InputError({'profile': f'unknown rasterization profile {profile!r}'})
    inside = _covers(grid, state)
    if not np.all(inside):
        outside = np.flatnonzero(~inside)
        raise OutOfGridError(f'{outside.size} blob(s) lie outside the grid, first index {outside[0]}')

    x1c = grid.x1_centers
    x2c = grid.x2_centers
    values = np.zeros((grid.n1, grid.n2))
    for (bx1, bx2), gamma, core in zip(state.positions, state.gamma, state.core):
        if gamma == 0.0:
            continue
        d1 = (x1c - bx1)[:, None]
        d2 = wrap_difference(x2c - bx2)[None, :]
        if profile == 'bump':
            q2 = (d1 * d1 + d2 * d2) / (core * core)
            weights = np.where(q2 < 1.0, (1.0 - np.minimum(q2, 1.0)) ** 3, 0.0)
        else:
            weights = vorticity_profile(d1, d2, state.kernel_cfg.core_radius)
        total = float(np.sum(weights))
        if total > 0.0:
            values += gamma * weights / (total * grid.cell_area)
        else:
            i1 = int(np.argmin(np.abs(x1c - bx1)))
            i2 = int(np.argmin(np.abs(wrap_difference(x2c - bx2))))
            values[i1, i2] += gamma / grid.cell_area
    return ScalarField(grid=grid, values=values)


# ==============================================================================
# Diagnostics records
# ==============================================================================

def _label(value):
    return format(float(value), '.17g')


@dataclass(frozen=True)
class DiagnosticsPlan:
    """Tail radii and mollifier (R, h) pairs recorded at each scheduled time."""
    h_grid: tuple = (1.0, 2.0, 4.0, 8.0)
    mollifier_pairs: tuple = ((4.0, 1.0),)

    def __post_init__(self):
        h_grid = tuple(float(h) for h in self.h_grid)
        pairs = tuple((float(R), float(h)) for R, h in self.mollifier_pairs)
        if any(h < 0 for h in h_grid):
            raise InputError({'h_grid': 'tail radii must be non-negative'})
        if any(b <= a for a, b in zip(h_grid, h_grid[1:])):
            raise InputError({'h_grid': 'tail radii must be strictly increasing'})
        object.__setattr__(self, 'h_grid', h_grid)
        object.__setattr__(self, 'mollifier_pairs', pairs)
        object.__setattr__(self, '_profiles', tuple(make_mollifier(R, h) for R, h in pairs))

    @property
    def profiles(self):
        return self._profiles

    def csv_header(self):
        header = list(SCALAR_COLUMNS)
        header += [f'm_h={_label(h)}' for h in self.h_grid]
        header += [f'mu_R={_label(R)}_h={_label(h)}' for R, h in self.mollifier_pairs]
        return header

    def to_dict(self):
        return {'h_grid': list(self.h_grid), 'mollifier_pairs': [list(p) for p in self.mollifier_pairs]}


SCALAR_COLUMNS = (
    'time', 'total_mass', 'diameter', 'max_abs_x1',
    'center_x1', 'first_moment_x1', 'hamiltonian',
)
TAIL_COLUMN = re.compile(r'^m_h=(?P<h>[^_]+)$')
MOLLIFIED_COLUMN = re.compile(r'^mu_R=(?P<R>[^_]+)_h=(?P<h>.+)$')


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Diagnostics of one ensemble member at one scheduled time."""
    time: float
    total_mass: float
    diameter: float
    max_abs_x1: float
    center_x1: float
    first_moment_x1: float
    hamiltonian: float
    tail_mass: tuple = ()
    mollified_tail: tuple = ()
    ensemble_id: int | None = None
    seed: int | None = None

    def plan(self):
        return DiagnosticsPlan(
            h_grid=tuple(h for h, _ in self.tail_mass),
            mollifier_pairs=tuple((R, h) for R, h, _ in self.mollified_tail),
        )

    def tail_at(self, h):
        for radius, value in self.tail_mass:
            if radius == h:
                return value
        raise KeyError(h)

    def to_row(self):
        row = [getattr(self, name) for name in SCALAR_COLUMNS]
        row += [m for _, m in self.tail_mass]
        row += [mu for _, _, mu in self.mollified_tail]
        return [_label(v) for v in row]

    @classmethod
    def from_row(cls, header, row, ensemble_id=None, seed=None):
        values = dict(zip(header, row))
        scalars = {name: float(values[name]) for name in SCALAR_COLUMNS}
        tails, mollified = [], []
        for column in header:
            if match := TAIL_COLUMN.match(column):
                tails.append((float(match['h']), float(values[column])))
            elif match := MOLLIFIED_COLUMN.match(column):
                mollified.append((float(match['R']), float(match['h']), float(values[column])))
        return cls(**scalars, tail_mass=tuple(tails), mollified_tail=tuple(mollified),
                   ensemble_id=ensemble_id, seed=seed)

    def to_dict(self):
        data = {name: getattr(self, name) for name in SCALAR_COLUMNS}
        data['tail_mass'] = [list(p) for p in self.tail_mass]
        data['mollified_tail'] = [list(p) for p in self.mollified_tail]
        data['ensemble_id'] = self.ensemble_id
        data['seed'] = self.seed
        return data


def diagnose(state, plan, ensemble_id=None, seed=None):
    """Evaluate every diagnostic of ``plan`` on ``state``."""
    _require_blobs(state, 'diagnostics record')
    return DiagnosticsRecord(
        time=state.time,
        total_mass=total_mass(state),
        diameter=diameter_x1(state),
        max_abs_x1=max_abs_x1(state),
        center_x1=center_x1(state),
        first_moment_x1=first_moment_x1(state),
        hamiltonian=hamiltonian(state),
        tail_mass=tuple((h, tail_mass(state, h)) for h in plan.h_grid),
        mollified_tail=tuple(
            (profile.R, profile.h, mollified_tail(state, profile)) for profile in plan.profiles
        ),
        ensemble_id=ensemble_id,
        seed=seed,
    )
