"""
Green function of the Laplacian on the cylinder R x T and Biot-Savart sums.

The flow domain is the strip x1 in R, x2 in [0, 2*pi) with x2 periodic.
With a = x1 - y1 and b = x2 - y2 the Green function is

    G(x, y) = -1/2 log(cosh a - cos b)

and the velocity induced by circulation gamma at y is

    u(x) = kappa * gamma * (dG/dx2, -dG/dx1).

The desingularized kernel replaces the denominator by
cosh a - cos b + delta**2 / 2. Everything is evaluated through

    cosh a - cos b = 2 (sinh(a/2)**2 + sin(b/2)**2)

which stays accurate as a, b -> 0, and through an exponentially scaled
rewrite for |a| > 30 so that nothing overflows.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .conf import get_setting
from .exceptions import InputError, KernelConfigError, SingularKernelError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
LOG2 = math.log(2.0)

# Beyond this |x1 - y1| the scaled far-field formulas are used.
ASYMPTOTIC_SWITCH = 30.0
MIN_TRUNCATION_RADIUS = 10.0
# Upper bound on target x source pairs held in memory by one block.
BLOCK_PAIRS = 1 << 21


def wrap_angle(x2):
    """Map angles into [0, 2*pi). Scalars stay scalars."""
    wrapped = np.mod(x2, TWO_PI)
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def wrap_difference(d2):
    """Map angle differences into [-pi, pi)."""
    return np.mod(np.asarray(d2, dtype=float) + math.pi, TWO_PI) - math.pi


# ==============================================================================
# Types
# ==============================================================================

@dataclass(frozen=True)
class CylPoint:
    """A point on the cylinder; x2 is stored wrapped into [0, 2*pi)."""
    x1: float
    x2: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise InputError('cylinder coordinates must be finite')
        object.__setattr__(self, 'x1', float(self.x1))
        object.__setattr__(self, 'x2', wrap_angle(float(self.x2)))

    def as_tuple(self):
        return (self.x1, self.x2)


def as_positions(points):
    """Return an (n, 2) float array from CylPoints, pairs or an array."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
    else:
        rows = [p.as_tuple() if isinstance(p, CylPoint) else tuple(p) for p in points]
        arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f'positions must have shape (n, 2), got {arr.shape}')
    return arr


@dataclass(frozen=True)
class KernelConfig:
    """
    Biot-Savart kernel parameters.

    ``truncation_radius`` of None means no truncation. When set, pairs with
    |x1 - y1| beyond it contribute exactly zero to induced velocities.
    """
    normalization: float = 1.0 / TWO_PI
    core_radius: float = 0.0
    truncation_radius: float | None = None

    def __post_init__(self):
        self.clean()

    def clean(self):
        errors = {}
        if not (math.isfinite(self.normalization) and self.normalization > 0):
            errors['normalization'] = 'Kernel normalization must be a positive finite number.'
        if not (math.isfinite(self.core_radius) and self.core_radius >= 0):
            errors['core_radius'] = 'Core radius must be finite and non-negative.'
        if self.truncation_radius is not None and not (self.truncation_radius >= MIN_TRUNCATION_RADIUS):
            errors['truncation_radius'] = (
                f'Truncation radius must be at least {MIN_TRUNCATION_RADIUS:g} or omitted.'
            )
        if errors:
            raise KernelConfigError(errors)

    @property
    def core_term(self):
        """The constant added to cosh a - cos b."""
        return 0.5 * self.core_radius ** 2

    @property
    def is_singular(self):
        return self.core_radius == 0.0

    def untruncated(self):
        return replace(self, truncation_radius=None)

    def to_dict(self):
        return {
            'normalization': self.normalization,
            'core_radius': self.core_radius,
            'truncation_radius': self.truncation_radius,
        }

    @classmethod
    def from_dict(cls, data):
        radius = data.get('truncation_radius')
        return cls(
            normalization=float(data.get('normalization', 1.0 / TWO_PI)),
            core_radius=float(data.get('core_radius', 0.0)),
            truncation_radius=None if radius is None else float(radius),
        )


@dataclass(frozen=True)
class DecayEnvelope:
    """Pointwise bound |dG/dx2| <= c1 exp(-c2 r) / r inside the fundamental strip."""
    c1: float = 2.0
    c2: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.c1) and self.c1 >= 0):
            raise InputError({'c1': 'Envelope constant c1 must be finite and non-negative.'})
        if not (math.isfinite(self.c2) and self.c2 > 0):
            raise InputError({'c2': 'Envelope rate c2 must be finite and positive.'})

    def bound(self, r):
        r = np.asarray(r, dtype=float)
        return self.c1 * np.exp(-self.c2 * r) / r

    def to_dict(self):
        return {'c1': self.c1, 'c2': self.c2}


DEFAULT_ENVELOPE = DecayEnvelope()


@dataclass(frozen=True)
class EnvelopeValidation:
    """Outcome of checking a DecayEnvelope against the exact kernel."""
    envelope: DecayEnvelope
    samples: int
    max_ratio: float
    worst_separation: tuple

    @property
    def passed(self):
        return self.max_ratio <= 1.0

    def to_dict(self):
        return {
            'c1': self.envelope.c1,
            'c2': self.envelope.c2,
            'samples': self.samples,
            'max_ratio': self.max_ratio,
            'worst_separation': list(self.worst_separation),
            'passed': self.passed,
        }


class KernelTerms(NamedTuple):
    """Pieces of the kernel at separations (a, b)."""
    log_denominator: np.ndarray | None
    dG_dx2: np.ndarray
    dG_dx1: np.ndarray
    singular: np.ndarray


# ==============================================================================
# Vectorized evaluation
# ==============================================================================

def kernel_terms(d1, d2, core_term=0.0, with_log=False):
    """
    Evaluate dG/dx2, dG/dx1 (and optionally log of the denominator) at
    separations (d1, d2), broadcasting the two arrays.

    Entries where the denominator vanishes (d = 0 with no core) are flagged in
    ``singular`` and carry zero derivatives and a NaN log.
    """
    d1, d2 = np.broadcast_arrays(np.asarray(d1, dtype=float), np.asarray(d2, dtype=float))
    a = np.abs(d1)
    b = np.abs(d2)
    far = a > ASYMPTOTIC_SWITCH
    a_near = np.where(far, 0.0, a)

    sh = np.sinh(0.5 * a_near)
    sn = np.sin(0.5 * b)
    denom = 2.0 * (sh * sh + sn * sn) + core_term
    singular = (denom <= 0.0) & ~far
    denom = np.where(singular | far, 1.0, denom)

    sin_b = np.copysign(np.sin(b), d2)
    dG_dx2 = -sin_b / (2.0 * denom)
    dG_dx1 = -np.copysign(np.sinh(a_near), d1) / (2.0 * denom)
    log_denominator = np.log(denom) if with_log else None

    if far.any():
        a_far = a[far]
        decay = np.exp(-a_far)
        excess = decay * (decay - 2.0 * np.cos(b[far]) + 2.0 * core_term)
        scaled = 1.0 + excess
        dG_dx2[far] = -sin_b[far] * decay / scaled
        dG_dx1[far] = -np.copysign(0.5 * (1.0 - decay * decay) / scaled, d1[far])
        if with_log:
            log_denominator[far] = a_far - LOG2 + np.log1p(excess)

    if singular.any():
        dG_dx2[singular] = 0.0
        dG_dx1[singular] = 0.0
        if with_log:
            log_denominator[singular] = np.nan
    return KernelTerms(log_denominator, dG_dx2, dG_dx1, singular)


def vorticity_profile(d1, d2, core_radius):
    """
    Vorticity carried by one unit-circulation blob of the desingularized kernel
    with kappa = 1/(2*pi); integrates to one over the cylinder.
    """
    if core_radius <= 0:
        raise InputError({'core_radius': 'The kernel vorticity profile needs a positive core radius.'})
    c = 0.5 * core_radius ** 2
    a = np.minimum(np.abs(np.asarray(d1, dtype=float)), ASYMPTOTIC_SWITCH)
    b = np.abs(np.asarray(d2, dtype=float))
    sh = np.sinh(0.5 * a)
    sn = np.sin(0.5 * b)
    chord = 2.0 * (sh * sh + sn * sn)
    # cosh a + cos b = chord + 2 cos b
    return (0.5 * c) * (chord + 2.0 * np.cos(b)) / (chord + c) ** 2 / TWO_PI


# ==============================================================================
# Point evaluation
# ==============================================================================

def _separation(x, y):
    x = x if isinstance(x, CylPoint) else CylPoint(*x)
    y = y if isinstance(y, CylPoint) else CylPoint(*y)
    return x.x1 - y.x1, x.x2 - y.x2


def green(x, y, core_radius=0.0):
    """G(x, y) = -1/2 log(cosh(x1 - y1) - cos(x2 - y2) + core_radius**2 / 2)."""
    d1, d2 = _separation(x, y)
    terms = kernel_terms(d1, d2, 0.5 * core_radius ** 2, with_log=True)
    if terms.singular:
        raise SingularKernelError('Green function is singular at x = y')
    return -0.5 * float(terms.log_denominator)


def dG_dx2(x, y, core_radius=0.0):
    d1, d2 = _separation(x, y)
    terms = kernel_terms(d1, d2, 0.5 * core_radius ** 2)
    if terms.singular:
        raise SingularKernelError('kernel gradient is singular at x = y')
    return float(terms.dG_dx2)


def dG_dx1(x, y, core_radius=0.0):
    d1, d2 = _separation(x, y)
    terms = kernel_terms(d1, d2, 0.5 * core_radius ** 2)
    if terms.singular:
        raise SingularKernelError('kernel gradient is singular at x = y')
    return float(terms.dG_dx1)


def grad_perp_green(x, y, cfg=None):
    """
    kappa * (dG/dx2, -dG/dx1) with the configured core.

    Self-interaction (x = y) contributes zero.
    """
    cfg = cfg or KernelConfig()
    d1, d2 = _separation(x, y)
    terms = kernel_terms(d1, d2, cfg.core_term)
    return np.array([
        cfg.normalization * float(terms.dG_dx2),
        -cfg.normalization * float(terms.dG_dx1),
    ])


# ==============================================================================
# Biot-Savart summation
# ==============================================================================

def _velocity_block(targets, sources, circulations, cfg):
    d1 = targets[:, 0:1] - sources[None, :, 0]
    d2 = targets[:, 1:2] - sources[None, :, 1]
    terms = kernel_terms(d1, d2, cfg.core_term)
    g2, g1 = terms.dG_dx2, terms.dG_dx1
    if cfg.truncation_radius is not None:
        outside = np.abs(d1) > cfg.truncation_radius
        g2[outside] = 0.0
        g1[outside] = 0.0
    u1 = (g2 * circulations).sum(axis=1)
    u2 = -(g1 * circulations).sum(axis=1)
    return cfg.normalization * np.column_stack([u1, u2])


def induced_velocity(targets, sources, circulations=None, cfg=None, workers=None):
    """
    Velocity induced at ``targets`` by point circulations at ``sources``.

    ``sources`` is an (m, 2) array with ``circulations`` of length m, or a
    sequence of (CylPoint, circulation) pairs when ``circulations`` is None.
    Zero-circulation sources are skipped and coincident pairs contribute
    nothing. Targets are processed in fixed-size blocks, optionally on a
    thread pool; per-target sums run in source order, so results do not
    depend on the number of workers.
    """
    cfg = cfg or KernelConfig()
    targets = as_positions(targets)
    if circulations is None:
        pairs = list(sources)
        sources = as_positions([p for p, _ in pairs])
        circulations = np.asarray([g for _, g in pairs], dtype=float)
    else:
        sources = as_positions(sources)
        circulations = np.asarray(circulations, dtype=float)
    if circulations.shape != (sources.shape[0],):
        raise InputError('one circulation per source is required')

    active = circulations != 0.0
    sources, circulations = sources[active], circulations[active]
    n = targets.shape[0]
    if n == 0 or sources.shape[0] == 0:
        return np.zeros((n, 2))

    chunk = int(get_setting('VORTEX_TARGET_CHUNK', 256))
    chunk = max(1, min(chunk, BLOCK_PAIRS // sources.shape[0]))
    blocks = [slice(start, min(start + chunk, n)) for start in range(0, n, chunk)]
    workers = workers or int(get_setting('VORTEX_MAX_WORKERS', 1))

    def evaluate(block):
        return _velocity_block(targets[block], sources, circulations, cfg)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(evaluate, blocks))
    else:
        parts = [evaluate(block) for block in blocks]
    return np.concatenate(parts)


def far_field_u2_limit(sources, circulations, cfg=None, samples=16):
    """
    Limits of u2 as x1 -> -inf and x1 -> +inf, returned as (minus, plus).

    Evaluated with the untruncated kernel 40 units beyond the outermost
    source, averaged over ``samples`` equally spaced x2 values.
    """
    cfg = (cfg or KernelConfig()).untruncated()
    sources = as_positions(sources)
    if sources.shape[0] == 0:
        return 0.0, 0.0
    reach = float(np.max(np.abs(sources[:, 0]))) + 40.0
    x2 = np.arange(samples) * (TWO_PI / samples)
    limits = []
    for x1 in (-reach, reach):
        targets = np.column_stack([np.full(samples, x1), x2])
        u = induced_velocity(targets, sources, circulations, cfg)
        limits.append(float(u[:, 1].mean()))
    return tuple(limits)


# ==============================================================================
# Decay envelope
# ==============================================================================

def envelope_samples(samples):
    """Separations covering the fundamental strip: r in [1e-3, 30], |b| <= pi."""
    per_axis = int(math.ceil(math.sqrt(samples)))
    radii = np.logspace(-3.0, math.log10(30.0), per_axis)
    theta_max = np.where(radii <= math.pi, 0.5 * math.pi,
                         np.arcsin(np.minimum(1.0, math.pi / radii)))
    fractions = np.linspace(0.0, 1.0, per_axis)
    theta = theta_max[:, None] * fractions[None, :]
    r = np.broadcast_to(radii[:, None], theta.shape)
    return r * np.cos(theta), r * np.sin(theta)


def validate_decay_envelope(env=DEFAULT_ENVELOPE, samples=None):
    """
    Check |dG/dx2| <= c1 exp(-c2 r) / r on a dense polar grid of the strip.

    The grid is symmetric under the reflections a -> -a and b -> -b, under
    which |dG/dx2| is invariant, so one quadrant is sampled.
    """
    samples = samples or int(get_setting('VORTEX_ENVELOPE_SAMPLES', 10000))
    if samples < 1000:
        raise InputError({'samples': 'Envelope validation needs at least 1000 samples.'})
    d1, d2 = envelope_samples(samples)
    r = np.hypot(d1, d2)
    magnitude = np.abs(kernel_terms(d1, d2).dG_dx2)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = magnitude / env.bound(r)
    ratio = np.where(magnitude == 0.0, 0.0, ratio)
    worst = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    report = EnvelopeValidation(
        envelope=env,
        samples=int(ratio.size),
        max_ratio=float(ratio[worst]),
        worst_separation=(float(d1[worst]), float(d2[worst])),
    )
    logger.debug('decay envelope c1=%g c2=%g: max ratio %.6f over %d samples',
                 env.c1, env.c2, report.max_ratio, report.samples)
    return report
