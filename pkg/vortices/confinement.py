"""
Confinement reports: recorded tail masses against growth envelopes, and the
growth exponent of the diameter.

Ratios reported here are measurements. A ratio below one at every sampled
time is evidence consistent with an envelope, not a check of it.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .exceptions import EnvelopeDomainError, InputError, InsufficientSamplesError
from .kernel import DEFAULT_ENVELOPE, KernelConfig

logger = logging.getLogger(__name__)

MIN_FIT_SAMPLES = 8
MIN_FIT_SPAN = 5.0


class EnvelopeKind(str, Enum):
    NS_SQRT_LOG = 'ns_sqrt_log'
    NS_POWER = 'ns_power'
    EULER_CUBEROOT_LOG = 'euler_cuberoot_log'


@dataclass(frozen=True)
class EnvelopeSpec:
    """
    Radius and tail bound as functions of t:

    ns_sqrt_log         r = sqrt(t log^alpha t)       bound t^-ell
    ns_power            r = t^beta                    bound exp(-t^delta)
    euler_cuberoot_log  r = (t log^alpha t)^(1/3)     bound t^-ell
    """
    kind: EnvelopeKind
    alpha: float | None = None
    beta: float | None = None
    delta: float | None = None
    ell: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'kind', EnvelopeKind(self.kind))
        except ValueError:
            raise EnvelopeDomainError({'kind': f'unknown envelope kind {self.kind!r}'})
        self.clean()

    def clean(self):
        errors = {}
        if self.kind == EnvelopeKind.NS_POWER:
            if self.beta is None or not self.beta > 0.5:
                errors['beta'] = 'ns_power envelopes need beta > 1/2.'
            elif self.delta is None or not (0 < self.delta < 2 * self.beta - 1):
                errors['delta'] = 'ns_power envelopes need 0 < delta < 2 beta - 1.'
        else:
            if self.alpha is None or not self.alpha > 1:
                errors['alpha'] = f'{self.kind.value} envelopes need alpha > 1.'
            if self.ell is None or not self.ell > 0:
                errors['ell'] = f'{self.kind.value} envelopes need a positive decay order ell.'
        if errors:
            raise EnvelopeDomainError(errors)

    @property
    def ratio_alpha(self):
        """Log power used in the diameter ratio statistic."""
        return self.alpha if self.alpha is not None else 2.0

    def to_dict(self):
        return {'kind': self.kind.value, 'alpha': self.alpha, 'beta': self.beta,
                'delta': self.delta, 'ell': self.ell}


def _check_time(t):
    if not (math.isfinite(t) and t > 1.0):
        raise EnvelopeDomainError({'t': f'envelopes are defined for t > 1, got {t!r}'})


def envelope_radius(spec, t):
    _check_time(t)
    log_t = math.log(t)
    if spec.kind == EnvelopeKind.NS_SQRT_LOG:
        return math.sqrt(t * log_t ** spec.alpha)
    if spec.kind == EnvelopeKind.NS_POWER:
        return t ** spec.beta
    return (t * log_t ** spec.alpha) ** (1.0 / 3.0)


def envelope_bound(spec, t):
    _check_time(t)
    if spec.kind == EnvelopeKind.NS_POWER:
        return math.exp(-t ** spec.delta)
    return t ** -spec.ell


def prior_euler_radius(t):
    """Earlier confinement radius for Euler flow, t^(1/3) log^2 t."""
    _check_time(t)
    return t ** (1.0 / 3.0) * math.log(t) ** 2


def diameter_ratio(diameter, t, alpha=2.0):
    """d(t) / (t log^alpha t)^(1/3)."""
    _check_time(t)
    return diameter / (t * math.log(t) ** alpha) ** (1.0 / 3.0)


# ==============================================================================
# Velocity estimates
# ==============================================================================

def rearrangement_speed_bound(m0, omega_max, cfg=None, envelope=DEFAULT_ENVELOPE):
    """
    Bound on the x1 speed at any point of a flow with circulation m0 and
    peak vorticity omega_max: 2 c1 kappa sqrt(pi m0 omega_max).

    Obtained by concentrating the circulation in a disk around the point,
    where the kernel envelope c1/r is largest.
    """
    if m0 < 0 or omega_max < 0:
        raise InputError('mass and peak vorticity must be non-negative')
    cfg = cfg or KernelConfig()
    return 2.0 * envelope.c1 * cfg.normalization * math.sqrt(math.pi * m0 * omega_max)


def extremal_velocity_bound(r_t, m_half, omega_max, envelope=DEFAULT_ENVELOPE):
    """
    Bound on the x1 speed of the outermost blob at |x1| = r_t, given the
    circulation m_half still beyond r_t / 2:

        2 c1 exp(-c2 r_t / 2) / r_t + 2 pi c1 rho omega_max,

    with pi rho**2 omega_max = m_half.
    """
    if r_t <= 0:
        raise InputError({'r_t': 'extremal radius must be positive'})
    if m_half < 0 or omega_max < 0:
        raise InputError('mass and peak vorticity must be non-negative')
    far = 2.0 * envelope.c1 * math.exp(-envelope.c2 * r_t / 2.0) / r_t
    if omega_max == 0.0 or m_half == 0.0:
        return far
    rho = math.sqrt(m_half / (math.pi * omega_max))
    return far + 2.0 * math.pi * envelope.c1 * rho * omega_max


def measured_extremal_velocity(state):
    """|u1| at the blob with the largest |x1|."""
    index = int(np.argmax(np.abs(state.x1)))
    return abs(float(state.velocities()[index, 0]))


# ==============================================================================
# Reports
# ==============================================================================

def interpolate_tail(record, r):
    """
    Tail mass at radius r from the record's h grid: log-linear between
    neighbouring radii, linear when either neighbour is zero, held constant
    beyond the grid. Returns (value, extrapolated).
    """
    if not record.tail_mass:
        raise InsufficientSamplesError('records carry no tail-mass grid')
    radii = [h for h, _ in record.tail_mass]
    masses = [max(m, 0.0) for _, m in record.tail_mass]
    if r <= radii[0]:
        return masses[0], r < radii[0]
    if r >= radii[-1]:
        return masses[-1], r > radii[-1]
    k = int(np.searchsorted(radii, r, side='right')) - 1
    h0, h1, m0, m1 = radii[k], radii[k + 1], masses[k], masses[k + 1]
    s = (r - h0) / (h1 - h0)
    if m0 > 0 and m1 > 0:
        return math.exp(math.log(m0) + s * (math.log(m1) - math.log(m0))), False
    return m0 + s * (m1 - m0), False


@dataclass(frozen=True)
class ReportSample:
    time: float
    radius: float
    tail_mass: float
    extrapolated: bool
    bound: float
    ratio: float | None
    diameter: float
    diameter_ratio: float
    prior_radius: float | None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    ci_low: float
    ci_high: float
    samples: int
    t_min: float
    t_max: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class ConfinementReport:
    spec: EnvelopeSpec
    samples: tuple
    fit: ExponentFit | None
    max_tail_ratio: float | None
    diameter_ratio_non_increasing: bool
    dropped: int = 0
    notes: tuple = field(default=())

    @property
    def tail_ratio_below_one(self):
        return self.max_tail_ratio is not None and self.max_tail_ratio <= 1.0

    def to_dict(self):
        return {
            'envelope': self.spec.to_dict(),
            'samples': [s.to_dict() for s in self.samples],
            'fit': self.fit.to_dict() if self.fit else None,
            'max_tail_ratio': self.max_tail_ratio,
            'tail_ratio_below_one': self.tail_ratio_below_one,
            'diameter_ratio_non_increasing': self.diameter_ratio_non_increasing,
            'dropped_records': self.dropped,
            'notes': list(self.notes),
        }

    def csv_rows(self):
        header = ['time', 'radius', 'tail_mass', 'extrapolated', 'bound', 'ratio',
                  'diameter', 'diameter_ratio', 'prior_radius']
        rows = [header]
        for s in self.samples:
            rows.append([
                format(s.time, '.17g'), format(s.radius, '.17g'), format(s.tail_mass, '.17g'),
                str(int(s.extrapolated)), format(s.bound, '.17g'),
                '' if s.ratio is None else format(s.ratio, '.17g'),
                format(s.diameter, '.17g'), format(s.diameter_ratio, '.17g'),
                '' if s.prior_radius is None else format(s.prior_radius, '.17g'),
            ])
        return rows


def fit_growth_exponent(times, diameters):
    """Least-squares slope of log d against log t with a 95% t-interval."""
    times = np.asarray(times, dtype=float)
    diameters = np.asarray(diameters, dtype=float)
    keep = diameters > 0
    times, diameters = times[keep], diameters[keep]
    if times.size < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(
            f'growth fit needs at least {MIN_FIT_SAMPLES} samples, got {times.size}'
        )
    if times.max() / times.min() < MIN_FIT_SPAN:
        raise InsufficientSamplesError(
            f'growth fit needs times spanning a factor {MIN_FIT_SPAN:g}, '
            f'got {times.max() / times.min():.3g}'
        )
    fit = stats.linregress(np.log(times), np.log(diameters))
    half_width = stats.t.ppf(0.975, times.size - 2) * fit.stderr
    return ExponentFit(
        slope=float(fit.slope),
        ci_low=float(fit.slope - half_width),
        ci_high=float(fit.slope + half_width),
        samples=int(times.size),
        t_min=float(times.min()),
        t_max=float(times.max()),
    )


def _non_increasing_last_decade(times, ratios):
    if not times:
        return False
    start = times[-1] / 10.0
    tail = [r for t, r in zip(times, ratios) if t >= start]
    return all(b <= a * (1.0 + 1e-9) for a, b in zip(tail, tail[1:]))


def build_report(records, spec, window=None, require_fit=True):
    """
    Confinement report over ``records`` (any order).

    Records at t <= 1 are dropped since the envelopes are undefined there.
    ``window`` = (t_low, t_high) restricts the exponent fit; when the fit is
    not possible and ``require_fit`` is False the report carries no fit.
    """
    ordered = sorted(records, key=lambda rec: rec.time)
    usable = [rec for rec in ordered if rec.time > 1.0]
    dropped = len(ordered) - len(usable)
    if dropped:
        logger.info('confinement report: dropped %d record(s) at t <= 1', dropped)
    if not usable:
        raise EnvelopeDomainError('no records after t = 1 to report on')

    samples = []
    notes = []
    for rec in usable:
        radius = envelope_radius(spec, rec.time)
        mass, extrapolated = interpolate_tail(rec, radius)
        bound = envelope_bound(spec, rec.time)
        samples.append(ReportSample(
            time=rec.time,
            radius=radius,
            tail_mass=mass,
            extrapolated=extrapolated,
            bound=bound,
            ratio=mass / bound if bound > 0 else None,
            diameter=rec.diameter,
            diameter_ratio=diameter_ratio(rec.diameter, rec.time, spec.ratio_alpha),
            prior_radius=prior_euler_radius(rec.time) if spec.kind == EnvelopeKind.EULER_CUBEROOT_LOG else None,
        ))
    if any(s.extrapolated for s in samples):
        notes.append('some envelope radii fall outside the recorded h grid')

    fit_times = [s.time for s in samples]
    fit_diameters = [s.diameter for s in samples]
    if window is not None:
        low, high = window
        chosen = [(t, d) for t, d in zip(fit_times, fit_diameters) if low <= t <= high]
        fit_times = [t for t, _ in chosen]
        fit_diameters = [d for _, d in chosen]
    try:
        fit = fit_growth_exponent(fit_times, fit_diameters)
    except InsufficientSamplesError as exc:
        if require_fit:
            raise
        notes.append(str(exc))
        fit = None

    ratios = [s.ratio for s in samples if s.ratio is not None]
    return ConfinementReport(
        spec=spec,
        samples=tuple(samples),
        fit=fit,
        max_tail_ratio=max(ratios) if ratios else None,
        diameter_ratio_non_increasing=_non_increasing_last_decade(
            [s.time for s in samples], [s.diameter_ratio for s in samples]
        ),
        dropped=dropped,
        notes=tuple(notes),
    )
