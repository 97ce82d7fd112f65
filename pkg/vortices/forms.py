"""
Django Forms for validating run configurations.

A run configuration is a nested JSON document; each block is validated by
its own form:
- Kernel, patch, step, schedule, envelope and replay blocks
- Top-level run settings (mode, end time, diagnostics grid, seeds)

Each form's ``clean()`` builds the corresponding domain object so that
domain validation errors come back keyed by field.
"""

import math

from django import forms
from django.core.exceptions import ValidationError

from .bound_replay import Regime
from .confinement import EnvelopeKind, EnvelopeSpec
from .euler import EulerStepConfig, Scheme
from .initial_data import PatchShape, PatchSpec, Seeding
from .kernel import KernelConfig


DEFAULT_T_FIRST = 1.0
DEFAULT_RATIO = 1.5


def _choices(enum):
    return [(member.value, member.value.replace('_', ' ')) for member in enum]


# ==============================================================================
# Custom fields
# ==============================================================================

class FloatListField(forms.Field):
    """A list of finite floats, given as a JSON list or a comma-separated string."""

    def __init__(self, *, length=None, min_length=0, **kwargs):
        self.length = length
        self.min_length = min_length
        super().__init__(**kwargs)

    def _items(self, value):
        if isinstance(value, str):
            return [item for item in value.split(',') if item.strip()]
        if isinstance(value, (list, tuple)):
            return list(value)
        raise ValidationError('Enter a list of numbers.', code='invalid')

    def to_python(self, value):
        if value in self.empty_values:
            return ()
        try:
            numbers = tuple(float(item) for item in self._items(value))
        except (TypeError, ValueError):
            raise ValidationError('Enter a list of numbers.', code='invalid')
        if not all(math.isfinite(x) for x in numbers):
            raise ValidationError('All numbers must be finite.', code='invalid')
        return numbers

    def validate(self, value):
        super().validate(value)
        if not value:
            return
        if self.length is not None and len(value) != self.length:
            raise ValidationError(f'Expected exactly {self.length} numbers.', code='length')
        if len(value) < self.min_length:
            raise ValidationError(f'Expected at least {self.min_length} numbers.', code='length')


class IntListField(FloatListField):
    """A list of non-negative integers."""

    def to_python(self, value):
        if value in self.empty_values:
            return ()
        try:
            numbers = tuple(int(str(item).strip()) for item in self._items(value))
        except (TypeError, ValueError):
            raise ValidationError('Enter a list of whole numbers.', code='invalid')
        if any(n < 0 for n in numbers):
            raise ValidationError('Numbers must be non-negative.', code='invalid')
        return numbers


class PairListField(forms.Field):
    """(R, h) pairs, given as [[R, h], ...] or the string "R:h,R:h"."""

    def to_python(self, value):
        if value in self.empty_values:
            return ()
        if isinstance(value, str):
            value = [item.split(':') for item in value.split(',') if item.strip()]
        try:
            pairs = tuple((float(R), float(h)) for R, h in value)
        except (TypeError, ValueError):
            raise ValidationError('Enter pairs of numbers such as [[4, 1], [8, 2]].', code='invalid')
        if not all(math.isfinite(x) for pair in pairs for x in pair):
            raise ValidationError('All numbers must be finite.', code='invalid')
        return pairs


# ==============================================================================
# Block forms
# ==============================================================================

class KernelForm(forms.Form):
    """Biot-Savart kernel block; omitted truncation means none."""
    normalization = forms.FloatField(required=False, help_text='Kernel normalization kappa')
    core_radius = forms.FloatField(required=False, min_value=0.0)
    truncation_radius = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        normalization = cleaned_data.get('normalization')
        core_radius = cleaned_data.get('core_radius')
        cleaned_data['config'] = KernelConfig(
            normalization=1.0 / (2.0 * math.pi) if normalization is None else normalization,
            core_radius=0.0 if core_radius is None else core_radius,
            truncation_radius=cleaned_data.get('truncation_radius'),
        )
        return cleaned_data


class PatchForm(forms.Form):
    """Initial patch block."""
    shape = forms.ChoiceField(choices=_choices(PatchShape))
    center = FloatListField(required=False, length=2)
    radius = forms.FloatField(required=False)
    omega_level = forms.FloatField(required=False)
    sigma = forms.FloatField(required=False)
    cutoff_radius = forms.FloatField(required=False)
    amplitude = forms.FloatField(required=False)
    r_in = forms.FloatField(required=False)
    r_out = forms.FloatField(required=False)
    n_blobs = forms.IntegerField(min_value=1)
    seeding = forms.ChoiceField(choices=_choices(Seeding), required=False)
    core_factor = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        optional = {name: cleaned_data.get(name) for name in (
            'radius', 'omega_level', 'sigma', 'cutoff_radius', 'amplitude', 'r_in', 'r_out',
        )}
        cleaned_data['spec'] = PatchSpec(
            shape=cleaned_data['shape'],
            center=cleaned_data.get('center') or (0.0, math.pi),
            n_blobs=cleaned_data['n_blobs'],
            seeding=cleaned_data.get('seeding') or Seeding.GRID,
            core_factor=cleaned_data.get('core_factor') or 1.5,
            **optional,
        )
        return cleaned_data


class StepForm(forms.Form):
    """Time-step block shared by inviscid and viscous runs."""
    dt = forms.FloatField()
    scheme = forms.ChoiceField(choices=_choices(Scheme), required=False)
    adaptive = forms.BooleanField(required=False)
    tolerance = forms.FloatField(required=False)
    freeze_transport = forms.BooleanField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        cleaned_data['config'] = EulerStepConfig(
            dt=cleaned_data['dt'],
            scheme=cleaned_data.get('scheme') or Scheme.RK4,
            adaptive=bool(cleaned_data.get('adaptive')),
            tolerance=cleaned_data.get('tolerance'),
        )
        return cleaned_data


class ScheduleForm(forms.Form):
    """Diagnostics schedule block. Geometric unless stated otherwise."""
    KIND_LINEAR = 'linear'
    KIND_GEOMETRIC = 'geometric'
    KIND_CHOICES = [
        (KIND_LINEAR, 'Linear'),
        (KIND_GEOMETRIC, 'Geometric'),
    ]

    kind = forms.ChoiceField(choices=KIND_CHOICES, required=False, initial=KIND_GEOMETRIC)
    dt_out = forms.FloatField(required=False)
    t_first = forms.FloatField(required=False, initial=DEFAULT_T_FIRST)
    ratio = forms.FloatField(required=False, initial=DEFAULT_RATIO)

    def clean(self):
        cleaned_data = super().clean()
        kind = cleaned_data.get('kind') or self.KIND_GEOMETRIC
        cleaned_data['kind'] = kind
        if kind == self.KIND_LINEAR:
            dt_out = cleaned_data.get('dt_out')
            if dt_out is None or dt_out <= 0:
                self.add_error('dt_out', 'Linear schedules need a positive output interval.')
        elif kind == self.KIND_GEOMETRIC:
            if cleaned_data.get('t_first') is None:
                cleaned_data['t_first'] = DEFAULT_T_FIRST
            if cleaned_data.get('ratio') is None:
                cleaned_data['ratio'] = DEFAULT_RATIO
            if cleaned_data['t_first'] <= 0:
                self.add_error('t_first', 'Geometric schedules need a positive first time.')
            if cleaned_data['ratio'] <= 1:
                self.add_error('ratio', 'Geometric schedules need a ratio greater than one.')
        return cleaned_data


class EnvelopeForm(forms.Form):
    """Confinement envelope block."""
    kind = forms.ChoiceField(choices=_choices(EnvelopeKind))
    alpha = forms.FloatField(required=False)
    beta = forms.FloatField(required=False)
    delta = forms.FloatField(required=False)
    ell = forms.FloatField(required=False)

    def clean(self):
        cleaned_data = super().clean()
        if self.errors:
            return cleaned_data
        cleaned_data['spec'] = EnvelopeSpec(
            kind=cleaned_data['kind'],
            alpha=cleaned_data.get('alpha'),
            beta=cleaned_data.get('beta'),
            delta=cleaned_data.get('delta'),
            ell=cleaned_data.get('ell'),
        )
        return cleaned_data


class ReplayForm(forms.Form):
    """Bound replay block; times are given as ``t`` or ``log_t`` lists."""
    regime = forms.ChoiceField(choices=_choices(Regime))
    t = FloatListField(required=False)
    log_t = FloatListField(required=False)
    alpha = forms.FloatField(required=False)
    beta = forms.FloatField(required=False)
    delta = forms.FloatField(required=False)
    big_c = forms.FloatField(required=False)
    m0 = forms.FloatField(required=False)
    support_radius = forms.FloatField(required=False, min_value=0.0)

    def clean(self):
        cleaned_data = super().clean()
        times = cleaned_data.get('t') or ()
        log_times = cleaned_data.get('log_t') or ()
        if times and log_times:
            raise ValidationError('Give either t or log_t, not both.')
        if not times and not log_times:
            self.add_error('log_t', 'At least one time is required.')
        elif any(t <= 0 for t in times):
            self.add_error('t', 'Times must be positive.')
        else:
            cleaned_data['log_t'] = log_times or tuple(math.log(t) for t in times)
        for name in ('big_c', 'm0'):
            value = cleaned_data.get(name)
            if value is not None and value <= 0:
                self.add_error(name, f'{name} must be positive.')
        return cleaned_data


# ==============================================================================
# Run configuration form
# ==============================================================================

class RunConfigForm(forms.Form):
    """
    Top-level run settings. Nested blocks are validated by the forms above;
    this form checks the settings that tie them together.
    """
    MODE_EULER = 'euler'
    MODE_NS = 'ns'
    MODE_BOUND_REPLAY = 'bound_replay'
    MODE_REPORT = 'report'
    MODE_CHOICES = [
        (MODE_EULER, 'Euler (inviscid)'),
        (MODE_NS, 'Navier-Stokes (random vortex)'),
        (MODE_BOUND_REPLAY, 'Bound replay'),
        (MODE_REPORT, 'Confinement report'),
    ]

    mode = forms.ChoiceField(choices=MODE_CHOICES)
    output_dir = forms.CharField(max_length=500)
    t_end = forms.FloatField(required=False)
    viscosity = forms.FloatField(required=False, min_value=0.0)
    seeds = IntListField(required=False)
    h_grid = FloatListField(required=False)
    mollifier_pairs = PairListField(required=False)
    report_window = FloatListField(required=False, length=2)

    def clean(self):
        cleaned_data = super().clean()
        mode = cleaned_data.get('mode')
        viscosity = cleaned_data.get('viscosity') or 0.0
        t_end = cleaned_data.get('t_end')

        if mode in (self.MODE_EULER, self.MODE_NS):
            if t_end is None or t_end <= 0:
                self.add_error('t_end', 'Simulations need a positive end time.')
            if mode == self.MODE_EULER and viscosity != 0.0:
                self.add_error('viscosity', 'Euler runs must have zero viscosity.')
            if mode == self.MODE_NS and viscosity <= 0.0:
                self.add_error('viscosity', 'Navier-Stokes runs need a positive viscosity.')

        h_grid = cleaned_data.get('h_grid') or ()
        if any(h < 0 for h in h_grid):
            self.add_error('h_grid', 'Tail radii must be non-negative.')
        elif any(b <= a for a, b in zip(h_grid, h_grid[1:])):
            self.add_error('h_grid', 'Tail radii must be strictly increasing.')

        for R, h in cleaned_data.get('mollifier_pairs') or ():
            if not (h > 0 and R >= 2 * h):
                self.add_error('mollifier_pairs', f'(R, h) = ({R:g}, {h:g}) violates h > 0 and R >= 2h.')

        window = cleaned_data.get('report_window')
        if window and not window[0] < window[1]:
            self.add_error('report_window', 'Report window must satisfy low < high.')
        return cleaned_data
