"""
Run configuration: a nested document validated block by block through the
forms in ``vortices.forms``.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .bound_replay import Regime
from .confinement import EnvelopeSpec
from .euler import EulerStepConfig
from .exceptions import ConfigError
from .forms import (
    DEFAULT_RATIO, DEFAULT_T_FIRST, EnvelopeForm, KernelForm, PatchForm, ReplayForm, RunConfigForm,
    ScheduleForm, StepForm,
)
from .initial_data import PatchSpec
from .kernel import KernelConfig
from .navier_stokes import NsStepConfig
from .state import DiagnosticsPlan


class Mode(str, Enum):
    EULER = 'euler'
    NS = 'ns'
    BOUND_REPLAY = 'bound_replay'
    REPORT = 'report'


@dataclass(frozen=True)
class ScheduleSpec:
    """Linear: t0 + k dt_out. Geometric: t0, then t_first * ratio**k."""
    kind: str = 'geometric'
    dt_out: float | None = None
    t_first: float | None = DEFAULT_T_FIRST
    ratio: float | None = DEFAULT_RATIO

    def times(self, t0, t_end):
        slack = 1e-12 * max(1.0, abs(t_end))
        if self.kind == 'linear':
            count = int(math.floor((t_end - t0) / self.dt_out + 1e-9)) + 1
            times = [t0 + k * self.dt_out for k in range(count)]
        else:
            times = [t0]
            k = 0
            while True:
                t = self.t_first * self.ratio ** k
                if t > t_end + slack:
                    break
                if t > t0:
                    times.append(t)
                k += 1
        return [min(t, t_end) for t in times if t <= t_end + slack]

    def to_dict(self):
        return {'kind': self.kind, 'dt_out': self.dt_out, 't_first': self.t_first, 'ratio': self.ratio}


@dataclass(frozen=True)
class ReplaySpec:
    regime: Regime
    log_t: tuple
    alpha: float | None = None
    beta: float | None = None
    delta: float | None = None
    big_c: float = 1.0
    m0: float = 1.0
    support_radius: float | None = None

    def to_dict(self):
        return {
            'regime': Regime(self.regime).value, 'log_t': list(self.log_t),
            'alpha': self.alpha, 'beta': self.beta, 'delta': self.delta,
            'big_c': self.big_c, 'm0': self.m0, 'support_radius': self.support_radius,
        }


@dataclass(frozen=True)
class RunConfig:
    mode: Mode
    output_dir: str
    t_end: float | None = None
    viscosity: float = 0.0
    patch: PatchSpec | None = None
    kernel: KernelConfig | None = None
    step: EulerStepConfig | None = None
    freeze_transport: bool = False
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    diagnostics: DiagnosticsPlan = field(default_factory=DiagnosticsPlan)
    seeds: tuple = (0,)
    envelope: EnvelopeSpec | None = None
    report_window: tuple | None = None
    replay: ReplaySpec | None = None

    def ns_step(self, seed, ensemble_id):
        return NsStepConfig(dt=self.step.dt, transport=self.step, rng_seed=seed,
                            ensemble_id=ensemble_id, freeze_transport=self.freeze_transport)

    def schedule_times(self, t0=0.0):
        return self.schedule.times(t0, self.t_end)

    def resolved_output_dir(self, root):
        path = Path(self.output_dir)
        return path if path.is_absolute() else Path(root) / path

    def with_overrides(self, overrides):
        """New config from this one's document updated with ``overrides`` (nested dicts merge)."""
        return RunConfig.from_dict(_merge(self.to_dict(), overrides))

    def to_dict(self):
        step = None
        if self.step is not None:
            step = dict(self.step.to_dict(), freeze_transport=self.freeze_transport)
        return {
            'mode': self.mode.value,
            'output_dir': str(self.output_dir),
            't_end': self.t_end,
            'viscosity': self.viscosity,
            'patch': self.patch.to_dict() if self.patch else None,
            'kernel': self.kernel.to_dict() if self.kernel else None,
            'step': step,
            'schedule': self.schedule.to_dict(),
            'h_grid': list(self.diagnostics.h_grid),
            'mollifier_pairs': [list(p) for p in self.diagnostics.mollifier_pairs],
            'seeds': list(self.seeds),
            'envelope': self.envelope.to_dict() if self.envelope else None,
            'report_window': list(self.report_window) if self.report_window else None,
            'replay': self.replay.to_dict() if self.replay else None,
        }

    @classmethod
    def from_dict(cls, data):
        """Validate a configuration document; every problem is reported at once."""
        if not isinstance(data, dict):
            raise ConfigError('configuration must be a JSON object')
        errors = {}
        top = _validate(RunConfigForm, data, None, errors)
        mode = top.get('mode') if top else None

        def block(name, form_class, required):
            if data.get(name) is None:
                if required:
                    errors[name] = [f'The {name} block is required for mode {mode!r}.']
                return None
            return _validate(form_class, data[name], name, errors)

        simulating = mode in (Mode.EULER.value, Mode.NS.value)
        patch = block('patch', PatchForm, simulating)
        kernel = block('kernel', KernelForm, False)
        step = block('step', StepForm, simulating)
        schedule = block('schedule', ScheduleForm, False)
        envelope = block('envelope', EnvelopeForm, mode == Mode.REPORT.value)
        replay = block('replay', ReplayForm, mode == Mode.BOUND_REPLAY.value)
        if step and mode == Mode.NS.value and step['config'].adaptive:
            errors['step.adaptive'] = ['Adaptive stepping is only available for Euler runs.']
        if errors:
            raise ConfigError(errors)

        plan = DiagnosticsPlan()
        if top.get('h_grid') or top.get('mollifier_pairs'):
            plan = DiagnosticsPlan(h_grid=top.get('h_grid') or plan.h_grid,
                                   mollifier_pairs=top.get('mollifier_pairs') or plan.mollifier_pairs)
        return cls(
            mode=Mode(mode),
            output_dir=top['output_dir'],
            t_end=top.get('t_end'),
            viscosity=top.get('viscosity') or 0.0,
            patch=patch['spec'] if patch else None,
            kernel=kernel['config'] if kernel else None,
            step=step['config'] if step else None,
            freeze_transport=bool(step and step.get('freeze_transport')),
            schedule=ScheduleSpec(
                kind=schedule['kind'], dt_out=schedule.get('dt_out'),
                t_first=schedule.get('t_first'), ratio=schedule.get('ratio'),
            ) if schedule else ScheduleSpec(),
            diagnostics=plan,
            seeds=top.get('seeds') or (0,),
            envelope=envelope['spec'] if envelope else None,
            report_window=top.get('report_window') or None,
            replay=ReplaySpec(
                regime=Regime(replay['regime']),
                log_t=replay['log_t'],
                alpha=replay.get('alpha'),
                beta=replay.get('beta'),
                delta=replay.get('delta'),
                big_c=replay.get('big_c') or 1.0,
                m0=replay.get('m0') or 1.0,
                support_radius=replay.get('support_radius'),
            ) if replay else None,
        )


def _validate(form_class, data, prefix, errors):
    if not isinstance(data, dict):
        errors[prefix or '__all__'] = ['Expected a JSON object.']
        return None
    form = form_class(data=data)
    if form.is_valid():
        return form.cleaned_data
    for name, messages in form.errors.items():
        key = name if prefix is None else f'{prefix}.{name}'
        errors[key] = list(messages)
    return None


def _merge(base, overrides):
    merged = dict(base)
    for key, value in (overrides or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def changed_step_fields(before, after):
    """Names of step settings that differ between two configurations."""
    a = before.to_dict().get('step') or {}
    b = after.to_dict().get('step') or {}
    return sorted(name for name in set(a) | set(b) if a.get(name) != b.get(name))
