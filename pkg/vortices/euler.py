"""
Inviscid vortex-blob dynamics: every blob moves with the velocity induced by
all the others, integrated with an explicit Runge-Kutta scheme.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .exceptions import InputError, NonFiniteVelocityError, ScheduleError, StepConfigError
from .kernel import wrap_angle
from .state import DiagnosticsPlan, diagnose

logger = logging.getLogger(__name__)

MIN_STEP_FACTOR = 0.2
MAX_STEP_FACTOR = 2.0
MAX_REJECTIONS = 50


class Scheme(str, Enum):
    RK4 = 'rk4'
    RK2 = 'rk2'
    EULER_FWD = 'euler_fwd'


@dataclass(frozen=True)
class EulerStepConfig:
    dt: float
    scheme: Scheme = Scheme.RK4
    adaptive: bool = False
    tolerance: float | None = None

    def __post_init__(self):
        try:
            object.__setattr__(self, 'scheme', Scheme(self.scheme))
        except ValueError:
            raise StepConfigError({'scheme': f'unknown scheme {self.scheme!r}'})
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise StepConfigError({'dt': 'time step must be positive and finite'})
        if self.adaptive and not (self.tolerance is not None and self.tolerance > 0):
            raise StepConfigError({'tolerance': 'adaptive stepping needs a positive tolerance'})

    def to_dict(self):
        return {
            'dt': self.dt,
            'scheme': self.scheme.value,
            'adaptive': self.adaptive,
            'tolerance': self.tolerance,
        }


# ==============================================================================
# Transport
# ==============================================================================

def _velocity(state, positions):
    u = state.velocities(positions)
    bad = ~np.all(np.isfinite(u), axis=1)
    if bad.any():
        raise NonFiniteVelocityError(np.flatnonzero(bad))
    return u


def transport(state, dt, scheme=Scheme.RK4, k1=None):
    """Positions after advecting every blob for dt with the given scheme (x2 unwrapped)."""
    x = np.asarray(state.positions)
    k1 = _velocity(state, x) if k1 is None else k1
    if scheme == Scheme.EULER_FWD:
        return x + dt * k1
    if scheme == Scheme.RK2:
        k2 = _velocity(state, x + 0.5 * dt * k1)
        return x + dt * k2
    k2 = _velocity(state, x + 0.5 * dt * k1)
    k3 = _velocity(state, x + 0.5 * dt * k2)
    k4 = _velocity(state, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _finish(state, positions, dt):
    positions = np.array(positions)
    positions[:, 1] = wrap_angle(positions[:, 1])
    return state.advanced(positions, dt)


def euler_step(state, cfg):
    """One fixed step of length cfg.dt for an inviscid state."""
    if state.viscosity != 0.0:
        raise InputError({'viscosity': 'euler_step requires an inviscid state (viscosity 0)'})
    return _finish(state, transport(state, cfg.dt, cfg.scheme), cfg.dt)


def adaptive_step(state, cfg, dt):
    """
    Attempt a step of at most dt, shrinking it until the embedded
    Heun/forward-Euler error estimate is within cfg.tolerance.

    Returns (new_state, dt_taken, dt_next).
    """
    x = np.asarray(state.positions)
    k1 = _velocity(state, x)
    for _ in range(MAX_REJECTIONS):
        k_end = _velocity(state, x + dt * k1)
        error = 0.5 * dt * float(np.max(np.abs(k_end - k1), initial=0.0))
        factor = MAX_STEP_FACTOR if error == 0.0 else 0.9 * math.sqrt(cfg.tolerance / error)
        factor = min(MAX_STEP_FACTOR, max(MIN_STEP_FACTOR, factor))
        if error <= cfg.tolerance:
            moved = transport(state, dt, cfg.scheme, k1=k1)
            return _finish(state, moved, dt), dt, dt * factor
        dt *= factor
    raise StepConfigError({'tolerance': f'step size collapsed below {dt:.3e} without meeting the tolerance'})


# ==============================================================================
# Time integration
# ==============================================================================

def check_schedule(schedule, t0, t_end):
    """Return the schedule as a tuple after checking order and range."""
    times = tuple(float(t) for t in schedule)
    slack = 1e-12 * max(1.0, abs(t_end))
    if any(not math.isfinite(t) for t in times):
        raise ScheduleError('schedule times must be finite')
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ScheduleError('schedule times must be strictly increasing')
    if times and (times[0] < t0 - slack or times[-1] > t_end + slack):
        raise ScheduleError(f'schedule must lie within [{t0:g}, {t_end:g}]')
    return times


class Integration:
    """
    Steps a state to ``t_end``, landing exactly on every scheduled time and
    yielding a DiagnosticsRecord there. The current state is ``self.state``.

    ``on_record(state, record)`` is called after each record, which is how
    the runner writes checkpoints.
    """

    def __init__(self, state, t_end, schedule, dt, diagnostics=None, on_record=None,
                 ensemble_id=None, seed=None):
        if not (math.isfinite(t_end) and t_end >= state.time):
            raise ScheduleError(f'end time {t_end!r} precedes the state time {state.time!r}')
        self.state = state
        self.t_end = float(t_end)
        self.schedule = check_schedule(schedule, state.time, t_end)
        self.plan = diagnostics or DiagnosticsPlan()
        self.on_record = on_record
        self.ensemble_id = ensemble_id
        self.seed = seed
        self._dt = dt

    def _step(self, state, dt):
        """Return (new_state, dt_taken, dt_next)."""
        raise NotImplementedError

    def _advance_to(self, stop):
        slack = 1e-12 * max(1.0, abs(stop))
        while stop - self.state.time > slack:
            remaining = stop - self.state.time
            dt = self._dt
            landing = dt >= remaining - slack
            if landing:
                dt = remaining
            new_state, taken, dt_next = self._step(self.state, dt)
            if landing and taken == dt:
                new_state = new_state.at_time(stop)
            else:
                self._dt = dt_next
            self.state = new_state

    def __iter__(self):
        scheduled = set(self.schedule)
        for stop in sorted(scheduled | {self.t_end}):
            self._advance_to(stop)
            if stop in scheduled:
                record = diagnose(self.state, self.plan, ensemble_id=self.ensemble_id, seed=self.seed)
                logger.debug('t=%.6g step=%d diameter=%.6g', record.time, self.state.step_index,
                             record.diameter)
                if self.on_record is not None:
                    self.on_record(self.state, record)
                yield record

    def run(self):
        """Exhaust the integration and return the list of records."""
        return list(self)


class EulerRun(Integration):

    def __init__(self, state, t_end, cfg, schedule, diagnostics=None, on_record=None):
        if state.viscosity != 0.0:
            raise InputError({'viscosity': 'run_euler requires an inviscid state (viscosity 0)'})
        super().__init__(state, t_end, schedule, cfg.dt, diagnostics, on_record)
        self.cfg = cfg

    def _step(self, state, dt):
        if self.cfg.adaptive:
            return adaptive_step(state, self.cfg, dt)
        return euler_step(state, replace(self.cfg, dt=dt)), dt, self.cfg.dt


def run_euler(s0, t_end, cfg, schedule, diagnostics=None, on_record=None):
    """Lazily integrate the Euler dynamics; iterate the result for records."""
    return EulerRun(s0, t_end, cfg, schedule, diagnostics, on_record)
