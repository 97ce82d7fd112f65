"""
Numeric replay of the iterated tail-mass bounds.

An iteration plan fixes a starting radius r0, a step count n and a step h;
the radii R_j = r0 - j h shrink to r0/2. Each step bounds the mollified tail
at R_j by C t / h^2 (divided by R_bar in the Euler regime) times the integral
of the one at R_{j-1}, which after n steps gives

    log mu_t(R_n, h) <= n log q - log n! + log M0,    q = C t / h^2 (or / R_bar h^2).

Everything is done in log space so that t up to e^300 poses no overflow.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .conf import get_setting
from .exceptions import InputError, PlanDomainError, StepCountTooSmallError, SupportViolationError
from .kernel import DEFAULT_ENVELOPE

logger = logging.getLogger(__name__)

FLOOR_SLACK = 1e-9
HALVING_TOLERANCE = 1e-6


class Regime(str, Enum):
    NS_A = 'ns_a'
    NS_B = 'ns_b'
    EULER = 'euler'


@dataclass(frozen=True)
class IterationPlan:
    regime: Regime
    log_t: float
    r0: float
    n: int
    h: float
    big_c: float
    alpha: float | None = None
    beta: float | None = None
    delta: float | None = None

    @property
    def t(self):
        return math.exp(self.log_t) if self.log_t < 700 else math.inf

    @property
    def final_radius(self):
        return self.r0 - self.n * self.h

    @property
    def radii(self):
        return [self.r0 - j * self.h for j in range(self.n + 1)]

    def to_dict(self):
        return {
            'regime': self.regime.value, 'log_t': self.log_t, 't': self.t, 'r0': self.r0,
            'n': self.n, 'h': self.h, 'big_c': self.big_c,
            'alpha': self.alpha, 'beta': self.beta, 'delta': self.delta,
        }


def _floor(x):
    return int(math.floor(x + FLOOR_SLACK * max(1.0, abs(x))))


def make_plan(regime, t=None, *, log_t=None, alpha=None, beta=None, delta=None, big_c=1.0):
    """
    Plan for one time. Give either t or log_t (the latter reaches far beyond
    float range for t).
    """
    try:
        regime = Regime(regime)
    except ValueError:
        raise PlanDomainError({'regime': f'unknown regime {regime!r}'})
    if (t is None) == (log_t is None):
        raise PlanDomainError('give exactly one of t and log_t')
    if log_t is None:
        if not (math.isfinite(t) and t > 0):
            raise PlanDomainError({'t': 'time must be positive and finite'})
        log_t = math.log(t)
    log_t = float(log_t)
    if not (math.isfinite(log_t) and log_t > 2.0):
        raise PlanDomainError({'t': 'iteration plans need t > e^2'})
    if not (math.isfinite(big_c) and big_c > 0):
        raise PlanDomainError({'big_c': 'constant C must be positive'})

    log_log_t = math.log(log_t)
    if regime in (Regime.NS_A, Regime.EULER):
        if alpha is None or not alpha > 1:
            raise PlanDomainError({'alpha': f'{regime.value} plans need alpha > 1'})
        n = _floor(log_t)
        power = 0.5 if regime == Regime.NS_A else 1.0 / 3.0
        r0 = math.exp(power * (log_t + alpha * log_log_t))
        beta = delta = None
    else:
        if beta is None or not beta > 0.5:
            raise PlanDomainError({'beta': 'ns_b plans need beta > 1/2'})
        if delta is None or not (0 < delta < 2 * beta - 1):
            raise PlanDomainError({'delta': 'ns_b plans need 0 < delta < 2 beta - 1'})
        n = _floor(math.exp(delta * log_t))
        r0 = math.exp(beta * log_t)
        alpha = None
    if n < 1:
        raise PlanDomainError('iteration plan has no steps at this time')
    return IterationPlan(regime=regime, log_t=log_t, r0=r0, n=n, h=r0 / (2 * n),
                         big_c=float(big_c), alpha=alpha, beta=beta, delta=delta)


def closed_form_log_bound(plan):
    """Log of the closed-form bound on mu_t(r0/2, h) / M0."""
    if plan.regime == Regime.NS_B:
        power = math.exp(plan.delta * plan.log_t)
        return power * (math.log(plan.big_c) - (2 * plan.beta - plan.delta - 1) * plan.log_t)
    factor = 4.0 * math.e if plan.regime == Regime.NS_A else 8.0 * math.e
    log_log_t = math.log(plan.log_t)
    return plan.n * (math.log(factor * plan.big_c) + (1 - plan.alpha) * log_log_t)


def agreement_tolerance(plan):
    """
    Allowed gap between the recursive and closed-form bounds: the closed form
    absorbs n! >= (n/e)^n, r0/(2n) rounding and (for ns_b) floor(t^delta) < t^delta.
    """
    n = plan.n
    stirling = 0.5 * math.log(2 * math.pi * n) + 1.0 / (12 * n)
    if plan.regime != Regime.NS_B:
        return math.log(4 * math.e) + stirling
    power = math.exp(plan.delta * plan.log_t)
    per_step = abs(math.log(plan.big_c)) + (2 * plan.beta - 1) * plan.log_t + 1 + plan.delta * plan.log_t
    return n * math.log(4 * math.e) + stirling + (power - n) * per_step


@dataclass(frozen=True)
class BoundCertificate:
    """
    Recursive and closed-form log bounds for one plan.

    ``log_recursive_bound`` is capped at log M0, the trivial bound;
    ``log_raw_recursive`` is the uncapped iteration.
    """
    plan: IterationPlan
    m0: float
    log_raw_recursive: float
    log_closed_form: float
    tolerance: float
    per_step_log_terms: tuple = field(default=(), repr=False)

    @property
    def log_recursive_bound(self):
        return min(self.log_raw_recursive, math.log(self.m0))

    @property
    def gap(self):
        return self.log_raw_recursive - math.log(self.m0) - self.log_closed_form

    @property
    def agrees(self):
        return abs(self.gap) <= self.tolerance

    def to_dict(self):
        return {
            'plan': self.plan.to_dict(),
            'm0': self.m0,
            'log_recursive_bound': self.log_recursive_bound,
            'log_raw_recursive': self.log_raw_recursive,
            'log_closed_form': self.log_closed_form,
            'gap': self.gap,
            'tolerance': self.tolerance,
            'agrees': self.agrees,
            'per_step_log_terms': list(self.per_step_log_terms),
        }


def recursive_log_bound(plan, m0, support_radius=None):
    """
    Replay the iteration for ``plan`` starting from total mass m0.

    ``support_radius`` is the radius of the initial support; the iteration
    needs the support strictly inside r0/2 - h.
    """
    if not (math.isfinite(m0) and m0 > 0):
        raise PlanDomainError({'m0': 'initial mass must be positive'})
    if support_radius is not None and support_radius >= plan.r0 / 2 - plan.h:
        raise SupportViolationError(
            f'initial support radius {support_radius:g} is not below r0/2 - h = {plan.r0 / 2 - plan.h:g}'
        )
    log_q = math.log(plan.big_c) + plan.log_t - 2.0 * math.log(plan.h)
    if plan.regime == Regime.EULER:
        log_q -= math.log(plan.r0 / 2)
    log_bound = plan.n * log_q - float(gammaln(plan.n + 1)) + math.log(m0)

    per_step = ()
    if plan.n <= int(get_setting('VORTEX_MAX_STEP_TERMS', 100000)):
        j = np.arange(1, plan.n + 1)
        per_step = tuple(float(v) for v in j * log_q - gammaln(j + 1))
    return BoundCertificate(
        plan=plan,
        m0=float(m0),
        log_raw_recursive=log_bound,
        log_closed_form=closed_form_log_bound(plan),
        tolerance=agreement_tolerance(plan),
        per_step_log_terms=per_step,
    )


def ns_b_threshold(beta, delta, big_c):
    """Time beyond which the ns_b closed-form bound is below one: (e C)^(1/(2 beta - delta - 1))."""
    if beta is None or not beta > 0.5 or delta is None or not (0 < delta < 2 * beta - 1):
        raise PlanDomainError('threshold needs beta > 1/2 and 0 < delta < 2 beta - 1')
    if not big_c > 0:
        raise PlanDomainError({'big_c': 'constant C must be positive'})
    return math.exp(math.log(math.e * big_c) / (2 * beta - delta - 1))


# ==============================================================================
# Radius comparison ODE
# ==============================================================================

@dataclass(frozen=True)
class RhoTable:
    t: np.ndarray
    rho: np.ndarray

    def final(self):
        return float(self.rho[-1])


def _rk4(rhs, rho0, t0, t1, steps):
    h = (t1 - t0) / steps
    t = np.empty(steps + 1)
    rho = np.empty(steps + 1)
    t[0], rho[0] = t0, rho0
    for k in range(steps):
        tk, yk = t[k], rho[k]
        k1 = rhs(tk, yk)
        k2 = rhs(tk + 0.5 * h, yk + 0.5 * h * k1)
        k3 = rhs(tk + 0.5 * h, yk + 0.5 * h * k2)
        k4 = rhs(tk + h, yk + h * k3)
        rho[k + 1] = yk + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t[k + 1] = t0 + (k + 1) * h
    return t, rho


def integrate_rho(rho0, t0, t1, env=DEFAULT_ENVELOPE, g=None, steps=1000):
    """
    Integrate rho' = 4 c1 exp(-c2 rho / 2) / rho + g(t) with classical RK4.

    The result is checked against a run with half the step size.
    """
    if not (rho0 > 0 and t1 > t0 >= 0):
        raise InputError('need rho0 > 0 and t1 > t0 >= 0')
    if steps < 1:
        raise InputError({'steps': 'at least one step is required'})
    forcing = g or (lambda t: 0.0)

    def rhs(t, rho):
        return 4.0 * env.c1 * math.exp(-0.5 * env.c2 * rho) / rho + forcing(t)

    t, rho = _rk4(rhs, rho0, t0, t1, steps)
    _, fine = _rk4(rhs, rho0, t0, t1, 2 * steps)
    change = abs(fine[-1] - rho[-1]) / abs(fine[-1])
    if change > HALVING_TOLERANCE:
        raise StepCountTooSmallError(
            f'halving the step changed rho({t1:g}) by {change:.2e} relative; use more than {steps} steps'
        )
    return RhoTable(t=t, rho=rho)
