"""
Smooth cutoff W(xi) = 1 - p((|xi| - R) / h) with the quintic smoothstep
p(u) = 6u^5 - 15u^4 + 10u^3 clamped to [0, 1].

W is one on |xi| <= R, zero on |xi| >= R + h, monotone in between and
twice continuously differentiable, with |W''| <= c_w / h**2.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import MollifierDomainError

# Maximum of |p''(u)| = |60 u (2u - 1)(u - 1)| on [0, 1].
SMOOTHSTEP_CURVATURE = 10.0 / math.sqrt(3.0)


def smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0)


def smoothstep_d1(u):
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * u * u * (u - 1.0) ** 2, 0.0)


def smoothstep_d2(u):
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 60.0 * u * (2.0 * u - 1.0) * (u - 1.0), 0.0)


@dataclass(frozen=True)
class MollifierProfile:
    """Cutoff of plateau radius R and transition width h."""
    R: float
    h: float
    c_w: float = field(default=SMOOTHSTEP_CURVATURE, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise MollifierDomainError({'h': f'Mollifier width must be positive, got h={self.h!r}.'})
        if not (math.isfinite(self.R) and self.R >= 2.0 * self.h):
            raise MollifierDomainError(
                {'R': f'Mollifier needs R >= 2h, got (R, h) = ({self.R!r}, {self.h!r}).'}
            )
        u = np.linspace(0.0, 1.0, 20001)
        if np.max(np.abs(smoothstep_d2(u))) > self.c_w * (1.0 + 1e-12):
            raise MollifierDomainError({'c_w': 'Curvature constant is below the profile curvature.'})

    def _u(self, xi):
        return (np.abs(np.asarray(xi, dtype=float)) - self.R) / self.h

    def eval(self, xi):
        return 1.0 - smoothstep(self._u(xi))

    def eval_d1(self, xi):
        xi = np.asarray(xi, dtype=float)
        return -np.sign(xi) * smoothstep_d1(self._u(xi)) / self.h

    def eval_d2(self, xi):
        return -smoothstep_d2(self._u(xi)) / self.h ** 2

    @property
    def curvature_bound(self):
        return self.c_w / self.h ** 2

    def as_pair(self):
        return (self.R, self.h)


def make_mollifier(R, h):
    return MollifierProfile(float(R), float(h))
