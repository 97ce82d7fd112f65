"""
Counter-based normal variates for the random-walk step.

Every (seed, ensemble, step, blob) tuple maps to a fixed Philox block, so a
run can be restarted at any step, split across threads or resumed from a
checkpoint and still draw exactly the same increments.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError

UINT64_LIMIT = 1 << 64
TWO_POW_M53 = 2.0 ** -53


@dataclass(frozen=True)
class RngStream:
    seed: int
    ensemble_id: int = 0

    def __post_init__(self):
        for name in ('seed', 'ensemble_id'):
            value = getattr(self, name)
            if not (isinstance(value, (int, np.integer)) and 0 <= int(value) < UINT64_LIMIT):
                raise InputError({name: f'{name} must be an integer in [0, 2**64).'})
            object.__setattr__(self, name, int(value))

    def _generator(self, step):
        counter = np.array([0, 0, step, self.ensemble_id], dtype=np.uint64)
        return np.random.Philox(key=self.seed, counter=counter)

    def uniforms(self, step, n):
        """Two open-interval uniforms per blob, shape (n, 2)."""
        if step < 0:
            raise InputError({'step': 'Step index must be non-negative.'})
        words = self._generator(step).random_raw(4 * n).reshape(n, 4)[:, :2]
        return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * TWO_POW_M53

    def normals(self, step, n):
        """Independent standard normal pairs for blobs 0..n-1 at ``step``, shape (n, 2)."""
        if n == 0:
            return np.zeros((0, 2))
        u = self.uniforms(step, n)
        radius = np.sqrt(-2.0 * np.log(u[:, 0]))
        angle = 2.0 * math.pi * u[:, 1]
        return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])

    def to_dict(self):
        return {'seed': self.seed, 'ensemble_id': self.ensemble_id}

    @classmethod
    def from_dict(cls, data):
        return cls(seed=int(data['seed']), ensemble_id=int(data.get('ensemble_id', 0)))
