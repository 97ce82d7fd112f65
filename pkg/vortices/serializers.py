"""
Reading and writing run artifacts: diagnostics CSV files, ensemble
aggregates, checkpoints and the run manifest.

JSON files are written to a temporary file and moved into place so that a
crash never leaves a half-written manifest or checkpoint.
"""

import csv
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import CheckpointError
from .kernel import KernelConfig
from .rng import RngStream
from .state import SCALAR_COLUMNS, DiagnosticsRecord, FlowState

logger = logging.getLogger(__name__)

CHECKPOINT_SCHEMA_VERSION = 1
MANIFEST_NAME = 'manifest.json'
DIAGNOSTICS_NAME = 'diagnostics.csv'
AGGREGATE_NAME = 'aggregate.csv'


def write_json_atomic(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w') as fh:
            json.dump(data, fh, indent=2, allow_nan=True)
            fh.write('\n')
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# ==============================================================================
# Diagnostics CSV
# ==============================================================================

def write_diagnostics_csv(path, plan, records, append=False):
    """Write records under the plan's header; ``append`` adds rows to an existing file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new_file = not (append and path.exists())
    with open(path, 'w' if new_file else 'a', newline='') as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(plan.csv_header())
        for record in records:
            writer.writerow(record.to_row())


class DiagnosticsWriter:
    """Appends one row per record as the integration produces them."""

    def __init__(self, path, plan, append=False):
        self.path = Path(path)
        self.plan = plan
        if not append or not self.path.exists():
            write_diagnostics_csv(self.path, plan, [])

    def __call__(self, record):
        write_diagnostics_csv(self.path, self.plan, [record], append=True)


def read_diagnostics_csv(path, seed=None, ensemble_id=None):
    with open(path, newline='') as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return [DiagnosticsRecord.from_row(header, row, ensemble_id=ensemble_id, seed=seed)
                for row in reader if row]


def truncate_diagnostics_csv(path, after_time):
    """Drop rows later than ``after_time`` (kept rows are rewritten verbatim)."""
    with open(path, newline='') as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return 0
    header, body = rows[0], rows[1:]
    time_index = header.index('time')
    kept = [row for row in body if row and float(row[time_index]) <= after_time]
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(kept)
    return len(body) - len(kept)


# ==============================================================================
# Ensemble aggregation
# ==============================================================================

def _record_vector(record):
    values = [getattr(record, name) for name in SCALAR_COLUMNS]
    values += [m for _, m in record.tail_mass]
    values += [mu for _, _, mu in record.mollified_tail]
    return values


def aggregate_records(per_seed):
    """
    Mean and standard error across seeds, row by row.

    ``per_seed`` is a list of record lists sharing one schedule. Returns
    (means, standard_errors) as arrays of shape (rows, columns); the error
    is zero for a single seed.
    """
    lengths = {len(records) for records in per_seed}
    if len(lengths) != 1:
        raise ValueError('ensemble members recorded different numbers of rows')
    stack = np.array([[_record_vector(r) for r in records] for records in per_seed], dtype=float)
    means = stack.mean(axis=0)
    if stack.shape[0] > 1:
        errors = stack.std(axis=0, ddof=1) / math.sqrt(stack.shape[0])
    else:
        errors = np.zeros_like(means)
    return means, errors


def ensemble_mean_records(per_seed):
    """Records holding the ensemble mean of every diagnostic."""
    if len(per_seed) == 1:
        return list(per_seed[0])
    means, _ = aggregate_records(per_seed)
    template = per_seed[0]
    n_scalar = len(SCALAR_COLUMNS)
    records = []
    for row, base in zip(means, template):
        n_tail = len(base.tail_mass)
        records.append(DiagnosticsRecord(
            **{name: float(v) for name, v in zip(SCALAR_COLUMNS, row[:n_scalar])},
            tail_mass=tuple((h, float(v)) for (h, _), v in zip(base.tail_mass, row[n_scalar:n_scalar + n_tail])),
            mollified_tail=tuple(
                (R, h, float(v)) for (R, h, _), v in zip(base.mollified_tail, row[n_scalar + n_tail:])
            ),
        ))
    return records


def write_aggregate_csv(path, plan, per_seed):
    means, errors = aggregate_records(per_seed)
    columns = plan.csv_header()
    header = ['time'] + [f'{c}_mean' for c in columns[1:]] + [f'{c}_se' for c in columns[1:]]
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for mean_row, error_row in zip(means, errors):
            values = [mean_row[0]] + list(mean_row[1:]) + list(error_row[1:])
            writer.writerow([format(float(v), '.17g') for v in values])


# ==============================================================================
# Checkpoints
# ==============================================================================

def state_to_dict(state):
    return {
        'time': state.time,
        'step_index': state.step_index,
        'viscosity': state.viscosity,
        'kernel_cfg': state.kernel_cfg.to_dict(),
        'x1': state.x1.tolist(),
        'x2': state.x2.tolist(),
        'gamma': state.gamma.tolist(),
        'core': state.core.tolist(),
        'rng': state.rng.to_dict() if state.rng else None,
    }


def state_from_dict(data):
    return FlowState(
        positions=np.column_stack([data['x1'], data['x2']]) if data['x1'] else np.zeros((0, 2)),
        gamma=data['gamma'],
        core=data['core'],
        time=data['time'],
        viscosity=data['viscosity'],
        kernel_cfg=KernelConfig.from_dict(data['kernel_cfg']),
        rng=RngStream.from_dict(data['rng']) if data.get('rng') else None,
        step_index=data['step_index'],
    )


def write_checkpoint(path, state, config, seed):
    write_json_atomic(path, {
        'schema_version': CHECKPOINT_SCHEMA_VERSION,
        'seed': seed,
        'state': state_to_dict(state),
        'config': config.to_dict(),
    })


@dataclass(frozen=True, eq=False)
class Checkpoint:
    path: Path
    state: FlowState
    config: dict
    seed: int

    @property
    def seed_dir(self):
        return self.path.parent.parent

    @property
    def run_dir(self):
        return self.seed_dir.parent


def load_checkpoint(path):
    path = Path(path)
    try:
        data = read_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f'cannot read checkpoint {path}: {exc}')
    version = data.get('schema_version')
    if version != CHECKPOINT_SCHEMA_VERSION:
        raise CheckpointError(
            f'checkpoint schema version {version!r} does not match {CHECKPOINT_SCHEMA_VERSION}'
        )
    return Checkpoint(path=path, state=state_from_dict(data['state']),
                      config=data['config'], seed=int(data['seed']))


# ==============================================================================
# Manifest
# ==============================================================================

@dataclass
class RunManifest:
    """Everything needed to interpret a run directory."""
    config: dict
    code_version: str
    envelope: dict
    normalization: float
    started_at: str
    status: str = 'running'
    finished_at: str | None = None
    wall_clock_seconds: float | None = None
    outputs: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    exit_code: int | None = None
    error: str | None = None

    def to_dict(self):
        return dict(self.__dict__)

    def save(self, run_dir):
        path = Path(run_dir) / MANIFEST_NAME
        write_json_atomic(path, self.to_dict())
        return path

    @classmethod
    def load(cls, run_dir):
        return cls(**read_json(Path(run_dir) / MANIFEST_NAME))
