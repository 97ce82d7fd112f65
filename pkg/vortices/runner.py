"""
Run orchestration: builds initial states, drives the integrations, writes
diagnostics, checkpoints and the manifest, and maps failures onto exit codes.

Exit codes:
    0  success
    2  configuration or input error
    3  numerical failure
    4  I/O failure
"""

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from django.core.exceptions import AppRegistryNotReady, ImproperlyConfigured
from django.db import DatabaseError
from django.utils import timezone

from . import __version__
from .bound_replay import Regime, make_plan, ns_b_threshold, recursive_log_bound
from .conf import get_setting
from .config import Mode, RunConfig, changed_step_fields
from .confinement import build_report
from .euler import run_euler
from .exceptions import CheckpointError, ConfigError, InputError, NumericalError
from .initial_data import discretize
from .kernel import DEFAULT_ENVELOPE, KernelConfig, validate_decay_envelope
from .navier_stokes import run_ns
from .rng import RngStream
from .serializers import (
    AGGREGATE_NAME, DIAGNOSTICS_NAME, MANIFEST_NAME, DiagnosticsWriter, RunManifest,
    ensemble_mean_records, load_checkpoint, read_diagnostics_csv, read_json,
    truncate_diagnostics_csv, write_aggregate_csv, write_checkpoint, write_json_atomic,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

REPORT_MANIFEST_NAME = 'report_manifest.json'
CHECKPOINT_DIR = 'checkpoints'
NS_NOTE = (
    'Navier-Stokes results come from a random-vortex ensemble; they approximate the '
    'viscous flow with statistical error of order 1/sqrt(number of seeds) and '
    'splitting error of order dt.'
)


@dataclass
class RunOutcome:
    exit_code: int
    run_dir: Path | None = None
    manifest_path: Path | None = None
    message: str = ''
    report: object = None
    certificates: list = field(default_factory=list)

    @property
    def ok(self):
        return self.exit_code == EXIT_OK


# ==============================================================================
# Helper Functions
# ==============================================================================

def exit_code_for(exc):
    if isinstance(exc, InputError):
        return EXIT_CONFIG
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


def describe(exc):
    if isinstance(exc, InputError):
        if hasattr(exc, 'error_dict'):
            return '; '.join(f'{name}: {" ".join(messages)}'
                             for name, messages in exc.message_dict.items())
        return '; '.join(exc.messages)
    return str(exc)


def output_root():
    return Path(get_setting('VORTEX_OUTPUT_ROOT', Path.cwd() / 'runs'))


def seed_dir(run_dir, seed):
    return Path(run_dir) / f'seed_{seed}'


def _register(config, run_dir, manifest_path):
    """Record the run in the database; a missing database never stops a run."""
    try:
        from .models import SimulationRun
        return SimulationRun.objects.create(
            mode=config.mode.value,
            output_dir=str(run_dir),
            manifest_path=str(manifest_path or ''),
            config=config.to_dict(),
        )
    except (DatabaseError, ImproperlyConfigured, AppRegistryNotReady) as exc:
        logger.warning('run registry unavailable, continuing without it: %s', exc)
        return None


def _finish_registration(entry, exit_code):
    if entry is None:
        return
    try:
        entry.mark_finished(exit_code)
    except DatabaseError as exc:
        logger.warning('could not update run registry entry %s: %s', entry.pk, exc)


def _new_manifest(config):
    validation = validate_decay_envelope(DEFAULT_ENVELOPE)
    notes = []
    if not validation.passed:
        logger.warning('decay envelope failed validation (max ratio %.4f)', validation.max_ratio)
        notes.append(f'decay envelope not certified: max ratio {validation.max_ratio:.6f}')
    if config.mode == Mode.NS:
        notes.append(NS_NOTE)
    return RunManifest(
        config=config.to_dict(),
        code_version=__version__,
        envelope=validation.to_dict(),
        normalization=(config.kernel or KernelConfig()).normalization,
        started_at=timezone.now().isoformat(),
        notes=notes,
    )


class CheckpointWriter:
    """Writes numbered checkpoints into one seed directory."""

    def __init__(self, directory, config, seed):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.config = config
        self.seed = seed
        self.count = len(list(self.directory.glob('checkpoint_*.json')))
        self.last_time = None

    def __call__(self, state):
        path = self.directory / f'checkpoint_{self.count:04d}.json'
        write_checkpoint(path, state, self.config, self.seed)
        self.count += 1
        self.last_time = state.time
        return path


# ==============================================================================
# Simulation
# ==============================================================================

def _integration(config, state, schedule, on_record):
    if config.mode == Mode.EULER:
        return run_euler(state, config.t_end, config.step, schedule, config.diagnostics, on_record)
    stream = state.rng
    cfg = config.ns_step(stream.seed, stream.ensemble_id)
    return run_ns(state, config.t_end, cfg, schedule, config.diagnostics, on_record)


def _simulate_member(config, run_dir, state, seed, schedule, resuming=False):
    """Integrate one ensemble member, streaming rows and checkpoints to its directory."""
    directory = seed_dir(run_dir, seed)
    writer = DiagnosticsWriter(directory / DIAGNOSTICS_NAME, config.diagnostics, append=resuming)
    checkpoints = CheckpointWriter(directory / CHECKPOINT_DIR, config, seed)

    def on_record(current, record):
        writer(record)
        checkpoints(current)

    integration = _integration(config, state, schedule, on_record)
    records = integration.run()
    if checkpoints.last_time != integration.state.time:
        checkpoints(integration.state)
    logger.info('seed %s finished at t=%.6g after %d steps', seed, integration.state.time,
                integration.state.step_index)
    return records


def _initial_state(config):
    return discretize(config.patch, kernel_cfg=config.kernel, viscosity=config.viscosity)


def _run_euler(config, run_dir, manifest):
    seed = config.seeds[0]
    state = _initial_state(config)
    _simulate_member(config, run_dir, state, seed, config.schedule_times(state.time))
    manifest.outputs = {'seeds': {str(seed): _member_outputs(run_dir, seed)}}
    return None


def _run_ns(config, run_dir, manifest):
    base = _initial_state(config)
    schedule = config.schedule_times(base.time)
    members = [
        (seed, replace(base, rng=RngStream(seed, ensemble_id)))
        for ensemble_id, seed in enumerate(config.seeds)
    ]

    workers = max(1, int(get_setting('VORTEX_SEED_PARALLELISM', 1)))
    if workers > 1 and len(members) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_member, config, run_dir, state, seed, schedule)
                       for seed, state in members]
            per_seed = [future.result() for future in futures]
    else:
        per_seed = [_simulate_member(config, run_dir, state, seed, schedule) for seed, state in members]

    aggregate = Path(run_dir) / AGGREGATE_NAME
    write_aggregate_csv(aggregate, config.diagnostics, per_seed)
    manifest.outputs = {
        'seeds': {str(seed): _member_outputs(run_dir, seed) for seed, _ in members},
        'aggregate': str(aggregate),
    }
    return None


def _member_outputs(run_dir, seed):
    directory = seed_dir(run_dir, seed)
    return {
        'diagnostics': str(directory / DIAGNOSTICS_NAME),
        'checkpoints': str(directory / CHECKPOINT_DIR),
    }


# ==============================================================================
# Bound replay and reports
# ==============================================================================

BOUNDS_COLUMNS = ['regime', 't', 'alpha', 'beta', 'delta', 'big_c', 'n', 'h',
                  'log_recursive', 'log_closed']


def _optional(value):
    return '' if value is None else format(value, '.17g')


def replay_certificates(replay):
    certificates = []
    for log_t in replay.log_t:
        plan = make_plan(replay.regime, log_t=log_t, alpha=replay.alpha, beta=replay.beta,
                         delta=replay.delta, big_c=replay.big_c)
        certificates.append(recursive_log_bound(plan, replay.m0, replay.support_radius))
    return certificates


def _run_replay(config, run_dir, manifest):
    replay = config.replay
    certificates = replay_certificates(replay)
    document = {'certificates': [c.to_dict() for c in certificates]}
    if replay.regime == Regime.NS_B:
        document['threshold'] = ns_b_threshold(replay.beta, replay.delta, replay.big_c)
    json_path = Path(run_dir) / 'bounds.json'
    csv_path = Path(run_dir) / 'bounds.csv'
    write_json_atomic(json_path, document)
    with open(csv_path, 'w', newline='') as fh:
        writer = csv.writer(fh)
        writer.writerow(BOUNDS_COLUMNS)
        for cert in certificates:
            plan = cert.plan
            writer.writerow([
                plan.regime.value, _optional(plan.t), _optional(plan.alpha), _optional(plan.beta),
                _optional(plan.delta), _optional(plan.big_c), plan.n, _optional(plan.h),
                _optional(cert.log_recursive_bound), _optional(cert.log_closed_form),
            ])
    disagreeing = [c.plan.log_t for c in certificates if not c.agrees]
    if disagreeing:
        manifest.notes.append(f'recursive and closed-form bounds disagree at log t = {disagreeing}')
    manifest.outputs = {'bounds_json': str(json_path), 'bounds_csv': str(csv_path)}
    return certificates


def load_run_records(run_dir):
    """Diagnostics of every seed in a run directory, as one list per seed."""
    files = sorted(Path(run_dir).glob(f'seed_*/{DIAGNOSTICS_NAME}'))
    if not files:
        raise ConfigError(f'no diagnostics found under {run_dir}')
    per_seed = []
    for ensemble_id, path in enumerate(files):
        seed = int(path.parent.name.split('_', 1)[1])
        per_seed.append(read_diagnostics_csv(path, seed=seed, ensemble_id=ensemble_id))
    return per_seed


def _run_report(config, run_dir, manifest):
    records = ensemble_mean_records(load_run_records(run_dir))
    report = build_report(records, config.envelope, window=config.report_window, require_fit=False)
    json_path = Path(run_dir) / 'report.json'
    csv_path = Path(run_dir) / 'report.csv'
    write_json_atomic(json_path, report.to_dict())
    with open(csv_path, 'w', newline='') as fh:
        csv.writer(fh).writerows(report.csv_rows())
    manifest.outputs = {'report_json': str(json_path), 'report_csv': str(csv_path)}
    return report


HANDLERS = {
    Mode.EULER: _run_euler,
    Mode.NS: _run_ns,
    Mode.BOUND_REPLAY: _run_replay,
    Mode.REPORT: _run_report,
}


def _manifest_name(config):
    return REPORT_MANIFEST_NAME if config.mode == Mode.REPORT else MANIFEST_NAME


# ==============================================================================
# Entry points
# ==============================================================================

def run(config, root=None):
    """Execute a validated RunConfig and return its outcome."""
    run_dir = config.resolved_output_dir(root or output_root())
    started = time.monotonic()
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
        manifest = _new_manifest(config)
        manifest_path = run_dir / _manifest_name(config)
        write_json_atomic(manifest_path, manifest.to_dict())
    except OSError as exc:
        logger.error('cannot prepare run directory %s: %s', run_dir, exc)
        return RunOutcome(EXIT_IO, run_dir, None, f'cannot write to {run_dir}: {exc}')

    entry = _register(config, run_dir, manifest_path)
    logger.info('starting %s run in %s', config.mode.value, run_dir)
    outcome = RunOutcome(EXIT_OK, run_dir, manifest_path)
    try:
        result = HANDLERS[config.mode](config, run_dir, manifest)
        if config.mode == Mode.REPORT:
            outcome.report = result
        elif config.mode == Mode.BOUND_REPLAY:
            outcome.certificates = result
        outcome.message = f'{config.mode.value} run complete'
    except (InputError, NumericalError, OSError) as exc:
        outcome.exit_code = exit_code_for(exc)
        outcome.message = describe(exc)
        manifest.error = outcome.message
        logger.error('%s run failed (exit %d): %s', config.mode.value, outcome.exit_code, outcome.message)

    manifest.status = 'complete' if outcome.ok else 'incomplete'
    manifest.exit_code = outcome.exit_code
    manifest.finished_at = timezone.now().isoformat()
    manifest.wall_clock_seconds = time.monotonic() - started
    try:
        write_json_atomic(manifest_path, manifest.to_dict())
    except OSError as exc:
        logger.error('cannot write manifest %s: %s', manifest_path, exc)
        outcome.exit_code, outcome.message = EXIT_IO, f'cannot write manifest: {exc}'
    _finish_registration(entry, outcome.exit_code)
    return outcome


def run_from_dict(data, root=None):
    """Validate a configuration document and run it."""
    try:
        config = RunConfig.from_dict(data)
    except ConfigError as exc:
        return RunOutcome(EXIT_CONFIG, message=describe(exc))
    return run(config, root)


def resume(checkpoint_path, overrides=None, allow_param_change=False):
    """
    Continue a run from a checkpoint, optionally extending ``t_end``.

    Diagnostics rows after the checkpoint time are dropped before new rows are
    appended, so the result matches an uninterrupted run. Changing step
    settings is refused unless ``allow_param_change`` is set.
    """
    started = time.monotonic()
    try:
        checkpoint = load_checkpoint(checkpoint_path)
        original = RunConfig.from_dict(checkpoint.config)
        config = original.with_overrides(overrides) if overrides else original
        changed = changed_step_fields(original, config)
        if changed and not allow_param_change:
            raise CheckpointError(f'refusing to change step settings {changed} on resume')
        if config.mode not in (Mode.EULER, Mode.NS):
            raise CheckpointError(f'{config.mode.value} runs have no checkpoints to resume')
    except (InputError, OSError) as exc:
        return RunOutcome(exit_code_for(exc), message=describe(exc))

    state = checkpoint.state
    run_dir = checkpoint.run_dir
    slack = 1e-12 * max(1.0, abs(config.t_end))
    if state.time >= config.t_end - slack:
        logger.info('checkpoint at t=%.6g already reaches t_end=%.6g', state.time, config.t_end)
        return RunOutcome(EXIT_OK, run_dir, run_dir / MANIFEST_NAME, 'nothing to resume')

    schedule = [t for t in config.schedule_times(0.0) if t > state.time + slack]
    outcome = RunOutcome(EXIT_OK, run_dir, run_dir / MANIFEST_NAME)
    try:
        csv_path = checkpoint.seed_dir / DIAGNOSTICS_NAME
        if csv_path.exists():
            dropped = truncate_diagnostics_csv(csv_path, state.time)
            if dropped:
                logger.info('dropped %d diagnostics row(s) after t=%.6g', dropped, state.time)
        _simulate_member(config, run_dir, state, checkpoint.seed, schedule, resuming=True)
        outcome.message = f'resumed seed {checkpoint.seed} to t={config.t_end:g}'
    except (InputError, NumericalError, OSError) as exc:
        outcome.exit_code = exit_code_for(exc)
        outcome.message = describe(exc)
        logger.error('resume failed (exit %d): %s', outcome.exit_code, outcome.message)

    _update_manifest_after_resume(run_dir, config, outcome, time.monotonic() - started)
    return outcome


def _update_manifest_after_resume(run_dir, config, outcome, elapsed):
    path = Path(run_dir) / MANIFEST_NAME
    try:
        manifest = RunManifest(**read_json(path)) if path.exists() else _new_manifest(config)
    except (OSError, ValueError, TypeError) as exc:
        logger.warning('cannot read manifest %s, writing a fresh one: %s', path, exc)
        manifest = _new_manifest(config)
    manifest.config = config.to_dict()
    manifest.status = 'complete' if outcome.ok else 'incomplete'
    manifest.exit_code = outcome.exit_code
    manifest.finished_at = timezone.now().isoformat()
    manifest.wall_clock_seconds = (manifest.wall_clock_seconds or 0.0) + elapsed
    if not outcome.ok:
        manifest.error = outcome.message
    if config.mode == Mode.NS:
        try:
            per_seed = load_run_records(run_dir)
            write_aggregate_csv(Path(run_dir) / AGGREGATE_NAME, config.diagnostics, per_seed)
        except (ValueError, InputError) as exc:
            logger.info('aggregate not refreshed: %s', exc)
    try:
        write_json_atomic(path, manifest.to_dict())
    except OSError as exc:
        logger.error('cannot write manifest %s: %s', path, exc)
        outcome.exit_code, outcome.message = EXIT_IO, f'cannot write manifest: {exc}'
