"""
Shared plumbing for the simulator's management commands.
"""

import json

from django.core.management.base import CommandError

from vortices.runner import EXIT_CONFIG, EXIT_IO


def load_document(path):
    """Read a JSON configuration file; a missing path gives an empty document."""
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CommandError(f'Cannot read configuration {path}: {exc}', returncode=EXIT_IO)
    except json.JSONDecodeError as exc:
        raise CommandError(f'Configuration {path} is not valid JSON: {exc}', returncode=EXIT_CONFIG)
    if not isinstance(data, dict):
        raise CommandError('Configuration must be a JSON object.', returncode=EXIT_CONFIG)
    return data


def set_path(data, dotted, value):
    """Set ``data['a']['b'] = value`` for ``dotted == 'a.b'``, creating blocks as needed."""
    keys = dotted.split('.')
    target = data
    for key in keys[:-1]:
        if not isinstance(target.get(key), dict):
            target[key] = {}
        target = target[key]
    target[keys[-1]] = value


def apply_flags(data, options, mapping):
    """Overlay command-line options onto a configuration document."""
    for option, dotted in mapping.items():
        value = options.get(option)
        if value is not None:
            set_path(data, dotted, value)
    return data


def parse_assignments(assignments):
    """Turn ``key.path=value`` strings into a nested override document (values parsed as JSON)."""
    overrides = {}
    for item in assignments or ():
        key, sep, raw = item.partition('=')
        if not sep or not key:
            raise CommandError(f'Expected key=value, got {item!r}', returncode=EXIT_CONFIG)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        set_path(overrides, key.strip(), value)
    return overrides


def finish(command, outcome):
    """Report a RunOutcome: success message, or CommandError carrying the exit code."""
    if outcome.ok:
        command.stdout.write(command.style.SUCCESS(outcome.message or 'Done.'))
        if outcome.manifest_path:
            command.stdout.write(f'Manifest: {outcome.manifest_path}')
        return
    raise CommandError(outcome.message or 'Run failed.', returncode=outcome.exit_code)
