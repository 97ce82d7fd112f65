"""
Management command to certify the kernel decay envelope.

Usage:
    python manage.py validate_kernel
    python manage.py validate_kernel --c1 2 --c2 0.5 --samples 40000 --json envelope.json
"""

import json

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from vortices.exceptions import InputError
from vortices.kernel import DecayEnvelope, validate_decay_envelope
from vortices.runner import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, describe


class Command(BaseCommand):
    help = 'Check |dG/dx2| <= c1 exp(-c2 r) / r on a dense sample of the fundamental strip'

    def add_arguments(self, parser):
        parser.add_argument('--c1', type=float, default=2.0)
        parser.add_argument('--c2', type=float, default=0.5)
        parser.add_argument('--samples', type=int, default=None)
        parser.add_argument('--json', dest='json_path', help='Write the validation report here')

    def handle(self, *args, **options):
        samples = options['samples'] or settings.VORTEX_ENVELOPE_SAMPLES
        try:
            report = validate_decay_envelope(DecayEnvelope(options['c1'], options['c2']), samples)
        except InputError as exc:
            raise CommandError(describe(exc), returncode=EXIT_CONFIG)

        self.stdout.write(f'Samples: {report.samples}')
        self.stdout.write(f'Max ratio: {report.max_ratio:.6f} at separation {report.worst_separation}')
        if options['json_path']:
            try:
                with open(options['json_path'], 'w') as fh:
                    json.dump(report.to_dict(), fh, indent=2)
            except OSError as exc:
                raise CommandError(f'Cannot write {options["json_path"]}: {exc}', returncode=EXIT_IO)
        if not report.passed:
            raise CommandError(f'Envelope c1={options["c1"]:g}, c2={options["c2"]:g} is violated.',
                               returncode=EXIT_NUMERICAL)
        self.stdout.write(self.style.SUCCESS('Decay envelope certified.'))
