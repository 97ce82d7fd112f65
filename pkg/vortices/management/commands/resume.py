"""
Management command to continue a run from a checkpoint.

Usage:
    python manage.py resume runs/disk/seed_0/checkpoints/checkpoint_0005.json --t-end 200
    python manage.py resume CHECKPOINT --set step.dt=0.005 --allow-param-change
"""

from django.core.management.base import BaseCommand

from vortices.runner import resume

from ._common import finish, parse_assignments


class Command(BaseCommand):
    help = 'Resume a simulation from a checkpoint, optionally extending its end time'

    def add_arguments(self, parser):
        parser.add_argument('checkpoint', help='Path to a checkpoint JSON file')
        parser.add_argument('--t-end', type=float, help='New end time')
        parser.add_argument('--set', action='append', dest='assignments', metavar='KEY=VALUE',
                            help='Override a configuration entry, e.g. step.dt=0.01 (repeatable)')
        parser.add_argument('--allow-param-change', action='store_true',
                            help='Permit changes to the time-step settings')

    def handle(self, *args, **options):
        overrides = parse_assignments(options['assignments'])
        if options['t_end'] is not None:
            overrides['t_end'] = options['t_end']
        self.stdout.write(f"Resuming from {options['checkpoint']}...")
        finish(self, resume(options['checkpoint'], overrides or None,
                            allow_param_change=options['allow_param_change']))
