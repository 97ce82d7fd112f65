"""
Management command to run a vortex-blob simulation.

Usage:
    python manage.py simulate config.json
    python manage.py simulate config.json --t-end 200 --seeds 1,2,3 --output-dir runs/disk

Flags override the matching entries of the JSON configuration. Exit codes:
0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.
"""

from django.core.management.base import BaseCommand

from vortices.euler import Scheme
from vortices.runner import run_from_dict

from ._common import apply_flags, finish, load_document

FLAG_PATHS = {
    'mode': 'mode',
    't_end': 't_end',
    'viscosity': 'viscosity',
    'output_dir': 'output_dir',
    'seeds': 'seeds',
    'h_grid': 'h_grid',
    'mollifier_pairs': 'mollifier_pairs',
    'dt': 'step.dt',
    'scheme': 'step.scheme',
    'n_blobs': 'patch.n_blobs',
    'normalization': 'kernel.normalization',
    'core_radius': 'kernel.core_radius',
    'truncation_radius': 'kernel.truncation_radius',
}


class Command(BaseCommand):
    help = 'Run an Euler or Navier-Stokes vortex-blob simulation on the cylinder'

    def add_arguments(self, parser):
        parser.add_argument('config', nargs='?', help='Path to a JSON run configuration')
        parser.add_argument('--mode', choices=['euler', 'ns'])
        parser.add_argument('--t-end', type=float)
        parser.add_argument('--viscosity', type=float)
        parser.add_argument('--output-dir')
        parser.add_argument('--seeds', help='Comma-separated random seeds (one ensemble member each)')
        parser.add_argument('--h-grid', help='Comma-separated tail radii')
        parser.add_argument('--mollifier-pairs', help='Comma-separated R:h pairs')
        parser.add_argument('--dt', type=float)
        parser.add_argument('--scheme', choices=[s.value for s in Scheme])
        parser.add_argument('--n-blobs', type=int)
        parser.add_argument('--normalization', type=float)
        parser.add_argument('--core-radius', type=float)
        parser.add_argument('--truncation-radius', type=float)

    def handle(self, *args, **options):
        data = apply_flags(load_document(options['config']), options, FLAG_PATHS)
        self.stdout.write(f"Running {data.get('mode', '?')} simulation...")
        finish(self, run_from_dict(data))
