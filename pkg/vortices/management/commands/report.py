"""
Management command to build a confinement report for a finished run.

Usage:
    python manage.py report --run-dir runs/disk --kind euler_cuberoot_log --alpha 2 --ell 1
"""

from django.core.management.base import BaseCommand

from vortices.confinement import EnvelopeKind
from vortices.runner import run_from_dict

from ._common import finish


class Command(BaseCommand):
    help = 'Compare recorded tail masses and diameters of a run against a growth envelope'

    def add_arguments(self, parser):
        parser.add_argument('--run-dir', required=True, help='Directory of a completed run')
        parser.add_argument('--kind', required=True, choices=[k.value for k in EnvelopeKind])
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--beta', type=float)
        parser.add_argument('--delta', type=float)
        parser.add_argument('--ell', type=float)
        parser.add_argument('--window', help='low,high time window for the growth fit')

    def handle(self, *args, **options):
        envelope = {name: options[name] for name in ('kind', 'alpha', 'beta', 'delta', 'ell')
                    if options.get(name) is not None}
        data = {'mode': 'report', 'output_dir': options['run_dir'], 'envelope': envelope}
        if options.get('window'):
            data['report_window'] = options['window']
        outcome = run_from_dict(data)
        report = outcome.report
        if report is not None:
            self.stdout.write(f"{'t':>12} {'radius':>12} {'tail':>12} {'ratio':>12} {'d ratio':>10}")
            for s in report.samples:
                ratio = '-' if s.ratio is None else f'{s.ratio:.4g}'
                self.stdout.write(f'{s.time:12.6g} {s.radius:12.6g} {s.tail_mass:12.4g} '
                                  f'{ratio:>12} {s.diameter_ratio:10.4g}')
            if report.fit:
                self.stdout.write(f'Diameter growth exponent {report.fit.slope:.4f} '
                                  f'(95% CI {report.fit.ci_low:.4f} .. {report.fit.ci_high:.4f})')
            self.stdout.write(f'Max tail ratio: {report.max_tail_ratio}')
            self.stdout.write(f'Diameter ratio non-increasing over last decade: '
                              f'{report.diameter_ratio_non_increasing}')
        finish(self, outcome)
