"""
Management command to replay the iterated tail-mass bounds numerically.

Usage:
    python manage.py replay_bounds --regime ns_a --alpha 2 --log-t 10 --log-t 100
    python manage.py replay_bounds --regime ns_b --beta 1 --delta 0.5 --t 100 --big-c 0.5
"""

from django.core.management.base import BaseCommand

from vortices.bound_replay import Regime
from vortices.runner import run_from_dict

from ._common import finish


class Command(BaseCommand):
    help = 'Evaluate recursive and closed-form tail bounds over a sweep of times'

    def add_arguments(self, parser):
        parser.add_argument('--regime', required=True, choices=[r.value for r in Regime])
        parser.add_argument('--t', type=float, action='append', help='Time (repeatable)')
        parser.add_argument('--log-t', type=float, action='append', help='Log of time (repeatable)')
        parser.add_argument('--alpha', type=float)
        parser.add_argument('--beta', type=float)
        parser.add_argument('--delta', type=float)
        parser.add_argument('--big-c', type=float, help='Constant C of the iteration step')
        parser.add_argument('--m0', type=float, help='Initial total circulation')
        parser.add_argument('--support-radius', type=float)
        parser.add_argument('--output-dir', default='bounds')

    def handle(self, *args, **options):
        replay = {
            name: options[name]
            for name in ('regime', 't', 'log_t', 'alpha', 'beta', 'delta', 'big_c', 'm0', 'support_radius')
            if options.get(name) is not None
        }
        outcome = run_from_dict({
            'mode': 'bound_replay',
            'output_dir': options['output_dir'],
            'replay': replay,
        })
        if outcome.certificates:
            self.stdout.write(f"{'log t':>12} {'n':>10} {'h':>12} {'log recursive':>16} "
                              f"{'log closed':>14} {'gap':>10} {'agrees':>7}")
            for cert in outcome.certificates:
                plan = cert.plan
                self.stdout.write(
                    f'{plan.log_t:12.6g} {plan.n:10d} {plan.h:12.6g} {cert.log_recursive_bound:16.8g} '
                    f'{cert.log_closed_form:14.8g} {cert.gap:10.4g} {str(cert.agrees):>7}'
                )
        finish(self, outcome)
