import math

from django.test import SimpleTestCase

from vortices.confinement import EnvelopeKind
from vortices.euler import Scheme
from vortices.forms import (
    EnvelopeForm, FloatListField, IntListField, KernelForm, PairListField, PatchForm, ReplayForm,
    RunConfigForm, ScheduleForm, StepForm,
)
from vortices.initial_data import PatchShape


class ListFieldTests(SimpleTestCase):

    def test_float_list_from_string_and_list(self):
        field = FloatListField(required=False)
        self.assertEqual(field.clean('1, 2.5,3'), (1.0, 2.5, 3.0))
        self.assertEqual(field.clean([1, 2]), (1.0, 2.0))
        self.assertEqual(field.clean(None), ())

    def test_float_list_length(self):
        field = FloatListField(length=2)
        with self.assertRaisesMessage(Exception, 'Expected exactly 2 numbers.'):
            field.clean([1.0])
        with self.assertRaisesMessage(Exception, 'All numbers must be finite.'):
            field.clean(['nan', 1.0])

    def test_int_list_rejects_negative(self):
        field = IntListField(required=False)
        self.assertEqual(field.clean('0,1,2'), (0, 1, 2))
        with self.assertRaisesMessage(Exception, 'Numbers must be non-negative.'):
            field.clean([-1])

    def test_pair_list(self):
        field = PairListField(required=False)
        self.assertEqual(field.clean('4:1,8:2'), ((4.0, 1.0), (8.0, 2.0)))
        self.assertEqual(field.clean([[4, 1]]), ((4.0, 1.0),))
        with self.assertRaisesMessage(Exception, 'Enter pairs of numbers'):
            field.clean([[4, 1, 2]])


class BlockFormTests(SimpleTestCase):

    def test_kernel_defaults(self):
        form = KernelForm(data={})
        self.assertTrue(form.is_valid(), form.errors)
        config = form.cleaned_data['config']
        self.assertAlmostEqual(config.normalization, 1 / (2 * math.pi), places=15)
        self.assertEqual(config.core_radius, 0.0)
        self.assertIsNone(config.truncation_radius)

    def test_kernel_domain_error_lands_on_field(self):
        form = KernelForm(data={'truncation_radius': 5.0})
        self.assertFalse(form.is_valid())
        self.assertIn('truncation_radius', form.errors)

    def test_patch_form(self):
        form = PatchForm(data={'shape': 'ring', 'r_in': 0.2, 'r_out': 0.6, 'omega_level': 3.0, 'n_blobs': 100})
        self.assertTrue(form.is_valid(), form.errors)
        spec = form.cleaned_data['spec']
        self.assertIs(spec.shape, PatchShape.RING)
        self.assertEqual(spec.center, (0.0, math.pi))

    def test_patch_form_field_errors(self):
        form = PatchForm(data={'shape': 'gaussian_truncated', 'sigma': 0.5, 'n_blobs': 100})
        self.assertFalse(form.is_valid())
        self.assertIn('cutoff_radius', form.errors)
        self.assertIn('amplitude', form.errors)

    def test_step_form(self):
        form = StepForm(data={'dt': 0.01, 'scheme': 'rk2'})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertIs(form.cleaned_data['config'].scheme, Scheme.RK2)
        form = StepForm(data={'dt': 0.01, 'adaptive': True})
        self.assertFalse(form.is_valid())
        self.assertIn('tolerance', form.errors)

    def test_schedule_form(self):
        self.assertTrue(ScheduleForm(data={'kind': 'linear', 'dt_out': 1.0}).is_valid())
        form = ScheduleForm(data={'kind': 'geometric', 't_first': 1.0, 'ratio': 1.0})
        self.assertFalse(form.is_valid())
        self.assertEqual(list(form.errors), ['ratio'])
        form = ScheduleForm(data={'kind': 'linear'})
        self.assertIn('dt_out', form.errors)

    def test_schedule_form_defaults_to_geometric(self):
        form = ScheduleForm(data={})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['kind'], 'geometric')
        self.assertEqual(form.cleaned_data['t_first'], 1.0)
        self.assertEqual(form.cleaned_data['ratio'], 1.5)
        form = ScheduleForm(data={'kind': 'geometric', 't_first': -1.0})
        self.assertEqual(list(form.errors), ['t_first'])

    def test_envelope_form(self):
        form = EnvelopeForm(data={'kind': 'ns_power', 'beta': 1.0, 'delta': 0.5})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertIs(form.cleaned_data['spec'].kind, EnvelopeKind.NS_POWER)
        form = EnvelopeForm(data={'kind': 'ns_power', 'beta': 1.0, 'delta': 1.5})
        self.assertIn('delta', form.errors)

    def test_replay_form_times(self):
        form = ReplayForm(data={'regime': 'ns_a', 't': [math.e ** 3, math.e ** 4], 'alpha': 2.0})
        self.assertTrue(form.is_valid(), form.errors)
        log_t = form.cleaned_data['log_t']
        self.assertAlmostEqual(log_t[0], 3.0, places=12)
        self.assertAlmostEqual(log_t[1], 4.0, places=12)

    def test_replay_form_errors(self):
        form = ReplayForm(data={'regime': 'ns_a', 't': [10.0], 'log_t': [3.0]})
        self.assertFalse(form.is_valid())
        self.assertIn('__all__', form.errors)
        form = ReplayForm(data={'regime': 'ns_a'})
        self.assertIn('log_t', form.errors)
        form = ReplayForm(data={'regime': 'ns_a', 'log_t': [3.0], 'm0': 0.0})
        self.assertIn('m0', form.errors)


class RunConfigFormTests(SimpleTestCase):

    def test_simulation_needs_end_time(self):
        form = RunConfigForm(data={'mode': 'euler', 'output_dir': 'out'})
        self.assertFalse(form.is_valid())
        self.assertIn('t_end', form.errors)

    def test_viscosity_matches_mode(self):
        form = RunConfigForm(data={'mode': 'ns', 'output_dir': 'out', 't_end': 1.0})
        self.assertIn('viscosity', form.errors)
        form = RunConfigForm(data={'mode': 'euler', 'output_dir': 'out', 't_end': 1.0, 'viscosity': 0.1})
        self.assertIn('viscosity', form.errors)
        form = RunConfigForm(data={'mode': 'ns', 'output_dir': 'out', 't_end': 1.0, 'viscosity': 0.1})
        self.assertTrue(form.is_valid(), form.errors)

    def test_mollifier_pair_error_names_the_pair(self):
        form = RunConfigForm(data={
            'mode': 'report', 'output_dir': 'out', 'mollifier_pairs': [[4, 1], [1.5, 1]],
        })
        self.assertFalse(form.is_valid())
        self.assertEqual(form.errors['mollifier_pairs'], ['(R, h) = (1.5, 1) violates h > 0 and R >= 2h.'])

    def test_h_grid_must_increase(self):
        form = RunConfigForm(data={'mode': 'report', 'output_dir': 'out', 'h_grid': [1, 1]})
        self.assertIn('h_grid', form.errors)

    def test_report_window_order(self):
        form = RunConfigForm(data={'mode': 'report', 'output_dir': 'out', 'report_window': [5, 2]})
        self.assertIn('report_window', form.errors)
