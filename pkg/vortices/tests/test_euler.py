import math
from dataclasses import replace
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from vortices.euler import EulerStepConfig, Scheme, adaptive_step, euler_step, run_euler
from vortices.exceptions import InputError, NonFiniteVelocityError, ScheduleError, StepConfigError
from vortices.kernel import wrap_difference
from vortices.state import DiagnosticsPlan, FlowState, first_moment_x1, hamiltonian

from .factories import blob_state, scattered_state


def advance(state, cfg, steps):
    for _ in range(steps):
        state = euler_step(state, cfg)
    return state


def position_error(a, b):
    d1 = a.x1 - b.x1
    d2 = wrap_difference(a.x2 - b.x2)
    return float(np.max(np.hypot(d1, d2)))


def pair_energy(state):
    d1 = state.x1[0] - state.x1[1]
    d2 = state.x2[0] - state.x2[1]
    return math.cosh(d1) - math.cos(d2)


class StepConfigTests(SimpleTestCase):

    def test_invalid_configs(self):
        with self.assertRaises(StepConfigError):
            EulerStepConfig(dt=0.0)
        with self.assertRaises(StepConfigError):
            EulerStepConfig(dt=0.1, scheme='leapfrog')
        with self.assertRaises(StepConfigError):
            EulerStepConfig(dt=0.1, adaptive=True)

    def test_scheme_from_string(self):
        self.assertIs(EulerStepConfig(dt=0.1, scheme='rk2').scheme, Scheme.RK2)


class EulerStepTests(SimpleTestCase):

    def test_dipole_translates_rigidly(self):
        a = math.pi / 4
        state = blob_state([(0.0, math.pi - a), (0.0, math.pi + a)], gamma=[1.0, -1.0], normalization=1.0)
        u = state.velocities()
        np.testing.assert_allclose(u[:, 0], [-0.5, -0.5], atol=1e-14)
        np.testing.assert_allclose(u[:, 1], [0.0, 0.0], atol=1e-14)

        cfg = EulerStepConfig(dt=0.01)
        later = advance(state, cfg, 200)
        speed = (later.x1 - state.x1) / later.time
        np.testing.assert_allclose(speed, [-0.5, -0.5], rtol=1e-6)
        np.testing.assert_allclose(later.x2, state.x2, atol=1e-12)

    def test_corotating_pair_conserves_center_and_energy(self):
        state = blob_state([(-0.5, math.pi), (0.5, math.pi)])
        later = advance(state, EulerStepConfig(dt=0.01), 1000)
        self.assertAlmostEqual(later.time, 10.0, places=9)
        self.assertAlmostEqual(float(np.sum(later.x1)), 0.0, delta=1e-8)
        self.assertAlmostEqual(pair_energy(later), pair_energy(state), delta=1e-8)
        # the pair has actually moved
        self.assertGreater(position_error(later, state), 0.1)

    def test_mass_and_signed_moment_conserved(self):
        state = scattered_state(100, spread=1.5, core_radius=0.2)
        later = advance(state, EulerStepConfig(dt=0.01), 100)
        np.testing.assert_array_equal(later.gamma, state.gamma)
        self.assertAlmostEqual(float(np.sum(later.gamma * later.x1)),
                               float(np.sum(state.gamma * state.x1)), delta=1e-12)
        self.assertEqual(later.step_index, 100)

    def test_first_moment_stays_bounded(self):
        state = scattered_state(100, seed=3, spread=1.5, core_radius=0.2)
        initial = first_moment_x1(state)
        cfg = EulerStepConfig(dt=0.02)
        peak = initial
        for _ in range(100):
            state = euler_step(state, cfg)
            peak = max(peak, first_moment_x1(state))
        self.assertLessEqual(peak, 1.5 * initial)

    def test_hamiltonian_drift(self):
        state = scattered_state(50, spread=0.5, core_radius=0.2)
        h0 = hamiltonian(state)
        later = advance(state, EulerStepConfig(dt=0.002), 250)
        self.assertLess(abs(hamiltonian(later) - h0) / abs(h0), 1e-6)

    def test_time_reversibility(self):
        state = scattered_state(40, spread=1.0, core_radius=0.2)
        cfg = EulerStepConfig(dt=0.01)
        forward = advance(state, cfg, 100)
        reversed_state = replace(forward, gamma=-forward.gamma)
        back = advance(reversed_state, cfg, 100)
        self.assertLess(position_error(back, state), 1e-6)

    def test_rk4_is_fourth_order(self):
        state = blob_state([(-0.5, math.pi), (0.5, math.pi)])
        reference = advance(state, EulerStepConfig(dt=0.0125), 80)
        coarse = position_error(advance(state, EulerStepConfig(dt=0.2), 5), reference)
        fine = position_error(advance(state, EulerStepConfig(dt=0.1), 10), reference)
        self.assertTrue(10 < coarse / fine < 25, coarse / fine)

    def test_lower_order_schemes_converge(self):
        state = blob_state([(-0.5, math.pi), (0.5, math.pi)])
        reference = advance(state, EulerStepConfig(dt=0.01), 100)
        for scheme in (Scheme.RK2, Scheme.EULER_FWD):
            result = advance(state, EulerStepConfig(dt=0.001, scheme=scheme), 1000)
            self.assertLess(position_error(result, reference), 1e-2)

    def test_viscous_state_rejected(self):
        state = blob_state([(0.0, 1.0)], viscosity=0.1)
        with self.assertRaises(InputError):
            euler_step(state, EulerStepConfig(dt=0.1))

    def test_non_finite_velocity(self):
        state = blob_state([(0.0, 1.0), (1.0, 2.0)])
        bad = np.array([[0.0, 0.0], [np.nan, 0.0]])
        with mock.patch.object(FlowState, 'velocities', return_value=bad):
            with self.assertRaises(NonFiniteVelocityError) as ctx:
                euler_step(state, EulerStepConfig(dt=0.1))
        self.assertEqual(ctx.exception.indices, [1])


class AdaptiveStepTests(SimpleTestCase):

    def test_step_shrinks_to_meet_tolerance(self):
        state = blob_state([(-0.05, math.pi), (0.05, math.pi)])
        cfg = EulerStepConfig(dt=1.0, adaptive=True, tolerance=1e-6)
        _, taken, dt_next = adaptive_step(state, cfg, 1.0)
        self.assertLess(taken, 1.0)
        self.assertGreater(dt_next, 0.0)

    def test_adaptive_run_matches_fixed_steps(self):
        state = blob_state([(-0.5, math.pi), (0.5, math.pi)])
        fixed = advance(state, EulerStepConfig(dt=0.01), 100)
        run = run_euler(state, 1.0, EulerStepConfig(dt=0.5, adaptive=True, tolerance=1e-7), [0.0, 1.0])
        records = run.run()
        self.assertEqual([r.time for r in records], [0.0, 1.0])
        self.assertLess(position_error(run.state, fixed), 1e-5)


class RunEulerTests(SimpleTestCase):

    def setUp(self):
        self.state = scattered_state(20, core_radius=0.2)
        self.cfg = EulerStepConfig(dt=0.1)

    def test_records_land_on_schedule(self):
        run = run_euler(self.state, 0.5, self.cfg, [0.0, 0.25, 0.5],
                        diagnostics=DiagnosticsPlan(h_grid=(0.5,)))
        records = run.run()
        self.assertEqual([r.time for r in records], [0.0, 0.25, 0.5])
        self.assertEqual(run.state.time, 0.5)
        self.assertEqual(records[0].tail_mass[0][0], 0.5)

    def test_end_time_off_schedule(self):
        records = run_euler(self.state, 0.35, self.cfg, [0.0, 0.2]).run()
        self.assertEqual([r.time for r in records], [0.0, 0.2])

    def test_run_is_lazy(self):
        run = run_euler(self.state, 1.0, self.cfg, [0.0, 0.5, 1.0])
        first = next(iter(run))
        self.assertEqual(first.time, 0.0)
        self.assertEqual(run.state.step_index, 0)

    def test_on_record_called_with_state(self):
        seen = []
        run_euler(self.state, 0.2, self.cfg, [0.1, 0.2],
                  on_record=lambda state, record: seen.append((state.time, record.time))).run()
        self.assertEqual(seen, [(0.1, 0.1), (0.2, 0.2)])

    def test_bad_schedules(self):
        with self.assertRaises(ScheduleError):
            run_euler(self.state, 1.0, self.cfg, [0.5, 0.2])
        with self.assertRaises(ScheduleError):
            run_euler(self.state, 1.0, self.cfg, [0.0, 1.5])
        with self.assertRaises(ScheduleError):
            run_euler(self.state.at_time(2.0), 1.0, self.cfg, [])

    def test_viscous_state_rejected(self):
        with self.assertRaises(InputError):
            run_euler(replace(self.state, viscosity=0.1), 1.0, self.cfg, [0.0])
