import math

import numpy as np
from django.test import SimpleTestCase

from vortices.euler import EulerStepConfig, euler_step
from vortices.exceptions import (
    CoincidentBlobsError, EmptyEnsembleError, InputError, InvalidStateError, OutOfGridError,
    SingularKernelError,
)
from vortices.initial_data import PatchShape, PatchSpec, discretize
from vortices.kernel import KernelConfig, green, induced_velocity
from vortices.mollifier import MollifierProfile
from vortices.state import (
    DiagnosticsPlan, DiagnosticsRecord, FlowState, GridSpec, center_x1, diagnose, diameter_x1,
    first_moment_x1, hamiltonian, max_abs_x1, mollified_tail, mollified_tail_rate,
    mollified_tail_rate_pairs, rasterize, tail_mass, total_mass,
)

from .factories import blob_state, scattered_state


class FlowStateTests(SimpleTestCase):

    def test_positions_are_wrapped_and_read_only(self):
        state = blob_state([(0.0, 7.0), (1.0, -1.0)])
        self.assertAlmostEqual(state.x2[0], 7.0 - 2 * math.pi, places=14)
        self.assertAlmostEqual(state.x2[1], 2 * math.pi - 1.0, places=14)
        with self.assertRaises(ValueError):
            state.positions[0, 0] = 3.0

    def test_coincident_blobs_rejected_without_core(self):
        with self.assertRaises(CoincidentBlobsError):
            blob_state([(0.0, 1.0), (0.0, 1.0)])
        self.assertEqual(blob_state([(0.0, 1.0), (0.0, 1.0)], core_radius=0.1).n_blobs, 2)

    def test_invalid_fields_rejected(self):
        with self.assertRaises(InvalidStateError):
            blob_state([(0.0, 1.0)], viscosity=-1.0)
        with self.assertRaises(InvalidStateError):
            blob_state([(0.0, 1.0)], time=-0.5)
        with self.assertRaises(InvalidStateError):
            FlowState(positions=[(0.0, 1.0)], gamma=[1.0, 2.0], core=0.1)
        with self.assertRaises(InvalidStateError):
            FlowState(positions=[(0.0, 1.0)], gamma=[1.0], core=0.0)

    def test_blobs_view(self):
        state = blob_state([(0.5, 1.0), (-0.5, 2.0)], gamma=[2.0, 3.0])
        blobs = state.blobs
        self.assertEqual(blobs[1].gamma, 3.0)
        self.assertEqual(FlowState.from_blobs(blobs).gamma.tolist(), [2.0, 3.0])


class ScalarDiagnosticsTests(SimpleTestCase):

    def setUp(self):
        self.state = blob_state([(-3.0, 1.0), (-1.0, 2.0), (0.0, 3.0), (2.0, 4.0), (5.0, 5.0)])

    def test_mass_and_tails(self):
        self.assertEqual(total_mass(self.state), 5.0)
        self.assertEqual(tail_mass(self.state, 0.0), 4.0)
        self.assertEqual(tail_mass(self.state, 1.5), 3.0)
        self.assertEqual(tail_mass(self.state, 10.0), 0.0)

    def test_tail_mass_non_increasing_in_h(self):
        state = scattered_state(200, spread=3.0)
        tails = [tail_mass(state, h) for h in np.linspace(0, 4, 41)]
        self.assertTrue(all(b <= a for a, b in zip(tails, tails[1:])))

    def test_mollified_tail(self):
        state = blob_state([(0.0, 1.0), (2.5, 1.0), (3.0, 1.0)])
        self.assertAlmostEqual(mollified_tail(state, MollifierProfile(R=2.0, h=1.0)), 1.5, places=14)

    def test_mollified_tail_brackets_tail_mass(self):
        for seed in range(5):
            state = scattered_state(300, seed=seed, spread=4.0)
            for R, h in ((0.9, 0.3), (1.5, 0.5), (2.0, 0.25), (3.0, 1.0)):
                tail = tail_mass(state, R)
                self.assertLessEqual(mollified_tail(state, MollifierProfile(R=R, h=h)), tail + 1e-12)
                self.assertLessEqual(tail, mollified_tail(state, MollifierProfile(R=R - h, h=h)) + 1e-12)

    def test_extent_diagnostics(self):
        self.assertEqual(diameter_x1(self.state), 8.0)
        self.assertEqual(max_abs_x1(self.state), 5.0)
        self.assertEqual(first_moment_x1(self.state), 11.0)
        self.assertAlmostEqual(center_x1(self.state), 0.6, places=15)

    def test_center_of_neutral_ensemble_is_nan(self):
        state = blob_state([(0.0, 1.0), (1.0, 1.0)], gamma=[1.0, -1.0])
        self.assertTrue(math.isnan(center_x1(state)))

    def test_empty_ensemble(self):
        empty = FlowState(positions=np.zeros((0, 2)), gamma=[], core=0.1)
        self.assertEqual(total_mass(empty), 0.0)
        with self.assertRaises(EmptyEnsembleError):
            diameter_x1(empty)
        with self.assertRaises(EmptyEnsembleError):
            center_x1(empty)

    def test_hamiltonian_of_pair(self):
        state = blob_state([(0.0, 0.0), (0.0, math.pi)], normalization=1.0)
        self.assertAlmostEqual(hamiltonian(state), -0.5 * math.log(2.0), places=14)

    def test_hamiltonian_matches_direct_sum(self):
        state = scattered_state(12, core_radius=0.1)
        direct = 0.0
        for i in range(12):
            for j in range(i + 1, 12):
                direct += state.gamma[i] * state.gamma[j] * green(state.positions[i], state.positions[j], 0.1)
        self.assertAlmostEqual(hamiltonian(state), state.kernel_cfg.normalization * direct, places=13)

    def test_hamiltonian_singular_for_coincident_blobs(self):
        state = FlowState(positions=[(0.0, 1.0), (0.0, 1.0)], gamma=[1.0, 1.0], core=0.1)
        with self.assertRaises(SingularKernelError):
            hamiltonian(state)


class MollifiedTailRateTests(SimpleTestCase):

    def test_zero_when_all_blobs_on_plateau(self):
        state = scattered_state(50, spread=1.0)
        self.assertEqual(mollified_tail_rate(state, MollifierProfile(R=3.0, h=1.0)), 0.0)
        self.assertEqual(mollified_tail_rate_pairs(state, MollifierProfile(R=3.0, h=1.0)), 0.0)

    def test_pair_form_matches_velocity_form(self):
        state = scattered_state(120, spread=2.0, viscosity=0.05)
        profile = MollifierProfile(R=1.0, h=0.5)
        direct = mollified_tail_rate(state, profile)
        pairs = mollified_tail_rate_pairs(state, profile)
        self.assertNotEqual(direct, 0.0)
        self.assertAlmostEqual(pairs / direct, 1.0, delta=1e-10)

    def test_rate_matches_finite_difference(self):
        state = scattered_state(80, spread=2.0, core_radius=0.3)
        profile = MollifierProfile(R=1.0, h=0.5)
        dt = 1e-4
        later = euler_step(state, EulerStepConfig(dt=dt))
        observed = (mollified_tail(later, profile) - mollified_tail(state, profile)) / dt
        predicted = mollified_tail_rate(state, profile)
        self.assertGreater(abs(predicted), 1e-4)
        self.assertAlmostEqual(observed, predicted, delta=1e-5 + 1e-3 * abs(predicted))


class RasterizeTests(SimpleTestCase):

    def setUp(self):
        self.state = scattered_state(40, spread=1.0, core_radius=0.1)
        self.grid = GridSpec(-2.0, 2.0, 64, 0.0, 2 * math.pi, 64)

    def test_integral_equals_total_mass(self):
        for profile in ('bump', 'kernel'):
            field = rasterize(self.state, self.grid, profile=profile)
            self.assertAlmostEqual(field.integral() / total_mass(self.state), 1.0, delta=1e-12)

    def test_narrow_blob_falls_into_nearest_cell(self):
        state = FlowState(positions=[(0.01, 1.0)], gamma=[2.0], core=1e-6)
        field = rasterize(state, self.grid)
        self.assertEqual(np.count_nonzero(field.values), 1)
        self.assertAlmostEqual(field.integral(), 2.0, places=12)

    def test_translation_equivariance(self):
        field = rasterize(self.state, self.grid)
        moved = rasterize(self.state.translated(0.5, 0.0), self.grid.translated(0.5, 0.0))
        np.testing.assert_allclose(moved.values, field.values, atol=1e-9 * field.max())

    def test_blob_outside_grid(self):
        state = blob_state([(0.0, 1.0), (3.0, 1.0)], core_radius=0.1)
        with self.assertRaises(OutOfGridError):
            rasterize(state, self.grid)

    def test_curl_of_velocity_is_vorticity(self):
        patch = PatchSpec(shape=PatchShape.GAUSSIAN_TRUNCATED, sigma=0.5, cutoff_radius=1.5,
                          amplitude=1.0, radius=None, omega_level=None, n_blobs=1600)
        state = discretize(patch, kernel_cfg=KernelConfig(core_radius=0.1))
        grid = GridSpec(-math.pi, math.pi, 256, 0.0, 2 * math.pi, 256)
        omega = rasterize(state, grid, profile='kernel').values

        x1, x2 = np.meshgrid(grid.x1_centers, grid.x2_centers, indexing='ij')
        targets = np.column_stack([x1.ravel(), x2.ravel()])
        u = induced_velocity(targets, state.positions, state.gamma, state.kernel_cfg)
        u1 = u[:, 0].reshape(x1.shape)
        u2 = u[:, 1].reshape(x1.shape)
        du2_dx1 = np.gradient(u2, grid.dx1, axis=0)
        du1_dx2 = (np.roll(u1, -1, axis=1) - np.roll(u1, 1, axis=1)) / (2 * grid.dx2)
        curl = du2_dx1 - du1_dx2
        error = np.sum(np.abs(curl - omega)) / np.sum(np.abs(omega))
        self.assertLess(error, 0.02)


class DiagnosticsRecordTests(SimpleTestCase):

    def test_plan_validation(self):
        with self.assertRaises(InputError):
            DiagnosticsPlan(h_grid=(2.0, 1.0))

    def test_header_and_row_align(self):
        plan = DiagnosticsPlan(h_grid=(0.5, 1.0), mollifier_pairs=((2.0, 1.0), (4.0, 0.5)))
        rec = diagnose(scattered_state(30), plan, ensemble_id=1, seed=9)
        header = plan.csv_header()
        self.assertEqual(header[:2], ['time', 'total_mass'])
        self.assertEqual(header[-1], 'mu_R=4_h=0.5')
        self.assertEqual(len(header), len(rec.to_row()))
        parsed = DiagnosticsRecord.from_row(header, rec.to_row(), ensemble_id=1, seed=9)
        self.assertEqual(parsed, rec)

    def test_record_values(self):
        state = blob_state([(-1.0, 1.0), (2.0, 2.0)], core_radius=0.1)
        rec = diagnose(state, DiagnosticsPlan(h_grid=(0.0, 1.5)))
        self.assertEqual(rec.diameter, 3.0)
        self.assertEqual(rec.tail_mass, ((0.0, 2.0), (1.5, 1.0)))
        self.assertEqual(rec.tail_at(1.5), 1.0)
