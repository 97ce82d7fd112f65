import numpy as np
from django.test import SimpleTestCase

from vortices.exceptions import MollifierDomainError
from vortices.mollifier import SMOOTHSTEP_CURVATURE, MollifierProfile, make_mollifier


class MollifierProfileTests(SimpleTestCase):

    def setUp(self):
        self.profile = MollifierProfile(R=4.0, h=1.0)

    def test_plateau_and_cutoff(self):
        self.assertEqual(self.profile.eval(0.0), 1.0)
        self.assertEqual(self.profile.eval(4.0), 1.0)
        self.assertEqual(self.profile.eval(5.0), 0.0)
        self.assertEqual(self.profile.eval(-7.0), 0.0)
        self.assertAlmostEqual(float(self.profile.eval(4.5)), 0.5, places=15)

    def test_even_in_xi(self):
        xi = np.linspace(0, 6, 61)
        np.testing.assert_array_equal(self.profile.eval(xi), self.profile.eval(-xi))

    def test_monotone_in_transition_band(self):
        values = self.profile.eval(np.linspace(4.0, 5.0, 1001))
        self.assertTrue(np.all(np.diff(values) <= 0.0))

    def test_curvature_bound(self):
        for h in (0.25, 1.0, 3.0):
            profile = MollifierProfile(R=2 * h, h=h)
            xi = np.linspace(0, 3 * h + profile.R, 20001)
            self.assertLessEqual(np.max(np.abs(profile.eval_d2(xi))), profile.curvature_bound * (1 + 1e-12))
        self.assertAlmostEqual(SMOOTHSTEP_CURVATURE, 10 / np.sqrt(3))

    def test_derivatives_match_finite_differences(self):
        xi = np.linspace(-5.5, 5.5, 56)
        step = 1e-5
        d1 = (self.profile.eval(xi + step) - self.profile.eval(xi - step)) / (2 * step)
        d2 = (self.profile.eval_d1(xi + step) - self.profile.eval_d1(xi - step)) / (2 * step)
        np.testing.assert_allclose(self.profile.eval_d1(xi), d1, atol=1e-8)
        np.testing.assert_allclose(self.profile.eval_d2(xi), d2, atol=1e-6)

    def test_derivatives_vanish_at_band_edges(self):
        for xi in (4.0, 5.0, -4.0, -5.0):
            self.assertEqual(float(self.profile.eval_d1(xi)), 0.0)
            self.assertEqual(float(self.profile.eval_d2(xi)), 0.0)

    def test_domain_errors(self):
        with self.assertRaises(MollifierDomainError):
            MollifierProfile(R=1.0, h=1.0)
        with self.assertRaises(MollifierDomainError):
            MollifierProfile(R=1.0, h=0.0)
        with self.assertRaises(MollifierDomainError):
            MollifierProfile(R=1.0, h=-0.5)


class MakeMollifierTests(SimpleTestCase):

    def test_builds_profile(self):
        profile = make_mollifier(4, 1)
        self.assertEqual(profile, MollifierProfile(R=4.0, h=1.0))
        self.assertEqual(profile.as_pair(), (4.0, 1.0))

    def test_rejects_narrow_plateau(self):
        with self.assertRaises(MollifierDomainError) as ctx:
            make_mollifier(1.5, 1.0)
        self.assertIn('R', ctx.exception.message_dict)
