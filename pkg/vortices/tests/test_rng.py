import numpy as np
from django.test import SimpleTestCase

from vortices.exceptions import InputError
from vortices.rng import RngStream


class RngStreamTests(SimpleTestCase):

    def test_same_key_same_draws(self):
        a = RngStream(seed=11, ensemble_id=2).normals(step=7, n=50)
        b = RngStream(seed=11, ensemble_id=2).normals(step=7, n=50)
        np.testing.assert_array_equal(a, b)

    def test_draws_depend_on_step_ensemble_and_seed(self):
        base = RngStream(11, 2).normals(7, 20)
        self.assertFalse(np.array_equal(base, RngStream(11, 2).normals(8, 20)))
        self.assertFalse(np.array_equal(base, RngStream(11, 3).normals(7, 20)))
        self.assertFalse(np.array_equal(base, RngStream(12, 2).normals(7, 20)))

    def test_blob_draws_do_not_depend_on_ensemble_size(self):
        stream = RngStream(5)
        np.testing.assert_array_equal(stream.normals(3, 10)[:4], stream.normals(3, 4))

    def test_standard_normal_moments(self):
        draws = RngStream(2024).normals(0, 100000).reshape(-1)
        self.assertLess(abs(draws.mean()), 0.01)
        self.assertLess(abs(draws.var() - 1.0), 0.02)
        self.assertLess(abs(np.mean(draws ** 4) - 3.0), 0.1)

    def test_uniforms_in_open_interval(self):
        u = RngStream(1).uniforms(0, 10000)
        self.assertTrue(np.all((u > 0.0) & (u < 1.0)))

    def test_invalid_keys_rejected(self):
        with self.assertRaises(InputError):
            RngStream(seed=-1)
        with self.assertRaises(InputError):
            RngStream(seed=1, ensemble_id=2 ** 64)
        with self.assertRaises(InputError):
            RngStream(seed=1).normals(-1, 3)

    def test_dict_round_trip(self):
        stream = RngStream(seed=99, ensemble_id=4)
        self.assertEqual(RngStream.from_dict(stream.to_dict()), stream)
