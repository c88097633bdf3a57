import unittest as ut

import numpy as np

from spvtx.nn import grad_check, tiny_config


class Test_GradCheck(ut.TestCase):
    def test_tiny_transformer(self):
        self.assertTrue(grad_check() < 1e-4)

    def test_linear_model(self):
        self.assertTrue(grad_check(tiny_config(depth=0)) < 1e-5)

    def test_cls_pool(self):
        self.assertTrue(grad_check(tiny_config(depth=1, pool='cls')) < 1e-4)

    def test_other_seed(self):
        self.assertTrue(grad_check(tiny_config(rng_seed=3), rng_seed=3) < 1e-4)

    def test_coarse_step_is_worse(self):
        config = tiny_config(depth=1)
        self.assertTrue(grad_check(config, step=1e-1) > grad_check(config, step=1e-4))

    def test_details(self):
        out = grad_check(tiny_config(depth=1), n_params=50, details=True)
        self.assertEqual(len(out.names), 200)
        self.assertEqual(out.errors.shape, (200,))
        self.assertEqual(out.max_rel_error, out.errors.max())
        np.testing.assert_allclose(out.analytic, out.numeric, rtol=1e-3, atol=1e-6)
