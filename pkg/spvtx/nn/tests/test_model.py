import os
import shutil
import tempfile
import unittest as ut

import numpy as np

from spvtx.nn import (ModelConfig, CsvViT, init_params, embed, forward, backward,
                      weighted_bce, pos_weight_of, tiny_config, tiny_batch)
from spvtx.tokenizer import PaddedBatch
from spvtx.exceptions import ValidationError, NumericError
from spvtx._constants import RTOL, ATOL, TEST_SEED


class Test_Loss(ut.TestCase):
    def test_closed_forms(self):
        np.testing.assert_allclose(weighted_bce([0., 0.], [1, 0]), [np.log(2)] * 2,
                                   rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(weighted_bce(0., 1, pos_weight=2.), 2 * np.log(2),
                                   rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(weighted_bce([1000., -1000.], [0, 1]), [1000., 1000.],
                                   rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(weighted_bce([1000., -1000.], [1, 0]), [0., 0.],
                                   rtol=1e-12, atol=1e-12)

    def test_pos_weight(self):
        self.assertEqual(pos_weight_of([0, 0, 0, 1]), 3.0)
        with self.assertRaises(ValidationError):
            pos_weight_of([0, 0])
        with self.assertRaises(ValidationError):
            weighted_bce([0.], [1], pos_weight=0)


class Test_Config(ut.TestCase):
    def test_guards(self):
        with self.assertRaises(ValidationError):
            ModelConfig(2, 6, 4, dim=10, heads=4)
        with self.assertRaises(ValidationError):
            ModelConfig(2, 6, 4, pool='max')
        with self.assertRaises(ValidationError):
            ModelConfig(2, 6, 4, dropout=1.0)
        with self.assertRaises(ValidationError):
            ModelConfig(0, 6, 4)

    def test_round_trip(self):
        config = tiny_config()
        self.assertEqual(ModelConfig.from_dict(config.to_dict()), config)

    def test_for_batch(self):
        batch = PaddedBatch(np.zeros((3, 2, 5, 7)), np.ones((5, 7), dtype=np.uint8))
        config = ModelConfig.for_batch(batch, depth=1)
        self.assertEqual((config.channels, config.n_tokens, config.v_max, config.depth),
                         (2, 5, 7, 1))


class Test_Embed(ut.TestCase):
    def test_worked_example(self):
        params = {'embed.W': np.array([[1.], [2.]]), 'embed.b': np.array([.5]),
                  'pos': np.zeros((1, 1))}
        x = np.array([3., 4.]).reshape(1, 1, 1, 2)
        tokens, _ = embed(x, np.array([[1, 1]]), params)
        np.testing.assert_allclose(tokens, [[[11.5]]], rtol=1e-12, atol=1e-12)
        tokens, _ = embed(x, np.array([[1, 0]]), params)
        np.testing.assert_allclose(tokens, [[[3.5]]], rtol=1e-12, atol=1e-12)

    def test_channel_major(self):
        params = {'embed.W': np.eye(4), 'embed.b': np.zeros(4), 'pos': np.zeros((1, 4))}
        x = np.array([[1., 2.], [3., 4.]]).reshape(1, 2, 1, 2)
        tokens, _ = embed(x, np.ones((1, 2)), params)
        np.testing.assert_array_equal(tokens[0, 0], [1, 2, 3, 4])

    def test_shape_guards(self):
        config = tiny_config()
        params = init_params(config)
        x, mask, _ = tiny_batch(config)
        with self.assertRaises(ValidationError):
            embed(x[0], mask, params)
        with self.assertRaises(ValidationError):
            embed(x, mask[:, :-1], params)
        with self.assertRaises(ValidationError):
            embed(x[:, :, :-1], mask[:-1], params)


class Test_Forward(ut.TestCase):
    def setUp(self):
        self.config = tiny_config(depth=2)
        self.params = init_params(self.config)
        self.x, self.mask, self.labels = tiny_batch(self.config)

    def test_padding_is_ignored(self):
        rng = np.random.default_rng(TEST_SEED)
        reference, _ = forward(self.x, self.mask, self.params, self.config)
        padded = self.mask == 0
        for _ in range(50):
            x = self.x.copy()
            x[:, :, padded] = rng.normal(scale=100, size=x[:, :, padded].shape)
            logits, _ = forward(x, self.mask, self.params, self.config)
            np.testing.assert_array_equal(logits, reference)

    def test_token_permutation(self):
        perm = np.random.default_rng(TEST_SEED).permutation(self.config.n_tokens)
        params = dict(self.params)
        params['pos'] = self.params['pos'][perm]
        reference, _ = forward(self.x, self.mask, self.params, self.config)
        logits, _ = forward(self.x[:, :, perm], self.mask[perm], params, self.config)
        np.testing.assert_allclose(logits, reference, rtol=1e-10, atol=1e-10)

    def test_non_finite(self):
        x = self.x.copy()
        x[0, 0, 0, 0] = np.inf
        with self.assertRaises(NumericError) as caught:
            forward(x, self.mask, self.params, self.config)
        self.assertEqual(caught.exception.block, 0)
        linear = tiny_config(depth=0)
        with self.assertRaises(NumericError) as caught:
            forward(x, self.mask, init_params(linear), linear)
        self.assertEqual(caught.exception.block, 0)

    def test_dropout(self):
        config = tiny_config(depth=2, dropout=.5)
        params = init_params(config)
        with self.assertRaises(ValidationError):
            forward(self.x, self.mask, params, config, train=True)
        evaluation, _ = forward(self.x, self.mask, params, config)
        again, _ = forward(self.x, self.mask, params, config)
        np.testing.assert_array_equal(evaluation, again)
        trained, _ = forward(self.x, self.mask, params, config, train=True,
                             rng=np.random.default_rng(TEST_SEED))
        self.assertFalse(np.allclose(trained, evaluation))

    def test_cls_pool(self):
        config = tiny_config(depth=1, pool='cls')
        params = init_params(config)
        self.assertEqual(params['cls'].shape, (config.dim,))
        logits, _ = forward(self.x, self.mask, params, config)
        self.assertEqual(logits.shape, (self.x.shape[0],))

    def test_stationary_point(self):
        """
        With a zero head every subject gets logit 0; weighting positives by the
        class ratio makes the loss flat in the head bias, and nothing upstream
        of the head receives gradient.
        """
        params = dict(self.params)
        params['head.W'] = np.zeros_like(params['head.W'])
        labels = np.array([0, 0, 0, 1])
        _, grads = backward(self.x, self.mask, labels, params, self.config,
                            pos_weight=pos_weight_of(labels))
        np.testing.assert_allclose(grads['head.b'], 0, rtol=RTOL, atol=1e-12)
        for name, grad in grads.items():
            if name != 'head.W':
                np.testing.assert_allclose(grad, 0, rtol=RTOL, atol=1e-12)
        self.assertEqual(sorted(grads), sorted(params))


class Test_CsvViT(ut.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_save_load(self):
        config = tiny_config(depth=1)
        x, mask, labels = tiny_batch(config)
        batch = PaddedBatch(x, mask)
        model = CsvViT(config)
        filename = os.path.join(self.tmp, 'model.db')
        model.save(filename)
        back = CsvViT.load(filename)
        self.assertEqual(back.config, config)
        np.testing.assert_array_equal(back.logits(batch), model.logits(batch))
        self.assertEqual(back.n_params, model.n_params)
        probs = model.predict(batch)
        self.assertTrue(((probs > 0) & (probs < 1)).all())

    def test_loss_and_grads(self):
        config = tiny_config(depth=1)
        x, mask, labels = tiny_batch(config)
        model = CsvViT(config)
        loss, grads = model.loss_and_grads(PaddedBatch(x, mask), labels, pos_weight=1.0)
        expected = weighted_bce(model.logits(PaddedBatch(x, mask)), labels).mean()
        np.testing.assert_allclose(loss, expected, rtol=1e-12, atol=1e-12)
        self.assertEqual(grads['embed.W'].shape, model.params['embed.W'].shape)
