"""
Finite-difference verification of the analytic gradients.
"""
from __future__ import division

import numpy as np

from ..abstracts import Hashmap
from .model import ModelConfig, init_params, forward, backward, weighted_bce

__all__ = ['tiny_config', 'tiny_batch', 'grad_check']

# fewest parameter entries compared in one check
MIN_CHECKED = 200


def tiny_config(depth=2, rng_seed=0, **overrides):
    """
    The smallest useful model: 2 channels, 6 tokens of 4 slots, width 8.
    Weights are drawn wider than for training so every path carries signal.
    """
    options = dict(channels=2, n_tokens=6, v_max=4, dim=8, depth=depth, heads=2,
                   mlp_ratio=2, dropout=0.0, pool='mean', init_std=.3, rng_seed=rng_seed)
    options.update(overrides)
    return ModelConfig(**options)


def tiny_batch(config, n_subjects=4, rng_seed=0):
    """
    Random features, a random ragged mask, and alternating labels.
    """
    rng = np.random.default_rng(rng_seed)
    sizes = rng.integers(1, config.v_max + 1, size=config.n_tokens)
    mask = (np.arange(config.v_max)[None, :] < sizes[:, None]).astype(np.uint8)
    x = rng.standard_normal((n_subjects, config.channels, config.n_tokens, config.v_max))
    labels = np.arange(n_subjects) % 2
    return x, mask, labels


def _loss(x, mask, labels, params, config, pos_weight):
    logits, _ = forward(x, mask, params, config)
    return weighted_bce(logits, labels, pos_weight).mean()


def grad_check(config=None, rng_seed=0, n_params=MIN_CHECKED, step=1e-4, pos_weight=1.5,
               details=False):
    """
    Compare analytic gradients to central differences on randomly chosen
    parameter entries, in float64 and without dropout.

    Arguments
    ---------
    config      :   ModelConfig or None
                    model to check; tiny_config() when None
    rng_seed    :   int
                    seed of the data and of the entry selection
    n_params    :   int
                    entries compared; drawn with replacement when the model
                    has fewer
    step        :   float
                    finite-difference step
    pos_weight  :   float
                    positive class weight of the loss
    details     :   bool
                    also return the per-entry errors

    Returns
    -------
    max relative error |a-f| / max(1e-8, |a|+|f|), or a Hashmap with
    max_rel_error, names, indices, analytic, numeric, and errors when
    `details` is set
    """
    if config is None:
        config = tiny_config(rng_seed=rng_seed)
    x, mask, labels = tiny_batch(config, rng_seed=rng_seed)
    params = init_params(config)
    _, grads = backward(x, mask, labels, params, config, pos_weight=pos_weight)

    names = sorted(params)
    sizes = np.array([params[n].size for n in names])
    total = int(sizes.sum())
    rng = np.random.default_rng(rng_seed)
    n_params = max(int(n_params), MIN_CHECKED)
    picks = rng.choice(total, size=n_params, replace=total < n_params)
    offsets = np.r_[0, np.cumsum(sizes)]

    analytic, numeric, picked_names, picked_index = [], [], [], []
    for flat in picks:
        which = int(np.searchsorted(offsets, flat, side='right') - 1)
        name, index = names[which], int(flat - offsets[which])
        value = params[name].reshape(-1)
        original = value[index]
        value[index] = original + step
        up = _loss(x, mask, labels, params, config, pos_weight)
        value[index] = original - step
        down = _loss(x, mask, labels, params, config, pos_weight)
        value[index] = original
        numeric.append((up - down) / (2 * step))
        analytic.append(grads[name].reshape(-1)[index])
        picked_names.append(name)
        picked_index.append(index)
    analytic, numeric = np.array(analytic), np.array(numeric)
    errors = np.abs(analytic - numeric) / np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    worst = float(errors.max())
    if not details:
        return worst
    return Hashmap(max_rel_error=worst, names=picked_names, indices=picked_index,
                   analytic=analytic, numeric=numeric, errors=errors)
