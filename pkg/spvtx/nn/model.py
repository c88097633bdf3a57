from __future__ import division

import copy
import logging

import numpy as np
from scipy.special import expit

from .._constants import DEFAULTS
from ..exceptions import ValidationError, NumericError
from .. import priors
from .layers import (linear_forward, linear_backward, layernorm_forward, layernorm_backward,
                     attention_forward, attention_backward, mlp_forward, mlp_backward,
                     dropout_forward, dropout_backward)

__all__ = ['ModelConfig', 'CsvViT', 'init_params', 'embed', 'forward', 'backward',
           'weighted_bce', 'pos_weight_of']

logger = logging.getLogger(__name__)


class ModelConfig(object):
    """
    Shape and hyperparameters of the supervertex transformer.

    Arguments
    ---------
    channels    :   int
                    feature channels C
    n_tokens    :   int
                    supervertices N
    v_max       :   int
                    padded supervertex length
    dim         :   int
                    token width
    depth       :   int
                    number of encoder blocks; 0 gives a linear model
    heads       :   int
                    attention heads; must divide dim
    mlp_ratio   :   float
                    hidden width of the MLP as a multiple of dim
    dropout     :   float in [0,1)
                    rate applied to both residual branches during training
    pool        :   str
                    'mean' over tokens or 'cls' for a learned class token
    init_std    :   float
                    deviation of the truncated-normal weight initializer
    rng_seed    :   int
                    seed of the initializer
    """
    def __init__(self, channels, n_tokens, v_max, dim=96, depth=4, heads=4, mlp_ratio=4,
                 dropout=.1, pool='mean', init_std=.02, rng_seed=0):
        self.channels = int(channels)
        self.n_tokens = int(n_tokens)
        self.v_max = int(v_max)
        self.dim = int(dim)
        self.depth = int(depth)
        self.heads = int(heads)
        self.mlp_ratio = mlp_ratio
        self.dropout = float(dropout)
        self.pool = pool
        self.init_std = float(init_std)
        self.rng_seed = rng_seed
        self.check()

    @property
    def hidden(self):
        return max(1, int(round(self.dim * self.mlp_ratio)))

    def check(self):
        for name in ('channels', 'n_tokens', 'v_max', 'dim', 'heads'):
            if getattr(self, name) < 1:
                raise ValidationError('{} must be positive, got {}'.format(name,
                                                                          getattr(self, name)))
        if self.depth < 0:
            raise ValidationError('depth must be non-negative')
        if self.dim % self.heads:
            raise ValidationError('dim={} is not divisible by heads={}'.format(self.dim,
                                                                              self.heads))
        if not 0 <= self.dropout < 1:
            raise ValidationError('dropout must be in [0, 1)')
        if self.pool not in ('mean', 'cls'):
            raise ValidationError("pool must be 'mean' or 'cls', got {}".format(self.pool))
        if self.mlp_ratio <= 0 or self.init_std <= 0:
            raise ValidationError('mlp_ratio and init_std must be positive')
        return True

    def to_dict(self):
        return dict(channels=self.channels, n_tokens=self.n_tokens, v_max=self.v_max,
                    dim=self.dim, depth=self.depth, heads=self.heads,
                    mlp_ratio=self.mlp_ratio, dropout=self.dropout, pool=self.pool,
                    init_std=self.init_std, rng_seed=self.rng_seed)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def for_batch(cls, batch, **configs):
        """
        A config sized for a PaddedBatch, other fields from DEFAULTS['model']
        overridden by `configs`.
        """
        options = copy.deepcopy(DEFAULTS['model'])
        options.update(configs)
        _, C, N, V = batch.x.shape
        return cls(C, N, V, **options)

    def __eq__(self, other):
        return isinstance(other, ModelConfig) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'ModelConfig({})'.format(', '.join('{}={}'.format(k, v) for k, v
                                                  in sorted(self.to_dict().items())))

##################
# INITIALIZATION #
##################

def init_params(config):
    """
    Parameters of a fresh model, keyed by dotted names.
    """
    rng = np.random.default_rng(config.rng_seed)
    draw = priors.Truncnorm(0, config.init_std)
    D, H = config.dim, config.hidden
    params = dict()
    params['embed.W'] = draw((config.channels * config.v_max, D), rng)
    params['embed.b'] = priors.zeros((D,))
    params['pos'] = draw((config.n_tokens, D), rng)
    if config.pool == 'cls':
        params['cls'] = draw((D,), rng)
    for i in range(config.depth):
        block = 'blocks.{}.'.format(i)
        params[block + 'ln1.g'] = priors.ones((D,))
        params[block + 'ln1.b'] = priors.zeros((D,))
        params[block + 'attn.Wqkv'] = draw((D, 3 * D), rng)
        params[block + 'attn.bq'] = priors.zeros((D,))
        params[block + 'attn.bv'] = priors.zeros((D,))
        params[block + 'attn.Wo'] = draw((D, D), rng)
        params[block + 'attn.bo'] = priors.zeros((D,))
        params[block + 'ln2.g'] = priors.ones((D,))
        params[block + 'ln2.b'] = priors.zeros((D,))
        params[block + 'mlp.W1'] = draw((D, H), rng)
        params[block + 'mlp.b1'] = priors.zeros((H,))
        params[block + 'mlp.W2'] = draw((H, D), rng)
        params[block + 'mlp.b2'] = priors.zeros((D,))
    params['head.W'] = draw((D, 1), rng)
    params['head.b'] = priors.zeros((1,))
    return params


def _sub(params, prefix):
    return {k[len(prefix):]: v for k, v in params.items() if k.startswith(prefix)}

###########
# FORWARD #
###########

def embed(x, mask, params):
    """
    One token per supervertex: zero the padded slots, flatten every
    supervertex channel-major (all vertices of channel 0, then channel 1, ...),
    apply one linear map, and add the positional embedding.

    Arguments
    ---------
    x       :   np.ndarray (B, C, N, v_max)
    mask    :   np.ndarray (N, v_max)
    params  :   dict
                needs embed.W (C*v_max, D), embed.b (D,), pos (N, D)

    Returns
    -------
    (tokens (B, N, D), cache)
    """
    if x.ndim != 4:
        raise ValidationError('x must be shaped (B, C, N, v_max), got {}'.format(x.shape))
    B, C, N, V = x.shape
    if mask.shape != (N, V):
        raise ValidationError('mask shaped {} for tokens shaped {}'.format(mask.shape, (N, V)))
    if params['embed.W'].shape[0] != C * V or params['pos'].shape[0] != N:
        raise ValidationError('parameters expect {} inputs and {} tokens, got {} and {}'
                              .format(params['embed.W'].shape[0], params['pos'].shape[0],
                                      C * V, N))
    flat = np.where(mask.astype(bool), x, 0.0).transpose(0, 2, 1, 3).reshape(B, N, C * V)
    tokens, cache = linear_forward(flat, params['embed.W'], params['embed.b'])
    return tokens + params['pos'], cache


def _finite(h, block):
    if not np.isfinite(h).all():
        raise NumericError('non-finite activation in block {}'.format(block), block=block)


def forward(x, mask, params, config, train=False, rng=None):
    """
    Logits of a batch.

    Tokens pass through `depth` pre-norm encoder blocks, each adding
    attention(LN(h)) and then MLP(LN(h)) to the residual stream; the pooled
    token goes through a linear head.

    Arguments
    ---------
    x       :   np.ndarray (B, C, N, v_max)
    mask    :   np.ndarray (N, v_max)
    params  :   dict
    config  :   ModelConfig
    train   :   bool
                apply dropout, drawing masks from `rng`
    rng     :   numpy Generator or None

    Returns
    -------
    (logits (B,), cache for backward)
    """
    if train and config.dropout > 0 and rng is None:
        raise ValidationError('training with dropout needs a random generator')
    h, embed_cache = embed(x, mask, params)
    if config.pool == 'cls':
        cls = np.broadcast_to(params['cls'], (h.shape[0], 1, h.shape[2]))
        h = np.concatenate([cls, h], axis=1)
    blocks = []
    for i in range(config.depth):
        p = _sub(params, 'blocks.{}.'.format(i))
        a, c_ln1 = layernorm_forward(h, p['ln1.g'], p['ln1.b'])
        a, c_attn = attention_forward(a, _sub(p, 'attn.'), config.heads)
        a, c_drop1 = dropout_forward(a, config.dropout, rng, train)
        h = h + a
        m, c_ln2 = layernorm_forward(h, p['ln2.g'], p['ln2.b'])
        m, c_mlp = mlp_forward(m, _sub(p, 'mlp.'))
        m, c_drop2 = dropout_forward(m, config.dropout, rng, train)
        h = h + m
        _finite(h, i)
        blocks.append((c_ln1, c_attn, c_drop1, c_ln2, c_mlp, c_drop2))
    pooled = h[:, 0] if config.pool == 'cls' else h.mean(axis=1)
    logits, head_cache = linear_forward(pooled, params['head.W'], params['head.b'])
    _finite(logits, config.depth)
    return logits[:, 0], (embed_cache, blocks, head_cache, h.shape)


def weighted_bce(logits, labels, pos_weight=1.0):
    """
    Class-weighted binary cross-entropy of logits, per sample:
    -[w*y*log(sigmoid(z)) + (1-y)*log(1-sigmoid(z))], written with logaddexp
    so it never overflows.
    """
    if np.any(np.asarray(pos_weight) <= 0):
        raise ValidationError('pos_weight must be positive')
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return pos_weight * y * np.logaddexp(0, -z) + (1 - y) * np.logaddexp(0, z)


def pos_weight_of(labels):
    """
    Ratio of negative to positive labels.
    """
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    if n_pos == 0:
        raise ValidationError('no positive labels to weight')
    return (labels.shape[0] - n_pos) / n_pos

############
# BACKWARD #
############

def backward(x, mask, labels, params, config, pos_weight=1.0, train=False, rng=None):
    """
    Mean weighted BCE of a batch and its exact gradient for every parameter.

    Returns
    -------
    (loss, grads) with grads keyed like params
    """
    logits, (embed_cache, blocks, head_cache, shape) = forward(x, mask, params, config,
                                                               train=train, rng=rng)
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    B = logits.shape[0]
    loss = float(weighted_bce(logits, labels, pos_weight).mean())
    s = expit(logits)
    dz = (pos_weight * labels * (s - 1) + (1 - labels) * s) / B

    grads = dict()
    dpooled, g = linear_backward(dz[:, None], head_cache)
    grads['head.W'], grads['head.b'] = g['W'], g['b']
    dh = np.zeros(shape)
    if config.pool == 'cls':
        dh[:, 0] = dpooled
    else:
        dh += dpooled[:, None, :] / shape[1]
    for i in range(config.depth - 1, -1, -1):
        c_ln1, c_attn, c_drop1, c_ln2, c_mlp, c_drop2 = blocks[i]
        block = 'blocks.{}.'.format(i)
        dm = dropout_backward(dh, c_drop2)
        dm, g = mlp_backward(dm, c_mlp)
        grads.update({block + 'mlp.' + k: v for k, v in g.items()})
        dm, g = layernorm_backward(dm, c_ln2)
        grads[block + 'ln2.g'], grads[block + 'ln2.b'] = g['g'], g['b']
        dh = dh + dm
        da = dropout_backward(dh, c_drop1)
        da, g = attention_backward(da, c_attn)
        grads.update({block + 'attn.' + k: v for k, v in g.items()})
        da, g = layernorm_backward(da, c_ln1)
        grads[block + 'ln1.g'], grads[block + 'ln1.b'] = g['g'], g['b']
        dh = dh + da
    if config.pool == 'cls':
        grads['cls'] = dh[:, 0].sum(axis=0)
        dh = dh[:, 1:]
    grads['pos'] = dh.sum(axis=0)
    _, g = linear_backward(dh, embed_cache)
    grads['embed.W'], grads['embed.b'] = g['W'], g['b']
    return loss, grads

#########
# MODEL #
#########

class CsvViT(object):
    """
    Configuration and parameters of one supervertex transformer.

    Arguments
    ---------
    config  :   ModelConfig
    params  :   dict or None
                parameters; drawn from the initializer when None
    """
    def __init__(self, config, params=None):
        self.config = config
        self.params = init_params(config) if params is None else params

    def logits(self, batch):
        return forward(batch.x, batch.mask, self.params, self.config)[0]

    def predict(self, batch):
        """
        Probability of the positive class for every subject.
        """
        return expit(self.logits(batch))

    def loss_and_grads(self, batch, labels, pos_weight=1.0, rng=None):
        train = rng is not None
        return backward(batch.x, batch.mask, labels, self.params, self.config,
                        pos_weight=pos_weight, train=train, rng=rng)

    @property
    def n_params(self):
        return int(sum(v.size for v in self.params.values()))

    def save(self, filename, overwrite=False):
        from ..sqlite import save_checkpoint
        save_checkpoint(self.params, self.config.to_dict(), filename, overwrite=overwrite)

    @classmethod
    def load(cls, filename):
        from ..sqlite import load_checkpoint
        params, config = load_checkpoint(filename)
        return cls(ModelConfig.from_dict(config), params=params)
