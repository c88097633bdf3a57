"""
Numpy layers with hand-written backward passes.

Every `*_forward` returns (out, cache); the matching `*_backward` takes the
upstream gradient and the cache and returns the input gradient, plus a dict
of parameter gradients where the layer has parameters.
"""
from __future__ import division

import numpy as np
from scipy.special import ndtr

__all__ = ['linear_forward', 'linear_backward', 'layernorm_forward', 'layernorm_backward',
           'gelu_forward', 'gelu_backward', 'softmax', 'dropout_forward', 'dropout_backward',
           'attention_forward', 'attention_backward', 'mlp_forward', 'mlp_backward']

LN_EPS = 1e-5
_INV_SQRT_2PI = 1.0 / np.sqrt(2 * np.pi)

##########
# LINEAR #
##########

def linear_forward(x, W, b):
    return x.dot(W) + b, (x, W)


def linear_backward(dout, cache):
    x, W = cache
    n_in, n_out = W.shape
    dW = x.reshape(-1, n_in).T.dot(dout.reshape(-1, n_out))
    db = dout.reshape(-1, n_out).sum(axis=0)
    return dout.dot(W.T), dict(W=dW, b=db)

##############
# LAYER NORM #
##############

def layernorm_forward(x, g, b, eps=LN_EPS):
    """
    Normalize over the last axis, then scale by g and shift by b.
    """
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    return g * xhat + b, (xhat, inv, g)


def layernorm_backward(dout, cache):
    xhat, inv, g = cache
    lead = tuple(range(dout.ndim - 1))
    dg = (dout * xhat).sum(axis=lead)
    db = dout.sum(axis=lead)
    dxhat = dout * g
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dict(g=dg, b=db)

########
# GELU #
########

def gelu_forward(x):
    """
    Exact GELU, x * Phi(x), with Phi the standard normal CDF.
    """
    cdf = ndtr(x)
    return x * cdf, (x, cdf)


def gelu_backward(dout, cache):
    x, cdf = cache
    return dout * (cdf + x * _INV_SQRT_2PI * np.exp(-.5 * x * x))

###########
# DROPOUT #
###########

def dropout_forward(x, rate, rng=None, train=False):
    """
    Inverted dropout; the identity outside training or at rate 0.
    """
    if not train or rate <= 0:
        return x, None
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * keep, keep


def dropout_backward(dout, cache):
    return dout if cache is None else dout * cache

#############
# ATTENTION #
#############

def softmax(x, axis=-1):
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _split_heads(x, heads):
    B, N, D = x.shape
    return x.reshape(B, N, heads, D // heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, h, N, d = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, N, h * d)


def attention_forward(x, p, heads):
    """
    Multi-head self-attention over all tokens.

    Arguments
    ---------
    x       :   np.ndarray (B, N, D)
    p       :   dict
                Wqkv (D, 3D), bq (D,), bv (D,), Wo (D, D), bo (D,). Keys carry
                no bias: softmax ignores it.
    heads   :   int
                number of heads; D must be divisible by it
    """
    D = x.shape[-1]
    bias = np.concatenate([p['bq'], np.zeros(D), p['bv']])
    qkv, qkv_cache = linear_forward(x, p['Wqkv'], bias)
    q, k, v = (_split_heads(qkv[..., i * D:(i + 1) * D], heads) for i in range(3))
    scale = 1.0 / np.sqrt(D // heads)
    P = softmax(np.matmul(q, k.transpose(0, 1, 3, 2)) * scale)
    A = _merge_heads(np.matmul(P, v))
    out, out_cache = linear_forward(A, p['Wo'], p['bo'])
    return out, (qkv_cache, q, k, v, P, scale, out_cache, heads)


def attention_backward(dout, cache):
    qkv_cache, q, k, v, P, scale, out_cache, heads = cache
    dA, g_out = linear_backward(dout, out_cache)
    dA = _split_heads(dA, heads)
    dP = np.matmul(dA, v.transpose(0, 1, 3, 2))
    dv = np.matmul(P.transpose(0, 1, 3, 2), dA)
    dS = P * (dP - (dP * P).sum(axis=-1, keepdims=True))
    dq = np.matmul(dS, k) * scale
    dk = np.matmul(dS.transpose(0, 1, 3, 2), q) * scale
    dqkv = np.concatenate([_merge_heads(dq), _merge_heads(dk), _merge_heads(dv)], axis=-1)
    dx, g_qkv = linear_backward(dqkv, qkv_cache)
    D = dx.shape[-1]
    return dx, dict(Wqkv=g_qkv['W'], bq=g_qkv['b'][:D], bv=g_qkv['b'][2 * D:],
                    Wo=g_out['W'], bo=g_out['b'])

#######
# MLP #
#######

def mlp_forward(x, p):
    """
    Linear, GELU, linear. p holds W1, b1, W2, b2.
    """
    h, c1 = linear_forward(x, p['W1'], p['b1'])
    a, cg = gelu_forward(h)
    out, c2 = linear_forward(a, p['W2'], p['b2'])
    return out, (c1, cg, c2)


def mlp_backward(dout, cache):
    c1, cg, c2 = cache
    da, g2 = linear_backward(dout, c2)
    dh = gelu_backward(da, cg)
    dx, g1 = linear_backward(dh, c1)
    return dx, dict(W1=g1['W'], b1=g1['b'], W2=g2['W'], b2=g2['b'])
