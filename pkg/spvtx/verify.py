import numpy as np
from warnings import warn as Warn
from .exceptions import ValidationError, UndefinedMetricError

def symmetric(adj):
    """
    This checks that a graph is undirected, going through the libpysal weights
    view of the adjacency, and that it has no self-loops.
    """
    asymmetric = adj.weights.asymmetry(intrinsic=False)
    if len(asymmetric) > 0:
        raise ValidationError('adjacency is not symmetric at {} pairs'.format(len(asymmetric)))
    if adj.sparse.diagonal().any():
        raise ValidationError('adjacency has self-loops')
    return adj

def fraction(value, name='value'):
    """
    This checks that a value lies strictly between zero and one.
    """
    if not 0 < value < 1:
        raise ValidationError('{} must be in (0, 1), got {}'.format(name, value))
    return value

def binary_labels(labels):
    """
    This coerces labels to a 0/1 integer vector, refusing anything else.
    """
    labels = np.asarray(labels).reshape(-1)
    if not np.isin(labels, (0, 1)).all():
        raise ValidationError('labels must be 0 or 1')
    return labels.astype(np.int64)

def scores_and_labels(scores, labels):
    """
    This

    1. flattens scores and labels and checks that their lengths agree
    2. refuses non-finite scores
    3. raises UndefinedMetricError when only one class is present
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    labels = binary_labels(labels)
    if scores.shape != labels.shape:
        raise ValidationError('{} scores for {} labels'.format(scores.shape[0], labels.shape[0]))
    if not np.isfinite(scores).all():
        raise ValidationError('scores must be finite')
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.shape[0]:
        raise UndefinedMetricError('both classes are needed, got {} positives of {}'
                                   .format(n_pos, labels.shape[0]))
    return scores, labels

def channels(requested, available):
    """
    This maps channel names to their indices, warning about duplicates.
    """
    if requested is None:
        return list(range(len(available)))
    if isinstance(requested, str):
        requested = [c.strip() for c in requested.split(',') if c.strip()]
    missing = [c for c in requested if c not in available]
    if missing:
        raise ValidationError('unknown channels {}; available: {}'.format(missing, available))
    if len(set(requested)) != len(requested):
        Warn('Channels {} are requested more than once.'.format(requested), stacklevel=2)
    return [available.index(c) for c in requested]
