"""
Turn supervertex maps and per-vertex features into padded token tensors.

Every supervertex becomes one token row of length v_max holding its vertices
in ascending order, padded with -1 in the index table and 0.0 in the
feature tensor.
"""
from __future__ import division

import logging

import numpy as np

from .exceptions import ValidationError

__all__ = ['IndexTable', 'PaddedBatch', 'Standardizer', 'build_index_table',
           'build_mask', 'gather', 'scatter']

logger = logging.getLogger(__name__)

PAD = -1


class IndexTable(object):
    """
    Vertex indices of every supervertex, padded to a common width.

    Arguments
    ---------
    table       :   np.ndarray (N, v_max)
                    vertex indices, or -1 in padded slots
    n_vertices  :   int or None
                    size of the vertex index space the table points into
    """
    def __init__(self, table, n_vertices=None):
        self.table = np.asarray(table, dtype=np.int64)
        if self.table.ndim != 2:
            raise ValidationError('an index table must be two-dimensional')
        if n_vertices is None:
            n_vertices = int(self.table.max()) + 1 if self.table.size else 0
        self.n_vertices = int(n_vertices)

    @property
    def n(self):
        return self.table.shape[0]

    @property
    def v_max(self):
        return self.table.shape[1]

    @property
    def sizes(self):
        return (self.table >= 0).sum(axis=1)

    def check(self):
        """
        Raise a ValidationError unless every row is a sorted run of distinct
        vertices followed only by padding, and no vertex appears twice.
        """
        valid = self.table >= 0
        if (self.table < PAD).any():
            raise ValidationError('index tables hold vertex ids or -1 only')
        if (valid[:, 1:] & ~valid[:, :-1]).any():
            raise ValidationError('a vertex follows a padded slot')
        ascending = np.diff(self.table, axis=1) > 0
        if (valid[:, 1:] & ~ascending).any():
            raise ValidationError('rows must be strictly ascending')
        used = self.table[valid]
        if np.unique(used).size != used.size:
            raise ValidationError('a vertex appears in several rows')
        if used.size and used.max() >= self.n_vertices:
            raise ValidationError('vertex {} is outside [0, {})'.format(used.max(),
                                                                        self.n_vertices))
        return True

    def __eq__(self, other):
        if not isinstance(other, IndexTable):
            return False
        return self.n_vertices == other.n_vertices and np.array_equal(self.table, other.table)

    def __repr__(self):
        return 'IndexTable(n={}, v_max={})'.format(self.n, self.v_max)


class PaddedBatch(object):
    """
    Token tensor of a batch of subjects.

    Arguments
    ---------
    x           :   np.ndarray (B, C, N, v_max)
                    feature values, zero in padded slots
    mask        :   np.ndarray (N, v_max)
                    1 where a slot holds a vertex
    channels    :   list of str or None
                    names of the C feature channels
    """
    def __init__(self, x, mask, channels=None):
        self.x = x
        self.mask = mask
        self.channels = list(channels) if channels is not None else None

    @property
    def shape(self):
        return self.x.shape

    def __len__(self):
        return self.x.shape[0]

    def __getitem__(self, index):
        x = self.x[index]
        if x.ndim == 3:
            x = x[None]
        return PaddedBatch(x, self.mask, channels=self.channels)


def _rows(csvmap, offset):
    if csvmap.mode != 'vertex':
        raise ValidationError('face-based supervertices overlap and cannot be tokenized')
    return [np.sort(m) + offset for m in csvmap.members]


def build_index_table(left, right=None, v_max=None):
    """
    Stack the supervertices of one or two hemispheres into an index table.

    Arguments
    ---------
    left    :   CsvMap
                left hemisphere; its rows come first
    right   :   CsvMap or None
                right hemisphere; its vertex ids are shifted by the left
                hemisphere's vertex count
    v_max   :   int or None
                row width; defaults to the largest supervertex. A smaller
                value than the largest supervertex is an error.

    Returns
    -------
    IndexTable
    """
    rows = _rows(left, 0)
    n_vertices = left.n_vertices
    if right is not None:
        if right.n_vertices != left.n_vertices:
            raise ValidationError('hemispheres have {} and {} vertices'
                                  .format(left.n_vertices, right.n_vertices))
        rows.extend(_rows(right, left.n_vertices))
        n_vertices += right.n_vertices
    largest = max(r.shape[0] for r in rows) if rows else 0
    if v_max is None:
        v_max = largest
    if v_max < largest:
        raise ValidationError('v_max={} is below the largest supervertex ({})'
                              .format(v_max, largest))
    table = np.full((len(rows), int(v_max)), PAD, dtype=np.int64)
    for i, r in enumerate(rows):
        table[i, :r.shape[0]] = r
    logger.debug('index table: %d rows, v_max=%d', table.shape[0], v_max)
    return IndexTable(table, n_vertices=n_vertices)


def build_mask(table):
    """
    Binary mask of the occupied slots of an index table.
    """
    table = table.table if isinstance(table, IndexTable) else np.asarray(table)
    return (table >= 0).astype(np.uint8)


def gather(features, table, mask=None, channels=None):
    """
    Collect per-vertex features into padded tokens.

    Arguments
    ---------
    features    :   np.ndarray (B, C, V) or (C, V)
                    per-vertex values of every subject and channel
    table       :   IndexTable
    mask        :   np.ndarray or None
                    the table's mask, rebuilt when omitted
    channels    :   list of str or None
                    names carried along with the batch

    Returns
    -------
    PaddedBatch with x[b, c, i, j] = features[b, c, table[i, j]] where the
    mask is 1 and 0.0 elsewhere
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 2:
        features = features[None]
    if features.ndim != 3 or features.shape[1] < 1:
        raise ValidationError('features must be shaped (B, C, V) with C >= 1, got {}'
                              .format(features.shape))
    if mask is None:
        mask = build_mask(table)
    index = table.table
    if index.size and index.max() >= features.shape[2]:
        raise ValidationError('vertex {} is out of range for {} feature values'
                              .format(index.max(), features.shape[2]))
    if (index < PAD).any():
        raise ValidationError('negative vertex ids other than -1 in the index table')
    taken = features[:, :, np.where(index >= 0, index, 0)]
    x = np.where(mask.astype(bool), taken, 0.0)
    return PaddedBatch(x, mask, channels=channels)


def scatter(x, table, n_vertices=None, fill=0.0):
    """
    Inverse of gather: write token values back to their vertices.

    Returns
    -------
    np.ndarray (B, C, n_vertices); vertices in no supervertex get `fill`
    """
    x = np.asarray(x)
    if n_vertices is None:
        n_vertices = table.n_vertices
    valid = table.table >= 0
    out = np.full(x.shape[:2] + (int(n_vertices),), fill, dtype=x.dtype)
    out[:, :, table.table[valid]] = x[:, :, valid]
    return out


class Standardizer(object):
    """
    Per-channel z-scoring over occupied slots, fitted on training subjects.

    Arguments
    ---------
    enabled :   bool
                when False, transform is the identity
    """
    def __init__(self, enabled=True):
        self.enabled = enabled
        self.mean = None
        self.std = None

    def fit(self, batch):
        valid = batch.mask.astype(bool)
        values = batch.x[:, :, valid]
        self.mean = values.mean(axis=(0, 2))
        std = values.std(axis=(0, 2))
        self.std = np.where(std > 0, std, 1.0)
        return self

    def transform(self, batch):
        if not self.enabled:
            return batch
        if self.mean is None:
            raise ValidationError('the standardizer has not been fitted')
        x = (batch.x - self.mean[None, :, None, None]) / self.std[None, :, None, None]
        x = np.where(batch.mask.astype(bool), x, 0.0)
        return PaddedBatch(x, batch.mask, channels=batch.channels)

    def fit_transform(self, batch):
        return self.fit(batch).transform(batch)
