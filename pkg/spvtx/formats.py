"""
Binary and JSON codecs for meshes, atlases, supervertex maps, index tables,
and per-subject feature files.

Binary files are little-endian and start with a magic string; JSON files are
written with sorted keys so identical objects give identical bytes. Readers
pick the codec from the first bytes of the file.
"""
from __future__ import division

import json
import struct

import numpy as np

from ._constants import (MESH_MAGIC, ATLAS_MAGIC, CSVMAP_MAGIC, INDEX_MAGIC,
                         NONE, NONE_U32)
from .atlas import AtlasLabeling
from .exceptions import ValidationError
from .mesh import Mesh
from .planner import PartitionPlan
from .partition.model import CsvMap
from .tokenizer import IndexTable

__all__ = ['write_mesh', 'read_mesh', 'write_atlas', 'read_atlas',
           'write_csvmap', 'read_csvmap', 'write_index_table', 'read_index_table',
           'write_features', 'read_features', 'dumps_json']


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError('{} is not JSON serializable'.format(type(obj).__name__))


def dumps_json(obj):
    """
    Deterministic JSON text of `obj`.
    """
    return json.dumps(obj, sort_keys=True, default=_jsonable)


def _is_json(path):
    with open(path, 'rb') as f:
        head = f.read(64).lstrip()
    return head.startswith(b'{')


def _write_json(obj, path):
    with open(path, 'w') as f:
        f.write(dumps_json(obj))
        f.write('\n')


def _read_json(path):
    with open(path, 'r') as f:
        return json.load(f)


def _wants_json(path, as_json):
    if as_json is None:
        return str(path).lower().endswith('.json')
    return bool(as_json)


class _Reader(object):
    """
    Sequential reader over a byte string with error messages naming the file.
    """
    def __init__(self, data, path):
        self.data = data
        self.path = path
        self.at = 0

    def magic(self, expected):
        got = self.take(len(expected))
        if got != expected:
            raise ValidationError('{} is not a {} file'.format(self.path,
                                                               expected.decode('ascii')))

    def take(self, n):
        if self.at + n > len(self.data):
            raise ValidationError('{} is truncated'.format(self.path))
        out = self.data[self.at:self.at + n]
        self.at += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, count):
        dtype = np.dtype(dtype)
        return np.frombuffer(self.take(dtype.itemsize * int(count)), dtype=dtype).copy()

    def blob(self):
        n, = self.unpack('<I')
        return json.loads(self.take(n).decode('utf-8'))

    def done(self):
        if self.at != len(self.data):
            raise ValidationError('{} has {} trailing bytes'
                                  .format(self.path, len(self.data) - self.at))


def _read_bytes(path):
    with open(path, 'rb') as f:
        return f.read()


def _blob(obj):
    text = dumps_json(obj).encode('utf-8')
    return struct.pack('<I', len(text)) + text

########
# MESH #
########

def write_mesh(mesh, path, as_json=None):
    if _wants_json(path, as_json):
        _write_json(dict(level=mesh.level, positions=mesh.positions, faces=mesh.faces), path)
        return
    with open(path, 'wb') as f:
        f.write(MESH_MAGIC)
        f.write(struct.pack('<III', mesh.level, mesh.n_vertices, mesh.n_faces))
        f.write(np.ascontiguousarray(mesh.positions, dtype='<f8').tobytes())
        f.write(np.ascontiguousarray(mesh.faces, dtype='<u4').tobytes())


def read_mesh(path):
    if _is_json(path):
        d = _read_json(path)
        return Mesh(np.asarray(d['positions'], dtype=np.float64).reshape(-1, 3),
                    np.asarray(d['faces'], dtype=np.int64).reshape(-1, 3),
                    level=d['level'])
    r = _Reader(_read_bytes(path), path)
    r.magic(MESH_MAGIC)
    level, n_vertices, n_faces = r.unpack('<III')
    positions = r.array('<f8', 3 * n_vertices).reshape(-1, 3)
    faces = r.array('<u4', 3 * n_faces).reshape(-1, 3).astype(np.int64)
    r.done()
    return Mesh(positions, faces, level=level)

#########
# ATLAS #
#########

def write_atlas(atlas, path, as_json=None):
    excluded = sorted(atlas.excluded_labels)
    names = None if atlas.roi_names is None else {str(k): v for k, v in atlas.roi_names.items()}
    if _wants_json(path, as_json):
        _write_json(dict(labels=atlas.labels, excluded=excluded, names=names,
                         warnings=atlas.warnings), path)
        return
    with open(path, 'wb') as f:
        f.write(ATLAS_MAGIC)
        f.write(struct.pack('<II', atlas.n_vertices, len(excluded)))
        f.write(np.asarray(atlas.labels, dtype='<i4').tobytes())
        f.write(np.asarray(excluded, dtype='<i4').tobytes())
        f.write(_blob(dict(names=names, warnings=atlas.warnings)))


def read_atlas(path):
    if _is_json(path):
        d = _read_json(path)
        labels, excluded = d['labels'], d.get('excluded', [])
        names, warnings = d.get('names'), d.get('warnings')
    else:
        r = _Reader(_read_bytes(path), path)
        r.magic(ATLAS_MAGIC)
        n, n_excluded = r.unpack('<II')
        labels = r.array('<i4', n).astype(np.int64)
        excluded = r.array('<i4', n_excluded).tolist()
        trailer = r.blob()
        r.done()
        names, warnings = trailer.get('names'), trailer.get('warnings')
    if names is not None:
        names = {int(k): v for k, v in names.items()}
    return AtlasLabeling(np.asarray(labels, dtype=np.int64), excluded_labels=excluded,
                         roi_names=names, warnings=warnings)

###########
# CSV MAP #
###########

def _csvmap_trailer(csvmap):
    trailer = dict(mode=csvmap.mode,
                   plan=None if csvmap.plan is None else csvmap.plan.to_dict(),
                   trail=csvmap.trail, diagnostics=csvmap.diagnostics,
                   relabeled=sorted(csvmap.relabeled.items()))
    if csvmap.mode == 'face':
        trailer['members'] = [m.tolist() for m in csvmap.members]
    return trailer


def _csvmap_from(csv_of, roi_of_csv, K_total, trailer):
    plan = trailer.get('plan')
    kw = dict(plan=None if plan is None else PartitionPlan.from_dict(plan),
              K_total=K_total, mode=trailer.get('mode', 'vertex'),
              trail=trailer.get('trail'), diagnostics=trailer.get('diagnostics'),
              relabeled={int(v): int(r) for v, r in trailer.get('relabeled') or []})
    if trailer.get('members') is not None:
        return CsvMap(csv_of, trailer['members'], roi_of_csv, **kw)
    return CsvMap.from_assignment(csv_of, roi_of_csv, **kw)


def write_csvmap(csvmap, path, as_json=None):
    if _wants_json(path, as_json):
        d = _csvmap_trailer(csvmap)
        d.update(csv_of=csvmap.csv_of, roi_of_csv=csvmap.roi_of_csv,
                 K_total=csvmap.K_total, v_max=csvmap.v_max)
        _write_json(d, path)
        return
    csv_of = np.where(csvmap.csv_of == NONE, NONE_U32, csvmap.csv_of)
    with open(path, 'wb') as f:
        f.write(CSVMAP_MAGIC)
        f.write(struct.pack('<IIII', csvmap.K_total, csvmap.v_max, csvmap.n_vertices,
                            csvmap.n_csv))
        f.write(csv_of.astype('<u4').tobytes())
        f.write(np.asarray(csvmap.roi_of_csv, dtype='<i4').tobytes())
        f.write(_blob(_csvmap_trailer(csvmap)))


def read_csvmap(path):
    if _is_json(path):
        d = _read_json(path)
        return _csvmap_from(np.asarray(d['csv_of'], dtype=np.int64),
                            np.asarray(d['roi_of_csv'], dtype=np.int64), d['K_total'], d)
    r = _Reader(_read_bytes(path), path)
    r.magic(CSVMAP_MAGIC)
    K_total, _, n_vertices, n_csv = r.unpack('<IIII')
    csv_of = r.array('<u4', n_vertices).astype(np.int64)
    csv_of[csv_of == NONE_U32] = NONE
    roi_of_csv = r.array('<i4', n_csv).astype(np.int64)
    trailer = r.blob()
    r.done()
    return _csvmap_from(csv_of, roi_of_csv, K_total, trailer)

###############
# INDEX TABLE #
###############

def write_index_table(table, path, as_json=None):
    if _wants_json(path, as_json):
        _write_json(dict(table=table.table, n_vertices=table.n_vertices), path)
        return
    with open(path, 'wb') as f:
        f.write(INDEX_MAGIC)
        f.write(struct.pack('<III', table.n, table.v_max, table.n_vertices))
        f.write(np.asarray(table.table, dtype='<i4').tobytes())


def read_index_table(path):
    if _is_json(path):
        d = _read_json(path)
        rows = np.asarray(d['table'], dtype=np.int64)
        return IndexTable(rows.reshape(len(d['table']), -1), n_vertices=d['n_vertices'])
    r = _Reader(_read_bytes(path), path)
    r.magic(INDEX_MAGIC)
    n, v_max, n_vertices = r.unpack('<III')
    table = r.array('<i4', n * v_max).reshape(n, v_max).astype(np.int64)
    r.done()
    return IndexTable(table, n_vertices=n_vertices)

############
# FEATURES #
############

def write_features(features, path):
    """
    Write one subject's (C, V) features: a (V, C) header of two uint32, then
    the values as float32, one channel after another.
    """
    features = np.asarray(features)
    if features.ndim != 2:
        raise ValidationError('features must be shaped (C, V), got {}'.format(features.shape))
    n_channels, n_vertices = features.shape
    with open(path, 'wb') as f:
        f.write(struct.pack('<II', n_vertices, n_channels))
        f.write(np.ascontiguousarray(features, dtype='<f4').tobytes())


def read_features(path):
    r = _Reader(_read_bytes(path), path)
    n_vertices, n_channels = r.unpack('<II')
    values = r.array('<f4', n_vertices * n_channels).reshape(n_channels, n_vertices)
    r.done()
    return values.astype(np.float64)
