import copy
import functools

import numpy as np

from spvtx.mesh import Adjacency
from spvtx.utils import synthetic_hemisphere
from spvtx.partition import CsvMap


def path_graph(n):
    return Adjacency.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return Adjacency.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


@functools.lru_cache(maxsize=None)
def _hemisphere(level, num_rois, excluded_fraction, rng_seed):
    return synthetic_hemisphere(level=level, num_rois=num_rois,
                                excluded_fraction=excluded_fraction, rng_seed=rng_seed)


def hemisphere(level=3, num_rois=10, excluded_fraction=.1, rng_seed=0):
    """
    A cached (mesh, atlas, adj) triple; the atlas is copied so tests can
    change it freely.
    """
    mesh, atlas, adj = _hemisphere(level, num_rois, excluded_fraction, rng_seed)
    return mesh, atlas.copy(), adj


def default_k(atlas, per_csv=12):
    """
    The supervertex count used by the invariant sweeps: about `per_csv`
    cortical vertices per supervertex, never fewer than the regions.
    """
    return max(len(atlas.rois), int(atlas.cortical_mask.sum()) // per_csv)


def move_vertex(csvmap, vertex, target):
    """
    A copy of a vertex-based map with `vertex` moved into supervertex `target`.
    """
    csv_of = csvmap.csv_of.copy()
    csv_of[vertex] = target
    return CsvMap.from_assignment(csv_of, csvmap.roi_of_csv, plan=copy.deepcopy(csvmap.plan),
                                  K_total=csvmap.K_total, relabeled=csvmap.relabeled)


def duplicate_vertex(csvmap, vertex, target):
    """
    A copy of a map where `vertex` also joins supervertex `target`.
    """
    members = [m.copy() for m in csvmap.members]
    members[target] = np.union1d(members[target], [vertex])
    return CsvMap(csvmap.csv_of.copy(), members, csvmap.roi_of_csv.copy(),
                  plan=copy.deepcopy(csvmap.plan), K_total=csvmap.K_total,
                  relabeled=csvmap.relabeled)


def plant_islands(atlas, adj, n_islands, rng_seed=0, min_size=20):
    """
    A copy of `atlas` where up to `n_islands` interior vertices, at least
    three rings apart, take the label of another cortical region with at
    least `min_size` vertices. Also returns the map from each planted vertex
    to its original label.
    """
    rng = np.random.RandomState(rng_seed)
    labels = atlas.labels.copy()
    cortical = atlas.cortical_mask
    sizes = np.bincount(labels[cortical], minlength=labels.max() + 1)
    blocked = np.zeros(adj.n, dtype=bool)
    planted = dict()
    for v in rng.permutation(adj.n):
        ring = adj.neighbors(v)
        if blocked[v] or not cortical[v] or (labels[ring] != labels[v]).any():
            continue
        other = [r for r in atlas.rois if r != labels[v] and sizes[r] >= min_size]
        if not other:
            continue
        planted[int(v)] = int(labels[v])
        labels[v] = other[rng.randint(len(other))]
        blocked[v] = True
        blocked[ring] = True
        blocked[adj.sparse[ring].indices] = True
        if len(planted) == n_islands:
            break
    return atlas.copy(labels=labels), planted
