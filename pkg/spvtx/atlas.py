from __future__ import division

import heapq
import logging
from warnings import warn as Warn

import numpy as np
from scipy import sparse as spar
from scipy.sparse import csgraph

from ._constants import WALL_NAME
from .exceptions import ValidationError
from .mesh import one_ring, connected_components, farthest_point_sampling, _chord

__all__ = ['AtlasLabeling', 'synth_atlas', 'reassign_minor_fragments',
           'cortical_vertices', 'roi_sizes']

logger = logging.getLogger(__name__)


class AtlasLabeling(object):
    """
    Per-vertex region labels for one hemisphere.

    Arguments
    ---------
    labels          :   np.ndarray (n,)
                        integer region id of every vertex
    excluded_labels :   iterable of int
                        region ids treated as non-cortical (e.g. the medial wall)
    roi_names       :   dict or None
                        map from region id to name. When given, it must name
                        every id used in `labels`.
    warnings        :   list of dict
                        entries recorded by cleaning passes, e.g. fragments
                        that could not be reassigned
    """
    def __init__(self, labels, excluded_labels=(), roi_names=None, warnings=None):
        labels = np.asarray(labels)
        if labels.ndim != 1:
            raise ValidationError('labels must be one-dimensional')
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            raise ValidationError('labels must be integers')
        if labels.size and labels.min() < 0:
            raise ValidationError('labels must be non-negative')
        self.labels = labels.astype(np.int64)
        self.excluded_labels = frozenset(int(l) for l in excluded_labels)
        if roi_names is not None:
            roi_names = {int(k): str(v) for k, v in roi_names.items()}
            missing = sorted(set(np.unique(self.labels).tolist()) - set(roi_names))
            if missing:
                raise ValidationError('labels {} have no name'.format(missing))
        self.roi_names = roi_names
        self.warnings = list(warnings) if warnings is not None else []

    @property
    def n_vertices(self):
        return self.labels.shape[0]

    @property
    def cortical_mask(self):
        return ~np.isin(self.labels, sorted(self.excluded_labels))

    @property
    def rois(self):
        """
        Sorted ids of the cortical regions present in the labeling.
        """
        return np.unique(self.labels[self.cortical_mask]).tolist()

    def copy(self, labels=None, warnings=None):
        return AtlasLabeling(self.labels.copy() if labels is None else labels,
                             excluded_labels=self.excluded_labels,
                             roi_names=None if self.roi_names is None else dict(self.roi_names),
                             warnings=self.warnings if warnings is None else warnings)

    def __eq__(self, other):
        if not isinstance(other, AtlasLabeling):
            return False
        return (np.array_equal(self.labels, other.labels)
                and self.excluded_labels == other.excluded_labels
                and self.roi_names == other.roi_names)


def cortical_vertices(labeling):
    """
    Vertices whose label is not excluded, in ascending order.
    """
    return np.flatnonzero(labeling.cortical_mask)


def roi_sizes(labeling):
    """
    Map from cortical region id to its vertex count.
    """
    ids, counts = np.unique(labeling.labels[labeling.cortical_mask], return_counts=True)
    return {int(i): int(c) for i, c in zip(ids, counts)}

#####################
# SYNTHETIC ATLASES #
#####################

def synth_atlas(mesh, num_rois, excluded_fraction=0.0, rng_seed=0, adj=None):
    """
    Generate a synthetic parcellation of an icosphere.

    A connected cap of round(excluded_fraction * n) vertices, grown around a
    random center in order of angular closeness, becomes the excluded wall.
    The remaining vertices are split among `num_rois` regions by nearest-seed
    geodesic growth from farthest-point seeds.

    Arguments
    ---------
    mesh                :   Mesh
                            the surface to label
    num_rois            :   int
                            number of cortical regions
    excluded_fraction   :   float in [0,1)
                            share of vertices assigned to the wall
    rng_seed            :   int
                            seed for the wall center and the first region seed
    adj                 :   Adjacency or None
                            precomputed 1-ring of the mesh

    Returns
    -------
    AtlasLabeling with cortical ids 0..num_rois-1 and, when the wall is not
    empty, one excluded id equal to num_rois
    """
    n = mesh.n_vertices
    if int(num_rois) != num_rois or not 1 <= num_rois <= n:
        raise ValidationError('num_rois must be an integer in [1, {}], got {}'
                              .format(n, num_rois))
    if not 0 <= excluded_fraction < 1:
        raise ValidationError('excluded_fraction must lie in [0,1), got {}'
                              .format(excluded_fraction))
    num_rois = int(num_rois)
    if adj is None:
        adj = one_ring(mesh)
    rng = np.random.default_rng(rng_seed)
    wall_label = num_rois
    labels = np.full(n, wall_label, dtype=np.int64)

    n_wall = int(round(excluded_fraction * n))
    center = int(rng.integers(n))
    wall = _grow_cap(mesh.positions, adj, center, n_wall)
    cortical = np.setdiff1d(np.arange(n), wall)
    if cortical.size < num_rois:
        raise ValidationError('{} cortical vertices cannot hold {} regions'
                              .format(cortical.size, num_rois))

    start = int(cortical[rng.integers(cortical.size)])
    seeds = farthest_point_sampling(mesh.positions, cortical, num_rois, start)

    sub = adj.induced(cortical).tocoo()
    lengths = _chord(mesh.positions[cortical[sub.row]], mesh.positions[cortical[sub.col]])
    graph = spar.csr_matrix((lengths, (sub.row, sub.col)), shape=(cortical.size,) * 2)
    local_seeds = np.searchsorted(cortical, seeds)
    dist, _, sources = csgraph.dijkstra(graph, directed=False, indices=local_seeds,
                                        min_only=True, return_predecessors=True)
    reached = np.isfinite(dist)
    region_of_seed = np.full(cortical.size, -1, dtype=np.int64)
    region_of_seed[local_seeds] = np.arange(num_rois)
    labels[cortical[reached]] = region_of_seed[sources[reached]]
    n_unreached = int((~reached).sum())
    if n_unreached:
        logger.debug('synth_atlas: %d vertices unreachable from any seed join the wall',
                     n_unreached)

    names = {r: 'roi{:03d}'.format(r) for r in range(num_rois)}
    excluded = ()
    if (labels == wall_label).any():
        names[wall_label] = WALL_NAME
        excluded = (wall_label,)
    return AtlasLabeling(labels, excluded_labels=excluded, roi_names=names)


def _grow_cap(positions, adj, center, size):
    if size <= 0:
        return np.array([], dtype=np.int64)
    closeness = positions.dot(positions[center])
    queued = np.zeros(positions.shape[0], dtype=bool)
    heap = [(-closeness[center], center)]
    queued[center] = True
    out = []
    while heap and len(out) < size:
        _, v = heapq.heappop(heap)
        out.append(v)
        for u in adj.neighbors(v):
            if not queued[u]:
                queued[u] = True
                heapq.heappush(heap, (-closeness[u], int(u)))
    return np.sort(np.asarray(out, dtype=np.int64))

######################
# FRAGMENT CLEANING  #
######################

def reassign_minor_fragments(labeling, adj, threshold=0.10):
    """
    Relabel small disconnected pieces of cortical regions.

    Within every cortical region, each connected component other than the
    largest whose size is below `threshold` times the region's size is given
    to the neighboring cortical region it shares the most mesh edges with
    (ties go to the smaller id). Fragments are always measured against
    the region sizes before the pass, and sweeps repeat until nothing changes
    or one sweep per region plus one has run.

    Arguments
    ---------
    labeling    :   AtlasLabeling
                    the parcellation to clean
    adj         :   Adjacency
                    1-ring of the mesh the labels live on
    threshold   :   float in (0,1)
                    fragment size, as a share of the region size, below which
                    the fragment is reassigned

    Returns
    -------
    a new AtlasLabeling. Fragments left in place (no cortical neighbor, or a
    largest component that is itself below threshold) are listed in its
    `warnings` attribute.
    """
    if not 0 < threshold < 1:
        raise ValidationError('threshold must lie in (0,1), got {}'.format(threshold))
    if labeling.n_vertices != adj.n:
        raise ValidationError('labeling has {} vertices but the graph has {}'
                              .format(labeling.n_vertices, adj.n))
    labels = labeling.labels.copy()
    cortical = labeling.cortical_mask
    rois = labeling.rois
    reference = np.bincount(labels[cortical], minlength=max(rois) + 1 if rois else 0)
    n_sweeps = 0
    for _ in range(len(rois) + 1):
        n_sweeps += 1
        changed = False
        for roi in rois:
            components = connected_components(np.flatnonzero(labels == roi), adj)
            for fragment in components[1:]:
                if fragment.shape[0] >= threshold * reference[roi]:
                    continue
                target = _strongest_contact(fragment, roi, labels, cortical, adj)
                if target is None:
                    continue
                labels[fragment] = target
                changed = True
        if not changed:
            break
    warnings = list(labeling.warnings)
    for entry in _leftover_fragments(labels, cortical, rois, adj, threshold, reference):
        Warn('Region {} keeps a {}-vertex fragment ({})'
             .format(entry['roi'], entry['size'], entry['reason']), stacklevel=2)
        warnings.append(entry)
    logger.debug('reassign_minor_fragments: %d sweeps, %d vertices relabeled',
                 n_sweeps, int((labels != labeling.labels).sum()))
    return labeling.copy(labels=labels, warnings=warnings)


def _strongest_contact(fragment, roi, labels, cortical, adj):
    neighbors = adj.sparse[fragment].indices
    keep = cortical[neighbors] & (labels[neighbors] != roi)
    if not keep.any():
        return None
    ids, contact = np.unique(labels[neighbors[keep]], return_counts=True)
    return int(ids[np.argmax(contact)])


def _leftover_fragments(labels, cortical, rois, adj, threshold, reference):
    out = []
    for roi in rois:
        components = connected_components(np.flatnonzero(labels == roi), adj)
        if len(components) < 2:
            continue
        limit = threshold * reference[roi]
        if components[0].shape[0] < limit:
            out.append(dict(roi=int(roi), size=int(components[0].shape[0]),
                            first_vertex=int(components[0][0]), reason='dominant'))
        for fragment in components[1:]:
            if fragment.shape[0] >= limit:
                continue
            reason = 'isolated'
            if _strongest_contact(fragment, roi, labels, cortical, adj) is not None:
                reason = 'unresolved'
            out.append(dict(roi=int(roi), size=int(fragment.shape[0]),
                            first_vertex=int(fragment[0]), reason=reason))
    return out
