from __future__ import division

import logging
from warnings import warn as Warn

import numpy as np
from scipy.sparse import csgraph

from ..exceptions import ValidationError, PlanRejected
from ..mesh import farthest_point_sampling
from ..planner import feasible_range

__all__ = ['distribute_counts', 'fps_seeds', 'near_equal_quotas',
           'refine_seeds', 'medoids', 'PARTITIONERS']

logger = logging.getLogger(__name__)


def distribute_counts(components, K_r, L, H):
    """
    Split a region's supervertex count among its connected components.

    Counts start proportional to component size (largest remainder), then are
    moved one at a time into every component's feasible range: surplus is
    taken from the component whose supervertices would be smallest, deficits
    are given to the component whose supervertices would be largest.

    Arguments
    ---------
    components  :   list of arrays
                    the region's connected components
    K_r         :   int
                    supervertices planned for the region
    L, H        :   int
                    supervertex size bounds

    Returns
    -------
    list of int, one count per component
    """
    sizes = np.array([len(c) for c in components], dtype=np.int64)
    if sizes.size == 0:
        raise ValidationError('a region needs at least one component')
    ranges = []
    for i, n in enumerate(sizes):
        if n < L:
            raise PlanRejected('component {} has {} vertices, fewer than L={}'
                               .format(i, n, L), stage='distribute')
        rng = feasible_range(n, L, H)
        if rng is None:
            raise PlanRejected('component {} of {} vertices fits no count for '
                               'bounds ({}, {})'.format(i, n, L, H), stage='distribute')
        ranges.append(rng)
    lo = np.array([r[0] for r in ranges])
    hi = np.array([r[1] for r in ranges])
    if lo.sum() > K_r or hi.sum() < K_r:
        raise PlanRejected('{} supervertices cannot be spread over components of sizes {} '
                           'within ({}, {})'.format(K_r, sizes.tolist(), L, H),
                           stage='distribute')

    share = K_r * sizes / sizes.sum()
    counts = np.floor(share).astype(np.int64)
    order = np.lexsort((np.arange(sizes.size), -(share - counts)))
    counts[order[:K_r - counts.sum()]] += 1
    counts = np.clip(counts, lo, hi)
    while counts.sum() > K_r:
        room = np.flatnonzero(counts > lo)
        mean = sizes[room] / counts[room]
        counts[room[np.argmin(mean)]] -= 1
    while counts.sum() < K_r:
        room = np.flatnonzero(counts < hi)
        mean = sizes[room] / counts[room]
        counts[room[np.argmax(mean)]] += 1
    return counts.tolist()


def near_equal_quotas(size, k):
    """
    Integer quotas for k supervertices summing to size; the first size % k get
    one extra vertex.
    """
    base, extra = divmod(int(size), int(k))
    return [base + 1] * extra + [base] * (k - extra)


def fps_seeds(component, k, positions):
    """
    Pick k seeds in a component by farthest-point sampling on vertex direction
    vectors.

    Arguments
    ---------
    component   :   array of int
                    vertices of one connected component
    k           :   int
                    number of seeds
    positions   :   np.ndarray (n,3)
                    unit direction vectors of all vertices

    Returns
    -------
    list of k vertex indices, starting at the smallest vertex of the component
    """
    component = np.unique(np.asarray(component, dtype=np.int64))
    if int(k) != k or k < 1:
        raise ValidationError('k must be a positive integer, got {}'.format(k))
    if k > component.size:
        raise ValidationError('cannot place {} seeds in a component of {} vertices'
                              .format(k, component.size))
    return farthest_point_sampling(positions, component, int(k), int(component[0]))

####################
# SEED REFINEMENT  #
####################

def _bfs_partition(graph, local_seeds, quotas):
    order = csgraph.breadth_first_order(graph, int(local_seeds[0]), directed=False,
                                        return_predecessors=False)
    if order.shape[0] != graph.shape[0]:
        raise ValueError('component graph is not connected')
    parts = np.empty(graph.shape[0], dtype=np.int64)
    parts[order] = np.repeat(np.arange(len(quotas)), quotas)
    return parts


def _metis_partition(graph, local_seeds, quotas):
    import pymetis
    k = len(quotas)
    if k == 1:
        return np.zeros(graph.shape[0], dtype=np.int64)
    _, membership = pymetis.part_graph(k, xadj=graph.indptr.tolist(),
                                       adjncy=graph.indices.tolist())
    return np.asarray(membership, dtype=np.int64)


PARTITIONERS = {'bfs': _bfs_partition, 'metis': _metis_partition}


def medoids(graph, parts, k):
    """
    Medoid of every part of a graph.

    Arguments
    ---------
    graph   :   scipy.sparse matrix (m,m)
                the component's induced subgraph
    parts   :   np.ndarray (m,)
                part index 0..k-1 of every node
    k       :   int
                number of parts

    Returns
    -------
    list of local node indices; each minimizes the summed hop distance to
    the members of its part, ties going to the smaller index
    """
    out = []
    for p in range(k):
        members = np.flatnonzero(parts == p)
        if members.size == 0:
            raise ValueError('part {} is empty'.format(p))
        dist = csgraph.shortest_path(graph, directed=False, unweighted=True,
                                     indices=members)[:, members]
        out.append(int(members[np.argmin(dist.sum(axis=0))]))
    return out


def refine_seeds(component, adj, seeds, quotas, method='bfs', enabled=True,
                 diagnostics=None):
    """
    Replace seeds by the medoids of a balanced k-way partition of the component.

    Any failure of the partitioner (missing package, disconnected or empty
    parts, exceptions) returns the input seeds unchanged and records the reason.

    Arguments
    ---------
    component   :   array of int
                    vertices of one connected component, sorted
    adj         :   Adjacency
                    1-ring of the mesh
    seeds       :   list of int
                    current seeds, one per part
    quotas      :   list of int
                    target size of every part
    method      :   str or callable
                    'bfs', 'metis', or a callable(graph, local_seeds, quotas)
                    returning a part index per component vertex
    enabled     :   bool
                    when False the seeds are returned as given
    diagnostics :   list or None
                    failures are appended here as dicts

    Returns
    -------
    list of vertex indices, one per part
    """
    seeds = [int(s) for s in seeds]
    if len(seeds) != len(quotas):
        raise ValidationError('{} seeds but {} quotas'.format(len(seeds), len(quotas)))
    if not enabled:
        return seeds
    component = np.asarray(component, dtype=np.int64)
    try:
        partitioner = method if callable(method) else PARTITIONERS[method]
        graph = adj.induced(component)
        local_seeds = np.searchsorted(component, seeds)
        parts = partitioner(graph, local_seeds, list(quotas))
        local = medoids(graph, np.asarray(parts), len(seeds))
        refined = component[local].tolist()
        logger.debug('refine_seeds: %d of %d seeds moved',
                     sum(a != b for a, b in zip(seeds, refined)), len(seeds))
        return refined
    except Exception as e:
        reason = '{}: {}'.format(type(e).__name__, e)
        Warn('Seed refinement failed ({}); keeping farthest-point seeds.'.format(reason),
             stacklevel=2)
        if diagnostics is not None:
            diagnostics.append(dict(stage='refine', method=getattr(method, '__name__', method),
                                    reason=reason))
        return seeds
