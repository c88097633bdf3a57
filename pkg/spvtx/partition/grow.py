from __future__ import division

import heapq
import logging

import numpy as np

from ..exceptions import ValidationError
from .seeds import medoids

__all__ = ['GrowResult', 'grow']

logger = logging.getLogger(__name__)


class GrowResult(object):
    """
    Outcome of growing supervertices in one connected component.

    Arguments
    ---------
    component   :   np.ndarray
                    sorted vertices of the component
    labels      :   np.ndarray
                    supervertex index of every component vertex, aligned with `component`
    seeds       :   list of int
                    seeds of the last attempt
    success     :   bool
                    whether every supervertex reached its quota. When False the
                    leftover vertices were attached to adjacent supervertices and
                    sizes are no longer near-equal.
    retries     :   int
                    number of re-seeded attempts
    starved     :   list of int
                    supervertices that ran out of frontier in the last attempt
    """
    def __init__(self, component, labels, seeds, success, retries=0, starved=()):
        self.component = component
        self.labels = labels
        self.seeds = list(seeds)
        self.success = bool(success)
        self.retries = int(retries)
        self.starved = list(starved)

    @property
    def sizes(self):
        return np.bincount(self.labels, minlength=len(self.seeds))

    def assignment(self):
        """
        Map from vertex index to supervertex index.
        """
        return dict(zip(self.component.tolist(), self.labels.tolist()))


def grow(component, adj, seeds, quotas, max_retries=3):
    """
    Grow one supervertex per seed until each holds its quota.

    At every step the supervertex with the lowest fill ratio (assigned/quota,
    ties to the smaller index) that still has room absorbs one unassigned
    vertex of its 1-ring frontier: the one with most neighbors already in that
    supervertex, ties to the smaller vertex. A supervertex whose frontier runs
    dry stops growing. If vertices are left over, the seeds move to the
    medoids of the current supervertices and growth restarts, at most
    `max_retries` times.

    Arguments
    ---------
    component   :   array of int
                    vertices of one connected component
    adj         :   Adjacency
                    1-ring of the mesh
    seeds       :   list of int
                    one seed vertex per supervertex
    quotas      :   list of int
                    target sizes, summing to the component size and differing
                    by at most one
    max_retries :   int
                    number of re-seeded attempts after the first

    Returns
    -------
    GrowResult
    """
    component = np.unique(np.asarray(component, dtype=np.int64))
    quotas = [int(q) for q in quotas]
    seeds = [int(s) for s in seeds]
    if len(seeds) != len(quotas) or not seeds:
        raise ValidationError('need one quota per seed, got {} seeds and {} quotas'
                              .format(len(seeds), len(quotas)))
    if sum(quotas) != component.size:
        raise ValidationError('quotas sum to {} but the component has {} vertices'
                              .format(sum(quotas), component.size))
    if max(quotas) - min(quotas) > 1 or min(quotas) < 1:
        raise ValidationError('quotas must be positive and differ by at most one: {}'
                              .format(quotas))
    local = np.searchsorted(component, seeds)
    if (local >= component.size).any() or not np.array_equal(component[local], seeds):
        raise ValidationError('seeds {} are not all inside the component'.format(seeds))
    if np.unique(local).size != local.size:
        raise ValidationError('seeds must be distinct')

    graph = adj.induced(component)
    local = local.tolist()
    retries = 0
    while True:
        labels, starved = _grow_once(graph, local, quotas)
        if not starved and (labels >= 0).all():
            return GrowResult(component, labels, component[local].tolist(), True,
                              retries=retries)
        if retries >= max_retries:
            break
        moved = medoids(graph, labels, len(local))
        if moved == local:
            break
        local = moved
        retries += 1
    logger.debug('grow: %d supervertices starved after %d retries in a component of %d',
                 len(starved), retries, component.size)
    labels = _attach_leftovers(graph, labels)
    return GrowResult(component, labels, component[local].tolist(), False,
                      retries=retries, starved=starved)


def _grow_once(graph, seeds, quotas):
    indptr, indices = graph.indptr, graph.indices
    labels = np.full(graph.shape[0], -1, dtype=np.int64)
    k = len(seeds)
    counts = [1] * k
    contact = [dict() for _ in range(k)]
    frontier = [[] for _ in range(k)]

    def _push_frontier(s, v):
        for u in indices[indptr[v]:indptr[v + 1]]:
            if labels[u] < 0:
                u = int(u)
                score = contact[s].get(u, 0) + 1
                contact[s][u] = score
                heapq.heappush(frontier[s], (-score, u))

    for s, v in enumerate(seeds):
        labels[v] = s
    for s, v in enumerate(seeds):
        _push_frontier(s, v)

    queue = [(counts[s] / quotas[s], s) for s in range(k) if counts[s] < quotas[s]]
    heapq.heapify(queue)
    starved = []
    while queue:
        _, s = heapq.heappop(queue)
        heap = frontier[s]
        pick = None
        while heap:
            negscore, u = heapq.heappop(heap)
            if labels[u] < 0 and contact[s][u] == -negscore:
                pick = u
                break
        if pick is None:
            starved.append(s)
            continue
        labels[pick] = s
        counts[s] += 1
        _push_frontier(s, pick)
        if counts[s] < quotas[s]:
            heapq.heappush(queue, (counts[s] / quotas[s], s))
    return labels, sorted(starved)


def _attach_leftovers(graph, labels):
    labels = labels.copy()
    indptr, indices = graph.indptr, graph.indices
    while (labels < 0).any():
        snapshot = labels.copy()
        progressed = False
        for v in np.flatnonzero(snapshot < 0):
            owners = snapshot[indices[indptr[v]:indptr[v + 1]]]
            owners = owners[owners >= 0]
            if owners.size == 0:
                continue
            ids, contact = np.unique(owners, return_counts=True)
            labels[v] = ids[np.argmax(contact)]
            progressed = True
        if not progressed:
            raise ValidationError('component is not connected; {} vertices unreachable'
                                  .format(int((labels < 0).sum())))
    return labels
