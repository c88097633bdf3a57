from __future__ import division

import logging

import numpy as np
from scipy.sparse import csgraph

from ..exceptions import ValidationError
from ..mesh import Adjacency

__all__ = ['SvAdjacency', 'BalanceResult', 'sv_adjacency', 'balance',
           'bound_violation']

logger = logging.getLogger(__name__)


class SvAdjacency(Adjacency):
    """
    Graph between supervertices: two supervertices are neighbors when some
    mesh edge joins them.
    """


def sv_adjacency(assignment, adj, n_sv=None):
    """
    Build the supervertex adjacency graph of an assignment.

    Arguments
    ---------
    assignment  :   np.ndarray (n,)
                    supervertex index of every node of `adj`, or a negative
                    value for nodes outside every supervertex
    adj         :   Adjacency
                    the node graph
    n_sv        :   int or None
                    number of supervertices; defaults to max(assignment)+1

    Returns
    -------
    SvAdjacency
    """
    assignment = np.asarray(assignment, dtype=np.int64)
    if assignment.shape[0] != adj.n:
        raise ValidationError('assignment covers {} nodes, the graph has {}'
                              .format(assignment.shape[0], adj.n))
    if n_sv is None:
        n_sv = int(assignment.max()) + 1 if assignment.size else 0
    edges = adj.edges()
    a = assignment[edges[:, 0]]
    b = assignment[edges[:, 1]]
    keep = (a >= 0) & (b >= 0) & (a != b)
    return SvAdjacency.from_edges(n_sv, np.column_stack((a[keep], b[keep])))


def bound_violation(sizes, L, H):
    """
    Total distance of supervertex sizes from [L, H].
    """
    sizes = np.asarray(sizes)
    return int(np.maximum(0, L - sizes).sum() + np.maximum(0, sizes - H).sum())


class BalanceResult(object):
    """
    Outcome of balancing.

    Arguments
    ---------
    labels      :   np.ndarray
                    supervertex index of every node after balancing
    success     :   bool
                    whether every supervertex ends within [L, H]
    passes      :   int
                    number of passes run
    moves       :   list of (vertex, source, target)
                    transfers in the order they were applied
    violation   :   int
                    residual bound violation
    """
    def __init__(self, labels, success, passes, moves, violation):
        self.labels = labels
        self.success = bool(success)
        self.passes = int(passes)
        self.moves = list(moves)
        self.violation = int(violation)


def balance(assignment, adj, sv_adj, L, H, max_passes=50, mode='best',
            groups=None, debug=False):
    """
    Move boundary vertices between adjacent supervertices until all sizes are
    within [L, H].

    A pass visits every supervertex that violates the bounds at its start, in
    ascending order. An oversized supervertex may give one boundary vertex to
    an adjacent supervertex; an undersized one may take a boundary vertex from
    an adjacent supervertex. A transfer is legal only when both supervertices
    share a group (region), the donor keeps at least one vertex and stays
    connected, and the total bound violation strictly drops. Passes repeat
    until nothing violates, no legal transfer remains, or `max_passes` is hit.

    Arguments
    ---------
    assignment  :   np.ndarray (n,)
                    supervertex index of every node of `adj`
    adj         :   Adjacency
                    the node graph
    sv_adj      :   SvAdjacency or None
                    adjacency between supervertices of `assignment`; rebuilt
                    from the current labels after every pass
    L, H        :   int
                    size bounds
    max_passes  :   int
                    upper limit on the number of passes
    mode        :   str
                    'best' applies the transfer with the largest drop,
                    'first' the first legal one by (vertex, target)
    groups      :   array of int or None
                    region of every supervertex; transfers never cross groups
    debug       :   bool
                    assert every supervertex is non-empty and connected after every pass

    Returns
    -------
    BalanceResult
    """
    if mode not in ('best', 'first'):
        raise ValidationError("mode must be 'best' or 'first', got {}".format(mode))
    labels = np.array(assignment, dtype=np.int64)
    if labels.shape[0] != adj.n or (labels < 0).any():
        raise ValidationError('balance needs a total assignment of the graph')
    n_sv = int(labels.max()) + 1
    if sv_adj is None:
        sv_adj = sv_adjacency(labels, adj, n_sv=n_sv)
    if groups is None:
        groups = np.zeros(n_sv, dtype=np.int64)
    groups = np.asarray(groups)
    sizes = np.bincount(labels, minlength=n_sv)
    moves = []
    passes = 0
    while passes < max_passes and bound_violation(sizes, L, H) > 0:
        passes += 1
        moved = False
        for sv in np.flatnonzero((sizes < L) | (sizes > H)):
            if L <= sizes[sv] <= H:
                continue
            move = _pick_move(sv, labels, sizes, adj, sv_adj, groups, L, H, mode)
            if move is None:
                continue
            v, source, target = move
            labels[v] = target
            sizes[source] -= 1
            sizes[target] += 1
            moves.append(move)
            moved = True
        sv_adj = sv_adjacency(labels, adj, n_sv=n_sv)
        if debug:
            _check_pass(labels, adj, n_sv)
        if not moved:
            break
    residual = bound_violation(sizes, L, H)
    logger.debug('balance: %d passes, %d moves, residual violation %d',
                 passes, len(moves), residual)
    return BalanceResult(labels, residual == 0, passes, moves, residual)


def _cost(size, L, H):
    return max(0, L - size) + max(0, size - H)


def _pick_move(sv, labels, sizes, adj, sv_adj, groups, L, H, mode):
    members = np.flatnonzero(labels == sv)
    rows = adj.sparse[members].tocoo()
    inside = members[rows.row]
    outside = rows.col.astype(np.int64)
    other = labels[outside]
    keep = (other != sv) & np.isin(other, sv_adj.neighbors(sv)) & (groups[other] == groups[sv])
    if sizes[sv] > H:
        pairs = np.column_stack((inside[keep], np.full(keep.sum(), sv), other[keep]))
    else:
        pairs = np.column_stack((outside[keep], other[keep], np.full(keep.sum(), sv)))
    if pairs.shape[0] == 0:
        return None
    pairs = np.unique(pairs, axis=0)
    scored = []
    for v, source, target in pairs:
        before = _cost(sizes[source], L, H) + _cost(sizes[target], L, H)
        after = _cost(sizes[source] - 1, L, H) + _cost(sizes[target] + 1, L, H)
        if after < before and sizes[source] > 1:
            scored.append((after - before, int(v), int(target), int(source)))
    if mode == 'best':
        scored.sort()
    else:
        scored.sort(key=lambda t: (t[1], t[2]))
    for _, v, target, source in scored:
        if _stays_connected(labels, adj, source, v):
            return v, source, target
    return None


def _stays_connected(labels, adj, source, v):
    rest = np.flatnonzero(labels == source)
    rest = rest[rest != v]
    n_comp, _ = csgraph.connected_components(adj.induced(rest), directed=False)
    return n_comp == 1


def _check_pass(labels, adj, n_sv):
    for sv in range(n_sv):
        members = np.flatnonzero(labels == sv)
        if members.size == 0:
            raise AssertionError('supervertex {} is empty'.format(sv))
        n_comp, _ = csgraph.connected_components(adj.induced(members), directed=False)
        if n_comp != 1:
            raise AssertionError('supervertex {} is split into {} pieces'.format(sv, n_comp))
