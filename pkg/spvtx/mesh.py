from __future__ import division

import numpy as np
from scipy import sparse as spar
from scipy.sparse import csgraph

from ._constants import MAX_LEVEL
from .exceptions import ValidationError, ResourceLimitError

__all__ = ['Mesh', 'Adjacency', 'build_icosphere', 'one_ring',
           'connected_components', 'farthest_point_sampling']

_PHI = (1 + np.sqrt(5)) / 2

_BASE_POSITIONS = np.array([(-1.0, _PHI, 0.0), (1.0, _PHI, 0.0),
                            (-1.0, -_PHI, 0.0), (1.0, -_PHI, 0.0),
                            (0.0, -1.0, _PHI), (0.0, 1.0, _PHI),
                            (0.0, -1.0, -_PHI), (0.0, 1.0, -_PHI),
                            (_PHI, 0.0, -1.0), (_PHI, 0.0, 1.0),
                            (-_PHI, 0.0, -1.0), (-_PHI, 0.0, 1.0)])

_BASE_FACES = np.array([(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10),
                        (0, 10, 11), (1, 5, 9), (5, 11, 4), (11, 10, 2),
                        (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2),
                        (3, 2, 6), (3, 6, 8), (3, 8, 9), (4, 9, 5),
                        (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)])

#########
# MESH  #
#########

class Mesh(object):
    """
    A triangulated unit sphere.

    Arguments
    ---------
    positions   :   np.ndarray (n,3)
                    unit direction vector of every vertex
    faces       :   np.ndarray (f,3)
                    vertex indices of every triangle, counterclockwise seen from outside
    level       :   int
                    number of subdivisions applied to the base icosahedron
    """
    def __init__(self, positions, faces, level=0):
        self.positions = np.ascontiguousarray(positions, dtype=np.float64)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        self.level = int(level)

    @property
    def n_vertices(self):
        return self.positions.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    @property
    def n_edges(self):
        return _unique_edges(self.faces).shape[0]

    def face_centroids(self):
        """
        Direction vectors of the face centroids, renormalized onto the sphere.
        """
        centroids = self.positions[self.faces].mean(axis=1)
        return centroids / np.linalg.norm(centroids, axis=1, keepdims=True)

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return False
        return (self.level == other.level
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.faces, other.faces))

    def __repr__(self):
        return 'Mesh(level={}, n_vertices={}, n_faces={})'.format(
                self.level, self.n_vertices, self.n_faces)


def build_icosphere(level):
    """
    Construct an icosphere by repeated midpoint subdivision of the regular
    icosahedron, projecting every new vertex back onto the unit sphere.

    Base vertices come first; the midpoints of each level follow in the
    lexicographic order of the (sorted) edges they split.

    Arguments
    ---------
    level   :   int
                number of subdivisions. Level 6 gives 40,962 vertices.

    Returns
    -------
    Mesh with 10*4**level + 2 vertices and 20*4**level faces
    """
    if int(level) != level or level < 0:
        raise ValidationError('level must be a non-negative integer, got {}'.format(level))
    if level > MAX_LEVEL:
        raise ResourceLimitError('level {} exceeds the guard of {} ({} vertices)'
                                 .format(level, MAX_LEVEL, 10 * 4**int(level) + 2))
    positions = _BASE_POSITIONS / np.linalg.norm(_BASE_POSITIONS, axis=1, keepdims=True)
    faces = _BASE_FACES.copy()
    for _ in range(int(level)):
        positions, faces = _subdivide(positions, faces)
    return Mesh(positions, faces, level=level)


def _subdivide(positions, faces):
    n = positions.shape[0]
    n_faces = faces.shape[0]
    edges = np.vstack((faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]))
    edges.sort(axis=1)
    unique, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1) + n
    ab = inverse[:n_faces]
    bc = inverse[n_faces:2 * n_faces]
    ca = inverse[2 * n_faces:]
    midpoints = positions[unique[:, 0]] + positions[unique[:, 1]]
    midpoints /= np.linalg.norm(midpoints, axis=1, keepdims=True)
    a, b, c = faces.T
    new_faces = np.vstack((np.column_stack((a, ab, ca)),
                           np.column_stack((b, bc, ab)),
                           np.column_stack((c, ca, bc)),
                           np.column_stack((ab, bc, ca))))
    return np.vstack((positions, midpoints)), new_faces


def _unique_edges(faces):
    edges = np.vstack((faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]))
    edges = np.sort(edges, axis=1)
    return np.unique(edges, axis=0)

#############
# ADJACENCY #
#############

class Adjacency(object):
    """
    An undirected, unweighted graph stored as a symmetric CSR matrix with
    sorted column indices. Used for the vertex 1-ring, for face duals, and for
    graphs between supervertices.

    Arguments
    ---------
    matrix  :   scipy.sparse matrix (n,n)
                any symmetric sparsity pattern; values are ignored
    """
    def __init__(self, matrix):
        matrix = spar.csr_matrix(matrix, dtype=np.int8)
        matrix.sum_duplicates()
        matrix.data[:] = 1
        matrix.sort_indices()
        self.sparse = matrix
        self._weights = None

    @classmethod
    def from_edges(cls, n, edges):
        """
        Build an adjacency over n nodes from an (e,2) array of undirected edges.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        rows = np.concatenate((edges[:, 0], edges[:, 1]))
        cols = np.concatenate((edges[:, 1], edges[:, 0]))
        data = np.ones(rows.shape[0], dtype=np.int8)
        return cls(spar.coo_matrix((data, (rows, cols)), shape=(n, n)))

    @property
    def n(self):
        return self.sparse.shape[0]

    @property
    def n_edges(self):
        return self.sparse.nnz // 2

    @property
    def degree(self):
        return np.diff(self.sparse.indptr)

    def neighbors(self, v):
        """
        Sorted neighbors of node v.
        """
        return self.sparse.indices[self.sparse.indptr[v]:self.sparse.indptr[v + 1]]

    def edges(self):
        """
        Every undirected edge once, as (i,j) with i < j, in lexicographic order.
        """
        coo = spar.triu(self.sparse, k=1).tocoo()
        out = np.column_stack((coo.row, coo.col)).astype(np.int64)
        return out[np.lexsort((out[:, 1], out[:, 0]))]

    def induced(self, nodes):
        """
        The subgraph induced by a sorted array of nodes, indexed locally.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        return self.sparse[nodes][:, nodes]

    @property
    def weights(self):
        """
        The graph as a libpysal contiguity weights object, built on first use.
        """
        if self._weights is None:
            from libpysal.weights import W
            neighbors = {i: self.neighbors(i).tolist() for i in range(self.n)}
            self._weights = W(neighbors, silence_warnings=True)
        return self._weights

    def __eq__(self, other):
        if not isinstance(other, Adjacency):
            return False
        return (self.sparse.shape == other.sparse.shape
                and (self.sparse != other.sparse).nnz == 0)


def one_ring(mesh):
    """
    Compute the 1-ring vertex adjacency of a mesh.

    Arguments
    ---------
    mesh    :   Mesh
                a triangulated surface

    Returns
    -------
    Adjacency where u and v are neighbors iff they share a mesh edge
    """
    faces = np.asarray(mesh.faces)
    n = mesh.n_vertices
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise ValidationError('faces must be an (f,3) array, got shape {}'
                              .format(faces.shape))
    if not np.issubdtype(faces.dtype, np.integer):
        raise ValidationError('faces must hold integer vertex indices')
    if faces.size and (faces.min() < 0 or faces.max() >= n):
        raise ValidationError('faces reference vertices outside [0, {})'.format(n))
    degenerate = ((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
                  | (faces[:, 0] == faces[:, 2]))
    if degenerate.any():
        raise ValidationError('faces {} repeat a vertex'
                              .format(np.flatnonzero(degenerate)[:10].tolist()))
    return Adjacency.from_edges(n, _unique_edges(faces))


def connected_components(vertices, adj):
    """
    Split a vertex set into the connected components of its induced subgraph.

    Arguments
    ---------
    vertices    :   iterable of int
                    subset of the graph's nodes
    adj         :   Adjacency
                    the graph

    Returns
    -------
    list of sorted np.ndarray, largest component first, equal sizes ordered by
    their smallest vertex
    """
    vertices = np.unique(np.asarray(vertices, dtype=np.int64))
    if vertices.size == 0:
        return []
    n_comp, labels = csgraph.connected_components(adj.induced(vertices), directed=False)
    if n_comp == 1:
        return [vertices]
    order = np.argsort(labels, kind='stable')
    splits = np.flatnonzero(np.diff(labels[order])) + 1
    components = np.split(vertices[order], splits)
    components.sort(key=lambda c: (-c.shape[0], c[0]))
    return components

#############################
# FARTHEST POINT SAMPLING   #
#############################

def _chord(points, point):
    return np.sqrt(((points - point)**2).sum(axis=1))


def farthest_point_sampling(positions, candidates, k, start):
    """
    Greedy farthest-point sampling over a candidate set.

    Each new pick maximizes the minimum chord distance to everything picked so
    far. Ties go to the earliest candidate, so sorted candidates give the
    smallest vertex index.

    Arguments
    ---------
    positions   :   np.ndarray (n,3)
                    direction vectors of all vertices
    candidates  :   np.ndarray of int
                    vertices eligible to be picked
    k           :   int
                    number of picks
    start       :   int
                    the first pick; must be one of the candidates

    Returns
    -------
    list of k vertex indices in pick order
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    points = positions[candidates]
    where = np.flatnonzero(candidates == start)
    if where.size == 0:
        raise ValidationError('start vertex {} is not a candidate'.format(start))
    current = int(where[0])
    chosen = [current]
    closest = _chord(points, points[current])
    closest[current] = -np.inf
    for _ in range(k - 1):
        current = int(np.argmax(closest))
        chosen.append(current)
        closest = np.minimum(closest, _chord(points, points[current]))
        closest[chosen] = -np.inf
    return candidates[chosen].tolist()
