"""
Face-based partitioning, kept as an ablation of the vertex-based method.

Faces, not vertices, are assigned to supervertices; each supervertex's vertex
set is the union of its faces' cortical vertices, so vertices on supervertex
boundaries end up in several supervertices.
"""
from __future__ import division

import numpy as np

from ..mesh import Adjacency

__all__ = ['face_adjacency', 'face_regions', 'face_members']


def face_adjacency(mesh):
    """
    Dual graph of a closed triangle mesh: faces are neighbors when they share
    an edge.
    """
    faces = mesh.faces
    n_faces = faces.shape[0]
    edges = np.vstack((faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]))
    edges.sort(axis=1)
    _, inverse = np.unique(edges, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    owner = np.tile(np.arange(n_faces), 3)
    order = np.argsort(inverse, kind='stable')
    inverse, owner = inverse[order], owner[order]
    starts = np.flatnonzero(np.r_[True, inverse[1:] != inverse[:-1]])
    counts = np.diff(np.r_[starts, inverse.shape[0]])
    shared = starts[counts == 2]
    return Adjacency.from_edges(n_faces, np.column_stack((owner[shared], owner[shared + 1])))


def face_regions(mesh, labeling):
    """
    Faces touching the cortex and the region each belongs to.

    A face takes the region most of its cortical vertices carry; when its
    cortical vertices all differ, the smallest region id wins.

    Returns
    -------
    (faces, regions): sorted face indices with at least one cortical vertex,
    and the region of each
    """
    cortical = labeling.cortical_mask
    touched = np.flatnonzero(cortical[mesh.faces].any(axis=1))
    sentinel = labeling.labels.max() + 1
    labels = np.where(cortical[mesh.faces[touched]], labeling.labels[mesh.faces[touched]],
                      sentinel)
    labels.sort(axis=1)
    first_pair = (labels[:, 0] == labels[:, 1]) & (labels[:, 0] != sentinel)
    last_pair = (labels[:, 1] == labels[:, 2]) & (labels[:, 1] != sentinel)
    regions = np.where(first_pair, labels[:, 0], np.where(last_pair, labels[:, 1], labels[:, 0]))
    return touched, regions


def face_members(mesh, labeling, face_csv, n_csv):
    """
    Vertex sets of supervertices made of faces.

    Arguments
    ---------
    mesh        :   Mesh
                    the surface
    labeling    :   AtlasLabeling
                    the parcellation; non-cortical vertices are dropped
    face_csv    :   np.ndarray (f,)
                    supervertex of every face, negative for unassigned faces
    n_csv       :   int
                    number of supervertices

    Returns
    -------
    (members, csv_of): list of sorted vertex arrays, and for every vertex the
    smallest supervertex containing it (or -1)
    """
    cortical = labeling.cortical_mask
    assigned = np.flatnonzero(face_csv >= 0)
    csv = np.repeat(face_csv[assigned], 3)
    vertices = mesh.faces[assigned].reshape(-1)
    keep = cortical[vertices]
    pairs = np.unique(np.column_stack((csv[keep], vertices[keep])), axis=0)
    splits = np.searchsorted(pairs[:, 0], np.arange(1, n_csv))
    members = np.split(pairs[:, 1], splits)
    csv_of = np.full(mesh.n_vertices, -1, dtype=np.int64)
    for c in range(n_csv - 1, -1, -1):
        csv_of[members[c]] = c
    return members, csv_of
