import unittest as ut
import numpy as np
from spvtx.mesh import (Mesh, Adjacency, build_icosphere, one_ring, connected_components,
                        farthest_point_sampling)
from spvtx.exceptions import ValidationError, ResourceLimitError
from spvtx.verify import symmetric
from spvtx._constants import RTOL, ATOL


class Test_Icosphere(ut.TestCase):
    def test_counts(self):
        for level in range(6):
            mesh = build_icosphere(level)
            self.assertEqual(mesh.n_vertices, 10 * 4**level + 2)
            self.assertEqual(mesh.n_faces, 20 * 4**level)
            self.assertEqual(mesh.n_edges, 30 * 4**level)
            self.assertEqual(mesh.n_vertices - mesh.n_edges + mesh.n_faces, 2)

    def test_fsaverage_size(self):
        self.assertEqual(build_icosphere(6).n_vertices, 40962)

    def test_unit_sphere(self):
        mesh = build_icosphere(3)
        np.testing.assert_allclose(np.linalg.norm(mesh.positions, axis=1), 1,
                                   rtol=RTOL, atol=ATOL)

    def test_outward_orientation(self):
        mesh = build_icosphere(2)
        a, b, c = (mesh.positions[mesh.faces[:, i]] for i in range(3))
        normals = np.cross(b - a, c - a)
        self.assertTrue((np.einsum('ij,ij->i', normals, a + b + c) > 0).all())

    def test_deterministic(self):
        self.assertEqual(build_icosphere(3), build_icosphere(3))

    def test_guards(self):
        with self.assertRaises(ResourceLimitError):
            build_icosphere(9)
        with self.assertRaises(ValidationError):
            build_icosphere(-1)
        with self.assertRaises(ValidationError):
            build_icosphere(1.5)


class Test_OneRing(ut.TestCase):
    def test_degrees(self):
        self.assertTrue((one_ring(build_icosphere(0)).degree == 5).all())
        degree = one_ring(build_icosphere(1)).degree
        self.assertEqual((degree == 5).sum(), 12)
        self.assertEqual((degree == 6).sum(), 30)

    def test_symmetric(self):
        adj = one_ring(build_icosphere(2))
        symmetric(adj)
        self.assertEqual(adj.weights.n, adj.n)
        self.assertEqual(adj.sparse.diagonal().sum(), 0)

    def test_edges_sorted(self):
        edges = one_ring(build_icosphere(1)).edges()
        self.assertEqual(edges.shape, (120, 2))
        self.assertTrue((edges[:, 0] < edges[:, 1]).all())
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        np.testing.assert_array_equal(order, np.arange(edges.shape[0]))

    def test_malformed(self):
        mesh = build_icosphere(0)
        bad = [np.array([[0, 1, 12]]), np.array([[0, 1, 1]]), np.array([[0, 1]]),
               np.array([[-1, 0, 1]])]
        for faces in bad:
            with self.assertRaises(ValidationError):
                one_ring(Mesh(mesh.positions, faces))


class Test_Components(ut.TestCase):
    def setUp(self):
        self.adj = one_ring(build_icosphere(1))

    def test_whole_sphere(self):
        components = connected_components(np.arange(self.adj.n), self.adj)
        self.assertEqual(len(components), 1)
        self.assertEqual(components[0].shape[0], 42)

    def test_empty(self):
        self.assertEqual(connected_components([], self.adj), [])

    def test_singletons(self):
        far = [v for v in range(self.adj.n) if v not in self.adj.neighbors(0) and v != 0][0]
        components = connected_components([far, 0], self.adj)
        self.assertEqual([c.tolist() for c in components], [[0], [far]])

    def test_separating_ring(self):
        ring = self.adj.neighbors(0)
        rest = np.setdiff1d(np.arange(self.adj.n), ring)
        components = connected_components(rest, self.adj)
        self.assertEqual([c.shape[0] for c in components], [42 - ring.shape[0] - 1, 1])
        self.assertEqual(components[1].tolist(), [0])


class Test_FPS(ut.TestCase):
    def test_antipode(self):
        positions = np.array([[1., 0, 0], [0, 1., 0], [-1., 0, 0]])
        self.assertEqual(farthest_point_sampling(positions, [0, 1, 2], 2, 0), [0, 2])

    def test_ties_to_first_candidate(self):
        positions = np.array([[0, 0, 1.], [1., 0, 0], [0, 1., 0], [-1., 0, 0]])
        self.assertEqual(farthest_point_sampling(positions, [0, 1, 2, 3], 2, 0), [0, 1])

    def test_start_must_be_candidate(self):
        positions = build_icosphere(0).positions
        with self.assertRaises(ValidationError):
            farthest_point_sampling(positions, [1, 2, 3], 2, 0)


class Test_Adjacency(ut.TestCase):
    def test_induced_local(self):
        adj = Adjacency.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
        sub = Adjacency(adj.induced([1, 2, 4]))
        self.assertEqual(sub.n, 3)
        self.assertEqual(sub.n_edges, 1)
        self.assertEqual(sub.neighbors(0).tolist(), [1])

    def test_equality(self):
        a = Adjacency.from_edges(3, [(0, 1), (1, 2)])
        b = Adjacency.from_edges(3, [(2, 1), (1, 0), (0, 1)])
        self.assertEqual(a, b)
        self.assertNotEqual(a, Adjacency.from_edges(3, [(0, 1)]))
