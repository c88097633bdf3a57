import importlib.util
import unittest as ut

import numpy as np

from spvtx.partition.seeds import (distribute_counts, near_equal_quotas, fps_seeds,
                                   refine_seeds, medoids)
from spvtx.exceptions import PlanRejected, ValidationError
from spvtx.mesh import connected_components
from spvtx.tests.utils import hemisphere, path_graph

HAS_METIS = importlib.util.find_spec('pymetis') is not None


def greedy_fps(positions, candidates, k):
    """
    Quadratic farthest-point sampling started at the first candidate.
    """
    chosen = [candidates[0]]
    while len(chosen) < k:
        best, best_v = -1.0, None
        for v in candidates:
            if v in chosen:
                continue
            d = min(np.sqrt(((positions[v] - positions[c])**2).sum()) for c in chosen)
            if d > best:
                best, best_v = d, v
        chosen.append(best_v)
    return chosen


class Test_Distribute(ut.TestCase):
    def test_single_component(self):
        self.assertEqual(distribute_counts([np.arange(50)], 3, 10, 30), [3])

    def test_proportional(self):
        self.assertEqual(distribute_counts([np.arange(80), np.arange(40)], 3, 20, 60), [2, 1])

    def test_component_below_lower_bound(self):
        with self.assertRaises(PlanRejected) as caught:
            distribute_counts([np.arange(50), np.arange(5)], 3, 10, 30)
        self.assertEqual(caught.exception.stage, 'distribute')

    def test_repaired_into_range(self):
        counts = distribute_counts([np.arange(90), np.arange(12)], 4, 10, 30)
        self.assertEqual(counts, [3, 1])


class Test_Quotas(ut.TestCase):
    def test_near_equal(self):
        self.assertEqual(near_equal_quotas(10, 3), [4, 3, 3])
        self.assertEqual(near_equal_quotas(9, 3), [3, 3, 3])
        for size, k in [(17, 5), (100, 7), (1, 1)]:
            quotas = near_equal_quotas(size, k)
            self.assertEqual(sum(quotas), size)
            self.assertTrue(max(quotas) - min(quotas) <= 1)


class Test_FpsSeeds(ut.TestCase):
    def test_single_seed(self):
        mesh, atlas, adj = hemisphere(level=2, num_rois=5)
        component = np.flatnonzero(atlas.labels == 2)
        self.assertEqual(fps_seeds(component[::-1], 1, mesh.positions), [component[0]])

    def test_antipode(self):
        positions = np.array([[1., 0, 0], [0, 1., 0], [-1., 0, 0]])
        self.assertEqual(fps_seeds([0, 1, 2], 2, positions), [0, 2])

    def test_matches_greedy(self):
        checked = 0
        for level, num_rois, seeds in ((2, 5, 4), (2, 10, 4), (2, 36, 2), (3, 36, 1)):
            for seed in range(seeds):
                mesh, atlas, adj = hemisphere(level=level, num_rois=num_rois, rng_seed=seed)
                for roi in atlas.rois:
                    for component in connected_components(np.flatnonzero(atlas.labels == roi),
                                                          adj):
                        if component.size > 200:
                            continue
                        k = min(6, component.size)
                        self.assertEqual(fps_seeds(component, k, mesh.positions),
                                         greedy_fps(mesh.positions, sorted(component), k))
                        checked += 1
        self.assertGreaterEqual(checked, 100)

    def test_ties_go_to_smaller_vertex(self):
        octahedron = np.vstack((np.eye(3), -np.eye(3)))
        self.assertEqual(fps_seeds(range(6), 6, octahedron), [0, 3, 1, 2, 4, 5])
        cube = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)],
                        dtype=float) / np.sqrt(3)
        doubled = np.vstack((cube, cube))
        for positions in (octahedron, cube, doubled):
            n = positions.shape[0]
            for k in range(1, n + 1):
                self.assertEqual(fps_seeds(np.arange(n)[::-1], k, positions),
                                 greedy_fps(positions, list(range(n)), k))

    def test_starts_at_smallest_vertex(self):
        mesh, atlas, adj = hemisphere(level=2, num_rois=5)
        rng = np.random.RandomState(0)
        for roi in atlas.rois:
            component = np.flatnonzero(atlas.labels == roi)
            for _ in range(3):
                shuffled = rng.permutation(component)
                seeds = fps_seeds(shuffled, min(3, component.size), mesh.positions)
                self.assertEqual(seeds[0], component.min())
                self.assertEqual(seeds, fps_seeds(component, len(seeds), mesh.positions))

    def test_too_many(self):
        with self.assertRaises(ValidationError):
            fps_seeds([0, 1], 3, np.eye(3))


class Test_Refine(ut.TestCase):
    def setUp(self):
        self.adj = path_graph(6)
        self.component = np.arange(6)

    def test_disabled(self):
        self.assertEqual(refine_seeds(self.component, self.adj, [0, 5], [3, 3],
                                      enabled=False), [0, 5])

    def test_path_medoids(self):
        self.assertEqual(refine_seeds(self.component, self.adj, [0, 5], [3, 3]), [1, 4])

    def test_forced_failure(self):
        def broken(graph, local_seeds, quotas):
            raise RuntimeError('partitioner unavailable')
        events = []
        with self.assertWarns(UserWarning):
            seeds = refine_seeds(self.component, self.adj, [0, 5], [3, 3], method=broken,
                                 diagnostics=events)
        self.assertEqual(seeds, [0, 5])
        self.assertEqual(events[0]['stage'], 'refine')
        self.assertEqual(events[0]['method'], 'broken')
        self.assertIn('partitioner unavailable', events[0]['reason'])

    def test_empty_part_falls_back(self):
        def lopsided(graph, local_seeds, quotas):
            return np.zeros(graph.shape[0], dtype=int)
        with self.assertWarns(UserWarning):
            seeds = refine_seeds(self.component, self.adj, [0, 5], [3, 3], method=lopsided)
        self.assertEqual(seeds, [0, 5])

    def test_mismatched_quotas(self):
        with self.assertRaises(ValidationError):
            refine_seeds(self.component, self.adj, [0, 5], [6])

    @ut.skipUnless(HAS_METIS, 'pymetis is not installed')
    def test_metis(self):
        mesh, atlas, adj = hemisphere(level=3, num_rois=10)
        component = np.flatnonzero(atlas.labels == 0)
        seeds = fps_seeds(component, 3, mesh.positions)
        refined = refine_seeds(component, adj, seeds, near_equal_quotas(component.size, 3),
                               method='metis')
        self.assertEqual(len(set(refined)), 3)
        self.assertTrue(np.isin(refined, component).all())


class Test_Medoids(ut.TestCase):
    def test_path(self):
        graph = path_graph(7).sparse
        self.assertEqual(medoids(graph, np.array([0, 0, 0, 1, 1, 1, 1]), 2), [1, 4])
