import unittest as ut

import numpy as np
from scipy.sparse import csgraph

from spvtx.partition import grow, fps_seeds, near_equal_quotas
from spvtx.exceptions import ValidationError
from spvtx.tests.utils import hemisphere, path_graph, cycle_graph


class Test_Grow(ut.TestCase):
    def test_path(self):
        result = grow(np.arange(4), path_graph(4), [0, 3], [2, 2])
        self.assertTrue(result.success)
        np.testing.assert_array_equal(result.labels, [0, 0, 1, 1])
        self.assertEqual(result.assignment(), {0: 0, 1: 0, 2: 1, 3: 1})

    def test_cycle(self):
        result = grow(np.arange(6), cycle_graph(6), [0, 3], [3, 3])
        self.assertTrue(result.success)
        np.testing.assert_array_equal(result.labels, [0, 0, 1, 1, 1, 0])

    def test_quotas_met_on_sphere(self):
        mesh, atlas, adj = hemisphere(level=3, num_rois=10)
        for roi in atlas.rois:
            component = np.flatnonzero(atlas.labels == roi)
            k = max(1, component.size // 12)
            quotas = near_equal_quotas(component.size, k)
            result = grow(component, adj, fps_seeds(component, k, mesh.positions), quotas)
            if not result.success:
                continue
            np.testing.assert_array_equal(result.sizes, quotas)
            self.assertTrue(result.sizes.max() - result.sizes.min() <= 1)
            for s in range(k):
                members = result.component[result.labels == s]
                self.assertIn(result.seeds[s], members)
                n_comp, _ = csgraph.connected_components(adj.induced(members), directed=False)
                self.assertEqual(n_comp, 1)

    def test_starved_seed(self):
        """
        A seed at the end of a path walled in by its neighbor's seed cannot grow.
        """
        result = grow(np.arange(5), path_graph(5), [0, 1], [3, 2], max_retries=3)
        self.assertFalse(result.success)
        self.assertEqual(result.starved, [0])
        np.testing.assert_array_equal(result.labels, [0, 1, 1, 1, 1])

    def test_guards(self):
        adj = path_graph(4)
        with self.assertRaises(ValidationError):
            grow(np.arange(4), adj, [0, 3], [3, 2])
        with self.assertRaises(ValidationError):
            grow(np.arange(4), adj, [0, 3], [1, 3])
        with self.assertRaises(ValidationError):
            grow(np.arange(4), adj, [0, 0], [2, 2])
        with self.assertRaises(ValidationError):
            grow(np.arange(3), adj, [0, 3], [2, 1])
