import unittest as ut

import numpy as np

from spvtx.diagnostics import validate, partition_summary, CHECKS
from spvtx.partition import partition_hemisphere
from spvtx.tests.utils import hemisphere, move_vertex, duplicate_vertex


class Test_Validate(ut.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.mesh, cls.atlas, cls.adj = hemisphere(level=3, num_rois=10)
        cls.csvmap = partition_hemisphere(cls.mesh, cls.atlas, 40, adj=cls.adj)

    def border_pair(self):
        """
        A vertex and a supervertex of another region it touches.
        """
        csv_of, labels = self.csvmap.csv_of, self.atlas.labels
        for v, u in self.adj.edges():
            if csv_of[v] >= 0 and csv_of[u] >= 0 and labels[v] != labels[u]:
                return int(v), int(csv_of[u])
        raise AssertionError('no region border')

    def test_partition_passes(self):
        report = validate(self.csvmap, self.mesh, self.atlas, adj=self.adj)
        self.assertTrue(report.passed)
        self.assertEqual(report.exit_code, 0)
        self.assertEqual(report.failures, [])
        self.assertEqual(sorted(report.checks), sorted(CHECKS))
        self.assertEqual(report.extras['shared_vertices'], 0)

    def test_moved_vertex_breaks_purity(self):
        v, target = self.border_pair()
        report = validate(move_vertex(self.csvmap, v, target), self.mesh, self.atlas,
                          adj=self.adj)
        self.assertFalse(report.passed)
        self.assertEqual(report.exit_code, 1)
        self.assertIn('roi_pure', report.failures)
        self.assertIn(target, report.checks['roi_pure'].offenders)

    def test_duplicated_vertex_breaks_disjointness(self):
        v, target = self.border_pair()
        report = validate(duplicate_vertex(self.csvmap, v, target), self.mesh, self.atlas,
                          adj=self.adj)
        self.assertIn('disjoint', report.failures)
        self.assertEqual(report.checks['disjoint'].offenders, [v])
        self.assertEqual(report.extras['duplicated_vertices'], 1)

    def test_dropped_vertex_breaks_losslessness(self):
        csv_of = self.csvmap.csv_of
        v = int(np.flatnonzero(csv_of >= 0)[0])
        members = [np.setdiff1d(m, [v]) for m in self.csvmap.members]
        broken = type(self.csvmap)(csv_of, members, self.csvmap.roi_of_csv,
                                   plan=self.csvmap.plan, K_total=self.csvmap.K_total)
        report = validate(broken, self.mesh, self.atlas, adj=self.adj)
        self.assertEqual(report.checks['lossless'].offenders, [v])

    def test_count(self):
        wrong = type(self.csvmap)(self.csvmap.csv_of, self.csvmap.members,
                                  self.csvmap.roi_of_csv, plan=self.csvmap.plan, K_total=41)
        report = validate(wrong, self.mesh, self.atlas, adj=self.adj)
        self.assertEqual(report.failures, ['count'])

    def test_face_mode_skips_vertex_checks(self):
        faces = partition_hemisphere(self.mesh, self.atlas, 40, adj=self.adj, face_based=True)
        report = validate(faces, self.mesh, self.atlas, adj=self.adj)
        for name in ('disjoint', 'roi_pure', 'connected', 'bounded'):
            self.assertIsNone(report.checks[name].passed)
        self.assertTrue(report.extras['duplicated_vertices'] > 0)
        self.assertTrue(report.passed)
        as_dict = report.to_dict()
        self.assertIsNone(as_dict['checks']['disjoint']['passed'])


class Test_Summary(ut.TestCase):
    def test_per_region_rows(self):
        mesh, atlas, adj = hemisphere(level=3, num_rois=10)
        csvmap = partition_hemisphere(mesh, atlas, 30, adj=adj)
        summary = partition_summary(csvmap, mesh)
        self.assertEqual(list(summary.index), atlas.rois)
        self.assertEqual(summary['n_csv'].sum(), 30)
        self.assertEqual(summary['n_vertices'].sum(), atlas.cortical_mask.sum())
        self.assertTrue((summary['min_size'] <= summary['max_size']).all())
        self.assertTrue((summary['mean_radius'] > 0).all())
        self.assertNotIn('mean_radius', partition_summary(csvmap).columns)
