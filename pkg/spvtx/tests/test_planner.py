import itertools
import unittest as ut

import numpy as np

from spvtx.planner import (PartitionPlan, feasible_range, candidate_bounds, plan_allocation,
                           plan, plan_next, imbalance)
from spvtx.atlas import roi_sizes
from spvtx.exceptions import InfeasiblePlanError, UnpartitionableError, ValidationError
from spvtx._constants import TEST_SEED
from spvtx.tests.utils import hemisphere


def brute_force(sizes, K_total, bounds):
    """
    Smallest imbalance over every allocation inside the feasible ranges, or
    None when there is none.
    """
    rois = sorted(sizes)
    ranges = [feasible_range(sizes[r], *bounds) for r in rois]
    if any(rng is None for rng in ranges):
        return None
    best = None
    for counts in itertools.product(*[range(lo, hi + 1) for lo, hi in ranges]):
        if sum(counts) != K_total:
            continue
        value = imbalance(sizes, dict(zip(rois, counts)), K_total)
        if best is None or value < best:
            best = value
    return best


class Test_FeasibleRange(ut.TestCase):
    def test_examples(self):
        self.assertEqual(feasible_range(100, 30, 60), (2, 3))
        self.assertIsNone(feasible_range(10, 20, 30))
        self.assertEqual(feasible_range(69, 69, 69), (1, 1))


class Test_CandidateBounds(ut.TestCase):
    def test_single_region(self):
        L, H = candidate_bounds({0: 100}, 2)[0]
        self.assertTrue(L <= 50 <= H)

    def test_two_regions(self):
        L, H = candidate_bounds({0: 90, 1: 30}, 4)[0]
        self.assertTrue(L <= 30 and H >= 31)

    def test_monotone_and_terminal(self):
        sizes = {0: 57, 1: 13, 2: 101}
        bounds = candidate_bounds(sizes, 9)
        self.assertEqual(bounds[-1], (1, 101))
        for (L0, H0), (L1, H1) in zip(bounds, bounds[1:]):
            self.assertTrue(L1 <= L0 and H1 >= H0)
            self.assertNotEqual((L0, H0), (L1, H1))

    def test_too_few_supervertices(self):
        with self.assertRaises(InfeasiblePlanError):
            candidate_bounds({0: 10, 1: 10, 2: 10}, 2)


class Test_Allocation(ut.TestCase):
    def test_forced(self):
        found = plan_allocation({0: 100, 1: 200}, 3, (50, 100))
        self.assertEqual(found.counts, {0: 1, 1: 2})
        np.testing.assert_allclose(found.objective, 0, atol=1e-12)

    def test_single_region(self):
        self.assertEqual(plan_allocation({0: 100}, 3, (30, 60)).counts, {0: 3})

    def test_matches_enumeration(self):
        sizes = {0: 120, 1: 120, 2: 60}
        found = plan_allocation(sizes, 5, (20, 80))
        np.testing.assert_allclose(found.objective, brute_force(sizes, 5, (20, 80)),
                                   rtol=1e-12, atol=1e-12)
        found.check()

    def test_infeasible(self):
        self.assertIsNone(plan_allocation({0: 10, 1: 200}, 3, (20, 30)))
        self.assertIsNone(plan_allocation({0: 100, 1: 100}, 3, (50, 50)))

    def test_min_counts(self):
        found = plan_allocation({0: 100, 1: 100}, 5, (10, 90), min_counts={0: 3})
        self.assertEqual(found.counts[0], 3)
        self.assertIsNone(plan_allocation({0: 100, 1: 100}, 3, (10, 90),
                                          min_counts={0: 3}))

    def test_bad_bounds(self):
        with self.assertRaises(ValidationError):
            plan_allocation({0: 10}, 1, (5, 4))


class Test_Plan(ut.TestCase):
    def test_single_region(self):
        found = plan({0: 60}, 2)
        self.assertEqual(found.counts, {0: 2})
        self.assertTrue(found.L <= 30 <= found.H)

    def test_synthetic_atlas(self):
        mesh, atlas, adj = hemisphere(level=3, num_rois=10)
        sizes = roi_sizes(atlas)
        found = plan(sizes, 20)
        self.assertTrue(found.check())
        self.assertEqual(sum(found.counts.values()), 20)

    def test_one_per_region(self):
        sizes = {0: 40, 1: 7, 2: 19}
        found = plan(sizes, 3)
        self.assertEqual(found.counts, {0: 1, 1: 1, 2: 1})
        self.assertTrue(found.H >= 40)

    def test_exhausted(self):
        with self.assertRaises(UnpartitionableError) as caught:
            plan({0: 3, 1: 2}, 6)
        self.assertEqual(caught.exception.ranges, {0: (1, 3), 1: (1, 2)})

    def test_plan_next(self):
        sizes = {0: 50, 1: 31, 2: 77}
        first = plan(sizes, 7)
        second = plan_next(first)
        self.assertTrue(second.relaxation_rank > first.relaxation_rank)
        self.assertTrue(second.L <= first.L and second.H >= first.H)
        second.check()

    def test_plan_next_needs_sizes(self):
        with self.assertRaises(ValidationError):
            plan_next(PartitionPlan(1, 2, {0: 1}, 1))

    def test_serialization(self):
        found = plan({3: 50, 7: 31}, 4, delta0=2)
        self.assertEqual(PartitionPlan.from_dict(found.to_dict()), found)

    def test_against_enumeration(self):
        """
        Random small instances: the chosen rank is the first feasible one and
        its objective is the exhaustive minimum.
        """
        rng = np.random.default_rng(TEST_SEED)
        for _ in range(500):
            n_rois = int(rng.integers(1, 5))
            sizes = {r: int(rng.integers(3, 60)) for r in range(n_rois)}
            K_total = int(rng.integers(n_rois, n_rois + 7))
            if K_total > sum(sizes.values()):
                continue
            found = plan(sizes, K_total)
            candidates = candidate_bounds(sizes, K_total)
            for rank in range(found.relaxation_rank):
                self.assertIsNone(brute_force(sizes, K_total, candidates[rank]))
            expected = brute_force(sizes, K_total, candidates[found.relaxation_rank])
            np.testing.assert_allclose(found.objective, expected, rtol=1e-12, atol=1e-12)
            self.assertEqual((found.L, found.H), candidates[found.relaxation_rank])
            found.check()
