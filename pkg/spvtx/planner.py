from __future__ import division

import logging
import math

import numpy as np

from .exceptions import ValidationError, InfeasiblePlanError, UnpartitionableError

__all__ = ['PartitionPlan', 'feasible_range', 'candidate_bounds',
           'plan_allocation', 'plan', 'plan_next', 'imbalance']

logger = logging.getLogger(__name__)

# relative slack when comparing allocations of equal imbalance
_TIE_RTOL = 1e-12


class PartitionPlan(object):
    """
    Size bounds and per-region supervertex counts for one hemisphere.

    Arguments
    ---------
    L               :   int
                        smallest admissible supervertex size
    H               :   int
                        largest admissible supervertex size
    counts          :   dict
                        region id -> number of supervertices
    K_total         :   int
                        total number of supervertices
    relaxation_rank :   int
                        index of (L,H) in the candidate list; 0 is the tightest
    objective       :   float
                        sum over regions of (n_r/K_r - mean size)**2
    sizes           :   dict
                        region id -> cortical vertex count the plan was made for
    delta0          :   int or None
                        initial half-width used to build the candidate list
    min_counts      :   dict or None
                        region id -> smallest count the region accepts
    """
    def __init__(self, L, H, counts, K_total, relaxation_rank=0, objective=None,
                 sizes=None, delta0=None, min_counts=None):
        self.L = int(L)
        self.H = int(H)
        self.counts = {int(r): int(k) for r, k in sorted(counts.items())}
        self.K_total = int(K_total)
        self.relaxation_rank = int(relaxation_rank)
        self.sizes = None if sizes is None else {int(r): int(n) for r, n in sorted(sizes.items())}
        if objective is None and self.sizes is not None:
            objective = imbalance(self.sizes, self.counts, self.K_total)
        self.objective = objective
        self.delta0 = delta0
        self.min_counts = None if min_counts is None else {int(r): int(m) for r, m
                                                            in sorted(min_counts.items())}

    def check(self):
        """
        Raise a ValidationError if any plan invariant is broken.
        """
        if not 1 <= self.L <= self.H:
            raise ValidationError('bounds ({}, {}) violate 1 <= L <= H'.format(self.L, self.H))
        if sum(self.counts.values()) != self.K_total:
            raise ValidationError('counts sum to {} instead of {}'
                                  .format(sum(self.counts.values()), self.K_total))
        if self.sizes is not None:
            for roi, n in self.sizes.items():
                rng = feasible_range(n, self.L, self.H)
                k = self.counts.get(roi)
                if rng is None or k is None or not rng[0] <= k <= rng[1]:
                    raise ValidationError('region {} with {} vertices got {} supervertices, '
                                          'outside {}'.format(roi, n, k, rng))
        return True

    def to_dict(self):
        return dict(L=self.L, H=self.H, K_total=self.K_total,
                    relaxation_rank=self.relaxation_rank, objective=self.objective,
                    counts={str(r): k for r, k in self.counts.items()},
                    sizes=None if self.sizes is None else {str(r): n for r, n
                                                           in self.sizes.items()},
                    delta0=self.delta0,
                    min_counts=None if self.min_counts is None else
                    {str(r): m for r, m in self.min_counts.items()})

    @classmethod
    def from_dict(cls, d):
        def _keys(m):
            return None if m is None else {int(k): v for k, v in m.items()}
        return cls(d['L'], d['H'], _keys(d['counts']), d['K_total'],
                   relaxation_rank=d.get('relaxation_rank', 0),
                   objective=d.get('objective'), sizes=_keys(d.get('sizes')),
                   delta0=d.get('delta0'), min_counts=_keys(d.get('min_counts')))

    def __eq__(self, other):
        if not isinstance(other, PartitionPlan):
            return False
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return ('PartitionPlan(L={}, H={}, K_total={}, relaxation_rank={})'
                .format(self.L, self.H, self.K_total, self.relaxation_rank))


def feasible_range(n_r, L, H):
    """
    Admissible supervertex counts for a region of n_r vertices when every
    supervertex must hold between L and H vertices.

    Returns
    -------
    (lo, hi) with lo = ceil(n_r/H) and hi = floor(n_r/L), or None when lo > hi
    """
    lo = -(-int(n_r) // int(H))
    hi = int(n_r) // int(L)
    if lo > hi:
        return None
    return lo, hi


def imbalance(sizes, counts, K_total):
    """
    Sum over regions, in ascending id order, of (n_r/K_r - mean size)**2.
    """
    mean = sum(sizes.values()) / K_total
    return float(sum((sizes[r] / counts[r] - mean)**2 for r in sorted(sizes)))


def _check_sizes(sizes, K_total):
    if not sizes:
        raise ValidationError('no regions to plan for')
    if any(int(n) < 1 for n in sizes.values()):
        raise ValidationError('every region needs at least one vertex')
    if K_total < len(sizes):
        raise InfeasiblePlanError('K_total={} is smaller than the {} regions to cover'
                                  .format(K_total, len(sizes)))


def candidate_bounds(sizes, K_total, delta0=None):
    """
    The (L,H) bounds to try, tightest first.

    Starting from (floor(s), ceil(s) + delta0) around the mean size
    s = sum(n_r)/K_total, each step lowers L by one (never below 1) and raises H
    by one (never above the largest region). The list ends at (1, max n_r).

    Arguments
    ---------
    sizes   :   dict
                region id -> cortical vertex count
    K_total :   int
                total number of supervertices
    delta0  :   int or None
                initial half-width; ceil(0.15 * s) when None

    Returns
    -------
    list of (L, H) tuples
    """
    _check_sizes(sizes, K_total)
    mean = sum(sizes.values()) / K_total
    if delta0 is None:
        delta0 = int(math.ceil(0.15 * mean))
    largest = max(sizes.values())
    L0 = max(1, int(math.floor(mean)))
    H0 = int(math.ceil(mean)) + int(delta0)
    out = []
    step = 0
    while True:
        bounds = (max(1, L0 - step), min(H0 + step, largest))
        if bounds[1] < bounds[0]:
            bounds = (bounds[0], bounds[0])
        if not out or out[-1] != bounds:
            out.append(bounds)
        if bounds == (1, largest):
            break
        step += 1
    return out


def plan_allocation(sizes, K_total, bounds, min_counts=None):
    """
    Choose per-region counts for fixed bounds.

    Among all allocations with sum(K_r) = K_total and every K_r inside
    feasible_range(n_r, L, H), return one minimizing
    sum_r (n_r/K_r - s)**2 with s = sum(n_r)/K_total. The minimum is found by
    dynamic programming over regions, so it is exact for any region sizes.
    Equal objectives resolve to the lexicographically smallest count vector in
    ascending region id.

    Arguments
    ---------
    sizes       :   dict
                    region id -> cortical vertex count
    K_total     :   int
                    total number of supervertices
    bounds      :   (int, int)
                    the (L, H) size bounds
    min_counts  :   dict or None
                    region id -> smallest acceptable count, e.g. the number of
                    connected components of the region

    Returns
    -------
    PartitionPlan, or None when no allocation exists
    """
    _check_sizes(sizes, K_total)
    L, H = int(bounds[0]), int(bounds[1])
    if not 1 <= L <= H:
        raise ValidationError('bounds ({}, {}) violate 1 <= L <= H'.format(L, H))
    rois = sorted(sizes)
    mean = sum(sizes.values()) / K_total
    ranges = []
    for roi in rois:
        rng = feasible_range(sizes[roi], L, H)
        if rng is None:
            return None
        lo, hi = rng
        if min_counts is not None:
            lo = max(lo, int(min_counts.get(roi, 1)))
        if lo > hi:
            return None
        ranges.append((lo, hi))
    if sum(lo for lo, _ in ranges) > K_total or sum(hi for _, hi in ranges) < K_total:
        return None

    # best[i][c]: smallest objective of regions i.. using exactly c supervertices
    best = np.full((len(rois) + 1, K_total + 1), np.inf)
    best[-1, 0] = 0.0
    for i in range(len(rois) - 1, -1, -1):
        n = sizes[rois[i]]
        lo, hi = ranges[i]
        row = best[i]
        following = best[i + 1]
        for k in range(lo, min(hi, K_total) + 1):
            cost = (n / k - mean)**2
            np.minimum(row[k:], cost + following[:K_total + 1 - k], out=row[k:])
    if not np.isfinite(best[0, K_total]):
        return None

    counts = dict()
    remaining = K_total
    for i, roi in enumerate(rois):
        n = sizes[roi]
        lo, hi = ranges[i]
        target = best[i, remaining]
        slack = _TIE_RTOL * max(1.0, abs(target))
        for k in range(lo, min(hi, remaining) + 1):
            value = (n / k - mean)**2 + best[i + 1, remaining - k]
            if value <= target + slack:
                counts[roi] = k
                remaining -= k
                break
    return PartitionPlan(L, H, counts, K_total, sizes=sizes, min_counts=min_counts)


def plan(sizes, K_total, start_rank=0, delta0=None, min_counts=None):
    """
    Find the tightest candidate bounds that admit an allocation.

    Arguments
    ---------
    sizes       :   dict
                    region id -> cortical vertex count
    K_total     :   int
                    total number of supervertices
    start_rank  :   int
                    index in the candidate list to start from. plan_next uses
                    this to resume after a downstream rejection.
    delta0      :   int or None
                    initial half-width of the candidate list
    min_counts  :   dict or None
                    region id -> smallest acceptable count

    Returns
    -------
    PartitionPlan whose relaxation_rank is the index of the bounds used
    """
    candidates = candidate_bounds(sizes, K_total, delta0=delta0)
    for rank in range(int(start_rank), len(candidates)):
        found = plan_allocation(sizes, K_total, candidates[rank], min_counts=min_counts)
        if found is not None:
            found.relaxation_rank = rank
            found.delta0 = delta0
            logger.debug('plan: rank=%d L=%d H=%d objective=%.6g',
                         rank, found.L, found.H, found.objective)
            return found
    last = candidates[-1]
    ranges = {roi: feasible_range(n, *last) for roi, n in sorted(sizes.items())}
    raise UnpartitionableError('no candidate bounds from rank {} of {} admit an '
                               'allocation of {} supervertices'
                               .format(start_rank, len(candidates), K_total),
                               ranges=ranges)


def plan_next(current):
    """
    Resume planning at the candidate after the one `current` used.
    """
    if current.sizes is None:
        raise ValidationError('the plan does not carry the region sizes it was made for')
    return plan(current.sizes, current.K_total, start_rank=current.relaxation_rank + 1,
                delta0=current.delta0, min_counts=current.min_counts)
