from __future__ import division

import copy
import logging
import multiprocessing as mp
from warnings import warn as Warn

import numpy as np

from .._constants import DEFAULTS, NONE
from ..abstracts import Hashmap
from ..atlas import reassign_minor_fragments, cortical_vertices
from ..exceptions import ValidationError, PlanRejected, UnpartitionableError
from ..mesh import Adjacency, one_ring, connected_components
from ..planner import PartitionPlan, plan, plan_next
from .balance import balance, bound_violation
from .faces import face_adjacency, face_regions, face_members
from .grow import grow
from .seeds import distribute_counts, fps_seeds, near_equal_quotas, refine_seeds

__all__ = ['CsvMap', 'partition_hemisphere', 'plan_hemisphere', 'partition_units']

logger = logging.getLogger(__name__)


class CsvMap(object):
    """
    The supervertices of one hemisphere.

    Arguments
    ---------
    csv_of      :   np.ndarray (n,)
                    supervertex id of every vertex, NONE (-1) for vertices
                    outside the cortex. For face-based maps a vertex shared by
                    several supervertices points at the smallest one.
    members     :   list of np.ndarray
                    sorted vertices of every supervertex
    roi_of_csv  :   np.ndarray (K,)
                    owning region of every supervertex
    plan        :   PartitionPlan or None
                    the plan the map was built with
    K_total     :   int or None
                    requested supervertex count; defaults to len(members)
    mode        :   str
                    'vertex' or 'face'
    trail       :   list of dict
                    plans rejected before this one, with the stage and reason
    diagnostics :   list of dict
                    non-fatal events, such as seed refinement fallbacks
    relabeled   :   dict or None
                    vertex -> region for every vertex the fragment cleanup
                    moved to another region before partitioning
    """
    def __init__(self, csv_of, members, roi_of_csv, plan=None, K_total=None,
                 mode='vertex', trail=None, diagnostics=None, relabeled=None):
        if mode not in ('vertex', 'face'):
            raise ValidationError("mode must be 'vertex' or 'face', got {}".format(mode))
        self.csv_of = np.asarray(csv_of, dtype=np.int64)
        self.members = [np.asarray(m, dtype=np.int64) for m in members]
        self.roi_of_csv = np.asarray(roi_of_csv, dtype=np.int64)
        if self.roi_of_csv.shape[0] != len(self.members):
            raise ValidationError('{} supervertices but {} owning regions'
                                  .format(len(self.members), self.roi_of_csv.shape[0]))
        self.plan = plan
        self.K_total = len(self.members) if K_total is None else int(K_total)
        self.mode = mode
        self.trail = list(trail) if trail is not None else []
        self.diagnostics = list(diagnostics) if diagnostics is not None else []
        self.relabeled = {int(v): int(r) for v, r in (relabeled or dict()).items()}

    def region_labels(self, atlas):
        """
        Labels of `atlas` with the fragment cleanup this map was built on applied.
        """
        labels = atlas.labels.copy()
        if self.relabeled:
            vertices = np.fromiter(self.relabeled.keys(), dtype=np.int64)
            labels[vertices] = np.fromiter(self.relabeled.values(), dtype=np.int64)
        return labels

    @classmethod
    def from_assignment(cls, csv_of, roi_of_csv, **kw):
        """
        Build a map from the per-vertex supervertex ids alone.
        """
        csv_of = np.asarray(csv_of, dtype=np.int64)
        n_csv = np.asarray(roi_of_csv).shape[0]
        assigned = np.flatnonzero(csv_of >= 0)
        order = assigned[np.argsort(csv_of[assigned], kind='stable')]
        splits = np.searchsorted(csv_of[order], np.arange(1, n_csv))
        return cls(csv_of, np.split(order, splits), roi_of_csv, **kw)

    @property
    def n_csv(self):
        return len(self.members)

    @property
    def n_vertices(self):
        return self.csv_of.shape[0]

    @property
    def sizes(self):
        return np.array([m.shape[0] for m in self.members], dtype=np.int64)

    @property
    def v_max(self):
        return int(self.sizes.max()) if self.members else 0

    def __eq__(self, other):
        if not isinstance(other, CsvMap):
            return False
        return (self.mode == other.mode
                and self.K_total == other.K_total
                and np.array_equal(self.csv_of, other.csv_of)
                and np.array_equal(self.roi_of_csv, other.roi_of_csv)
                and len(self.members) == len(other.members)
                and all(np.array_equal(a, b) for a, b in zip(self.members, other.members))
                and self.plan == other.plan
                and self.relabeled == other.relabeled)

    def __repr__(self):
        return 'CsvMap(n_csv={}, v_max={}, mode={})'.format(self.n_csv, self.v_max, self.mode)


def _setup_configs(fragment_threshold=.10, roi_preserving=True, face_based=False,
                   delta0=None, refine=False, refine_method='bfs', max_retries=3,
                   max_passes=50, balance_mode='best', n_jobs=1, debug=False, **uncaught):
    """
    Collect partitioning options into one namespace, filling in defaults.
    """
    uncaught.pop('K_total', None)
    if uncaught:
        Warn('Ignoring unknown partition options: {}'.format(sorted(uncaught)))
    if balance_mode not in ('best', 'first'):
        raise ValidationError("balance_mode must be 'best' or 'first', got {}"
                              .format(balance_mode))
    if int(n_jobs) < 1:
        raise ValidationError('n_jobs must be at least 1, got {}'.format(n_jobs))
    return Hashmap(fragment_threshold=fragment_threshold, roi_preserving=bool(roi_preserving),
                   face_based=bool(face_based), delta0=delta0, refine=bool(refine),
                   refine_method=refine_method, max_retries=int(max_retries),
                   max_passes=int(max_passes), balance_mode=balance_mode,
                   n_jobs=int(n_jobs), debug=bool(debug))


def _prepare(mesh, atlas, K_total, config, adj, configs):
    """
    Resolve options, check inputs, and clean minor fragments out of the atlas.
    """
    options = copy.deepcopy(DEFAULTS['partition'])
    options.update(config or dict())
    options.update(configs)
    cfg = _setup_configs(**options)
    if atlas.n_vertices != mesh.n_vertices:
        raise ValidationError('atlas labels {} vertices, the mesh has {}'
                              .format(atlas.n_vertices, mesh.n_vertices))
    if int(K_total) != K_total or K_total < 1:
        raise ValidationError('K_total must be a positive integer, got {}'.format(K_total))
    if adj is None:
        adj = one_ring(mesh)
    cleaned = atlas
    if cfg.fragment_threshold:
        cleaned = reassign_minor_fragments(atlas, adj, threshold=cfg.fragment_threshold)
    cortex = cortical_vertices(cleaned)
    if cortex.size == 0:
        raise ValidationError('the atlas leaves no cortical vertex')
    return cfg, int(K_total), cleaned, adj, cortex


def _units(mesh, atlas, adj, cortex, cfg):
    """
    The nodes to partition (cortical vertices, or faces in face mode), their
    regions, the groups they may not cross, their graph, and seeding directions.
    """
    if cfg.face_based:
        units, regions = face_regions(mesh, atlas)
        graph, directions = face_adjacency(mesh), mesh.face_centroids()
    else:
        units, regions = cortex, atlas.labels[cortex]
        graph, directions = adj, mesh.positions
    groups = regions if cfg.roi_preserving else np.zeros_like(regions)
    return units, regions, groups, graph, directions


def plan_hemisphere(mesh, atlas, K_total, config=None, adj=None, **configs):
    """
    The first plan partition_hemisphere tries for the same inputs: region
    sizes are taken after fragment cleanup, and every region gets at least one
    supervertex per connected component.

    Arguments are those of partition_hemisphere.

    Returns
    -------
    PartitionPlan
    """
    cfg, K_total, cleaned, adj, cortex = _prepare(mesh, atlas, K_total, config, adj, configs)
    units, _, groups, graph, _ = _units(mesh, cleaned, adj, cortex, cfg)
    _, found = _initial_plan(units, groups, graph, K_total, cfg)
    return found


def partition_hemisphere(mesh, atlas, K_total, config=None, adj=None, **configs):
    """
    Partition the cortex of one hemisphere into K_total supervertices.

    Stages: minor label fragments are merged into their neighbors, the planner
    picks size bounds and per-region counts, each connected piece of every
    region is seeded and grown into near-equal supervertices, and boundary
    vertices are traded to satisfy the bounds. When any stage cannot honor
    the plan, the next looser plan is tried.

    Arguments
    ---------
    mesh        :   Mesh
                    the hemisphere surface
    atlas       :   AtlasLabeling
                    its parcellation
    K_total     :   int
                    number of supervertices
    config      :   dict or None
                    partition options; see DEFAULTS['partition']
    adj         :   Adjacency or None
                    precomputed 1-ring of `mesh`
    configs     :   keyword arguments
                    override entries of `config`

    Returns
    -------
    CsvMap with supervertex ids contiguous in (region, component, seed) order.
    Vertices moved by the fragment cleanup are listed in its `relabeled`.
    """
    cfg, K_total, cleaned, adj, cortex = _prepare(mesh, atlas, K_total, config, adj, configs)
    changed = np.flatnonzero(cleaned.labels != atlas.labels)
    relabeled = dict(zip(changed.tolist(), cleaned.labels[changed].tolist()))
    units, regions, groups, graph, directions = _units(mesh, cleaned, adj, cortex, cfg)
    found = partition_units(units, groups, graph, directions, K_total, cfg)
    kw = dict(plan=found.plan, K_total=K_total, trail=found.trail,
              diagnostics=found.diagnostics, relabeled=relabeled)

    if cfg.face_based:
        face_csv = np.full(mesh.n_faces, NONE, dtype=np.int64)
        face_csv[units] = found.unit_csv
        members, csv_of = face_members(mesh, cleaned, face_csv, found.n_csv)
        owners = [regions[found.unit_csv == c] for c in range(found.n_csv)]
        mode = 'face'
    else:
        csv_of = np.full(mesh.n_vertices, NONE, dtype=np.int64)
        csv_of[units] = found.unit_csv
        members = [units[found.unit_csv == c] for c in range(found.n_csv)]
        owners = [cleaned.labels[m] for m in members]
        mode = 'vertex'
    if cfg.roi_preserving:
        roi_of_csv = found.csv_group
    else:
        roi_of_csv = np.array([_majority(o) for o in owners], dtype=np.int64)
    csvmap = CsvMap(csv_of, members, roi_of_csv, mode=mode, **kw)
    shared = int(sum(m.shape[0] for m in members) - (csv_of >= 0).sum())
    logger.info('stage=partition mode=%s csvs=%d v_max=%d L=%d H=%d relaxation_rank=%d '
                'rejected=%d relabeled=%d shared_vertices=%d', mode, csvmap.n_csv,
                csvmap.v_max, found.plan.L, found.plan.H, found.plan.relaxation_rank,
                len(found.trail), len(relabeled), shared)
    return csvmap


def _majority(values):
    ids, counts = np.unique(values, return_counts=True)
    return int(ids[np.argmax(counts)])

###################
# UNIT PARTITION  #
###################

def _initial_plan(units, groups, adj, K_total, cfg):
    """
    Connected components of every group and the plan for their sizes, with at
    least one piece per component.
    """
    components = dict()
    for g in np.unique(groups).tolist():
        components[g] = connected_components(units[groups == g], adj)
    sizes = {g: int(sum(c.shape[0] for c in comps)) for g, comps in components.items()}
    min_counts = {g: len(comps) for g, comps in components.items()}
    return components, plan(sizes, K_total, delta0=cfg.delta0, min_counts=min_counts)


def partition_units(units, groups, adj, directions, K_total, cfg):
    """
    Partition graph nodes (vertices or faces) into K_total connected pieces
    that never cross groups.

    Arguments
    ---------
    units       :   np.ndarray (m,)
                    sorted node ids to partition
    groups      :   np.ndarray (m,)
                    group (region) of every unit
    adj         :   Adjacency
                    graph over all nodes
    directions  :   np.ndarray (n,3)
                    unit vectors used for farthest-point seeding
    K_total     :   int
                    number of pieces
    cfg         :   Hashmap
                    options from _setup_configs

    Returns
    -------
    Hashmap with unit_csv (piece of every unit), csv_group, n_csv, plan,
    trail, and diagnostics
    """
    units = np.asarray(units, dtype=np.int64)
    groups = np.asarray(groups, dtype=np.int64)
    components, current = _initial_plan(units, groups, adj, K_total, cfg)
    cache = dict()
    trail = []
    diagnostics = []
    while True:
        try:
            pieces = _execute(current, components, adj, directions, cfg, cache, diagnostics)
            break
        except PlanRejected as e:
            trail.append(dict(relaxation_rank=current.relaxation_rank, L=current.L,
                              H=current.H, stage=e.stage, roi=e.roi, reason=str(e)))
            logger.info('stage=plan_rejected relaxation_rank=%d L=%d H=%d by=%s roi=%s',
                        current.relaxation_rank, current.L, current.H, e.stage, e.roi)
            try:
                current = plan_next(current)
            except UnpartitionableError as u:
                raise UnpartitionableError(str(u), trail=trail, ranges=u.ranges)

    unit_csv = np.full(units.shape[0], NONE, dtype=np.int64)
    csv_group = []
    offset = 0
    for g, component, local in pieces:
        unit_csv[np.searchsorted(units, component)] = local + offset
        k = int(local.max()) + 1
        csv_group.extend([g] * k)
        offset += k
    return Hashmap(unit_csv=unit_csv, csv_group=np.array(csv_group, dtype=np.int64),
                   n_csv=offset, plan=current, trail=trail, diagnostics=diagnostics)


def _execute(current, components, adj, directions, cfg, cache, diagnostics):
    """
    Seed, grow, and balance every component under one plan. Grown components
    are cached by (group, component, count) across plans.
    """
    layout = []
    tasks = []
    for g in sorted(components):
        try:
            counts = distribute_counts(components[g], current.counts[g], current.L, current.H)
        except PlanRejected as e:
            e.roi = g
            raise
        for ci, k in enumerate(counts):
            key = (g, ci, k)
            layout.append(key)
            if key not in cache:
                tasks.append((key, components[g][ci]))
    for key, grown, events in _run_tasks(tasks, adj, directions, cfg):
        cache[key] = grown
        diagnostics.extend(events)

    pieces = []
    for key in layout:
        g, ci, k = key
        component = components[g][ci]
        grown = cache[key]
        local = grown.labels
        if bound_violation(grown.sizes, current.L, current.H) > 0:
            graph = Adjacency(adj.induced(component))
            balanced = balance(local, graph, None, current.L, current.H,
                               max_passes=cfg.max_passes, mode=cfg.balance_mode,
                               debug=cfg.debug)
            if not balanced.success:
                raise PlanRejected('balancing left a violation of {} in component {} '
                                   'of region {}'.format(balanced.violation, ci, g),
                                   stage='balance', roi=g)
            local = balanced.labels
        pieces.append((g, component, local))
    return pieces


def _run_tasks(tasks, adj, directions, cfg):
    jobs = [(key, Adjacency(adj.induced(component)), directions[component], dict(cfg))
            for key, component in tasks]
    if cfg.n_jobs > 1 and len(jobs) > 1:
        P = mp.Pool(min(cfg.n_jobs, len(jobs)))
        try:
            results = P.map(_grow_task, jobs)
        finally:
            P.close()
    else:
        results = list(map(_grow_task, jobs))
    return results


def _grow_task(job):
    """
    Seed and grow one component, in local indices of its own subgraph.
    Top-level so worker processes can unpickle it.
    """
    (g, ci, k), graph, directions, cfg = job
    events = []
    local = np.arange(graph.n)
    seeds = fps_seeds(local, k, directions)
    quotas = near_equal_quotas(graph.n, k)
    seeds = refine_seeds(local, graph, seeds, quotas, method=cfg['refine_method'],
                         enabled=cfg['refine'], diagnostics=events)
    grown = grow(local, graph, seeds, quotas, max_retries=cfg['max_retries'])
    for event in events:
        event.update(roi=g, component=ci)
    if not grown.success:
        events.append(dict(stage='grow', roi=g, component=ci, k=k, retries=grown.retries,
                           starved=grown.starved))
    return (g, ci, k), grown, events
