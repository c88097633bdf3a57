from __future__ import division
import numpy as _np
import pandas as _pd
from scipy.sparse import csgraph as _csgraph
from .abstracts import Hashmap as _Hashmap
from .mesh import one_ring as _one_ring

__all__ = ['ValidationReport', 'validate', 'partition_summary']

CHECKS = ('lossless', 'disjoint', 'roi_pure', 'connected', 'bounded', 'count')


class ValidationReport(object):
    """
    Pass/fail outcome of every supervertex invariant, with offenders.

    Arguments
    ---------
    checks  :   dict
                check name -> Hashmap(passed, offenders, detail). Skipped
                checks have passed=None.
    extras  :   dict
                informational values, such as the number of vertices shared
                between face-based supervertices
    """
    def __init__(self, checks, extras=None):
        self.checks = checks
        self.extras = extras if extras is not None else dict()

    @property
    def passed(self):
        return all(c.passed is not False for c in self.checks.values())

    @property
    def failures(self):
        return [name for name in CHECKS if self.checks[name].passed is False]

    @property
    def exit_code(self):
        return 0 if self.passed else 1

    def to_dict(self):
        return dict(passed=self.passed,
                    checks={name: dict(passed=c.passed, offenders=list(c.offenders),
                                       detail=c.detail)
                            for name, c in self.checks.items()},
                    extras=dict(self.extras))

    def __repr__(self):
        return 'ValidationReport(passed={}, failures={})'.format(self.passed, self.failures)


def _result(offenders, detail='', skip=False):
    if skip:
        return _Hashmap(passed=None, offenders=[], detail=detail)
    offenders = sorted(int(o) for o in offenders)
    return _Hashmap(passed=not offenders, offenders=offenders, detail=detail)


def validate(csvmap, mesh, atlas, adj=None):
    """
    Check a supervertex map against the mesh and atlas it was built from.

    Checks
    ------
    lossless    :   every cortical vertex is in some supervertex and no
                    excluded vertex is in any; offenders are vertex ids
    disjoint    :   no vertex is in two supervertices; offenders are vertex ids.
                    Face-based maps share boundary vertices, so this check is
                    skipped for them and the overlap is reported in extras.
    roi_pure    :   every member carries the supervertex's region, after the
                    fragment relabeling recorded on the map; offenders are
                    supervertex ids; skipped for face-based maps
    connected   :   every supervertex induces a connected subgraph; offenders
                    are supervertex ids; skipped for face-based maps
    bounded     :   every size lies in [L, H] of the plan; skipped when the map
                    has no plan or is face-based
    count       :   the number of supervertices equals K_total

    Arguments
    ---------
    csvmap  :   CsvMap
    mesh    :   Mesh
    atlas   :   AtlasLabeling
    adj     :   Adjacency or None
                precomputed 1-ring of `mesh`

    Returns
    -------
    ValidationReport
    """
    if adj is None:
        adj = _one_ring(mesh)
    cortical = atlas.cortical_mask
    faces = csvmap.mode == 'face'
    members = csvmap.members
    covered = _np.zeros(mesh.n_vertices, dtype=_np.int64)
    for m in members:
        _np.add.at(covered, m, 1)

    checks = dict()
    missing = _np.flatnonzero(cortical & (covered == 0))
    intruding = _np.flatnonzero(~cortical & (covered > 0))
    checks['lossless'] = _result(_np.union1d(missing, intruding),
                                 detail='{} cortical vertices uncovered, {} excluded '
                                        'vertices covered'.format(missing.size, intruding.size))
    shared = _np.flatnonzero(covered > 1)
    extras = dict(shared_vertices=int(shared.size),
                  duplicated_vertices=int((covered[shared] - 1).sum()))
    if faces:
        checks['disjoint'] = _result([], detail='face-based supervertices share {} vertices'
                                     .format(shared.size), skip=True)
    else:
        checks['disjoint'] = _result(shared, detail='{} vertices in several supervertices'
                                     .format(shared.size))

    labels = csvmap.region_labels(atlas)
    impure = [c for c, m in enumerate(members)
              if (labels[m] != csvmap.roi_of_csv[c]).any()]
    if faces:
        extras['impure_csvs'] = len(impure)
        checks['roi_pure'] = _result([], detail='faces straddle region borders', skip=True)
    else:
        checks['roi_pure'] = _result(impure)

    split = [c for c, m in enumerate(members)
             if m.size == 0 or _csgraph.connected_components(adj.induced(m),
                                                             directed=False)[0] != 1]
    if faces:
        extras['split_csvs'] = len(split)
        checks['connected'] = _result([], detail='dropped excluded vertices may cut face-based sets',
                                       skip=True)
    else:
        checks['connected'] = _result(split)

    if csvmap.plan is None or faces:
        checks['bounded'] = _result([], detail='no plan to check against', skip=True)
    else:
        L, H = csvmap.plan.L, csvmap.plan.H
        sizes = csvmap.sizes
        checks['bounded'] = _result(_np.flatnonzero((sizes < L) | (sizes > H)),
                                    detail='bounds [{}, {}], sizes in [{}, {}]'
                                    .format(L, H, sizes.min() if sizes.size else 0,
                                            sizes.max() if sizes.size else 0))
    count_ok = csvmap.n_csv == csvmap.K_total
    checks['count'] = _Hashmap(passed=count_ok, offenders=[],
                               detail='{} supervertices for K_total={}'
                               .format(csvmap.n_csv, csvmap.K_total))
    return ValidationReport(checks, extras=extras)


def partition_summary(csvmap, mesh=None):
    """
    One row per region: supervertex count, vertex count, and the spread of
    supervertex sizes. With a mesh, also the mean angular radius of the
    supervertices (report-only compactness).
    """
    sizes = csvmap.sizes
    df = _pd.DataFrame(dict(roi=csvmap.roi_of_csv, size=sizes))
    if mesh is not None:
        radii = []
        for m in csvmap.members:
            center = mesh.positions[m].mean(axis=0)
            center /= _np.linalg.norm(center)
            radii.append(_np.arccos(_np.clip(mesh.positions[m].dot(center), -1, 1)).max())
        df['radius'] = radii
    aggregations = dict(n_csv=('size', 'count'), n_vertices=('size', 'sum'),
                        min_size=('size', 'min'), max_size=('size', 'max'),
                        mean_size=('size', 'mean'))
    if mesh is not None:
        aggregations['mean_radius'] = ('radius', 'mean')
    return df.groupby('roi').agg(**aggregations)
