from __future__ import division
import numpy as np
from warnings import warn as Warn
from tqdm import tqdm as _tqdm

__all__ = ['progress', 'synthetic_hemisphere', 'planted_signal']

##########################
# GENERAL PURPOSE UTILS  #
##########################

def progress(iterable, enabled=False, **tqdm_kws):
    """
    Wrap an iterable in a tqdm progress bar when enabled.
    """
    if not enabled:
        return iterable
    return _tqdm(iterable, **tqdm_kws)

##########################
# BUILD EXAMPLE DATASETS #
##########################

def synthetic_hemisphere(level=3, num_rois=10, excluded_fraction=.1, rng_seed=0):
    """
    An icosphere with a synthetic parcellation.

    Returns
    -------
    (mesh, atlas, adj): the Mesh, its AtlasLabeling, and its 1-ring Adjacency
    """
    from .mesh import build_icosphere, one_ring
    from .atlas import synth_atlas
    mesh = build_icosphere(level)
    adj = one_ring(mesh)
    atlas = synth_atlas(mesh, num_rois, excluded_fraction=excluded_fraction,
                        rng_seed=rng_seed, adj=adj)
    return mesh, atlas, adj

def planted_signal(table, n_subjects, n_channels=2, n_signal=3, effect=1.5,
                   prevalence=.5, rng_seed=0, signal_csvs=None):
    """
    A synthetic cohort whose positive subjects carry a shift in a few
    supervertices.

    Every vertex value is standard normal noise; positives add `effect` to
    channel 0 at every vertex of the signal supervertices.

    Arguments
    ---------
    table       :   IndexTable
                    the supervertices the signal is planted in
    n_subjects  :   int
                    cohort size
    n_channels  :   int
                    number of feature channels
    n_signal    :   int
                    number of signal supervertices, drawn at random when
                    `signal_csvs` is not given
    effect      :   float
                    shift added to positives
    prevalence  :   float in (0,1)
                    share of positive subjects
    rng_seed    :   int
                    seed of the generator
    signal_csvs :   list of int or None
                    rows of `table` carrying the signal

    Returns
    -------
    (features, labels, signal_csvs): features shaped (n_subjects, n_channels,
    table.n_vertices), integer labels, and the signal rows
    """
    rng = np.random.default_rng(rng_seed)
    if signal_csvs is None:
        signal_csvs = np.sort(rng.choice(table.n, size=n_signal, replace=False)).tolist()
    n_positive = int(round(prevalence * n_subjects))
    if n_positive in (0, n_subjects):
        Warn('The cohort holds a single class ({} positives of {}).'
             .format(n_positive, n_subjects), stacklevel=2)
    labels = rng.permutation(np.r_[np.ones(n_positive, dtype=np.int64),
                                   np.zeros(n_subjects - n_positive, dtype=np.int64)])
    features = rng.standard_normal((n_subjects, n_channels, table.n_vertices))
    rows = table.table[signal_csvs]
    vertices = rows[rows >= 0]
    features[np.ix_(labels == 1, [0], vertices)] += effect
    return features, labels, list(signal_csvs)
