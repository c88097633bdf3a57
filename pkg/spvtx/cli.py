"""
Command line entry point, `spvtx`.

Every subcommand reads its inputs from the paths it is given and writes its
results only to the output paths it is given. Progress goes to standard error
as key=value log lines.
"""
from __future__ import division

import argparse
import contextlib
import copy
import glob
import json
import logging
import os
import sys
import time

import numpy as np
import pandas as pd

from . import __version__
from . import formats
from ._constants import DEFAULTS, default_config
from .exceptions import SpvtxError, ValidationError

__all__ = ['run', 'main', 'build_parser', 'load_config']

logger = logging.getLogger('spvtx')

FEATURE_SUFFIX = '.feat'
LABELS_NAME = 'labels.csv'
COHORT_NAME = 'cohort.json'

#################
# CONFIGURATION #
#################

def load_config(path=None):
    """
    The default configuration with the sections of a JSON file merged over it.
    """
    cfg = default_config()
    if path is None:
        return cfg
    with open(path) as f:
        try:
            user = json.load(f)
        except ValueError as err:
            raise ValidationError('{} is not valid JSON: {}'.format(path, err))
    unknown = sorted(set(user) - set(DEFAULTS))
    if unknown:
        raise ValidationError('unknown configuration sections {}; known: {}'
                              .format(unknown, sorted(DEFAULTS)))
    for section, values in user.items():
        cfg[section].update(values)
    return cfg


def _existing(path):
    if not os.path.exists(path):
        raise argparse.ArgumentTypeError('no such file or directory: {}'.format(path))
    return path


def _positive(value):
    value = int(value)
    if value < 1:
        raise argparse.ArgumentTypeError('expected a positive integer, got {}'.format(value))
    return value


@contextlib.contextmanager
def _stage(name, **counts):
    """
    Log `stage=<name> duration=<seconds>` plus any counts the block adds.
    """
    start = time.time()
    yield counts
    fields = ' '.join('{}={}'.format(k, v) for k, v in counts.items())
    logger.info('stage=%s duration=%.3f %s', name, time.time() - start, fields)


def _write_text(text, path):
    with open(path, 'w') as f:
        f.write(text)

############
# COMMANDS #
############

def _mesh_build(args, cfg):
    from .mesh import build_icosphere
    with _stage('mesh', level=args.level) as counts:
        mesh = build_icosphere(args.level)
        formats.write_mesh(mesh, args.out)
        counts.update(vertices=mesh.n_vertices, faces=mesh.n_faces)
    return 0


def _atlas_synth(args, cfg):
    from .atlas import synth_atlas
    options = cfg['atlas']
    rois = options['num_rois'] if args.rois is None else args.rois
    wall = options['excluded_fraction'] if args.wall_frac is None else args.wall_frac
    seed = options['rng_seed'] if args.seed is None else args.seed
    with _stage('atlas_synth', rois=rois) as counts:
        mesh = formats.read_mesh(args.mesh)
        atlas = synth_atlas(mesh, rois, excluded_fraction=wall, rng_seed=seed)
        formats.write_atlas(atlas, args.out)
        counts.update(excluded=int((~atlas.cortical_mask).sum()))
    return 0


def _atlas_clean(args, cfg):
    from .atlas import reassign_minor_fragments
    from .mesh import one_ring
    threshold = cfg['partition']['fragment_threshold'] if args.threshold is None \
        else args.threshold
    with _stage('atlas_clean', threshold=threshold) as counts:
        mesh = formats.read_mesh(args.mesh)
        atlas = formats.read_atlas(args.atlas)
        cleaned = reassign_minor_fragments(atlas, one_ring(mesh), threshold=threshold)
        formats.write_atlas(cleaned, args.out)
        counts.update(relabeled=int((cleaned.labels != atlas.labels).sum()),
                      warnings=len(cleaned.warnings))
    return 0


def _partition_options(args, cfg):
    options = copy.deepcopy(cfg['partition'])
    if args.k_total is not None:
        options['K_total'] = args.k_total
    options.update(refine=args.refine or options['refine'],
                   face_based=args.face_based or options['face_based'],
                   roi_preserving=options['roi_preserving'] and not args.no_roi_preserving)
    if args.refine_method is not None:
        options['refine_method'] = args.refine_method
    if args.fragment_threshold is not None:
        options['fragment_threshold'] = args.fragment_threshold or None
    return options


def _plan(args, cfg):
    from .partition import plan_hemisphere
    options = _partition_options(args, cfg)
    K_total = options.pop('K_total')
    with _stage('plan', K_total=K_total) as counts:
        mesh = formats.read_mesh(args.mesh)
        atlas = formats.read_atlas(args.atlas)
        found = plan_hemisphere(mesh, atlas, K_total, config=options)
        text = formats.dumps_json(found.to_dict())
        counts.update(L=found.L, H=found.H, relaxation_rank=found.relaxation_rank)
    if args.out is not None:
        _write_text(text, args.out)
    if args.json:
        sys.stdout.write(text + '\n')
    return 0


def _partition(args, cfg):
    from .partition import partition_hemisphere
    from .diagnostics import partition_summary
    options = _partition_options(args, cfg)
    K_total = options.pop('K_total')
    with _stage('partition_run', K_total=K_total) as counts:
        mesh = formats.read_mesh(args.mesh)
        atlas = formats.read_atlas(args.atlas)
        csvmap = partition_hemisphere(mesh, atlas, K_total, config=options)
        formats.write_csvmap(csvmap, args.out)
        counts.update(csvs=csvmap.n_csv, v_max=csvmap.v_max, mode=csvmap.mode,
                      rejected_plans=len(csvmap.trail))
    if args.summary is not None:
        partition_summary(csvmap, mesh).to_csv(args.summary)
    return 0


def _validate(args, cfg):
    from .diagnostics import validate
    with _stage('validate') as counts:
        mesh = formats.read_mesh(args.mesh)
        atlas = formats.read_atlas(args.atlas)
        csvmap = formats.read_csvmap(args.csvmap)
        report = validate(csvmap, mesh, atlas)
        counts.update(passed=report.passed, **{k: v for k, v in report.extras.items()
                                               if np.isscalar(v)})
    if args.out is not None:
        _write_text(formats.dumps_json(report.to_dict()), args.out)
    if not report.passed:
        logger.error('stage=validate failures=%s', ','.join(report.failures))
    return report.exit_code


def _feature_files(directory):
    files = sorted(glob.glob(os.path.join(directory, '*' + FEATURE_SUFFIX)))
    if not files:
        raise ValidationError('no {} files in {}'.format(FEATURE_SUFFIX, directory))
    return files


def _subject(path):
    return os.path.basename(path)[:-len(FEATURE_SUFFIX)]


def _cohort_channels(directory, n_channels):
    path = os.path.join(directory, COHORT_NAME)
    if os.path.exists(path):
        with open(path) as f:
            return list(json.load(f)['channels'])
    return ['ch{}'.format(i) for i in range(n_channels)]


def _read_cohort(directory, channels=None):
    """
    Stack every subject file of a directory, in subject order, and select
    channels by name.
    """
    from .verify import channels as channel_index
    files = _feature_files(directory)
    features = np.stack([formats.read_features(f) for f in files])
    names = _cohort_channels(directory, features.shape[1])
    if len(names) != features.shape[1]:
        raise ValidationError('{} channel names for {} channels'.format(len(names),
                                                                        features.shape[1]))
    keep = channel_index(channels, names)
    return [_subject(f) for f in files], features[:, keep], [names[i] for i in keep]


def _index_table(args):
    from .tokenizer import build_index_table
    left = formats.read_csvmap(args.csvmap_left)
    right = None if args.csvmap_right is None else formats.read_csvmap(args.csvmap_right)
    return build_index_table(left, right, v_max=args.v_max)


def _tokenize(args, cfg):
    from .tokenizer import gather
    with _stage('tokenize') as counts:
        table = _index_table(args)
        formats.write_index_table(table, args.out)
        counts.update(tokens=table.n, v_max=table.v_max)
        if args.features is not None:
            subjects, features, names = _read_cohort(args.features)
            batch = gather(features, table, channels=names)
            if args.tokens is not None:
                with open(args.tokens, 'wb') as f:
                    np.savez(f, x=batch.x, mask=batch.mask, subjects=np.array(subjects),
                             channels=np.array(names))
            counts.update(subjects=len(subjects))
    return 0


def _simulate(args, cfg):
    from .utils import planted_signal
    names = ['ch{}'.format(i) for i in range(args.n_channels)] if args.channel_names is None \
        else [c.strip() for c in args.channel_names.split(',')]
    if len(names) != args.n_channels:
        raise ValidationError('{} channel names for {} channels'.format(len(names),
                                                                        args.n_channels))
    with _stage('simulate', subjects=args.subjects) as counts:
        table = _index_table(args)
        features, labels, signal = planted_signal(table, args.subjects,
                                                  n_channels=args.n_channels,
                                                  n_signal=args.n_signal, effect=args.effect,
                                                  prevalence=args.prevalence,
                                                  rng_seed=args.seed)
        if not os.path.isdir(args.out):
            os.makedirs(args.out)
        width = max(4, len(str(args.subjects - 1)))
        subjects = ['subject_{:0{w}d}'.format(i, w=width) for i in range(args.subjects)]
        for subject, values in zip(subjects, features):
            formats.write_features(values, os.path.join(args.out, subject + FEATURE_SUFFIX))
        pd.DataFrame(dict(subject=subjects, label=labels)).to_csv(
            os.path.join(args.out, LABELS_NAME), index=False)
        _write_text(formats.dumps_json(dict(channels=names, signal_csvs=signal,
                                            effect=args.effect, rng_seed=args.seed)),
                    os.path.join(args.out, COHORT_NAME))
        counts.update(positives=int(labels.sum()), signal_csvs=len(signal))
    return 0


def _train(args, cfg):
    from .nn import train
    from .tokenizer import gather
    train_options = copy.deepcopy(cfg['train'])
    if args.folds is not None:
        train_options['folds'] = args.folds
    if args.seed is not None:
        train_options['rng_seed'] = args.seed
    if args.epochs is not None:
        train_options['epochs'] = args.epochs
    train_options['standardize'] = cfg['tokenizer']['standardize']
    with _stage('train') as counts:
        subjects, features, names = _read_cohort(args.data, args.channels)
        labels = pd.read_csv(os.path.join(args.data, LABELS_NAME), dtype={'subject': str})
        labels = labels.set_index('subject').reindex(subjects)['label']
        if labels.isnull().any():
            raise ValidationError('subjects without a label: {}'
                                  .format(labels.index[labels.isnull()].tolist()))
        table = formats.read_index_table(args.index)
        batch = gather(features, table, channels=names)
        result = train(batch, labels.values.astype(np.int64), model_config=cfg['model'],
                       config=train_options)
        counts.update(folds=len(result.folds), auroc=round(result.table.loc['mean', 'auroc'], 4),
                      bacc=round(result.table.loc['mean', 'bacc'], 4))
    table = result.table
    report = dict(folds=[{k: v for k, v in row.items()}
                         for _, row in table.drop(index=['mean', 'std']).iterrows()],
                  mean=table.loc['mean'].dropna().to_dict(),
                  std=table.loc['std'].dropna().to_dict(),
                  channels=names, model=result.models[0].config.to_dict(),
                  train=train_options)
    _write_text(formats.dumps_json(report), args.report)
    if args.folds_csv is not None:
        table.to_csv(args.folds_csv)
    if args.history is not None:
        result.trace.to_csv(args.history)
    if args.checkpoint_dir is not None:
        if not os.path.isdir(args.checkpoint_dir):
            os.makedirs(args.checkpoint_dir)
        for fold, model in zip(result.folds, result.models):
            model.save(os.path.join(args.checkpoint_dir, 'fold_{}.sqlite'.format(fold)),
                       overwrite=True)
    return 0


def _gradcheck(args, cfg):
    from .nn import grad_check, tiny_config
    with _stage('gradcheck', depth=args.depth) as counts:
        config = tiny_config(depth=args.depth, rng_seed=args.seed)
        error = grad_check(config, rng_seed=args.seed, n_params=args.n_params, step=args.step)
        counts.update(max_rel_error='{:.3e}'.format(error))
    passed = error < args.tol
    if args.out is not None:
        _write_text(formats.dumps_json(dict(max_rel_error=error, tol=args.tol, passed=passed,
                                            config=config.to_dict())), args.out)
    if not passed:
        logger.error('stage=gradcheck max_rel_error=%.3e tol=%.1e', error, args.tol)
    return 0 if passed else 1


def _report(args, cfg):
    with open(args.metrics) as f:
        report = json.load(f)
    with _stage('report') as counts:
        folds = pd.DataFrame(report['folds'])
        columns = [c for c in ('auroc', 'bacc', 'bacc_tuned') if c in folds.columns]
        summary = pd.DataFrame(dict(mean=folds[columns].mean(),
                                    std=folds[columns].std(ddof=0)))
        summary['formatted'] = ['{:.3f} +/- {:.3f}'.format(m, s)
                                for m, s in zip(summary['mean'], summary['std'])]
        summary.to_csv(args.out)
        counts.update(folds=folds.shape[0])
        if args.plots is not None:
            _report_plots(args, report)
    return 0


def _report_plots(args, report):
    import matplotlib
    matplotlib.use('Agg')
    from .abstracts import Trace
    from .metrics import fold_table
    from .plotting import plot_csv_sizes, plot_folds, plot_history
    if not os.path.isdir(args.plots):
        os.makedirs(args.plots)
    fig, _ = plot_folds(fold_table(report['folds']))
    fig.savefig(os.path.join(args.plots, 'folds.png'))
    if args.history is not None:
        fig, _ = plot_history(Trace.from_csv(args.history), ['loss', 'val_auroc'])
        fig.savefig(os.path.join(args.plots, 'history.png'))
    if args.csvmap:
        maps = [formats.read_csvmap(p) for p in args.csvmap]
        fig, _ = plot_csv_sizes(maps, [os.path.basename(p) for p in args.csvmap])
        fig.savefig(os.path.join(args.plots, 'csv_sizes.png'))

##########
# PARSER #
##########

def _partition_arguments(p):
    p.add_argument('--mesh', type=_existing, required=True)
    p.add_argument('--atlas', type=_existing, required=True)
    p.add_argument('--k-total', type=_positive, default=None)
    p.add_argument('--refine', action='store_true')
    p.add_argument('--refine-method', choices=['bfs', 'metis'], default=None)
    p.add_argument('--face-based', action='store_true',
                   help='partition faces; boundary vertices may be duplicated')
    p.add_argument('--no-roi-preserving', action='store_true',
                   help='plan the whole cortex as one region')
    p.add_argument('--fragment-threshold', type=float, default=None,
                   help='0 disables fragment cleanup')


def build_parser():
    parser = argparse.ArgumentParser(prog='spvtx',
                                     description='ROI-preserving supervertex partitioning '
                                                 'and a supervertex transformer.')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('--config', type=_existing, default=None,
                        help='JSON file merged over the default configuration')
    parser.add_argument('--print-config', action='store_true',
                        help='print the merged configuration as JSON and exit')
    parser.add_argument('--threads', type=_positive, default=None,
                        help='cap on worker processes')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        default='INFO')
    sub = parser.add_subparsers(dest='command')

    p_mesh = sub.add_parser('mesh', help='icosphere meshes')
    mesh_sub = p_mesh.add_subparsers(dest='action')
    p = mesh_sub.add_parser('build', help='write an icosphere')
    p.add_argument('--level', type=int, required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(func=_mesh_build)

    p_atlas = sub.add_parser('atlas', help='parcellations')
    atlas_sub = p_atlas.add_subparsers(dest='action')
    p = atlas_sub.add_parser('synth', help='write a synthetic parcellation')
    p.add_argument('--mesh', type=_existing, required=True)
    p.add_argument('--rois', type=_positive, default=None)
    p.add_argument('--wall-frac', type=float, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=_atlas_synth)
    p = atlas_sub.add_parser('clean', help='merge minor region fragments')
    p.add_argument('--mesh', type=_existing, required=True)
    p.add_argument('--atlas', type=_existing, required=True)
    p.add_argument('--threshold', type=float, default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=_atlas_clean)

    p = sub.add_parser('plan', help='size bounds and per-region counts')
    _partition_arguments(p)
    p.add_argument('--json', action='store_true', help='print the plan to standard output')
    p.add_argument('--out', default=None)
    p.set_defaults(func=_plan)

    p = sub.add_parser('partition', help='partition one hemisphere into supervertices')
    _partition_arguments(p)
    p.add_argument('--summary', default=None, help='CSV of per-region statistics')
    p.add_argument('--out', required=True)
    p.set_defaults(func=_partition)

    p = sub.add_parser('validate', help='check every supervertex invariant')
    p.add_argument('--csvmap', type=_existing, required=True)
    p.add_argument('--mesh', type=_existing, required=True)
    p.add_argument('--atlas', type=_existing, required=True)
    p.add_argument('--out', default=None, help='JSON report')
    p.set_defaults(func=_validate)

    for name, func, text in (('tokenize', _tokenize, 'build the index table and tokens'),
                             ('simulate', _simulate, 'write a planted-signal cohort')):
        p = sub.add_parser(name, help=text)
        p.add_argument('--csvmap-left', type=_existing, required=True)
        p.add_argument('--csvmap-right', type=_existing, default=None)
        p.add_argument('--v-max', type=_positive, default=None)
        p.add_argument('--out', required=True)
        p.set_defaults(func=func)
        if name == 'tokenize':
            p.add_argument('--features', type=_existing, default=None,
                           help='directory of subject feature files')
            p.add_argument('--tokens', default=None, help='.npz of the gathered tokens')
        else:
            p.add_argument('--subjects', type=_positive, default=400)
            p.add_argument('--n-channels', type=_positive, default=2)
            p.add_argument('--channel-names', default=None)
            p.add_argument('--n-signal', type=_positive, default=3)
            p.add_argument('--effect', type=float, default=1.5)
            p.add_argument('--prevalence', type=float, default=.5)
            p.add_argument('--seed', type=int, default=0)

    p = sub.add_parser('train', help='cross-validated training')
    p.add_argument('--data', type=_existing, required=True)
    p.add_argument('--index', type=_existing, required=True)
    p.add_argument('--folds', type=_positive, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--epochs', type=_positive, default=None)
    p.add_argument('--channels', default=None, help='comma-separated channel names')
    p.add_argument('--report', required=True, help='JSON metrics report')
    p.add_argument('--folds-csv', default=None)
    p.add_argument('--history', default=None, help='CSV of per-epoch records')
    p.add_argument('--checkpoint-dir', default=None)
    p.set_defaults(func=_train)

    p = sub.add_parser('gradcheck', help='compare gradients to finite differences')
    p.add_argument('--depth', type=int, default=2)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--n-params', type=_positive, default=200)
    p.add_argument('--step', type=float, default=1e-4)
    p.add_argument('--tol', type=float, default=1e-4)
    p.add_argument('--out', default=None)
    p.set_defaults(func=_gradcheck)

    p = sub.add_parser('report', help='summarize a metrics report')
    p.add_argument('--metrics', type=_existing, required=True)
    p.add_argument('--out', required=True, help='CSV of mean and std per metric')
    p.add_argument('--history', type=_existing, default=None)
    p.add_argument('--csvmap', type=_existing, nargs='*', default=None)
    p.add_argument('--plots', default=None, help='directory for figures')
    p.set_defaults(func=_report)
    return parser

###############
# ENTRY POINT #
###############

_handler = None


def _configure_logging(level):
    global _handler
    if _handler is not None:
        logger.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter('level=%(levelname)s %(message)s'))
    logger.addHandler(_handler)
    logger.setLevel(getattr(logging, level))


def run(argv=None):
    """
    Parse `argv` and dispatch.

    Returns
    -------
    0 on success, 1 when a check fails or an input is invalid, 2 on a usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return int(stop.code or 0)
    _configure_logging(args.log_level)
    try:
        cfg = load_config(args.config)
        if args.threads is not None:
            cfg['partition']['n_jobs'] = args.threads
        if args.print_config:
            sys.stdout.write(formats.dumps_json(cfg) + '\n')
            return 0
        if getattr(args, 'func', None) is None:
            parser.print_usage(sys.stderr)
            return 2
        return args.func(args, cfg)
    except SpvtxError as err:
        logger.error('stage=%s error=%s message="%s"', args.command,
                     type(err).__name__, err)
        return 1


def main():
    sys.exit(run())
