import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest as ut

import numpy as np
import pandas as pd

from spvtx import __version__
from spvtx.cli import run, load_config
from spvtx.atlas import roi_sizes
from spvtx.formats import read_atlas, read_csvmap, read_index_table, read_mesh, write_atlas
from spvtx.mesh import one_ring
from spvtx.exceptions import ValidationError
from spvtx.planner import PartitionPlan
from spvtx.tests.utils import plant_islands


class Test_Cli(ut.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def path(self, *names):
        return os.path.join(self.tmp, *names)

    def run_quiet(self, *argv):
        out = io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(io.StringIO()):
            code = run(['--log-level', 'ERROR'] + list(argv))
        return code, out.getvalue()

    def test_pipeline(self):
        config = self.path('config.json')
        with open(config, 'w') as f:
            json.dump(dict(model=dict(depth=0, dim=8, heads=2, dropout=0.0, init_std=.1),
                           train=dict(folds=2, epochs=3)), f)
        steps = [
            ['mesh', 'build', '--level', '2', '--out', self.path('ico2.mesh')],
            ['atlas', 'synth', '--mesh', self.path('ico2.mesh'), '--rois', '5',
             '--wall-frac', '.1', '--seed', '0', '--out', self.path('lh.atlas')],
            ['atlas', 'clean', '--mesh', self.path('ico2.mesh'), '--atlas',
             self.path('lh.atlas'), '--out', self.path('lh_clean.atlas')],
            ['plan', '--mesh', self.path('ico2.mesh'), '--atlas', self.path('lh.atlas'),
             '--k-total', '12', '--out', self.path('plan.json')],
            ['partition', '--mesh', self.path('ico2.mesh'), '--atlas', self.path('lh.atlas'),
             '--k-total', '12', '--summary', self.path('summary.csv'),
             '--out', self.path('lh.csvmap')],
            ['validate', '--csvmap', self.path('lh.csvmap'), '--mesh', self.path('ico2.mesh'),
             '--atlas', self.path('lh.atlas'), '--out', self.path('validate.json')],
            ['simulate', '--csvmap-left', self.path('lh.csvmap'), '--csvmap-right',
             self.path('lh.csvmap'), '--subjects', '40', '--channel-names', 'thickness,curv',
             '--out', self.path('cohort')],
            ['tokenize', '--csvmap-left', self.path('lh.csvmap'), '--csvmap-right',
             self.path('lh.csvmap'), '--features', self.path('cohort'), '--tokens',
             self.path('tokens.npz'), '--out', self.path('index.bin')],
            ['--config', config, 'train', '--data', self.path('cohort'), '--index',
             self.path('index.bin'), '--report', self.path('metrics.json'), '--history',
             self.path('history.csv'), '--folds-csv', self.path('folds.csv'),
             '--checkpoint-dir', self.path('models')],
            ['report', '--metrics', self.path('metrics.json'), '--out', self.path('report.csv'),
             '--history', self.path('history.csv'), '--csvmap', self.path('lh.csvmap'),
             '--plots', self.path('plots')],
        ]
        for argv in steps:
            code, _ = self.run_quiet(*argv)
            self.assertEqual(code, 0, msg=' '.join(argv))

        self.assertEqual(read_mesh(self.path('ico2.mesh')).n_vertices, 162)
        csvmap = read_csvmap(self.path('lh.csvmap'))
        self.assertEqual(csvmap.n_csv, 12)
        with open(self.path('plan.json')) as f:
            planned = PartitionPlan.from_dict(json.load(f))
        self.assertEqual(sum(planned.counts.values()), 12)
        if not csvmap.trail:
            self.assertEqual(planned, csvmap.plan)
        with open(self.path('validate.json')) as f:
            self.assertTrue(json.load(f)['passed'])
        table = read_index_table(self.path('index.bin'))
        self.assertEqual(table.n, 24)
        self.assertEqual(len([f for f in os.listdir(self.path('cohort'))
                              if f.endswith('.feat')]), 40)
        with np.load(self.path('tokens.npz')) as tokens:
            self.assertEqual(tokens['x'].shape, (40, 2, 24, table.v_max))
            self.assertEqual(tokens['channels'].tolist(), ['thickness', 'curv'])
        with open(self.path('metrics.json')) as f:
            metrics = json.load(f)
        self.assertEqual(len(metrics['folds']), 2)
        self.assertEqual(metrics['model']['depth'], 0)
        self.assertEqual(metrics['channels'], ['thickness', 'curv'])
        self.assertEqual(sorted(os.listdir(self.path('models'))),
                         ['fold_0.sqlite', 'fold_1.sqlite'])
        report = pd.read_csv(self.path('report.csv'), index_col=0)
        self.assertIn('auroc', report.index)
        self.assertTrue(os.path.exists(self.path('plots', 'folds.png')))
        self.assertTrue(os.path.exists(self.path('plots', 'history.png')))

    def test_validate_failure(self):
        self.run_quiet('mesh', 'build', '--level', '2', '--out', self.path('ico2.mesh'))
        for seed in ('0', '5'):
            self.run_quiet('atlas', 'synth', '--mesh', self.path('ico2.mesh'), '--rois', '5',
                           '--seed', seed, '--out', self.path('atlas{}'.format(seed)))
        self.run_quiet('partition', '--mesh', self.path('ico2.mesh'), '--atlas',
                       self.path('atlas0'), '--k-total', '12', '--out', self.path('lh.csvmap'))
        code, _ = self.run_quiet('validate', '--csvmap', self.path('lh.csvmap'), '--mesh',
                                 self.path('ico2.mesh'), '--atlas', self.path('atlas5'))
        self.assertEqual(code, 1)

    def test_island_atlas(self):
        self.run_quiet('mesh', 'build', '--level', '3', '--out', self.path('ico3.mesh'))
        self.run_quiet('atlas', 'synth', '--mesh', self.path('ico3.mesh'), '--rois', '5',
                       '--seed', '0', '--out', self.path('clean.atlas'))
        mesh = read_mesh(self.path('ico3.mesh'))
        atlas = read_atlas(self.path('clean.atlas'))
        planted, original = plant_islands(atlas, one_ring(mesh), 1)
        write_atlas(planted, self.path('island.atlas'))
        common = ['--mesh', self.path('ico3.mesh'), '--atlas', self.path('island.atlas'),
                  '--k-total', '40']
        code, out = self.run_quiet('plan', '--json', *common)
        self.assertEqual(code, 0)
        planned = PartitionPlan.from_dict(json.loads(out))
        self.assertEqual(planned.sizes, roi_sizes(atlas))
        code, _ = self.run_quiet('partition', '--out', self.path('lh.csvmap'), *common)
        self.assertEqual(code, 0)
        self.assertEqual(read_csvmap(self.path('lh.csvmap')).relabeled, original)
        code, _ = self.run_quiet('validate', '--csvmap', self.path('lh.csvmap'), '--mesh',
                                 self.path('ico3.mesh'), '--atlas', self.path('island.atlas'))
        self.assertEqual(code, 0)

    def test_usage_errors(self):
        self.assertEqual(self.run_quiet()[0], 2)
        self.assertEqual(self.run_quiet('partition')[0], 2)
        self.assertEqual(self.run_quiet('plan', '--atlas', self.path('missing'))[0], 2)
        self.assertEqual(self.run_quiet('--threads', '0', 'gradcheck')[0], 2)

    def test_input_errors(self):
        self.assertEqual(self.run_quiet('mesh', 'build', '--level', '9', '--out',
                                        self.path('big.mesh'))[0], 1)
        with open(self.path('junk.mesh'), 'wb') as f:
            f.write(b'not a mesh')
        self.assertEqual(self.run_quiet('atlas', 'synth', '--mesh', self.path('junk.mesh'),
                                        '--out', self.path('a'))[0], 1)

    def test_version_and_config(self):
        code, out = self.run_quiet('--version')
        self.assertEqual(code, 0)
        self.assertIn(__version__, out)
        code, out = self.run_quiet('--threads', '3', '--print-config')
        self.assertEqual(code, 0)
        cfg = json.loads(out)
        self.assertEqual(cfg['partition']['n_jobs'], 3)
        self.assertEqual(set(cfg), {'atlas', 'partition', 'tokenizer', 'model', 'train'})

    def test_gradcheck(self):
        code, _ = self.run_quiet('gradcheck', '--depth', '1', '--out', self.path('gc.json'))
        self.assertEqual(code, 0)
        with open(self.path('gc.json')) as f:
            self.assertTrue(json.load(f)['passed'])

    def test_load_config(self):
        path = self.path('bad.json')
        with open(path, 'w') as f:
            json.dump(dict(optimizer=dict(lr=1)), f)
        with self.assertRaises(ValidationError):
            load_config(path)
        with open(path, 'w') as f:
            f.write('{not json')
        with self.assertRaises(ValidationError):
            load_config(path)
        self.assertEqual(load_config()['train']['folds'], 4)
