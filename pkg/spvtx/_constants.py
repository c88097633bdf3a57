import copy

RTOL = 1e-5
ATOL = 1e-5
TEST_SEED = 310516


# icosphere levels above this allocate more than a laptop should be asked for
MAX_LEVEL = 8

NONE = -1
NONE_U32 = 0xFFFFFFFF

MESH_MAGIC = b'ICOMESH1'
ATLAS_MAGIC = b'ATLAS1'
CSVMAP_MAGIC = b'CSVMAP1'
INDEX_MAGIC = b'CSVIDX1'
CHECKPOINT_VERSION = 1

WALL_NAME = 'medialwall'

DEFAULTS = {
    'atlas': {'num_rois': 35,
              'excluded_fraction': 0.1,
              'rng_seed': 0},
    'partition': {'K_total': 642,
                  'fragment_threshold': 0.10,
                  'roi_preserving': True,
                  'face_based': False,
                  'delta0': None,
                  'refine': False,
                  'refine_method': 'bfs',
                  'max_retries': 3,
                  'max_passes': 50,
                  'balance_mode': 'best',
                  'n_jobs': 1,
                  'debug': False},
    'tokenizer': {'standardize': True},
    'model': {'dim': 96,
              'depth': 4,
              'heads': 4,
              'mlp_ratio': 4,
              'dropout': 0.1,
              'pool': 'mean',
              'init_std': 0.02,
              'rng_seed': 0},
    'train': {'folds': 4,
              'epochs': 60,
              'batch_size': 32,
              'lr': 0.05,
              'momentum': 0.9,
              'weight_decay': 0.0,
              'lr_floor': 0.0,
              'patience': 15,
              'holdout': 0.1,
              'rng_seed': 0},
}


def default_config():
    """
    A fresh, deep copy of the default configuration.
    """
    return copy.deepcopy(DEFAULTS)
