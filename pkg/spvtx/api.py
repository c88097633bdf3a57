from .mesh import Mesh, Adjacency, build_icosphere, one_ring
from .atlas import AtlasLabeling, synth_atlas, reassign_minor_fragments
from .planner import PartitionPlan, plan, plan_next
from .partition import CsvMap, partition_hemisphere, plan_hemisphere
from .diagnostics import validate, partition_summary
from .tokenizer import IndexTable, PaddedBatch, Standardizer, build_index_table, gather, scatter
from .nn import ModelConfig, CsvViT, grad_check, train
from .metrics import auroc, balanced_accuracy, evaluate, fold_table
from .plotting import plot_csv_sizes, plot_history, plot_folds
from .abstracts import Trace
from .utils import synthetic_hemisphere, planted_signal
from . import formats

_all = [_v for _v in list(globals().values()) if isinstance(_v, type)]
