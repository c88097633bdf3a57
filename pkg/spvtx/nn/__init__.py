from .model import (ModelConfig, CsvViT, init_params, embed, forward, backward,
                    weighted_bce, pos_weight_of)
from .gradcheck import grad_check, tiny_config, tiny_batch
from .train import train, train_fold, fold_assignment
from . import layers
