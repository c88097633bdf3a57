"""
Cross-validated training of the supervertex transformer.
"""
from __future__ import division

import copy
import logging
import time
from warnings import warn as Warn

import numpy as np
from sklearn.model_selection import StratifiedKFold, train_test_split

from .._constants import DEFAULTS
from ..abstracts import Hashmap, Trace
from ..exceptions import ValidationError, UndefinedMetricError
from ..metrics import auroc, balanced_accuracy, best_threshold, evaluate, fold_table
from ..steps import SGD
from ..tokenizer import Standardizer
from ..utils import progress
from ..verify import binary_labels, fraction
from .model import CsvViT, ModelConfig, pos_weight_of, weighted_bce

__all__ = ['train', 'train_fold', 'fold_assignment']

logger = logging.getLogger(__name__)


def _setup_configs(folds=4, epochs=60, batch_size=32, lr=.05, momentum=.9,
                   weight_decay=0.0, lr_floor=0.0, patience=15, holdout=.1, rng_seed=0,
                   standardize=True, verbose=False, **uncaught):
    """
    Collect training options into one namespace, filling in defaults.
    """
    if uncaught:
        Warn('Ignoring unknown training options: {}'.format(sorted(uncaught)))
    if int(folds) < 2:
        raise ValidationError('at least two folds are needed, got {}'.format(folds))
    for name, value in (('epochs', epochs), ('batch_size', batch_size),
                        ('patience', patience)):
        if int(value) < 1:
            raise ValidationError('{} must be positive, got {}'.format(name, value))
    if lr <= 0:
        raise ValidationError('lr must be positive, got {}'.format(lr))
    fraction(holdout, 'holdout')
    return Hashmap(folds=int(folds), epochs=int(epochs), batch_size=int(batch_size),
                   lr=float(lr), momentum=float(momentum), weight_decay=float(weight_decay),
                   lr_floor=float(lr_floor), patience=int(patience), holdout=float(holdout),
                   rng_seed=int(rng_seed), standardize=bool(standardize),
                   verbose=bool(verbose))


def fold_assignment(labels, folds=4, rng_seed=0):
    """
    Fixed stratified split of subjects into `folds` test folds.

    Returns
    -------
    list of (train_index, test_index) pairs
    """
    labels = binary_labels(labels)
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=rng_seed)
    try:
        return list(splitter.split(np.zeros(labels.shape[0]), labels))
    except ValueError as err:
        raise ValidationError(str(err))


def _holdout(index, labels, share, rng_seed):
    """
    Stratified validation holdout, falling back to a plain random one when
    a class is too rare to stratify.
    """
    try:
        return train_test_split(index, test_size=share, stratify=labels[index],
                                random_state=rng_seed)
    except ValueError as err:
        Warn('Validation holdout cannot be stratified ({}); drawing it at random.'
             .format(err))
        return train_test_split(index, test_size=share, random_state=rng_seed)


def _score(logits, labels):
    """
    Validation AUROC, or None when the holdout has a single class.
    """
    if np.unique(labels).shape[0] < 2:
        return None
    return auroc(logits, labels)


def train_fold(batch, labels, fit, val, model_config, cfg, fold=0):
    """
    Train one model with early stopping on validation AUROC.

    Arguments
    ---------
    batch       :   PaddedBatch
                    standardized tokens of every subject
    labels      :   np.ndarray
                    binary labels of every subject
    fit         :   np.ndarray
                    subjects the gradient steps are taken on
    val         :   np.ndarray
                    subjects scored after every epoch
    model_config:   ModelConfig
    cfg         :   Hashmap
                    training options from _setup_configs
    fold        :   int
                    fold number, offsets the model and shuffling seeds

    Returns
    -------
    (model with the best parameters, history dict, best epoch, validation
    logits of the best parameters)
    """
    config = copy.deepcopy(model_config)
    config.rng_seed = int(model_config.rng_seed) + fold
    model = CsvViT(config)
    pos_weight = pos_weight_of(labels[fit])
    n_batches = int(np.ceil(fit.shape[0] / cfg.batch_size))
    step = SGD(lr=cfg.lr, momentum=cfg.momentum, weight_decay=cfg.weight_decay,
               total=cfg.epochs * n_batches, lr_floor=cfg.lr_floor)
    rng = np.random.default_rng([cfg.rng_seed, fold])
    val_batch = batch[val]

    history = dict(loss=[], val_auroc=[], lr=[])
    best, best_epoch, wait = -np.inf, 0, 0
    best_params = copy.deepcopy(model.params)
    best_logits = model.logits(val_batch)
    for epoch in progress(range(cfg.epochs), enabled=cfg.verbose,
                          desc='fold {}'.format(fold)):
        order = rng.permutation(fit)
        losses = []
        lr = step.current_lr
        for start in range(0, order.shape[0], cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            loss, grads = model.loss_and_grads(batch[rows], labels[rows],
                                               pos_weight=pos_weight, rng=rng)
            step(model.params, grads)
            losses.append(loss * rows.shape[0])
        logits = model.logits(val_batch)
        score = _score(logits, labels[val])
        criterion = score if score is not None else -_val_loss(logits, labels[val],
                                                               pos_weight)
        history['loss'].append(float(np.sum(losses) / fit.shape[0]))
        history['val_auroc'].append(np.nan if score is None else score)
        history['lr'].append(lr)
        if criterion > best:
            best, best_epoch, wait = criterion, epoch, 0
            best_params = copy.deepcopy(model.params)
            best_logits = logits
        else:
            wait += 1
            if wait >= cfg.patience:
                logger.debug('stage=early_stop fold=%d epoch=%d best_epoch=%d',
                             fold, epoch, best_epoch)
                break
    model.params = best_params
    return model, history, best_epoch, best_logits


def _val_loss(logits, labels, pos_weight):
    return float(weighted_bce(logits, labels, pos_weight).mean())


def train(batch, labels, model_config=None, config=None, **configs):
    """
    Cross-validated training and evaluation.

    Every fold holds out a stratified share of its training subjects for
    validation, standardizes channels on the remaining ones, trains until the
    validation AUROC stops improving, and scores the test fold at logit 0 and
    at the threshold maximizing validation balanced accuracy.

    Arguments
    ---------
    batch       :   PaddedBatch
                    tokens of every subject
    labels      :   array-like of {0,1}
    model_config:   ModelConfig or dict or None
                    architecture; a dict (or None) is merged over
                    DEFAULTS['model'] and sized for `batch`
    config      :   dict or None
                    training options overriding DEFAULTS['train']
    configs     :   keyword arguments
                    training options overriding `config`

    Returns
    -------
    Hashmap with
        table   :   pandas.DataFrame, one row per evaluated fold plus mean and std
        trace   :   Trace, one chain per evaluated fold
        folds   :   list of fold numbers that were evaluated
        models  :   list of trained CsvViT, one per evaluated fold
    """
    options = copy.deepcopy(DEFAULTS['train'])
    options.update(config or dict())
    options.update(configs)
    cfg = _setup_configs(**options)
    labels = binary_labels(labels)
    if labels.shape[0] != len(batch):
        raise ValidationError('{} labels for {} subjects'.format(labels.shape[0], len(batch)))
    if not isinstance(model_config, ModelConfig):
        model_config = ModelConfig.for_batch(batch, **(model_config or dict()))

    records, chains, folds, models = [], [], [], []
    for fold, (train_idx, test_idx) in enumerate(fold_assignment(labels, cfg.folds,
                                                                 cfg.rng_seed)):
        if np.unique(labels[train_idx]).shape[0] < 2 or \
           np.unique(labels[test_idx]).shape[0] < 2:
            Warn('Skipping fold {}: a split holds a single class.'.format(fold))
            continue
        start = time.time()
        fit, val = _holdout(train_idx, labels, cfg.holdout, cfg.rng_seed + fold)
        fit, val = np.sort(fit), np.sort(val)
        if np.unique(labels[fit]).shape[0] < 2:
            Warn('Skipping fold {}: the fitting split holds a single class.'.format(fold))
            continue
        scaler = Standardizer(cfg.standardize).fit(batch[fit])
        scaled = scaler.transform(batch)
        model, history, best_epoch, val_logits = train_fold(scaled, labels, fit, val,
                                                            model_config, cfg, fold=fold)
        test_logits = model.logits(scaled[test_idx])
        result = evaluate(test_logits, labels[test_idx]).to_dict()
        if _score(val_logits, labels[val]) is not None:
            tuned, _ = best_threshold(val_logits, labels[val])
        else:
            tuned = 0.0
        result.update(fold=fold, bacc_tuned=balanced_accuracy(test_logits, labels[test_idx],
                                                              tuned),
                      threshold_tuned=tuned, best_epoch=best_epoch,
                      n_fit=int(fit.shape[0]), n_val=int(val.shape[0]))
        logger.info('stage=train_fold fold=%d duration=%.3f epochs=%d best_epoch=%d '
                    'auroc=%.4f bacc=%.4f', fold, time.time() - start,
                    len(history['loss']), best_epoch, result['auroc'], result['bacc'])
        records.append(result)
        chains.append(history)
        folds.append(fold)
        models.append(model)
    if not records:
        raise UndefinedMetricError('no fold holds both classes in its training and test sets')
    return Hashmap(table=fold_table(records), trace=Trace(*chains), folds=folds,
                   models=models)
