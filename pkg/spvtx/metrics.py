"""
Classification metrics: AUROC and balanced accuracy.
"""
from __future__ import division

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from .verify import scores_and_labels

__all__ = ['EvalResult', 'auroc', 'balanced_accuracy', 'best_threshold', 'evaluate',
           'fold_table']


class EvalResult(object):
    """
    Metrics of one set of predictions.

    Arguments
    ---------
    auroc       :   float
    bacc        :   float
                    balanced accuracy at `threshold`
    n_pos       :   int
    n_neg       :   int
    threshold   :   float
                    logit above which a subject is called positive
    """
    def __init__(self, auroc, bacc, n_pos, n_neg, threshold=0.0):
        self.auroc = float(auroc)
        self.bacc = float(bacc)
        self.n_pos = int(n_pos)
        self.n_neg = int(n_neg)
        self.threshold = float(threshold)

    def to_dict(self):
        return dict(auroc=self.auroc, bacc=self.bacc, n_pos=self.n_pos, n_neg=self.n_neg,
                    threshold=self.threshold)

    def __repr__(self):
        return 'EvalResult(auroc={:.4f}, bacc={:.4f}, n_pos={}, n_neg={})'.format(
            self.auroc, self.bacc, self.n_pos, self.n_neg)


def auroc(scores, labels):
    """
    Probability that a random positive outscores a random negative, ties
    counting one half. Computed from the rank sum of the positives.
    """
    scores, labels = scores_and_labels(scores, labels)
    n_pos = labels.sum()
    n_neg = labels.shape[0] - n_pos
    ranks = rankdata(scores)
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def balanced_accuracy(scores, labels, threshold=0.0):
    """
    Mean of sensitivity and specificity when scores above `threshold` are
    called positive.
    """
    scores, labels = scores_and_labels(scores, labels)
    predicted = scores > threshold
    sensitivity = predicted[labels == 1].mean()
    specificity = (~predicted[labels == 0]).mean()
    return float((sensitivity + specificity) / 2)


def best_threshold(scores, labels):
    """
    The threshold maximizing balanced accuracy. Candidates sit midway between
    consecutive distinct scores, plus one below the smallest; ties go to the
    smallest candidate.

    Returns
    -------
    (threshold, bacc)
    """
    scores, labels = scores_and_labels(scores, labels)
    distinct = np.unique(scores)
    candidates = np.r_[distinct[0] - 1.0, (distinct[1:] + distinct[:-1]) / 2]
    baccs = [balanced_accuracy(scores, labels, t) for t in candidates]
    best = int(np.argmax(baccs))
    return float(candidates[best]), float(baccs[best])


def evaluate(scores, labels, threshold=0.0):
    scores, labels = scores_and_labels(scores, labels)
    n_pos = int(labels.sum())
    return EvalResult(auroc(scores, labels), balanced_accuracy(scores, labels, threshold),
                      n_pos, labels.shape[0] - n_pos, threshold=threshold)


def fold_table(results):
    """
    One row per fold plus `mean` and `std` rows.

    Arguments
    ---------
    results :   list of dict
                per-fold records, e.g. EvalResult.to_dict() plus extra columns

    Returns
    -------
    pandas.DataFrame indexed by 'fold_<k>', then 'mean' and 'std'. k is the
    record's 'fold' entry when it has one and its position otherwise.
    """
    results = list(results)
    df = pd.DataFrame(results)
    df.index = ['fold_{}'.format(int(r['fold']) if r.get('fold') is not None else i)
                for i, r in enumerate(results)]
    numeric = df.select_dtypes(include=[np.number]).drop(columns='fold', errors='ignore')
    summary = pd.DataFrame([numeric.mean(), numeric.std(ddof=0)], index=['mean', 'std'])
    return pd.concat([df, summary])
