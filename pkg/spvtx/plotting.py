import seaborn as sns
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

__all__ = ['plot_csv_sizes', 'plot_history', 'plot_folds']

def plot_csv_sizes(csvmaps, labels=None, ax=None, hist_kwargs={}):
    """
    Histogram of supervertex sizes.

    Arguments
    -----------
    csvmaps :   CsvMap or list of CsvMap
                maps to draw, e.g. one per hemisphere
    labels  :   list of str
                legend entry of every map
    ax      :   matplotlib axis
                axis to draw on; a new figure is made when None
    hist_kwargs : dictionary
                  dictionary of aesthetic arguments for seaborn.histplot

    Returns
    -------
    figure, axis tuple
    """
    if not isinstance(csvmaps, (list, tuple)):
        csvmaps = [csvmaps]
    if labels is None:
        labels = ['map {}'.format(i) for i in range(len(csvmaps))]
    df = pd.concat([pd.DataFrame(dict(size=m.sizes, map=label))
                    for m, label in zip(csvmaps, labels)], ignore_index=True)
    if ax is None:
        fig, ax = plt.subplots(1, 1, figsize=(6, 3))
    else:
        fig = ax.figure
    if hist_kwargs == dict():
        hist_kwargs = {'discrete':True, 'element':'step'}
    sns.histplot(data=df, x='size', hue='map', ax=ax, **hist_kwargs)
    for m in csvmaps:
        if m.plan is not None:
            ax.axvline(m.plan.L, color='k', linewidth=.5, linestyle='--')
            ax.axvline(m.plan.H, color='k', linewidth=.5, linestyle='--')
    ax.set_xlabel('supervertex size (vertices)')
    return fig, ax

def plot_history(trace, varnames=None, figure_kwargs={}, line_kwargs={}):
    """
    Plot per-epoch training records, one line per chain (fold).

    Arguments
    -----------
    trace   :   Trace
                training history
    varnames :  str or list
                name or list of names to plot.
    figure_kwargs: dictionary
                    a dictionary of arguments for the plot creator
    line_kwargs : dictionary
                  dictionary of aesthetic arguments for seaborn.lineplot

    Returns
    -------
    figure, axis tuple, where axis has one entry per variable
    """
    if varnames is None:
        varnames = trace.varnames
    elif isinstance(varnames, str):
        varnames = [varnames]
    if figure_kwargs == dict():
        figure_kwargs = {'figsize':(8, 2*len(varnames)), 'sharex':True}
    if line_kwargs == dict():
        line_kwargs = {'linewidth':.8}
    df = trace.to_df()
    fig, ax = plt.subplots(len(varnames), 1, **figure_kwargs)
    ax = np.atleast_1d(ax)
    for i, name in enumerate(varnames):
        sns.lineplot(data=df, x='step', y=name, hue='chain', ax=ax[i],
                     palette='deep', **line_kwargs)
        ax[i].set_ylabel(name)
    ax[-1].set_xlabel('epoch')
    return fig, ax

def plot_folds(table, metrics=('auroc', 'bacc'), ax=None):
    """
    Bar plot of per-fold metrics from metrics.fold_table, with the mean.
    """
    folds = table.drop(index=['mean', 'std'], errors='ignore')
    df = folds[list(metrics)].reset_index().melt(id_vars='index', var_name='metric')
    if ax is None:
        fig, ax = plt.subplots(1, 1, figsize=(6, 3))
    else:
        fig = ax.figure
    sns.barplot(data=df, x='metric', y='value', hue='index', ax=ax)
    ax.set_ylim(0, 1)
    ax.set_xlabel('')
    return fig, ax
