from __future__ import division
import copy
import numpy as np
import pandas as pd

__all__ = ['Hashmap', 'Trace']

#######################
# MAPS AND CONTAINERS #
#######################

class Hashmap(dict):
    """
    A dictionary with dot access on attributes
    """
    def __init__(self, **kw):
        super(Hashmap, self).__init__()
        for k in kw:
            self[k] = kw[k]

    def __getattr__(self, attr):
        try:
            return self[attr]
        except KeyError:
            raise AttributeError("'{}' object has no attribute '{}'"
                                 .format(self.__class__.__name__, attr))

    def __setattr__(self, key, value):
        self.__setitem__(key, value)

    def __delattr__(self, item):
        self.__delitem__(item)

    def __getstate__(self):
        return dict(self)

    def __setstate__(self, state):
        self.update(state)

    def __deepcopy__(self, memo):
        return Hashmap(**{k: copy.deepcopy(v, memo) for k, v in self.items()})


class Trace(object):
    """
    Per-step records of one or more runs, e.g. one chain per cross-validation
    fold with the loss and validation score of every epoch.

    Arguments
    ---------
    chains  :   a chain or comma-separated sequence of chains
                a chain is a dict-like collection mapping a variable name to
                the list of its values, one per step.
    kwargs  :   a dictionary splatted into keyword arguments
                taken as a single chain.

    Examples
    ---------
    >>> Trace(loss=[.7, .5, .4], val_auroc=[.5, .6, .8]) #Trace with one chain
    >>> Trace({'loss':[.7, .5]}, {'loss':[.6, .4]}) #Trace with two chains
    """
    def __init__(self, *chains, **kwargs):
        self.chains = _maybe_hashmap(*chains)
        if kwargs != dict():
            self.chains.extend(_maybe_hashmap(kwargs))
        self._validate_schema()

    @property
    def varnames(self):
        """
        Names of variables contained in the trace.
        """
        if not self.chains:
            return []
        return list(self.chains[0].keys())

    @property
    def n_chains(self):
        return len(self.chains)

    @property
    def n_iters(self):
        """
        Number of steps stored in every chain.
        """
        if not self.varnames:
            return [0] * self.n_chains
        return [len(chain[self.varnames[0]]) for chain in self.chains]

    def _validate_schema(self, chains=None):
        if chains is None:
            chains = self.chains
        tracked_in_each = [set(chain.keys()) for chain in chains]
        bad_chains = [i for i, names in enumerate(tracked_in_each)
                      if names != tracked_in_each[0]]
        if bad_chains:
            raise KeyError('The variables tracked in each chain are not the same!'
                           '\nChains {} differ from chain 0.'.format(bad_chains))

    def add_chain(self, chains, validate=True):
        """
        Add chains to a trace object

        Parameters
        ----------
        chains  :   Hashmap, dict, Trace, or list of these
                    chains to merge into the trace
        validate:   bool
                    whether or not to reject chains that do not track the same
                    variables as the trace.
        """
        if not isinstance(chains, (list, tuple)):
            chains = (chains,)
        new_chains = list(self.chains)
        for chain in chains:
            if isinstance(chain, Trace):
                new_chains.extend(chain.chains)
            else:
                new_chains.extend(_maybe_hashmap(chain))
        if validate:
            self._validate_schema(chains=new_chains)
        self.chains = new_chains

    def record(self, chain, **values):
        """
        Append one step of values to a chain.
        """
        target = self.chains[chain]
        for name, value in values.items():
            target.setdefault(name, []).append(value)

    def __getitem__(self, key):
        """
        trace['loss']           the variable in every chain (a list when there
                                are several chains)
        trace[0]                the first chain, as a Hashmap
        trace[0, 'loss']        the variable in one chain
        """
        if isinstance(key, str):
            result = [np.asarray(chain[key]) for chain in self.chains]
            return result[0] if self.n_chains == 1 else result
        if isinstance(key, (int, np.integer)):
            return self.chains[key]
        if isinstance(key, tuple) and len(key) == 2:
            chain, name = key
            return np.asarray(self.chains[chain][name])
        raise IndexError('index not understood')

    def __eq__(self, other):
        if not isinstance(other, type(self)) or self.n_chains != other.n_chains:
            return False
        for ch1, ch2 in zip(self.chains, other.chains):
            if set(ch1) != set(ch2):
                return False
            if not all(np.array_equal(ch1[k], ch2[k]) for k in ch1):
                return False
        return True

    ###################
    # IO and Exchange #
    ###################

    def to_df(self):
        """
        Convert the trace to a long Pandas Dataframe with a `chain` and a
        `step` column ahead of one column per variable.
        """
        dfs = []
        for i, chain in enumerate(self.chains):
            df = pd.DataFrame({k: list(v) for k, v in chain.items()})
            df.insert(0, 'step', np.arange(df.shape[0]))
            df.insert(0, 'chain', i)
            dfs.append(df)
        if not dfs:
            return pd.DataFrame(columns=['chain', 'step'])
        return pd.concat(dfs, ignore_index=True)

    def to_csv(self, filename, **pandas_kwargs):
        """
        Write trace out to file, going through Trace.to_df()

        Arguments
        ---------
        filename    :   string
                        name of file to write the trace to.
        pandas_kwargs:  keyword arguments
                        arguments to pass to the pandas to_csv function.
        """
        if 'index' not in pandas_kwargs:
            pandas_kwargs['index'] = False
        self.to_df().to_csv(filename, **pandas_kwargs)

    @classmethod
    def from_df(cls, df):
        """
        Convert a dataframe written by Trace.to_df back into a trace.
        """
        varnames = [c for c in df.columns if c not in ('chain', 'step')]
        chains = []
        for _, group in df.groupby('chain', sort=True):
            group = group.sort_values('step')
            chains.append({name: group[name].tolist() for name in varnames})
        return cls(*chains)

    @classmethod
    def from_csv(cls, filename, **pandas_kwargs):
        """
        Read a CSV into a trace object, by way of `Trace.from_df()`
        """
        return cls.from_df(pd.read_csv(filename, **pandas_kwargs))


####################
# HELPER FUNCTIONS #
####################

def _maybe_hashmap(*collections):
    """
    Attempt to coerce a collection into a Hashmap. Otherwise, leave it alone.
    """
    out = []
    for collection in collections:
        if isinstance(collection, Hashmap):
            out.append(collection)
        else:
            out.append(Hashmap(**collection))
    return out
