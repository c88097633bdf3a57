import numpy as np
import scipy.stats as stats

__all__ = ['Constant', 'Truncnorm', 'zeros', 'ones']


def Constant(value):
    """
    A constructor for an initializer that fills every entry with `value`.
    """
    def constant(shape, rng=None):
        return np.full(shape, float(value))
    return constant

zeros = Constant(0)
ones = Constant(1)

def Truncnorm(mean, dev, bounds=None):
    """
    A constructor for an initializer drawing from a truncated normal
    distribution. By default, this is cut at two deviations from the mean.

    Parameters
    ----------
    mean    :   float
                mean of truncated normal
    dev     :   float
                standard deviation of the truncated normal
    bounds  :   tuple of floats
                left and right bounds of the truncated normal distribution

    Returns
    -------
    callable(shape, rng) drawing an array of the given shape with the
    numpy Generator `rng`
    """
    if bounds is None:
        bounds = (mean - 2 * dev, mean + 2 * dev)
    clipa, clipb = bounds
    a, b = (clipa - mean) / float(dev), (clipb - mean) / float(dev)
    dist = stats.truncnorm(loc=mean, scale=dev, a=a, b=b)

    def truncnorm(shape, rng=None):
        return dist.rvs(size=shape, random_state=rng)
    return truncnorm
