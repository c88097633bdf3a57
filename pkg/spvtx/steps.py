from __future__ import division
import numpy as np

__all__ = ['cosine_schedule', 'momentum', 'AbstractStep', 'SGD']

################################
# STANDALONE UPDATE FUNCTIONS  #
################################

def cosine_schedule(base, step, total, floor=0.0):
    """
    Learning rate of a cosine decay from `base` to `floor` over `total` steps.

    Parameters
    ----------
    base    :   float
                rate at step 0
    step    :   int
                current step; steps past `total` stay at `floor`
    total   :   int
                length of the decay
    floor   :   float
                final rate
    """
    if total <= 0:
        return base
    progress = min(step, total) / total
    return floor + .5 * (base - floor) * (1 + np.cos(np.pi * progress))

def momentum(value, grad, velocity, lr, mu, weight_decay=0.0):
    """
    One heavy-ball step: v <- mu*v + g + wd*x, x <- x - lr*v

    Returns
    --------
    new value and new velocity
    """
    velocity = mu * velocity + grad + weight_decay * value
    return value - lr * velocity, velocity

###############################
# UPDATE CLASS DECLARATIONS   #
###############################

class AbstractStep(object):
    """
    Standin for an abstract optimizer step over a dict of named parameters
    """
    def __init__(self):
        super(AbstractStep, self).__init__()
        self.cycles = 0

    def __call__(self, params, grads):
        raise NotImplementedError

class SGD(AbstractStep):
    """
    Stochastic gradient descent with momentum and a cosine-decayed learning rate.

    Arguments
    ---------
    lr          :   float
                    initial learning rate
    momentum    :   float in [0,1)
                    velocity decay
    weight_decay:   float
                    L2 penalty added to every gradient
    total       :   int
                    number of steps over which the rate decays; 0 keeps it fixed
    lr_floor    :   float
                    rate reached at the end of the decay
    debug       :   bool
                    flag denoting whether to store the rate of each step in _cache.
    """
    def __init__(self, lr=.05, momentum=.9, weight_decay=0.0, total=0, lr_floor=0.0,
                 debug=False):
        super(SGD, self).__init__()
        self.lr = lr
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.total = total
        self.lr_floor = lr_floor
        self.velocity = dict()
        self.debug = debug
        if debug:
            self._cache = []

    @property
    def current_lr(self):
        return cosine_schedule(self.lr, self.cycles, self.total, self.lr_floor)

    def __call__(self, params, grads):
        """
        Update `params` in place from `grads` and return them.
        """
        lr = self.current_lr
        for name, grad in grads.items():
            velocity = self.velocity.get(name, np.zeros_like(grad))
            params[name], self.velocity[name] = momentum(params[name], grad, velocity, lr,
                                                         self.momentum, self.weight_decay)
        self.cycles += 1
        if self.debug:
            self._cache.append(dict(lr=lr, cycle=self.cycles))
        return params
