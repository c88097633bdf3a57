"""
Exceptions raised throughout spvtx.
"""

__all__ = ['SpvtxError', 'ValidationError', 'ResourceLimitError',
           'InfeasiblePlanError', 'PlanRejected', 'UnpartitionableError',
           'UndefinedMetricError', 'NumericError']


class SpvtxError(Exception):
    """
    Base class of every error raised on purpose by the package.
    """


class ValidationError(SpvtxError, ValueError):
    """
    Inputs are malformed: bad faces, labels, shapes, or out-of-range values.
    """


class ResourceLimitError(SpvtxError):
    """
    The request would allocate beyond the documented guard.
    """


class InfeasiblePlanError(SpvtxError):
    """
    No allocation of supervertex counts satisfies the requested constraints.
    """


class PlanRejected(SpvtxError):
    """
    A stage downstream of planning could not honor the current plan.

    Arguments
    ---------
    message :   str
                reason for the rejection
    stage   :   str
                name of the stage that rejected the plan
    roi     :   int or None
                the region being processed when the plan was rejected
    """
    def __init__(self, message, stage=None, roi=None):
        super(PlanRejected, self).__init__(message)
        self.stage = stage
        self.roi = roi


class UnpartitionableError(InfeasiblePlanError):
    """
    Every candidate bound was tried and none led to a valid partition.

    Arguments
    ---------
    message :   str
                summary of the failure
    trail   :   list of dict
                one record per rejected candidate, in the order they were tried
    ranges  :   dict
                per-region feasible count ranges at the last candidate
    """
    def __init__(self, message, trail=None, ranges=None):
        super(UnpartitionableError, self).__init__(message)
        self.trail = list(trail) if trail is not None else []
        self.ranges = ranges if ranges is not None else dict()


class UndefinedMetricError(SpvtxError, ValueError):
    """
    A metric needs both classes present and received only one.
    """


class NumericError(SpvtxError, FloatingPointError):
    """
    A non-finite value appeared in a forward pass.
    """
    def __init__(self, message, block=None):
        super(NumericError, self).__init__(message)
        self.block = block
