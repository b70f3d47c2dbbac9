__author__ = 'wormhole-tool developers'

from collections import namedtuple
import logging

import numpy as np

from wormhole_tool.exceptions import ConfigurationError

logger = logging.getLogger("wormhole_tool.numerics.series")


class ShanksResult(namedtuple('ShanksResult', ['value', 'degraded', 'levels'])):
    def __float__(self):
        return float(self.value)


def shanks_accelerate(sequence):
    """Iterated Shanks transform of a slowly converging sequence.

    Returns the last element of the deepest level computed. If the very first
    level already has a vanishing denominator the untransformed last element is
    returned with ``degraded`` set.
    """
    current = np.asarray(sequence, dtype=float)
    if current.size < 3:
        raise ConfigurationError("Shanks acceleration needs at least 3 terms, got {}.".format(current.size))
    scale = max(np.max(np.abs(current)), np.finfo(float).tiny)
    levels = 0
    while current.size >= 3:
        forward = current[2:] - current[1:-1]
        backward = current[1:-1] - current[:-2]
        denominator = forward - backward
        if np.any(np.abs(denominator) < 1e-30 * scale):
            break
        # Same as (A+ A- - A^2) / (A+ + A- - 2A), without the cancellation.
        current = current[2:] - forward ** 2 / denominator
        levels += 1
        logger.debug("Shanks level %d: %s", levels, current)
    if levels == 0:
        return ShanksResult(float(current[-1]), True, 0)
    return ShanksResult(float(current[-1]), False, levels)
