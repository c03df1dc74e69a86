"""
First-order statistics of a sample
"""
import math
from dataclasses import dataclass, astuple
from typing import Sequence

import numpy as np

from core.exceptions import RDepthError

STAT_NAMES = ('mean', 'median', 'std', 'skewness', 'kurtosis')


@dataclass(frozen=True)
class FirstOrderStats:
    """
    Mean, median, population std, skewness and Pearson (non-excess) kurtosis.

    Skewness and kurtosis are 0 on constant input.
    """
    mean: float
    median: float
    std: float
    skewness: float
    kurtosis: float

    @classmethod
    def missing(cls) -> 'FirstOrderStats':
        return cls(*([math.nan] * len(STAT_NAMES)))

    def as_tuple(self):
        return astuple(self)


def first_order(values: Sequence[float]) -> FirstOrderStats:
    """
    Central moments use 1/n weights.

    Raises:
        RDepthError: empty input
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise RDepthError("first_order needs at least one value")

    mean = float(x.mean())
    median = float(np.median(x))
    if np.ptp(x) == 0:
        return FirstOrderStats(mean, median, 0.0, 0.0, 0.0)

    centered = x - mean
    m2 = float(np.mean(centered ** 2))
    m3 = float(np.mean(centered ** 3))
    m4 = float(np.mean(centered ** 4))
    return FirstOrderStats(
        mean=mean,
        median=median,
        std=math.sqrt(m2),
        skewness=m3 / m2 ** 1.5,
        kurtosis=m4 / m2 ** 2,
    )
