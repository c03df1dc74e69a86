"""
Risk-group cutoff search over percentiles of the risk distribution
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from core.exceptions import SurvivalDataError

from .estimators import logrank
from .tables import SurvivalRecord

logger = logging.getLogger(__name__)

PERCENTILES = tuple(range(10, 91))
MIN_GROUP_FRACTION = 0.1


@dataclass
class ThresholdResult:
    threshold: float
    statistic: float
    p_value: float
    n_candidates: int


def split_groups(risks, threshold: float) -> np.ndarray:
    """True for the high-risk group (risk strictly above the cutoff)"""
    return np.asarray(risks, dtype=np.float64) > threshold


def partition(records: Sequence[SurvivalRecord], high) -> Tuple[List[SurvivalRecord], List[SurvivalRecord]]:
    """(low-risk, high-risk) records"""
    low_group = [r for r, h in zip(records, high) if not h]
    high_group = [r for r, h in zip(records, high) if h]
    return low_group, high_group


def find_threshold(risks, records: Sequence[SurvivalRecord], percentiles: Sequence[float] = PERCENTILES,
                   min_fraction: float = MIN_GROUP_FRACTION) -> ThresholdResult:
    """
    Grid search of risk cutoffs minimizing the log-rank p-value.

    Cutoffs are ranked by the chi-square statistic, which orders them as the
    p-value does while staying distinct after the p-value underflows.

    Candidates are the distinct percentiles of the risks; a candidate is kept
    when both groups hold at least min_fraction of the subjects. Equal
    statistics are resolved toward the cutoff closest to the median. The
    returned p-value is uncorrected for the search.

    Raises:
        SurvivalDataError: all risks identical, or no candidate keeps both groups large enough
    """
    risks = np.asarray(risks, dtype=np.float64)
    if len(risks) != len(records):
        raise SurvivalDataError(f"{len(risks)} risks for {len(records)} records")
    if len(np.unique(risks)) < 2:
        raise SurvivalDataError("risk scores are all identical; no cutoff exists")

    median = float(np.median(risks))
    minimum = math.ceil(min_fraction * len(risks))
    best = None
    n_candidates = 0
    for cutoff in np.unique(np.percentile(risks, percentiles)):
        high = split_groups(risks, cutoff)
        n_high = int(high.sum())
        if min(n_high, len(risks) - n_high) < minimum:
            continue
        n_candidates += 1
        low_group, high_group = partition(records, high)
        result = logrank(low_group, high_group)
        key = (-result.statistic, abs(cutoff - median), cutoff)
        if best is None or key < best[0]:
            best = (key, ThresholdResult(float(cutoff), result.statistic, result.p_value, 0))
    if best is None:
        raise SurvivalDataError("no cutoff leaves both risk groups with enough subjects")
    chosen = best[1]
    chosen.n_candidates = n_candidates
    logger.info(f"threshold={chosen.threshold:.6g} p={chosen.p_value:.3g} over {n_candidates} cutoffs")
    return chosen
