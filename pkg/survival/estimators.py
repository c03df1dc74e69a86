"""
Evaluation statistics: Kaplan-Meier, log-rank, Harrell's C, group hazard ratio
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from core.exceptions import SurvivalDataError

from .cox import newton_cox
from .tables import SurvivalRecord, record_arrays

logger = logging.getLogger(__name__)

Z_95 = 1.96
PAIR_CHUNK = 1024


@dataclass
class KaplanMeierCurve:
    """Right-continuous step function; survival[i] holds on [times[i], times[i+1])"""
    times: np.ndarray
    survival: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray

    def at(self, t: float) -> float:
        index = np.searchsorted(self.times, t, side='right') - 1
        return 1.0 if index < 0 else float(self.survival[index])


def kaplan_meier(records: Sequence[SurvivalRecord]) -> KaplanMeierCurve:
    """Product-limit estimate evaluated at every distinct observed time"""
    if not records:
        raise SurvivalDataError("kaplan_meier needs at least one record")
    times, events = record_arrays(records)
    distinct, inverse = np.unique(times, return_inverse=True)
    removed = np.bincount(inverse, minlength=len(distinct))
    deaths = np.bincount(inverse, weights=events.astype(np.float64), minlength=len(distinct)).astype(np.int64)
    at_risk = len(times) - np.concatenate([[0], np.cumsum(removed)[:-1]])
    survival = np.cumprod(1.0 - deaths / at_risk)
    return KaplanMeierCurve(distinct, survival, at_risk, deaths)


@dataclass
class LogRankResult:
    statistic: float
    p_value: float
    observed_a: float
    expected_a: float


def logrank(records_a: Sequence[SurvivalRecord], records_b: Sequence[SurvivalRecord]) -> LogRankResult:
    """
    Two-group log-rank test with hypergeometric variance, chi-square on 1 df.

    A zero variance (no events, or no overlap of risk sets) gives statistic 0, p = 1.
    """
    if not records_a or not records_b:
        raise SurvivalDataError("log-rank needs two nonempty groups")
    times_a, events_a = record_arrays(records_a)
    times_b, events_b = record_arrays(records_b)
    times = np.concatenate([times_a, times_b])
    events = np.concatenate([events_a, events_b])
    in_a = np.r_[np.ones(len(times_a), dtype=bool), np.zeros(len(times_b), dtype=bool)]

    event_times = np.unique(times[events])
    # subjects with time >= t are at risk at t
    sorted_all = np.sort(times)
    sorted_a = np.sort(times_a)
    n = len(times) - np.searchsorted(sorted_all, event_times, side='left')
    n_a = len(times_a) - np.searchsorted(sorted_a, event_times, side='left')
    index = np.searchsorted(event_times, times[events])
    d = np.bincount(index, minlength=len(event_times)).astype(np.float64)
    d_a = np.bincount(index, weights=in_a[events].astype(np.float64), minlength=len(event_times))

    expected = d * n_a / n
    with np.errstate(invalid='ignore', divide='ignore'):
        variance_terms = np.where(n > 1, d * (n_a / n) * (1 - n_a / n) * (n - d) / (n - 1), 0.0)
    observed_a = float(d_a.sum())
    expected_a = float(expected.sum())
    variance = float(variance_terms.sum())
    if variance <= 0:
        return LogRankResult(0.0, 1.0, observed_a, expected_a)
    statistic = (observed_a - expected_a) ** 2 / variance
    return LogRankResult(statistic, float(stats.chi2.sf(statistic, 1)), observed_a, expected_a)


def concordance_index(risks, records: Sequence[SurvivalRecord]) -> float:
    """
    Harrell's C: over pairs with t_i < t_j and an event at t_i, the fraction
    where risk_i > risk_j; risk ties count one half.

    Raises:
        SurvivalDataError: no permissible pairs
    """
    risks = np.asarray(risks, dtype=np.float64)
    times, events = record_arrays(records)
    if len(risks) != len(times):
        raise SurvivalDataError(f"{len(risks)} risks for {len(times)} records")
    anchors = np.flatnonzero(events)
    concordant = 0.0
    permissible = 0
    for start in range(0, len(anchors), PAIR_CHUNK):
        i = anchors[start:start + PAIR_CHUNK]
        later = times[i][:, None] < times[None, :]
        diff = risks[i][:, None] - risks[None, :]
        permissible += int(later.sum())
        concordant += float((later & (diff > 0)).sum()) + 0.5 * float((later & (diff == 0)).sum())
    if not permissible:
        raise SurvivalDataError("no permissible pairs for the concordance index")
    return concordant / permissible


@dataclass
class HazardRatio:
    hazard_ratio: float
    ci_low: float
    ci_high: float
    beta: float
    se: float
    separated: bool = False


def hazard_ratio(group_labels, records: Sequence[SurvivalRecord]) -> HazardRatio:
    """
    Hazard ratio of group 1 against group 0 from a univariate Cox fit on the
    indicator; 95% CI is exp(β ± 1.96·SE) from the observed information.

    When the likelihood has no finite maximum (for instance a group without
    events) the estimate is 0 or inf with CI (0, inf) and separated=True.
    """
    labels = np.asarray(group_labels).astype(bool)
    times, events = record_arrays(records)
    if len(labels) != len(times):
        raise SurvivalDataError(f"{len(labels)} labels for {len(times)} records")
    if labels.all() or not labels.any():
        raise SurvivalDataError("hazard ratio needs subjects in both groups")
    if not events.any():
        raise SurvivalDataError("hazard ratio needs at least one event")

    # the likelihood grows without bound in β's direction when every event in
    # one group happens while the other group has nobody at risk
    event_times = times[events]
    at_risk_1 = (times[labels][None, :] >= event_times[:, None]).sum(axis=1)
    at_risk_0 = (times[~labels][None, :] >= event_times[:, None]).sum(axis=1)
    unbounded_up = bool(np.all(at_risk_1[~labels[events]] == 0))
    unbounded_down = bool(np.all(at_risk_0[labels[events]] == 0))
    if unbounded_up or unbounded_down:
        logger.warning("group indicator separates the events; hazard ratio is unbounded")
        hr = math.inf if unbounded_up else 0.0
        return HazardRatio(hr, 0.0, math.inf, math.copysign(math.inf, hr - 1), math.inf, separated=True)

    fit = newton_cox(labels.astype(np.float64)[:, None], times, events)
    beta = float(fit.beta[0])
    se = math.sqrt(float(fit.covariance[0, 0]))
    return HazardRatio(math.exp(beta), math.exp(beta - Z_95 * se), math.exp(beta + Z_95 * se), beta, se)
