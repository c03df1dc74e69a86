"""
The 13 Haralick statistics of a co-occurrence matrix

Grey levels are indexed 1..B. Logarithms are natural and ε-guarded.
"""
import math
from dataclasses import dataclass, astuple

import numpy as np

from .cooccurrence import CoocMatrix

EPS = 1e-12

HARALICK_NAMES = (
    'energy',
    'contrast',
    'correlation',
    'variance',
    'inverse_difference_moment',
    'sum_average',
    'sum_variance',
    'sum_entropy',
    'entropy',
    'difference_variance',
    'difference_entropy',
    'info_correlation_1',
    'info_correlation_2',
)


@dataclass(frozen=True)
class HaralickVector:
    energy: float
    contrast: float
    correlation: float
    variance: float
    inverse_difference_moment: float
    sum_average: float
    sum_variance: float
    sum_entropy: float
    entropy: float
    difference_variance: float
    difference_entropy: float
    info_correlation_1: float
    info_correlation_2: float

    @classmethod
    def missing(cls) -> 'HaralickVector':
        return cls(*([math.nan] * len(HARALICK_NAMES)))

    def as_tuple(self):
        return astuple(self)


def _entropy(p: np.ndarray, axes) -> np.ndarray:
    return np.maximum(-np.sum(p * np.log(p + EPS), axis=axes), 0.0)


class HaralickCalculator:
    """Vectorized statistics for stacks of B×B matrices; reuse one per bin count"""

    def __init__(self, bins: int):
        self.bins = bins
        levels = np.arange(1, bins + 1, dtype=np.float64)
        i, j = np.meshgrid(levels, levels, indexing='ij')
        self.levels = levels
        self.diff2 = (i - j) ** 2
        self.ij = i * j
        self.k_sum = np.arange(2, 2 * bins + 1, dtype=np.float64)
        self.k_diff = np.arange(0, bins, dtype=np.float64)

    def sum_histogram(self, p: np.ndarray) -> np.ndarray:
        """p_{x+y}(k) for k = 2..2B, from the anti-diagonals"""
        flipped = p[:, :, ::-1]
        return np.stack([
            np.trace(flipped, offset=self.bins - 1 - s, axis1=1, axis2=2)
            for s in range(2 * self.bins - 1)
        ], axis=1)

    def difference_histogram(self, p: np.ndarray) -> np.ndarray:
        """p_{x-y}(k) for k = 0..B-1, from the diagonals"""
        columns = [np.trace(p, axis1=1, axis2=2)]
        for d in range(1, self.bins):
            columns.append(np.trace(p, offset=d, axis1=1, axis2=2) + np.trace(p, offset=-d, axis1=1, axis2=2))
        return np.stack(columns, axis=1)

    def compute(self, counts: np.ndarray) -> np.ndarray:
        """
        Statistics for counts of shape (k, B, B); returns (k, 13).

        Rows with no counted pair are NaN.
        """
        counts = np.asarray(counts, dtype=np.float64)
        totals = counts.sum(axis=(1, 2))
        empty = totals == 0
        p = counts / np.where(empty, 1.0, totals)[:, None, None]

        px = p.sum(axis=2)
        py = p.sum(axis=1)
        mux = px @ self.levels
        muy = py @ self.levels
        varx = np.sum(px * (self.levels[None, :] - mux[:, None]) ** 2, axis=1)
        vary = np.sum(py * (self.levels[None, :] - muy[:, None]) ** 2, axis=1)
        sigma = np.sqrt(varx * vary)

        energy = np.sum(p ** 2, axis=(1, 2))
        contrast = np.sum(p * self.diff2, axis=(1, 2))
        covariance = np.sum(p * self.ij, axis=(1, 2)) - mux * muy
        # flat matrices have no spread; correlation is 1 by convention
        correlation = np.where(sigma > 0, covariance / np.where(sigma > 0, sigma, 1.0), 1.0)
        idm = np.sum(p / (1.0 + self.diff2), axis=(1, 2))

        p_sum = self.sum_histogram(p)
        p_diff = self.difference_histogram(p)
        sum_average = p_sum @ self.k_sum
        sum_variance = np.sum(p_sum * (self.k_sum[None, :] - sum_average[:, None]) ** 2, axis=1)
        sum_entropy = _entropy(p_sum, 1)
        entropy = _entropy(p, (1, 2))
        diff_average = p_diff @ self.k_diff
        difference_variance = np.sum(p_diff * (self.k_diff[None, :] - diff_average[:, None]) ** 2, axis=1)
        difference_entropy = _entropy(p_diff, 1)

        hx = _entropy(px, 1)
        hy = _entropy(py, 1)
        outer = px[:, :, None] * py[:, None, :]
        hxy1 = -np.sum(p * np.log(outer + EPS), axis=(1, 2))
        hxy2 = -np.sum(outer * np.log(outer + EPS), axis=(1, 2))
        h_max = np.maximum(hx, hy)
        imc1 = np.where(h_max > 0, (entropy - hxy1) / np.where(h_max > 0, h_max, 1.0), 0.0)
        imc2 = np.sqrt(1.0 - np.exp(-2.0 * np.maximum(hxy2 - entropy, 0.0)))

        result = np.stack([
            energy, contrast, correlation, varx, idm,
            sum_average, sum_variance, sum_entropy, entropy,
            difference_variance, difference_entropy, imc1, imc2,
        ], axis=1)
        result[empty] = np.nan
        return result


def haralick(M: CoocMatrix) -> HaralickVector:
    """The 13 statistics of one matrix; all NaN when the matrix is empty"""
    counts = np.asarray(M.counts, dtype=np.float64)
    if counts.sum() == 0:
        return HaralickVector.missing()
    row = HaralickCalculator(counts.shape[0]).compute(counts[None])[0]
    return HaralickVector(*(float(v) for v in row))
