"""
Local co-occurrence matrices of quantized orientation maps

A quantized map holds a bin index in [0, B) on ROI voxels and -1 elsewhere.
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .schemas import CollageSettings


@dataclass(frozen=True)
class CoocMatrix:
    """Symmetric B×B pair counts"""
    counts: np.ndarray

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def normalized(self) -> np.ndarray:
        """Probabilities; all zeros when nothing was counted"""
        total = self.total
        if total == 0:
            return np.zeros_like(self.counts, dtype=np.float64)
        return self.counts / total


def pair_displacements(cooc_window: int, offsets: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    """
    (d, d + o) displacement pairs with both ends inside the window.

    Returns two arrays of shape (M, 3).
    """
    h = cooc_window // 2
    r = range(-h, h + 1)
    first, second = [], []
    for o in offsets:
        for dz in r:
            for dy in r:
                for dx in r:
                    d = (dx, dy, dz)
                    e = tuple(a + b for a, b in zip(d, o))
                    if all(abs(v) <= h for v in e):
                        first.append(d)
                        second.append(e)
    return np.array(first, dtype=np.int64), np.array(second, dtype=np.int64)


class PairCounter:
    """
    Counts symmetric co-occurrences around many centers of one quantized map.

    The map is padded with -1 so clamped windows need no bounds checks.
    """

    def __init__(self, qmap: np.ndarray, cfg: CollageSettings):
        self.bins = cfg.bins
        self.h = cfg.cooc_window // 2
        padded = np.pad(np.asarray(qmap, dtype=np.int64), self.h, constant_values=-1)
        self.shape = padded.shape
        self.flat = padded.ravel()
        first, second = pair_displacements(cfg.cooc_window, cfg.offsets)
        origin = np.ravel_multi_index((self.h, self.h, self.h), self.shape)
        self.first = np.ravel_multi_index((first + self.h).T, self.shape) - origin
        self.second = np.ravel_multi_index((second + self.h).T, self.shape) - origin

    def counts(self, centers: np.ndarray) -> np.ndarray:
        """Count matrices of shape (k, B, B) for k centers given as (k, 3) voxel indices"""
        centers = np.atleast_2d(centers)
        linear = np.ravel_multi_index((centers + self.h).T, self.shape)
        a = self.flat[linear[:, None] + self.first[None, :]]
        b = self.flat[linear[:, None] + self.second[None, :]]
        valid = (a >= 0) & (b >= 0)
        rows = np.broadcast_to(np.arange(len(linear))[:, None], a.shape)
        bins2 = self.bins * self.bins
        codes = rows[valid] * bins2 + a[valid] * self.bins + b[valid]
        counts = np.bincount(codes, minlength=len(linear) * bins2).reshape(len(linear), self.bins, self.bins)
        return (counts + counts.transpose(0, 2, 1)).astype(np.float64)


def cooccurrence(qmap: np.ndarray, c: Tuple[int, int, int], cfg: CollageSettings) -> CoocMatrix:
    """Pairs (p, p+o) of in-ROI voxels inside the co-occurrence window around c"""
    return CoocMatrix(PairCounter(qmap, cfg).counts(np.array([c]))[0])
