"""
Distance transform and annular band partition of the brain around the lesion
"""
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
from scipy import ndimage

from core.exceptions import GeometryError
from volumes.containers import Mask, RoiSet, Volume

logger = logging.getLogger(__name__)


def distance_transform(mask: Mask, spacing=None) -> Volume:
    """
    Exact Euclidean distance in mm from each voxel to the nearest foreground voxel.

    Foreground voxels get 0. Spacing defaults to the mask's own.
    """
    if not mask.data.any():
        raise GeometryError("distance_transform needs a non-empty mask")
    spacing = mask.spacing if spacing is None else tuple(float(s) for s in spacing)
    return Volume(ndimage.distance_transform_edt(~mask.data, sampling=spacing), spacing)


@dataclass(frozen=True)
class BandPartition:
    """
    Per-voxel band labels: 0 outside the bands, j in 1..m for band j.

    Band j holds brain voxels outside tumor and peri whose margin distance d
    satisfies (j-1)*w < d <= j*w.
    """
    labels: np.ndarray
    spacing: tuple
    band_width_mm: float = 5.0
    m: int = 12

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.uint8, copy=True)
        labels.flags.writeable = False
        object.__setattr__(self, 'labels', labels)

    @property
    def dims(self):
        return tuple(self.labels.shape)

    def band(self, j: int) -> np.ndarray:
        return self.labels == j

    def counts(self) -> Dict[int, int]:
        sizes = np.bincount(self.labels.ravel(), minlength=self.m + 1)
        return {j: int(sizes[j]) for j in range(1, self.m + 1)}


def build_bands(roi: RoiSet, band_width_mm: float = 5.0, m: int = 12) -> BandPartition:
    """
    Label m equidistant annular bands around tumor ∪ peri inside the brain.

    Bands beyond the volume's physical extent stay empty.
    """
    if not roi.tumor.data.any():
        raise GeometryError("build_bands needs a non-empty tumor mask")
    if band_width_mm <= 0 or m < 1 or m > 255:
        raise GeometryError(f"invalid band parameters w={band_width_mm}, m={m}")

    lesion = roi.lesion
    distance = distance_transform(lesion).data
    candidates = roi.brain.data & ~lesion.data & (distance <= m * band_width_mm)

    labels = np.zeros(roi.dims, dtype=np.uint8)
    labels[candidates] = np.ceil(distance[candidates] / band_width_mm).astype(np.uint8)

    partition = BandPartition(labels, roi.spacing, band_width_mm, m)
    empty = [j for j, n in partition.counts().items() if n == 0]
    if empty:
        logger.info(f"Bands with no voxels: {empty}")
    return partition
