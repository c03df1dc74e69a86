"""
Per-band first-order statistics of deformation magnitude
"""
import logging
from typing import Dict, List

import numpy as np

from bands.partition import BandPartition
from bands.statistics import FirstOrderStats, STAT_NAMES, first_order
from core.exceptions import GeometryError
from .fields import DeformationField, magnitude

logger = logging.getLogger(__name__)


def deformation_feature_names(m: int = 12) -> List[str]:
    """Band-major, statistic-minor: deform_b1_mean ... deform_b{m}_kurtosis"""
    return [f"deform_b{j}_{stat}" for j in range(1, m + 1) for stat in STAT_NAMES]


def deformation_features(
    field: DeformationField,
    partition: BandPartition,
    min_voxels: int = 10
) -> Dict[str, float]:
    """
    m·5 named features; bands with fewer than min_voxels voxels are NaN.

    Raises:
        GeometryError: field and partition grids differ
    """
    if not field.same_grid(partition):
        raise GeometryError(
            f"Deformation field grid {field.dims} @ {field.spacing} does not match "
            f"band partition {partition.dims} @ {partition.spacing}"
        )

    magnitudes = magnitude(field).data
    features: Dict[str, float] = {}
    for j in range(1, partition.m + 1):
        values = magnitudes[partition.band(j)]
        if values.size < min_voxels:
            logger.debug(f"Band {j} has {values.size} voxels, below {min_voxels}; features missing")
            stats = FirstOrderStats.missing()
        else:
            stats = first_order(values)
        for name, value in zip(STAT_NAMES, stats.as_tuple()):
            features[f"deform_b{j}_{name}"] = float(value)
    return features
