"""
COLLAGE descriptors of one lesion compartment

Per ROI voxel: dominant gradient orientation (θ, φ), quantized; local
co-occurrence matrices of each angle map; 13 Haralick statistics. The
per-voxel statistic maps are then summarized with first-order statistics.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from bands.statistics import FirstOrderStats, STAT_NAMES, first_order
from volumes.containers import Mask, Volume
from volumes.gradients import gradients
from .cooccurrence import PairCounter
from .haralick import HARALICK_NAMES, HaralickCalculator
from .orientation import OrientationMaps, orientations_at, quantize
from .schemas import CollageSettings

logger = logging.getLogger(__name__)

ANGLES = ('theta', 'phi')

# fixed so results do not depend on how many voxels a caller passes at once
CHUNK = 256


def collage_feature_names(prefix: str = 'collage') -> List[str]:
    """Angle-major, then Haralick statistic, then first-order statistic"""
    return [
        f"{prefix}_{angle}_{stat}_{name}"
        for angle in ANGLES
        for name in HARALICK_NAMES
        for stat in STAT_NAMES
    ]


@dataclass
class CollageResult:
    """Named features plus the per-voxel maps they summarize"""
    features: Dict[str, float]
    orientations: Optional[OrientationMaps] = None
    statistic_maps: Dict[str, Volume] = field(default_factory=dict)


def _to_volume(values: np.ndarray, centers: np.ndarray, template: Volume) -> Volume:
    data = np.full(template.dims, np.nan)
    data[tuple(centers.T)] = values
    return template.with_data(data)


def haralick_maps(qmap: np.ndarray, centers: np.ndarray, cfg: CollageSettings) -> np.ndarray:
    """Haralick statistics around each center, shape (n, 13)"""
    counter = PairCounter(qmap, cfg)
    calculator = HaralickCalculator(cfg.bins)
    out = np.empty((len(centers), len(HARALICK_NAMES)))
    for start in range(0, len(centers), CHUNK):
        block = centers[start:start + CHUNK]
        out[start:start + CHUNK] = calculator.compute(counter.counts(block))
    return out


def compute_collage(vol: Volume, roi: Mask, cfg: CollageSettings = None,
                    prefix: str = 'collage', keep_maps: bool = False) -> CollageResult:
    """
    COLLAGE features of vol inside roi.

    ROIs smaller than cfg.min_roi_voxels give all-NaN features.
    """
    cfg = cfg or CollageSettings()
    roi.require_grid(vol)
    names = collage_feature_names(prefix)

    if roi.count < cfg.min_roi_voxels:
        logger.warning(f"ROI has {roi.count} voxels, below {cfg.min_roi_voxels}; COLLAGE features missing")
        return CollageResult({name: float('nan') for name in names})

    centers = np.argwhere(roi.data)
    grads = [g.data for g in gradients(vol)]
    theta, phi = orientations_at(grads, centers, cfg.window)

    features: Dict[str, float] = {}
    result = CollageResult(features)
    if keep_maps:
        result.orientations = OrientationMaps(_to_volume(theta, centers, vol), _to_volume(phi, centers, vol))

    for angle_name, angles in zip(ANGLES, (theta, phi)):
        qmap = np.full(vol.dims, -1, dtype=np.int64)
        qmap[tuple(centers.T)] = quantize(angles, cfg.bins)
        maps = haralick_maps(qmap, centers, cfg)

        for column, stat_name in enumerate(HARALICK_NAMES):
            values = maps[:, column]
            values = values[np.isfinite(values)]
            stats = first_order(values) if values.size else FirstOrderStats.missing()
            for name, value in zip(STAT_NAMES, stats.as_tuple()):
                features[f"{prefix}_{angle_name}_{name}_{stat_name}"] = float(value)
            if keep_maps:
                result.statistic_maps[f"{angle_name}_{stat_name}"] = _to_volume(maps[:, column], centers, vol)

    # reorder to the documented column order
    result.features = {name: features[name] for name in names}
    return result


def collage_features(vol: Volume, roi: Mask, cfg: CollageSettings = None,
                     prefix: str = 'collage') -> Dict[str, float]:
    """13 × 5 × 2 named COLLAGE features of one compartment"""
    return compute_collage(vol, roi, cfg, prefix).features
