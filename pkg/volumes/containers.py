"""
Volume, Mask and RoiSet - immutable voxel grids

Arrays are indexed [x, y, z]; the on-disk order is x-fastest, which is the
Fortran order of these arrays.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.exceptions import GeometryError

Dims = Tuple[int, int, int]
Spacing = Tuple[float, float, float]


def _check_geometry(dims, spacing) -> Tuple[Dims, Spacing]:
    dims = tuple(int(d) for d in dims)
    spacing = tuple(float(s) for s in spacing)
    if len(dims) != 3 or any(d <= 0 for d in dims):
        raise GeometryError(f"dims must be three positive integers, got {dims}")
    if len(spacing) != 3 or not all(np.isfinite(s) and s > 0 for s in spacing):
        raise GeometryError(f"spacing must be three finite positive values, got {spacing}")
    return dims, spacing


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Volume:
    """A scalar grid with anisotropic voxel spacing in millimeters"""
    data: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise GeometryError(f"Volume data must be 3D, got shape {data.shape}")
        _, spacing = _check_geometry(data.shape, self.spacing)
        object.__setattr__(self, 'data', _frozen(data))
        object.__setattr__(self, 'spacing', spacing)

    @property
    def dims(self) -> Dims:
        return tuple(self.data.shape)

    def same_grid(self, other) -> bool:
        return self.dims == other.dims and np.allclose(self.spacing, other.spacing, rtol=1e-9, atol=0)

    def with_data(self, data: np.ndarray) -> 'Volume':
        return Volume(data, self.spacing)


@dataclass(frozen=True)
class Mask:
    """A boolean grid sharing the geometry of the volumes it selects from"""
    data: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 3:
            raise GeometryError(f"Mask data must be 3D, got shape {data.shape}")
        _, spacing = _check_geometry(data.shape, self.spacing)
        object.__setattr__(self, 'data', _frozen(data.astype(bool)))
        object.__setattr__(self, 'spacing', spacing)

    @property
    def dims(self) -> Dims:
        return tuple(self.data.shape)

    @property
    def count(self) -> int:
        return int(self.data.sum())

    def same_grid(self, other) -> bool:
        return self.dims == other.dims and np.allclose(self.spacing, other.spacing, rtol=1e-9, atol=0)

    def require_grid(self, other, what: str = 'volume') -> None:
        if not self.same_grid(other):
            raise GeometryError(
                f"Mask grid {self.dims} @ {self.spacing} does not match {what} "
                f"grid {other.dims} @ {other.spacing}"
            )

    def __or__(self, other: 'Mask') -> 'Mask':
        self.require_grid(other, 'mask')
        return Mask(self.data | other.data, self.spacing)


@dataclass(frozen=True)
class RoiSet:
    """
    Lesion compartments and brain mask of one subject.

    tumor is the enhancing lesion, peri the peri-lesional hyperintensity.
    """
    brain: Mask
    tumor: Mask
    peri: Mask

    def __post_init__(self):
        self.tumor.require_grid(self.brain, 'brain mask')
        self.peri.require_grid(self.brain, 'brain mask')
        if np.any(self.tumor.data & ~self.brain.data):
            raise GeometryError("tumor mask extends outside the brain mask")
        if np.any(self.peri.data & ~self.brain.data):
            raise GeometryError("peri mask extends outside the brain mask")
        if np.any(self.tumor.data & self.peri.data):
            raise GeometryError("tumor and peri masks overlap")

    @property
    def spacing(self) -> Spacing:
        return self.brain.spacing

    @property
    def dims(self) -> Dims:
        return self.brain.dims

    @property
    def lesion(self) -> Mask:
        """Union of tumor and peri compartments"""
        return self.tumor | self.peri
