"""
Displacement fields and their per-voxel magnitude
"""
from dataclasses import dataclass

import numpy as np

from core.exceptions import GeometryError, VolumeFormatError
from volumes.containers import Volume
from volumes.io import read_container, write_container


@dataclass(frozen=True)
class DeformationField:
    """Per-voxel displacement (dt, du, dv) in mm, indexed [x, y, z, component]"""
    data: np.ndarray
    spacing: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim != 4 or data.shape[-1] != 3:
            raise GeometryError(f"DeformationField data must have shape (nx, ny, nz, 3), got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise GeometryError("DeformationField holds non-finite displacements")
        # reuse Volume's geometry checks
        spacing = Volume(np.zeros((1, 1, 1)), self.spacing).spacing
        data.flags.writeable = False
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'spacing', spacing)

    @property
    def dims(self):
        return tuple(self.data.shape[:3])

    def same_grid(self, other) -> bool:
        return self.dims == tuple(other.dims) and np.allclose(self.spacing, other.spacing, rtol=1e-9, atol=0)


def load_field(path) -> DeformationField:
    """Load a 3-channel displacement container"""
    header, array = read_container(path)
    if header.channels != 3:
        raise VolumeFormatError(f"{path} has {header.channels} channels, a deformation field needs 3")
    try:
        return DeformationField(array, tuple(header.spacing))
    except GeometryError as e:
        raise VolumeFormatError(f"{path}: {e}") from e


def write_field(field: DeformationField, path, dtype: str = 'f64') -> None:
    write_container(field.data, field.spacing, path, dtype)


def magnitude(field: DeformationField) -> Volume:
    """Euclidean norm of the displacement at every voxel, in mm"""
    d = field.data
    return Volume(np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2 + d[..., 2] ** 2), field.spacing)
