"""
Finite-difference gradients in physical units
"""
import numpy as np

from core.exceptions import GeometryError
from .containers import Volume

AXES = {'x': 0, 'y': 1, 'z': 2}


def gradient(vol: Volume, axis: str) -> Volume:
    """
    Spatial derivative of a volume along one axis, in intensity per mm.

    Central differences in the interior, first-order one-sided differences
    on the two boundary slabs.
    """
    if axis not in AXES:
        raise GeometryError(f"axis must be one of x|y|z, got {axis!r}")
    index = AXES[axis]
    if vol.dims[index] < 2:
        raise GeometryError(f"gradient along {axis} needs at least 2 voxels, got {vol.dims[index]}")
    data = np.gradient(vol.data, vol.spacing[index], axis=index, edge_order=1)
    return vol.with_data(data)


def gradients(vol: Volume):
    """Gradients along x, y and z"""
    return tuple(gradient(vol, axis) for axis in ('x', 'y', 'z'))
