"""
Core 3D grid types, container I/O and finite-difference gradients
"""
from .containers import Volume, Mask, RoiSet
from .gradients import gradient
from .io import load_volume, load_mask, write_volume, write_mask

__all__ = [
    'Volume', 'Mask', 'RoiSet', 'gradient',
    'load_volume', 'load_mask', 'write_volume', 'write_mask',
]
