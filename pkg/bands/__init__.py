"""
Annular bands around the lesion and first-order statistics
"""
from .partition import BandPartition, build_bands, distance_transform
from .statistics import FirstOrderStats, STAT_NAMES, first_order

__all__ = ['BandPartition', 'build_bands', 'distance_transform', 'FirstOrderStats', 'STAT_NAMES', 'first_order']
