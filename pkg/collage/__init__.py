"""
3D COLLAGE texture descriptors
"""
from .cooccurrence import CoocMatrix, cooccurrence
from .features import collage_feature_names, collage_features, compute_collage
from .haralick import HARALICK_NAMES, HaralickVector, haralick
from .orientation import OrientationMaps, dominant_orientation, local_gradient_matrix, quantize
from .schemas import CollageSettings

__all__ = [
    'CoocMatrix', 'cooccurrence', 'collage_feature_names', 'collage_features', 'compute_collage',
    'HARALICK_NAMES', 'HaralickVector', 'haralick', 'OrientationMaps', 'dominant_orientation',
    'local_gradient_matrix', 'quantize', 'CollageSettings',
]
