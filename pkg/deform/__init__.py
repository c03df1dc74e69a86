"""
Deformation-heterogeneity features in annular bands
"""
from .fields import DeformationField, load_field, write_field, magnitude
from .features import deformation_features, deformation_feature_names

__all__ = ['DeformationField', 'load_field', 'write_field', 'magnitude',
           'deformation_features', 'deformation_feature_names']
