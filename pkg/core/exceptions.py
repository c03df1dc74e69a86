"""
Custom exceptions for the r-DepTH toolkit
"""


class RDepthError(Exception):
    """Base exception for toolkit errors"""
    pass


class VolumeFormatError(RDepthError):
    """Raised when a volume container header or payload is malformed"""
    pass


class GeometryError(RDepthError):
    """Raised for dims/spacing mismatches, empty masks and invalid axes"""
    pass


class ConfigError(RDepthError):
    """Raised when a config or spec file fails validation"""
    pass


class SurvivalDataError(RDepthError):
    """Raised for unusable survival data (no events, failed joins, unknown names)"""
    pass


class ModelFileError(SurvivalDataError):
    """Raised when a saved model file is corrupt or does not match the data"""
    pass
