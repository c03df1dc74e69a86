"""
Band partition parameters
"""
from pydantic import BaseModel, Field


class BandConfig(BaseModel):
    """Band width in mm, band count and the smallest band that gets statistics"""
    band_width_mm: float = Field(default=5.0, gt=0)
    count: int = Field(default=12, ge=1, le=255)
    min_voxels: int = Field(default=10, ge=1)
