"""
Header schema for the volume container format
"""
import math
from typing import List, Literal, Optional, Tuple, Dict, Any

from pydantic import BaseModel, Field, field_validator

DTYPES = {
    'f32': '<f4',
    'f64': '<f8',
    'u8': 'u1',
}


class VolumeHeader(BaseModel):
    """Validates a .volhdr sidecar"""
    dims: List[int] = Field(min_length=3, max_length=3)
    spacing: List[float] = Field(min_length=3, max_length=3)
    dtype: Literal['f32', 'f64', 'u8']
    order: Literal['xyz-row-major'] = 'xyz-row-major'
    channels: int = Field(default=1, ge=1)

    @field_validator('dims')
    @classmethod
    def validate_dims(cls, v):
        if any(d <= 0 for d in v):
            raise ValueError(f'dims must be positive, got {v}')
        return v

    @field_validator('spacing')
    @classmethod
    def validate_spacing(cls, v):
        if not all(math.isfinite(s) and s > 0 for s in v):
            raise ValueError(f'spacing must be finite and positive, got {v}')
        return v

    @property
    def voxel_count(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def numpy_dtype(self) -> str:
        return DTYPES[self.dtype]


def validate_header(data: Dict[str, Any]) -> Tuple[bool, Optional[VolumeHeader], Optional[str]]:
    """
    Validate a parsed header against the schema.

    Returns:
        Tuple of (is_valid, validated_header, error_message)
    """
    try:
        return True, VolumeHeader(**data), None
    except Exception as e:
        return False, None, str(e)
