"""
COLLAGE parameters
"""
import itertools
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

Offset = Tuple[int, int, int]


def unit_directions() -> List[Offset]:
    """The 13 unique directions of the 26-neighborhood (first nonzero component positive)"""
    directions = []
    for offset in itertools.product((-1, 0, 1), repeat=3):
        nonzero = [v for v in offset if v != 0]
        if nonzero and nonzero[0] > 0:
            directions.append(offset)
    return sorted(directions, key=lambda o: (sum(map(abs, o)), [-v for v in o]))


class CollageSettings(BaseModel):
    """
    Window sizes, angle bins and co-occurrence offsets.

    cooc_window defaults to window.
    """
    window: int = Field(default=5, ge=3)
    bins: int = Field(default=64, ge=2, le=256)
    offsets: List[Offset] = Field(default_factory=unit_directions)
    cooc_window: Optional[int] = Field(default=None, ge=3)
    min_roi_voxels: int = Field(default=10, ge=1)

    @field_validator('window', 'cooc_window')
    @classmethod
    def validate_odd(cls, v):
        if v is not None and v % 2 == 0:
            raise ValueError(f'window sizes must be odd, got {v}')
        return v

    @field_validator('offsets')
    @classmethod
    def validate_offsets(cls, v):
        if not v:
            raise ValueError('at least one co-occurrence offset is required')
        seen = set()
        for offset in v:
            offset = tuple(offset)
            if offset == (0, 0, 0):
                raise ValueError('offsets must be nonzero')
            if offset in seen or tuple(-c for c in offset) in seen:
                raise ValueError(f'offset {offset} duplicates or opposes another offset')
            seen.add(offset)
        return v

    @model_validator(mode='after')
    def fill_cooc_window(self):
        if self.cooc_window is None:
            self.cooc_window = self.window
        reach = self.cooc_window // 2
        for offset in self.offsets:
            if max(abs(c) for c in offset) > 2 * reach:
                raise ValueError(f'offset {offset} cannot fit in a {self.cooc_window}-voxel window')
        return self
