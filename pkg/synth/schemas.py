"""
Pydantic schemas for phantom, cohort and synth-run specifications
"""
import math
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator


class TextureSpec(BaseModel):
    """Intensity pattern filling the phantom"""
    kind: Literal['oriented', 'noise', 'constant'] = 'oriented'
    base: float = 500.0
    contrast: float = Field(default=100.0, ge=0)
    wavelength_mm: float = Field(default=20.0, gt=0)
    direction: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    noise_sd: float = Field(default=0.0, ge=0)

    @field_validator('direction')
    @classmethod
    def nonzero_direction(cls, v):
        if not any(v) or not all(math.isfinite(c) for c in v):
            raise ValueError(f'direction must be a finite nonzero vector, got {v}')
        return v


class PhantomSpec(BaseModel):
    """A spherical lesion pushing on an ellipsoidal brain"""
    dims: Tuple[int, int, int] = (48, 48, 48)
    spacing: Tuple[float, float, float] = (4.0, 4.0, 4.0)
    center_mm: Optional[Tuple[float, float, float]] = None
    radius_mm: float = Field(default=12.0, gt=0)
    peri_mm: float = Field(default=3.0, gt=0)
    amplitude_mm: float = Field(default=3.0, ge=0)
    decay_mm: float = Field(default=15.0, gt=0)
    texture: TextureSpec = Field(default_factory=TextureSpec)
    seed: int = 0

    @field_validator('dims')
    @classmethod
    def positive_dims(cls, v):
        if any(d < 2 for d in v):
            raise ValueError(f'dims must be at least 2 along every axis, got {v}')
        return v

    @field_validator('spacing')
    @classmethod
    def positive_spacing(cls, v):
        if not all(math.isfinite(s) and s > 0 for s in v):
            raise ValueError(f'spacing must be finite and positive, got {v}')
        return v

    @property
    def extent_mm(self) -> Tuple[float, float, float]:
        return tuple((n - 1) * s for n, s in zip(self.dims, self.spacing))

    @property
    def center(self) -> Tuple[float, float, float]:
        if self.center_mm is not None:
            return self.center_mm
        return tuple(e / 2 for e in self.extent_mm)

    @model_validator(mode='after')
    def lesion_fits(self):
        half = min(self.extent_mm) / 2
        if self.radius_mm >= half:
            raise ValueError(f'radius_mm {self.radius_mm} must be below half the smallest extent ({half} mm)')
        if self.center_mm is not None and not all(0 <= c <= e for c, e in zip(self.center_mm, self.extent_mm)):
            raise ValueError(f'center_mm {self.center_mm} lies outside the grid')
        return self


class CohortSpec(BaseModel):
    """Proportional-hazards survival with exponential baseline"""
    n: int = Field(default=200, ge=2)
    beta: Dict[str, float] = Field(default_factory=dict)
    baseline_hazard: float = Field(default=1 / 365, gt=0)
    censoring_rate: float = Field(default=0.3, ge=0, lt=1)
    seed: int = 0


class PlantedCohortSpec(BaseModel):
    """Feature table with informative and noise columns plus survival drawn from it"""
    n_subjects: int = Field(default=200, ge=2)
    effects: List[float] = Field(default_factory=lambda: [1.0, -0.9, 0.8, -0.7, 0.6])
    n_noise: int = Field(default=50, ge=0)
    baseline_hazard: float = Field(default=1 / 365, gt=0)
    censoring_rate: float = Field(default=0.3, ge=0, lt=1)


class PhantomCohortSpec(BaseModel):
    """Phantom subjects whose amplitudes are drawn from a range"""
    count: int = Field(default=3, ge=0)
    template: PhantomSpec = Field(default_factory=PhantomSpec)
    amplitude_range_mm: Tuple[float, float] = (1.0, 5.0)
    link_amplitude: float = 0.0
    baseline_hazard: float = Field(default=1 / 365, gt=0)
    censoring_rate: float = Field(default=0.3, ge=0, lt=1)

    @field_validator('amplitude_range_mm')
    @classmethod
    def ordered_range(cls, v):
        if not 0 <= v[0] <= v[1]:
            raise ValueError(f'amplitude_range_mm must satisfy 0 <= low <= high, got {v}')
        return v


class SynthSpec(BaseModel):
    seed: int = 0
    phantoms: PhantomCohortSpec = Field(default_factory=PhantomCohortSpec)
    cohort: Optional[PlantedCohortSpec] = None


def validate_synth_spec(data: Dict[str, Any]) -> Tuple[bool, Optional[SynthSpec], Optional[str]]:
    """
    Validate a parsed synth spec file.

    Returns:
        Tuple of (is_valid, validated_spec, error_message)
    """
    try:
        return True, SynthSpec.model_validate(data), None
    except ValidationError as e:
        return False, None, str(e)
