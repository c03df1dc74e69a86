"""
Pydantic schema for the saved CoxModel file
"""
import math
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator


class ModelFeature(BaseModel):
    name: str = Field(..., min_length=1)
    coef: float
    mean: float
    std: float = Field(..., gt=0)
    median: float
    penalized: bool = True

    @field_validator('coef', 'mean', 'std', 'median')
    @classmethod
    def finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v


class ModelFile(BaseModel):
    """{features:[{name,coef,mean,std,median,penalized}], lambda, threshold, seed}"""
    features: List[ModelFeature] = Field(default_factory=list)
    lambda_: float = Field(..., alias='lambda', ge=0)
    threshold: Optional[float] = None
    seed: int = 0
    family: str = 'rdepth'

    model_config = {'populate_by_name': True}

    @model_validator(mode='after')
    def unique_names(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        return self


def validate_model_file(data: Dict[str, Any]) -> Tuple[bool, Optional[ModelFile], Optional[str]]:
    """
    Validate a parsed model file

    Returns:
        Tuple of (is_valid, validated_model, error_message)
    """
    try:
        return True, ModelFile.model_validate(data), None
    except ValidationError as e:
        return False, None, str(e)
