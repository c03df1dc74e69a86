"""
Pydantic schema for the pipeline config file
"""
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

from bands.schemas import BandConfig
from collage.schemas import CollageSettings
from core.exceptions import ConfigError
from core.utils import load_json_file


class SubjectInputs(BaseModel):
    """Container stems for one subject; intensity and deformation are needed only by their feature family"""
    id: str = Field(..., min_length=1)
    brain: str
    tumor: str
    peri: str
    intensity: Optional[str] = None
    deformation: Optional[str] = None

    @field_validator('id')
    @classmethod
    def plain_id(cls, v):
        if any(c in v for c in ',/\\\n'):
            raise ValueError(f'subject id {v!r} may not contain commas, slashes or newlines')
        return v


class SurvivalOptions(BaseModel):
    lambda_grid: Optional[List[float]] = None
    folds: Optional[int] = Field(default=None, ge=2)
    seed: Optional[int] = None
    n_lambda: Optional[int] = Field(default=None, ge=1)
    lambda_ratio: Optional[float] = Field(default=None, gt=0, lt=1)


class PipelineConfig(BaseModel):
    subjects: List[SubjectInputs] = Field(..., min_length=1)
    bands: Optional[Dict[str, Any]] = None
    collage: Optional[Dict[str, Any]] = None
    survival: SurvivalOptions = Field(default_factory=SurvivalOptions)
    output_dir: Optional[str] = None

    @field_validator('subjects')
    @classmethod
    def unique_ids(cls, v):
        ids = [s.id for s in v]
        if len(set(ids)) != len(ids):
            raise ValueError('subject ids must be unique')
        return v

    @field_validator('bands', 'collage')
    @classmethod
    def valid_sections(cls, v, info):
        """Checked here, kept as given so unset keys fall back to settings"""
        if v is not None:
            schema = BandConfig if info.field_name == 'bands' else CollageSettings
            try:
                schema.model_validate(v)
            except ValidationError as e:
                raise ValueError(f"invalid {info.field_name} section: {e}") from e
        return v

    def resolve_paths(self, base_dir: Path) -> 'PipelineConfig':
        """Relative input paths are taken relative to base_dir"""
        def resolve(value):
            if value is None:
                return None
            path = Path(value)
            return str(path if path.is_absolute() else base_dir / path)

        subjects = [
            s.model_copy(update={k: resolve(getattr(s, k)) for k in ('brain', 'tumor', 'peri', 'intensity', 'deformation')})
            for s in self.subjects
        ]
        return self.model_copy(update={'subjects': subjects, 'output_dir': resolve(self.output_dir)})


def validate_pipeline_config(data: Dict[str, Any]) -> Tuple[bool, Optional[PipelineConfig], Optional[str]]:
    """
    Validate a parsed pipeline config.

    Returns:
        Tuple of (is_valid, validated_config, error_message)
    """
    try:
        return True, PipelineConfig.model_validate(data), None
    except ValidationError as e:
        return False, None, str(e)


def load_pipeline_config(path) -> PipelineConfig:
    """Read, validate and resolve a pipeline config file; raises ConfigError"""
    path = Path(path)
    data = load_json_file(path)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    is_valid, config, error = validate_pipeline_config(data)
    if not is_valid:
        raise ConfigError(f"Invalid pipeline config {path}: {error}")
    return config.resolve_paths(path.parent)
