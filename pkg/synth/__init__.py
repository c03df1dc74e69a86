"""
Phantoms and cohorts with known ground truth
"""
from .generators import (
    Phantom, synth_deformation, synth_feature_table, synth_masks, synth_phantom, synth_planted_cohort,
    synth_survival, synth_texture, write_phantom,
)
from .schemas import CohortSpec, PhantomSpec, PlantedCohortSpec, SynthSpec, TextureSpec

__all__ = [
    'Phantom', 'synth_deformation', 'synth_feature_table', 'synth_masks', 'synth_phantom', 'synth_planted_cohort',
    'synth_survival', 'synth_texture', 'write_phantom',
    'CohortSpec', 'PhantomSpec', 'PlantedCohortSpec', 'SynthSpec', 'TextureSpec',
]
