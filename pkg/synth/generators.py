"""
Synthetic phantoms and cohorts with known ground truth
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from scipy import optimize

from core.exceptions import ConfigError, SurvivalDataError
from core.utils import derive_seed
from deform.fields import DeformationField, write_field
from survival.tables import FeatureTable, SurvivalRecord
from volumes.containers import Mask, RoiSet, Volume
from volumes.io import write_mask, write_volume

from .schemas import CohortSpec, PhantomCohortSpec, PhantomSpec, PlantedCohortSpec

logger = logging.getLogger(__name__)

SUBJECT_FILES = ('intensity', 'brain', 'tumor', 'peri', 'deformation')


@dataclass(frozen=True)
class Phantom:
    intensity: Volume
    field: DeformationField
    roi: RoiSet


def _offsets(spec: PhantomSpec) -> np.ndarray:
    """Per-voxel position relative to the lesion center, shape (nx, ny, nz, 3) in mm"""
    axes = [np.arange(n) * s - c for n, s, c in zip(spec.dims, spec.spacing, spec.center)]
    return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)


def synth_masks(spec: PhantomSpec) -> RoiSet:
    """Sphere tumor, shell peri of width peri_mm, brain ellipsoid at 0.45 of the extent (joined with the lesion)"""
    offset = _offsets(spec)
    r = np.linalg.norm(offset, axis=-1)
    tumor = r <= spec.radius_mm
    peri = (r > spec.radius_mm) & (r <= spec.radius_mm + spec.peri_mm)

    axes = [np.arange(n) * s - e / 2 for n, s, e in zip(spec.dims, spec.spacing, spec.extent_mm)]
    grids = np.meshgrid(*axes, indexing='ij')
    semi = [0.45 * e for e in spec.extent_mm]
    brain = sum((g / a) ** 2 for g, a in zip(grids, semi)) <= 1.0
    brain |= tumor | peri
    return RoiSet(Mask(brain, spec.spacing), Mask(tumor, spec.spacing), Mask(peri, spec.spacing))


def synth_deformation(spec: PhantomSpec) -> Tuple[DeformationField, RoiSet]:
    """
    Radial displacement A·exp(−(r−R)/L)·r̂ outside the tumor sphere, zero inside.
    """
    offset = _offsets(spec)
    r = np.linalg.norm(offset, axis=-1)
    outside = r > spec.radius_mm
    profile = np.zeros_like(r)
    profile[outside] = spec.amplitude_mm * np.exp(-(r[outside] - spec.radius_mm) / spec.decay_mm) / r[outside]
    field = DeformationField(offset * profile[..., None], spec.spacing)
    return field, synth_masks(spec)


def synth_texture(spec: PhantomSpec) -> Volume:
    """Oriented sinusoid, isotropic noise, or a constant, over the whole grid"""
    texture = spec.texture
    rng = np.random.default_rng(spec.seed)
    shape = tuple(spec.dims)
    if texture.kind == 'constant':
        data = np.full(shape, texture.base)
    elif texture.kind == 'noise':
        sd = texture.noise_sd or texture.contrast
        data = texture.base + sd * rng.standard_normal(shape)
    else:
        direction = np.asarray(texture.direction, dtype=np.float64)
        direction /= np.linalg.norm(direction)
        projection = _offsets(spec) @ direction
        data = texture.base + texture.contrast * np.sin(2 * np.pi * projection / texture.wavelength_mm)
        if texture.noise_sd:
            data = data + texture.noise_sd * rng.standard_normal(shape)
    return Volume(data, spec.spacing)


def synth_phantom(spec: PhantomSpec) -> Phantom:
    field, roi = synth_deformation(spec)
    return Phantom(synth_texture(spec), field, roi)


def write_phantom(phantom: Phantom, directory) -> Dict[str, Path]:
    """Write a phantom's containers into directory; returns the stem per input kind"""
    directory = Path(directory)
    paths = {name: directory / name for name in SUBJECT_FILES}
    write_volume(phantom.intensity, paths['intensity'])
    write_mask(phantom.roi.brain, paths['brain'])
    write_mask(phantom.roi.tumor, paths['tumor'])
    write_mask(phantom.roi.peri, paths['peri'])
    write_field(phantom.field, paths['deformation'])
    return paths


def subject_amplitudes(spec: PhantomCohortSpec, seed: int) -> Dict[str, float]:
    """Per-subject displacement amplitudes, each drawn with a seed derived from the subject ID"""
    low, high = spec.amplitude_range_mm
    amplitudes = {}
    for i in range(spec.count):
        subject = f"subj{i + 1:03d}"
        rng = np.random.default_rng(derive_seed(seed, subject))
        amplitudes[subject] = float(rng.uniform(low, high))
    return amplitudes


def subject_phantom_spec(template: PhantomSpec, subject: str, amplitude: float, seed: int) -> PhantomSpec:
    return template.model_copy(update={'amplitude_mm': amplitude, 'seed': derive_seed(seed, subject)})


def censoring_bound(rates: np.ndarray, target: float) -> float:
    """
    Upper bound c of Uniform(0, c) censoring such that the expected censored
    fraction over exponential times with the given rates equals target.
    """
    def censored_fraction(c):
        x = rates * c
        return float(np.mean(-np.expm1(-x) / x))

    high = 1.0 / rates.max()
    while censored_fraction(high) > target:
        high *= 2.0
    low = high
    while censored_fraction(low) < target:
        low /= 2.0
    if low == high:
        return high
    return optimize.brentq(lambda c: censored_fraction(c) - target, low, high, xtol=1e-12, rtol=1e-12)


def synth_survival(X: FeatureTable, spec: CohortSpec) -> List[SurvivalRecord]:
    """
    Exponential survival times with hazard h0·exp(x·β*), censored by an
    independent uniform time calibrated to the target censoring rate.

    Raises:
        ConfigError: β* names a column absent from X
        SurvivalDataError: missing values in a column used by β*
    """
    unknown = [name for name in spec.beta if name not in X.names]
    if unknown:
        raise ConfigError(f"coefficients for unknown features: {unknown}")
    if spec.n != len(X.subjects):
        raise ConfigError(f"cohort spec expects {spec.n} subjects, table has {len(X.subjects)}")
    names = list(spec.beta)
    values = X.select(names).values if names else np.zeros((len(X.subjects), 0))
    if np.isnan(values).any():
        raise SurvivalDataError("survival generation needs complete feature values")
    eta = values @ np.array([spec.beta[n] for n in names], dtype=np.float64)
    rates = spec.baseline_hazard * np.exp(eta)

    rng = np.random.default_rng(spec.seed)
    event_times = np.maximum(rng.exponential(1.0 / rates), np.finfo(np.float64).tiny)
    draws = rng.random(len(rates))
    if spec.censoring_rate > 0:
        bound = censoring_bound(rates, spec.censoring_rate)
        censor_times = bound * (1.0 - draws)
    else:
        censor_times = np.full(len(rates), np.inf)

    events = event_times <= censor_times
    times = np.where(events, event_times, censor_times)
    logger.info(f"generated {len(times)} survival records, {int(events.sum())} events")
    return [SurvivalRecord(s, float(t), bool(e)) for s, t, e in zip(X.subjects, times, events)]


def synth_feature_table(spec: PlantedCohortSpec, seed: int) -> Tuple[FeatureTable, Dict[str, float]]:
    """Standard normal features; returns the table and the planted coefficients"""
    rng = np.random.default_rng(seed)
    informative = [f"signal_{i + 1:02d}" for i in range(len(spec.effects))]
    noise = [f"noise_{i + 1:02d}" for i in range(spec.n_noise)]
    names = informative + noise
    subjects = [f"case{i + 1:04d}" for i in range(spec.n_subjects)]
    values = rng.standard_normal((spec.n_subjects, len(names)))
    return FeatureTable(subjects, names, values), dict(zip(informative, spec.effects))


def synth_planted_cohort(spec: PlantedCohortSpec, seed: int) -> Tuple[FeatureTable, List[SurvivalRecord], Dict[str, float]]:
    table, beta = synth_feature_table(spec, seed)
    cohort = CohortSpec(n=spec.n_subjects, beta=beta, baseline_hazard=spec.baseline_hazard,
                        censoring_rate=spec.censoring_rate, seed=derive_seed(seed, 'survival'))
    return table, synth_survival(table, cohort), beta


def synth_phantom_survival(amplitudes: Dict[str, float], spec: PhantomCohortSpec, seed: int) -> List[SurvivalRecord]:
    """Survival for phantom subjects with log-hazard link_amplitude per mm of amplitude above the mean"""
    subjects = list(amplitudes)
    values = np.array([[amplitudes[s]] for s in subjects])
    table = FeatureTable(subjects, ['amplitude_mm'], values - values.mean())
    cohort = CohortSpec(n=len(subjects), beta={'amplitude_mm': spec.link_amplitude},
                        baseline_hazard=spec.baseline_hazard, censoring_rate=spec.censoring_rate,
                        seed=derive_seed(seed, 'phantom-survival'))
    return synth_survival(table, cohort)
