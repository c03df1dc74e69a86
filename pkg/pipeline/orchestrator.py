"""
Extraction orchestrator - per-subject descriptor assembly
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from bands.partition import build_bands
from bands.schemas import BandConfig
from collage.features import collage_feature_names, compute_collage
from collage.haralick import HARALICK_NAMES
from collage.schemas import CollageSettings
from core.exceptions import RDepthError
from core.logging import use_json_lines
from deform.features import deformation_feature_names, deformation_features
from deform.fields import load_field
from survival.tables import FeatureTable
from volumes.containers import RoiSet
from volumes.io import container_paths, load_mask, load_volume, write_labels, write_volume

from .schemas import SubjectInputs

logger = logging.getLogger(__name__)

FAMILIES = ('deform', 'collage')
COMPARTMENTS = ('tumor', 'peri')
DEFAULT_DEBUG_STATS = ('entropy', 'energy')


@dataclass(frozen=True)
class ExtractionSettings:
    bands: BandConfig = field(default_factory=BandConfig)
    collage: CollageSettings = field(default_factory=CollageSettings)
    families: Tuple[str, ...] = FAMILIES
    debug_stats: Tuple[str, ...] = ()
    maps_dir: Optional[str] = None


@dataclass
class SubjectOutcome:
    subject: str
    features: Optional[Dict[str, float]] = None
    skipped: Optional[str] = None
    error: Optional[str] = None


def debug_stat_names(choice: Optional[str]) -> Tuple[str, ...]:
    """Haralick maps written by --debug-maps: none, the default pair, or all"""
    if not choice:
        return ()
    if choice == 'all':
        return tuple(HARALICK_NAMES)
    return DEFAULT_DEBUG_STATS


def descriptor_names(settings: ExtractionSettings) -> List[str]:
    """Frozen column order: deformation bands, then tumor COLLAGE, then peri COLLAGE"""
    names: List[str] = []
    if 'deform' in settings.families:
        names += deformation_feature_names(settings.bands.count)
    if 'collage' in settings.families:
        for compartment in COMPARTMENTS:
            names += collage_feature_names(f"{compartment}_collage")
    return names


def missing_inputs(subject: SubjectInputs, families: Sequence[str]) -> List[str]:
    """Input kinds the subject lacks, by absent config entry or absent header file"""
    needed = ['brain', 'tumor', 'peri']
    if 'deform' in families:
        needed.append('deformation')
    if 'collage' in families:
        needed.append('intensity')
    missing = []
    for kind in needed:
        stem = getattr(subject, kind)
        if stem is None or not container_paths(stem)[0].exists():
            missing.append(kind)
    return missing


def _write_debug_maps(result, compartment: str, directory: Path, stats: Sequence[str]) -> None:
    if result.orientations is None:
        return
    write_volume(result.orientations.theta, directory / f"{compartment}_theta")
    write_volume(result.orientations.phi, directory / f"{compartment}_phi")
    for key, volume in result.statistic_maps.items():
        if key.split('_', 1)[1] in stats:
            write_volume(volume, directory / f"{compartment}_{key}")


def extract_subject(subject: SubjectInputs, settings: ExtractionSettings) -> Dict[str, float]:
    """
    Named descriptor of one subject, in descriptor_names order.

    Raises:
        VolumeFormatError: unreadable input container
        GeometryError: inputs on different grids or an empty tumor
    """
    roi = RoiSet(load_mask(subject.brain), load_mask(subject.tumor), load_mask(subject.peri))
    features: Dict[str, float] = {}

    if 'deform' in settings.families:
        deformation = load_field(subject.deformation)
        partition = build_bands(roi, settings.bands.band_width_mm, settings.bands.count)
        features.update(deformation_features(deformation, partition, settings.bands.min_voxels))
        if settings.maps_dir:
            write_labels(partition.labels, partition.spacing, Path(settings.maps_dir) / subject.id / 'bands')

    if 'collage' in settings.families:
        intensity = load_volume(subject.intensity)
        keep_maps = bool(settings.debug_stats and settings.maps_dir)
        for compartment in COMPARTMENTS:
            mask = getattr(roi, compartment)
            result = compute_collage(intensity, mask, settings.collage, f"{compartment}_collage", keep_maps)
            features.update(result.features)
            if keep_maps:
                _write_debug_maps(result, compartment, Path(settings.maps_dir) / subject.id, settings.debug_stats)

    return features


def init_worker(log_json: bool, level: int) -> None:
    """Give a worker process the parent's log level and, on request, JSON-lines output"""
    root = logging.getLogger()
    if not root.handlers:
        root.addHandler(logging.StreamHandler())
    root.setLevel(level)
    if log_json:
        use_json_lines(root)


def _process(args: Tuple[SubjectInputs, ExtractionSettings]) -> SubjectOutcome:
    subject, settings = args
    missing = missing_inputs(subject, settings.families)
    if missing:
        return SubjectOutcome(subject.id, skipped=f"missing inputs: {', '.join(missing)}")
    try:
        return SubjectOutcome(subject.id, features=extract_subject(subject, settings))
    except RDepthError as e:
        return SubjectOutcome(subject.id, error=f"{e.__class__.__name__}: {e}")


class ExtractionOrchestrator:
    """
    Runs extraction across subjects, in config order.

    Subjects with missing inputs are skipped with a warning; subjects whose
    inputs fail to load or disagree geometrically are recorded in errors.
    """

    def __init__(self, subjects: Sequence[SubjectInputs], settings: ExtractionSettings, workers: int = 1,
                 log_json: bool = False):
        self.subjects = list(subjects)
        self.settings = settings
        self.workers = max(1, workers)
        self.log_json = log_json
        self.errors: List[str] = []
        self.skipped: List[str] = []

    def execute(self) -> FeatureTable:
        logger.info(f"Extracting {len(self.subjects)} subjects with {self.workers} worker(s)")
        jobs = [(subject, self.settings) for subject in self.subjects]
        if self.workers == 1:
            outcomes = [_process(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=self.workers, initializer=init_worker,
                                     initargs=(self.log_json, logging.getLogger().getEffectiveLevel())) as pool:
                outcomes = list(pool.map(_process, jobs))

        rows: Dict[str, Dict[str, float]] = {}
        for outcome in outcomes:
            if outcome.skipped:
                logger.warning(f"Skipping subject {outcome.subject}: {outcome.skipped}",
                               extra={'subject': outcome.subject})
                self.skipped.append(outcome.subject)
            elif outcome.error:
                error_msg = f"Subject {outcome.subject}: {outcome.error}"
                logger.error(error_msg, extra={'subject': outcome.subject})
                self.errors.append(error_msg)
            else:
                logger.info(f"Extracted subject {outcome.subject}", extra={'subject': outcome.subject})
                rows[outcome.subject] = outcome.features

        names = descriptor_names(self.settings)
        return FeatureTable.from_rows(rows, names)
