"""
Feature tables and survival records, with their CSV formats
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.exceptions import ConfigError, SurvivalDataError

logger = logging.getLogger(__name__)

SUBJECT_COLUMN = 'subject_id'
FEATURE_TABLE_VERSION = 'rdepth-features v1'

FeatureVector = Dict[str, float]


def _leading_comment(path, what: str) -> Optional[str]:
    """The first line when it is a '#' comment, else None"""
    try:
        with open(path, newline='') as fh:
            first = fh.readline()
    except OSError as e:
        raise SurvivalDataError(f"Cannot read {what} {path}: {e}") from e
    return first.rstrip('\r\n') if first.startswith('#') else None


def _read_frame(path, what: str, skip_header: bool, na_values) -> pd.DataFrame:
    # '#' is only special on the first line; IDs such as "pt#1" or "NA" stay verbatim
    try:
        frame = pd.read_csv(path, skiprows=1 if skip_header else 0, dtype={SUBJECT_COLUMN: str},
                            keep_default_na=False, na_values=na_values)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SurvivalDataError(f"Cannot read {what} {path}: {e}") from e
    if SUBJECT_COLUMN in frame.columns and (frame[SUBJECT_COLUMN].isna() | (frame[SUBJECT_COLUMN] == '')).any():
        raise SurvivalDataError(f"{path}: empty subject ID")
    return frame


@dataclass
class FeatureTable:
    """Subjects × named features; NaN marks a missing value"""
    subjects: List[str]
    names: List[str]
    values: np.ndarray

    def __post_init__(self):
        self.subjects = [str(s) for s in self.subjects]
        self.names = [str(n) for n in self.names]
        self.values = np.asarray(self.values, dtype=np.float64).reshape(len(self.subjects), len(self.names))
        if len(set(self.names)) != len(self.names):
            raise SurvivalDataError("feature names must be unique")
        if len(set(self.subjects)) != len(self.subjects):
            raise SurvivalDataError("subject IDs must be unique")

    @classmethod
    def from_rows(cls, rows: Mapping[str, Mapping[str, float]], names: Optional[Sequence[str]] = None) -> 'FeatureTable':
        """Build from {subject: {name: value}}; names default to the first row's order"""
        subjects = list(rows)
        if names is None:
            names = list(next(iter(rows.values()))) if rows else []
        values = np.array([[row.get(name, math.nan) for name in names] for row in rows.values()],
                          dtype=np.float64).reshape(len(subjects), len(names))
        return cls(subjects, list(names), values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def row(self, subject: str) -> FeatureVector:
        index = self.subjects.index(subject)
        return dict(zip(self.names, self.values[index].tolist()))

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.names.index(name)]

    def select(self, names: Sequence[str]) -> 'FeatureTable':
        missing = [n for n in names if n not in self.names]
        if missing:
            raise SurvivalDataError(f"unknown feature names: {missing[:5]}")
        columns = [self.names.index(n) for n in names]
        return FeatureTable(list(self.subjects), list(names), self.values[:, columns])

    def select_prefix(self, prefixes: Iterable[str]) -> 'FeatureTable':
        prefixes = tuple(prefixes)
        return self.select([n for n in self.names if n.startswith(prefixes)])

    def subset(self, subjects: Sequence[str]) -> 'FeatureTable':
        index = {s: i for i, s in enumerate(self.subjects)}
        rows = [index[s] for s in subjects]
        return FeatureTable(list(subjects), list(self.names), self.values[rows])

    def merge(self, other: 'FeatureTable') -> 'FeatureTable':
        """Append other's columns for the subjects both tables share, in this table's order"""
        clash = set(self.names) & set(other.names)
        if clash:
            raise SurvivalDataError(f"columns present in both tables: {sorted(clash)[:5]}")
        shared = [s for s in self.subjects if s in set(other.subjects)]
        dropped = len(self.subjects) - len(shared)
        if dropped:
            logger.warning(f"{dropped} subjects have no covariate row and were dropped")
        left = self.subset(shared)
        right = other.subset(shared)
        return FeatureTable(shared, left.names + right.names, np.hstack([left.values, right.values]))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.values, columns=self.names)
        frame.insert(0, SUBJECT_COLUMN, self.subjects)
        return frame

    def write_csv(self, path) -> None:
        """Versioned header comment, then subject_id and features; missing cells empty"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as fh:
            fh.write(f"# {FEATURE_TABLE_VERSION} columns={len(self.names)}\n")
            self.to_frame().to_csv(fh, index=False, na_rep='', float_format='%.17g', lineterminator='\n')

    @classmethod
    def read_csv(cls, path) -> 'FeatureTable':
        """
        Feature CSV with or without the version header line.

        Only empty cells are missing values; subject IDs are read verbatim.
        """
        header = _leading_comment(path, 'feature table')
        if header is not None and header.startswith('# rdepth-features') \
                and not header.startswith(f"# {FEATURE_TABLE_VERSION} "):
            raise SurvivalDataError(f"{path}: unsupported feature table header {header!r}")
        frame = _read_frame(path, 'feature table', header is not None, na_values=[''])
        if frame.columns.empty or frame.columns[0] != SUBJECT_COLUMN:
            raise SurvivalDataError(f"{path}: first column must be {SUBJECT_COLUMN}")
        try:
            values = frame.iloc[:, 1:].apply(pd.to_numeric).to_numpy(dtype=np.float64)
        except (ValueError, TypeError) as e:
            raise SurvivalDataError(f"{path}: non-numeric feature value: {e}") from e
        return cls(frame[SUBJECT_COLUMN].tolist(), list(frame.columns[1:]), values)


@dataclass(frozen=True)
class SurvivalRecord:
    subject_id: str
    time: float
    event: bool

    def __post_init__(self):
        if not (math.isfinite(self.time) and self.time > 0):
            raise SurvivalDataError(f"{self.subject_id}: survival time must be finite and positive, got {self.time}")


def record_arrays(records: Sequence[SurvivalRecord]) -> Tuple[np.ndarray, np.ndarray]:
    """(times, events) as float and bool arrays"""
    times = np.array([r.time for r in records], dtype=np.float64)
    events = np.array([r.event for r in records], dtype=bool)
    return times, events


def read_survival_csv(path) -> List[SurvivalRecord]:
    """Columns subject_id,time_days,event(0|1)"""
    header = _leading_comment(path, 'survival table')
    frame = _read_frame(path, 'survival table', header is not None,
                        na_values={'time_days': [''], 'event': ['']})
    required = {SUBJECT_COLUMN, 'time_days', 'event'}
    if not required.issubset(frame.columns):
        raise SurvivalDataError(f"{path}: expected columns {sorted(required)}, got {list(frame.columns)}")
    if not frame['event'].isin([0, 1]).all():
        raise SurvivalDataError(f"{path}: event must be 0 or 1")
    if frame[SUBJECT_COLUMN].duplicated().any():
        raise SurvivalDataError(f"{path}: duplicate subject IDs")
    return [
        SurvivalRecord(str(row.subject_id), float(row.time_days), bool(row.event))
        for row in frame.itertuples(index=False)
    ]


def write_survival_csv(records: Sequence[SurvivalRecord], path) -> None:
    frame = pd.DataFrame({
        SUBJECT_COLUMN: [r.subject_id for r in records],
        'time_days': [r.time for r in records],
        'event': [int(r.event) for r in records],
    })
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')


def align(table: FeatureTable, records: Sequence[SurvivalRecord],
          min_subjects: int = 1) -> Tuple[FeatureTable, List[SurvivalRecord]]:
    """
    Join a table and records on subject_id, keeping the table's order.

    Raises:
        SurvivalDataError: fewer than min_subjects subjects in common
    """
    by_subject = {r.subject_id: r for r in records}
    shared = [s for s in table.subjects if s in by_subject]
    unmatched = len(table.subjects) - len(shared)
    if unmatched:
        logger.warning(f"{unmatched} feature rows have no survival record")
    if len(shared) < min_subjects:
        raise SurvivalDataError(f"only {len(shared)} subjects join between features and survival, need {min_subjects}")
    return table.subset(shared), [by_subject[s] for s in shared]


def parse_name_list(text: Optional[str]) -> List[str]:
    """Comma-separated names from a CLI flag"""
    if not text:
        return []
    names = [n.strip() for n in text.split(',') if n.strip()]
    if len(set(names)) != len(names):
        raise ConfigError(f"duplicate names in {text!r}")
    return names
