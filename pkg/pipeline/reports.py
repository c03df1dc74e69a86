"""
Risk-model evaluation and the fit/evaluate report files
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.exceptions import SurvivalDataError
from core.utils import compute_hash, dump_json_file
from survival.cox import CoxModel, risk_scores
from survival.estimators import (
    HazardRatio, KaplanMeierCurve, LogRankResult, concordance_index, hazard_ratio, kaplan_meier, logrank,
)
from survival.tables import FeatureTable, SurvivalRecord
from survival.thresholds import ThresholdResult, partition, split_groups

logger = logging.getLogger(__name__)


@dataclass
class Evaluation:
    subjects: List[str]
    risks: np.ndarray
    records: List[SurvivalRecord]
    high: Optional[np.ndarray] = None
    logrank: Optional[LogRankResult] = None
    c_index: Optional[float] = None
    hazard: Optional[HazardRatio] = None
    curves: Dict[str, KaplanMeierCurve] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)


def evaluate_model(model: CoxModel, table: FeatureTable, records: Sequence[SurvivalRecord]) -> Evaluation:
    """Risk scores with the frozen standardization, then group statistics at the model threshold"""
    records = list(records)
    risks = risk_scores(model, table)
    evaluation = Evaluation(list(table.subjects), risks, records)
    evaluation.curves['all'] = kaplan_meier(records)

    try:
        evaluation.c_index = concordance_index(risks, records)
    except SurvivalDataError as e:
        evaluation.notes.append(f"C-index unavailable: {e}")

    if model.threshold is None:
        evaluation.notes.append("model has no risk threshold; risk groups are undefined")
        return evaluation

    high = split_groups(risks, model.threshold)
    evaluation.high = high
    low_group, high_group = partition(records, high)
    if not low_group or not high_group:
        evaluation.notes.append("all subjects fall in one risk group")
        return evaluation
    evaluation.curves['low'] = kaplan_meier(low_group)
    evaluation.curves['high'] = kaplan_meier(high_group)
    evaluation.logrank = logrank(low_group, high_group)
    try:
        evaluation.hazard = hazard_ratio(high, records)
    except SurvivalDataError as e:
        evaluation.notes.append(f"hazard ratio unavailable: {e}")
    return evaluation


def _number(value):
    """JSON-safe number: None for missing or NaN, 'inf' strings for infinities"""
    if value is None:
        return None
    value = float(value)
    if math.isnan(value):
        return None
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def summary_dict(model: CoxModel, evaluation: Evaluation, search: Optional[ThresholdResult] = None) -> Dict:
    events = sum(r.event for r in evaluation.records)
    summary = {
        'model_id': compute_hash(model.to_dict()),
        'n_subjects': len(evaluation.records),
        'n_events': int(events),
        'lambda': _number(model.lambda_),
        'n_selected': len(model.selected),
        'threshold': _number(model.threshold),
        'c_index': _number(evaluation.c_index),
        'logrank': None,
        'hazard_ratio': None,
        'notes': list(evaluation.notes),
    }
    if evaluation.high is not None:
        summary['n_high_risk'] = int(evaluation.high.sum())
    if evaluation.logrank is not None:
        summary['logrank'] = {'statistic': _number(evaluation.logrank.statistic),
                              'p_value': _number(evaluation.logrank.p_value)}
    if evaluation.hazard is not None:
        hr = evaluation.hazard
        summary['hazard_ratio'] = {'hr': _number(hr.hazard_ratio), 'ci_low': _number(hr.ci_low),
                                   'ci_high': _number(hr.ci_high), 'separated': hr.separated}
    if search is not None:
        summary['threshold_search'] = {'p_value': _number(search.p_value), 'statistic': _number(search.statistic),
                                       'n_candidates': search.n_candidates}
    return summary


def _report_text(title: str, model: CoxModel, evaluation: Evaluation, search: Optional[ThresholdResult]) -> str:
    lines = [title, '=' * len(title), '']
    lines.append(f"subjects: {len(evaluation.records)}  events: {sum(r.event for r in evaluation.records)}")
    lines.append(f"family: {model.family}  lambda: {model.lambda_:.6g}  seed: {model.seed}")
    lines.append('')
    if model.is_empty:
        lines.append('selected features: none (every coefficient shrank to zero)')
    else:
        lines.append(f"selected features: {len(model.selected)}")
        lines.append(f"  {'name':<48} {'coef (std)':>14} {'coef (orig)':>14}  penalized")
        for f in model.selected:
            lines.append(f"  {f.name:<48} {f.coef:>14.6g} {f.original_coef:>14.6g}  {'yes' if f.penalized else 'no'}")
    lines.append('')
    threshold = 'none' if model.threshold is None else f"{model.threshold:.6g}"
    lines.append(f"risk threshold: {threshold}")
    if search is not None:
        lines.append(f"  chosen over {search.n_candidates} candidate cutoffs (p-value uncorrected for the search)")
    if evaluation.logrank is not None:
        lines.append(f"log-rank chi-square: {evaluation.logrank.statistic:.6g}  p: {evaluation.logrank.p_value:.6g}")
    if evaluation.c_index is not None:
        lines.append(f"C-index: {evaluation.c_index:.6g}")
    if evaluation.hazard is not None:
        hr = evaluation.hazard
        flag = '  (separated: unbounded)' if hr.separated else ''
        lines.append(f"hazard ratio (high vs low): {hr.hazard_ratio:.6g}  95% CI [{hr.ci_low:.6g}, {hr.ci_high:.6g}]{flag}")
    for note in evaluation.notes:
        lines.append(f"note: {note}")
    return '\n'.join(lines) + '\n'


def write_reports(directory, model: CoxModel, evaluation: Evaluation, title: str,
                  search: Optional[ThresholdResult] = None) -> Dict:
    """
    report.txt, risk.csv, km.csv and summary.json under directory; returns the summary.

    A model fitted with cross-validation also gets cv.csv, its deviance per lambda.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    if evaluation.high is None:
        groups = [''] * len(evaluation.subjects)
    else:
        groups = ['high' if h else 'low' for h in evaluation.high]
    pd.DataFrame({'subject_id': evaluation.subjects, 'risk': evaluation.risks, 'group': groups}).to_csv(
        directory / 'risk.csv', index=False, float_format='%.17g', lineterminator='\n')

    km_rows = [
        {'group': group, 'time': t, 'at_risk': int(n), 'events': int(d), 'survival': s}
        for group, curve in evaluation.curves.items()
        for t, n, d, s in zip(curve.times, curve.at_risk, curve.events, curve.survival)
    ]
    pd.DataFrame(km_rows, columns=['group', 'time', 'at_risk', 'events', 'survival']).to_csv(
        directory / 'km.csv', index=False, float_format='%.17g', lineterminator='\n')

    if model.cv is not None:
        cv = model.cv
        pd.DataFrame({
            'lambda': cv.lambdas,
            'deviance': cv.deviance,
            'chosen': [int(i == cv.chosen) for i in range(len(cv.lambdas))],
        }).to_csv(directory / 'cv.csv', index=False, float_format='%.17g', lineterminator='\n')

    (directory / 'report.txt').write_text(_report_text(title, model, evaluation, search))
    summary = summary_dict(model, evaluation, search)
    dump_json_file(summary, directory / 'summary.json')
    logger.info(f"Reports written to {directory}")
    return summary
