"""
LASSO-Cox risk models and survival statistics
"""
from .cox import CoxModel, SelectedFeature, cox_objective, fit_lasso_cox, newton_cox, risk_score, risk_scores
from .estimators import concordance_index, hazard_ratio, kaplan_meier, logrank
from .tables import FeatureTable, SurvivalRecord, align, read_survival_csv, write_survival_csv
from .thresholds import ThresholdResult, find_threshold

__all__ = [
    'CoxModel', 'SelectedFeature', 'cox_objective', 'fit_lasso_cox', 'newton_cox', 'risk_score', 'risk_scores',
    'concordance_index', 'hazard_ratio', 'kaplan_meier', 'logrank',
    'FeatureTable', 'SurvivalRecord', 'align', 'read_survival_csv', 'write_survival_csv',
    'ThresholdResult', 'find_threshold',
]
