"""
LASSO-Cox risk model fitting with a risk-group cutoff
"""
import logging

from django.conf import settings

from core.exceptions import SurvivalDataError
from survival.cox import fit_lasso_cox, risk_scores
from survival.tables import align, parse_name_list, read_survival_csv
from survival.thresholds import find_threshold

from ...commands import FAMILY_CHOICES, RDepthCommand, first_set, output_dir, read_features
from ...reports import evaluate_model, write_reports
from ...schemas import load_pipeline_config

logger = logging.getLogger(__name__)

MIN_SUBJECTS = 10


class Command(RDepthCommand):
    help = ('Fit a LASSO-penalized Cox model on a feature table, choose a risk cutoff, '
            'and write model.json plus training reports')

    def add_command_arguments(self, parser):
        parser.add_argument('features', help='Feature CSV (subject_id first)')
        parser.add_argument('survival', help='Survival CSV: subject_id,time_days,event')
        parser.add_argument('--output', required=True, help='Output directory')
        parser.add_argument('--family', choices=FAMILY_CHOICES, default='all',
                            help='Feature family to fit on (default: every column)')
        parser.add_argument('--covariates', help='Clinical covariate CSV joined on subject_id')
        parser.add_argument('--unpenalized', help='Comma-separated columns kept out of the L1 penalty')
        parser.add_argument('--lambda', dest='lam', type=float, default=None,
                            help='Fixed penalty, skips cross-validation ("inf" empties the model)')
        parser.add_argument('--folds', type=int, default=None, help='Cross-validation folds')
        parser.add_argument('--seed', type=int, default=None, help='Fold assignment seed')
        parser.add_argument('--config', help='Pipeline config whose survival section supplies defaults')

    def handle(self, *args, **options):
        survival_options = load_pipeline_config(options['config']).survival if options['config'] else None

        def configured(key):
            return getattr(survival_options, key) if survival_options is not None else None

        lambda_grid = [options['lam']] if options['lam'] is not None else configured('lambda_grid')
        folds = first_set(options['folds'], configured('folds'), settings.SURVIVAL_FOLDS)
        seed = first_set(options['seed'], configured('seed'), settings.SURVIVAL_SEED)
        n_lambda = first_set(configured('n_lambda'), settings.SURVIVAL_N_LAMBDA)
        lambda_ratio = first_set(configured('lambda_ratio'), settings.SURVIVAL_LAMBDA_RATIO)

        table = read_features(options['features'], options['family'], options['covariates'])
        records = read_survival_csv(options['survival'])
        table, records = align(table, records, min_subjects=MIN_SUBJECTS)

        model = fit_lasso_cox(
            table, records,
            lambda_grid=lambda_grid, folds=folds, seed=seed,
            unpenalized=parse_name_list(options['unpenalized']),
            n_lambda=n_lambda, lambda_ratio=lambda_ratio,
            max_sweeps=settings.SURVIVAL_MAX_SWEEPS, tol=settings.SURVIVAL_TOLERANCE,
            family=options['family'],
        )

        search = None
        if model.is_empty:
            logger.warning(f"No feature survived the penalty (lambda={model.lambda_:.6g}); "
                           f"every risk score is zero and no risk threshold is set")
        else:
            try:
                search = find_threshold(risk_scores(model, table), records)
                model.threshold = search.threshold
            except SurvivalDataError as e:
                logger.warning(f"No risk threshold: {e}")

        out = output_dir(options['output'])
        model.save(out / 'model.json')
        evaluation = evaluate_model(model, table, records)
        summary = write_reports(out, model, evaluation, 'r-DepTH training report', search)

        p_value = summary['logrank']['p_value'] if summary['logrank'] else None
        self.stdout.write(f"{out}: {len(model.selected)} feature(s) selected, lambda={model.lambda_:.6g}, "
                          f"log-rank p={p_value}")
