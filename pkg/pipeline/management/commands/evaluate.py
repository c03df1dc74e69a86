"""
Frozen-model evaluation on a (held-out) cohort
"""
from survival.cox import CoxModel
from survival.tables import align, read_survival_csv

from ...commands import RDepthCommand, output_dir, read_features
from ...reports import evaluate_model, write_reports


class Command(RDepthCommand):
    help = ('Apply a saved model with its frozen standardization and cutoff; write risk scores, '
            'group labels and log-rank, C-index and hazard-ratio reports')

    def add_command_arguments(self, parser):
        parser.add_argument('model', help='model.json written by fit')
        parser.add_argument('features', help='Feature CSV (subject_id first)')
        parser.add_argument('survival', help='Survival CSV: subject_id,time_days,event')
        parser.add_argument('--output', required=True, help='Output directory')
        parser.add_argument('--covariates', help='Clinical covariate CSV joined on subject_id')

    def handle(self, *args, **options):
        model = CoxModel.load(options['model'])
        table = read_features(options['features'], covariates=options['covariates'])
        records = read_survival_csv(options['survival'])
        table, records = align(table, records)

        evaluation = evaluate_model(model, table, records)
        out = output_dir(options['output'])
        summary = write_reports(out, model, evaluation, 'r-DepTH evaluation report')

        p_value = summary['logrank']['p_value'] if summary['logrank'] else None
        self.stdout.write(f"{out}: {len(records)} subjects, C-index={summary['c_index']}, log-rank p={p_value}")
