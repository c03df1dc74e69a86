"""
Full r-DepTH descriptor extraction
"""
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from core.exceptions import ConfigError

from ...commands import EXIT_DATA, RDepthCommand, band_config, collage_settings, first_set
from ...orchestrator import FAMILIES, ExtractionOrchestrator, ExtractionSettings, debug_stat_names
from ...schemas import load_pipeline_config

logger = logging.getLogger(__name__)


class Command(RDepthCommand):
    help = ('Extract per-subject descriptors (deformation bands, tumor and peri-lesional COLLAGE) '
            'into a one-row-per-subject feature CSV')
    families = FAMILIES

    def add_command_arguments(self, parser):
        parser.add_argument('config', help='Pipeline config file (JSON)')
        parser.add_argument('--output', help='Feature CSV path (default: <output_dir>/features.csv from the config)')
        parser.add_argument('--workers', type=int, default=None,
                            help='Subjects processed in parallel (default: PIPELINE_WORKERS)')
        parser.add_argument('--debug-maps', nargs='?', const='default', choices=['default', 'all'],
                            help='Write band labels and orientation and Haralick maps under '
                                 '<output dir>/maps/<subject>/; "all" writes every Haralick statistic '
                                 'instead of entropy and energy')

    def handle(self, *args, **options):
        config = load_pipeline_config(options['config'])

        if options['output']:
            output = Path(options['output'])
        elif config.output_dir:
            output = Path(config.output_dir) / 'features.csv'
        else:
            raise ConfigError("no --output given and the config has no output_dir")

        workers = first_set(options['workers'], settings.PIPELINE_WORKERS)
        if workers < 1:
            raise ConfigError(f"--workers must be at least 1, got {workers}")

        debug_stats = debug_stat_names(options['debug_maps'])
        extraction = ExtractionSettings(
            bands=band_config(config),
            collage=collage_settings(config),
            families=self.families,
            debug_stats=debug_stats,
            maps_dir=str(output.parent / 'maps') if options['debug_maps'] else None,
        )

        orchestrator = ExtractionOrchestrator(config.subjects, extraction, workers, log_json=options['log_json'])
        table = orchestrator.execute()
        table.write_csv(output)
        logger.info(f"Wrote {table.shape[0]} rows x {table.shape[1]} features to {output}")

        if orchestrator.errors:
            raise CommandError(f"{len(orchestrator.errors)} subject(s) failed: " + '; '.join(orchestrator.errors),
                               returncode=EXIT_DATA)
        if not table.subjects:
            raise CommandError("no subject was extracted", returncode=EXIT_DATA)
        self.stdout.write(f"{output}: {table.shape[0]} subjects, {table.shape[1]} features, "
                          f"{len(orchestrator.skipped)} skipped")
