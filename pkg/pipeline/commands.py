"""
Shared base for the r-DepTH management commands
"""
import logging
import sys
from pathlib import Path
from typing import Optional

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from pydantic import ValidationError

from bands.schemas import BandConfig
from collage.schemas import CollageSettings
from core.exceptions import ConfigError, RDepthError, SurvivalDataError
from core.logging import restore_formatters, use_json_lines
from survival.tables import FeatureTable

from .schemas import PipelineConfig

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_DATA = 2

FAMILY_PREFIXES = {
    'rdepth': ('deform_', 'tumor_collage_', 'peri_collage_'),
    'deform': ('deform_',),
    'tumor': ('tumor_collage_',),
    'peri': ('peri_collage_',),
    'collage': ('tumor_collage_', 'peri_collage_'),
}
FAMILY_CHOICES = ('all',) + tuple(FAMILY_PREFIXES)


class RDepthCommand(BaseCommand):
    """
    Exit codes: 0 success, 1 usage or config error, 2 data error.

    Subclasses implement add_command_arguments and handle; toolkit errors
    raised from handle are mapped onto CommandError return codes.
    """
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = self._usage_error(parser)
        return parser

    @staticmethod
    def _usage_error(parser):
        def error(message):
            if parser.called_from_command_line:
                parser.print_usage(sys.stderr)
                parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)
        return error

    def add_arguments(self, parser):
        parser.add_argument('--log-json', action='store_true',
                            help='Emit the log stream as one JSON object per line')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def execute(self, *args, **options):
        previous = use_json_lines() if options.get('log_json') else None
        try:
            return super().execute(*args, **options)
        except ConfigError as e:
            logger.error(str(e))
            raise CommandError(str(e), returncode=EXIT_USAGE) from e
        except RDepthError as e:
            logger.error(str(e))
            raise CommandError(str(e), returncode=EXIT_DATA) from e
        finally:
            if previous is not None:
                restore_formatters(previous)


def band_config(config: Optional[PipelineConfig] = None) -> BandConfig:
    """Band parameters: config file values over Django settings"""
    values = {
        'band_width_mm': settings.RDEPTH_BAND_WIDTH_MM,
        'count': settings.RDEPTH_BAND_COUNT,
        'min_voxels': settings.RDEPTH_MIN_BAND_VOXELS,
    }
    if config is not None and config.bands is not None:
        values.update(config.bands)
    try:
        return BandConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid band settings: {e}") from e


def collage_settings(config: Optional[PipelineConfig] = None) -> CollageSettings:
    values = {
        'window': settings.COLLAGE_WINDOW,
        'bins': settings.COLLAGE_BINS,
        'min_roi_voxels': settings.COLLAGE_MIN_ROI_VOXELS,
    }
    if config is not None and config.collage is not None:
        values.update(config.collage)
    try:
        return CollageSettings(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid COLLAGE settings: {e}") from e


def first_set(*values):
    """First value that is not None (CLI flag, then config, then setting)"""
    for value in values:
        if value is not None:
            return value
    return None


def select_family(table: FeatureTable, family: str) -> FeatureTable:
    """Columns of one feature family; 'all' keeps every column"""
    if family == 'all':
        return table
    selected = table.select_prefix(FAMILY_PREFIXES[family])
    if not selected.names:
        raise SurvivalDataError(f"no '{family}' feature columns in the table")
    return selected


def read_features(path, family: str = 'all', covariates=None) -> FeatureTable:
    """Family columns of a feature table, with a covariate table joined on subject_id when given"""
    table = select_family(FeatureTable.read_csv(path), family)
    if covariates:
        table = table.merge(FeatureTable.read_csv(covariates))
    return table


def output_dir(path) -> Path:
    directory = Path(path)
    if directory.exists() and not directory.is_dir():
        raise ConfigError(f"output {directory} exists and is not a directory")
    directory.mkdir(parents=True, exist_ok=True)
    return directory
