"""
Synthetic phantom cohort generation
"""
import logging
from pathlib import Path

from core.exceptions import ConfigError
from core.utils import derive_seed, dump_json_file, load_json_file
from survival.tables import write_survival_csv
from synth.generators import (
    SUBJECT_FILES, subject_amplitudes, subject_phantom_spec, synth_phantom, synth_phantom_survival,
    synth_planted_cohort, write_phantom,
)
from synth.schemas import validate_synth_spec

from ...commands import RDepthCommand, output_dir

logger = logging.getLogger(__name__)


class Command(RDepthCommand):
    help = ('Generate sphere phantoms with known mass effect, a ready-to-run pipeline config, '
            'and optionally a planted-signal survival cohort')

    def add_command_arguments(self, parser):
        parser.add_argument('spec', help='Synth spec file (JSON)')
        parser.add_argument('--output', required=True, help='Output directory')

    def handle(self, *args, **options):
        data = load_json_file(options['spec'])
        if not isinstance(data, dict):
            raise ConfigError(f"{options['spec']}: expected a JSON object")
        is_valid, spec, error = validate_synth_spec(data)
        if not is_valid:
            raise ConfigError(f"Invalid synth spec: {error}")

        out = output_dir(options['output'])
        amplitudes = subject_amplitudes(spec.phantoms, spec.seed)
        subjects = []
        for subject, amplitude in amplitudes.items():
            phantom_spec = subject_phantom_spec(spec.phantoms.template, subject, amplitude, spec.seed)
            write_phantom(synth_phantom(phantom_spec), out / 'subjects' / subject)
            entry = {'id': subject}
            entry.update({kind: str(Path('subjects') / subject / kind) for kind in SUBJECT_FILES})
            subjects.append(entry)
            logger.info(f"Wrote phantom {subject} (amplitude {amplitude:.3f} mm)", extra={'subject': subject})

        if subjects:
            dump_json_file({'subjects': subjects, 'output_dir': 'results'}, out / 'pipeline.json')
            dump_json_file({'amplitude_mm': amplitudes}, out / 'phantoms.json')
        if len(amplitudes) >= 2:
            write_survival_csv(synth_phantom_survival(amplitudes, spec.phantoms, spec.seed),
                               out / 'phantom_survival.csv')

        if spec.cohort is not None:
            table, records, beta = synth_planted_cohort(spec.cohort, derive_seed(spec.seed, 'cohort'))
            table.write_csv(out / 'features.csv')
            write_survival_csv(records, out / 'survival.csv')
            dump_json_file({'beta': beta}, out / 'truth.json')
            logger.info(f"Wrote planted cohort: {len(table.subjects)} subjects, {len(table.names)} features")

        self.stdout.write(f"{out}: {len(subjects)} phantom subject(s)"
                          + (", planted cohort" if spec.cohort is not None else ""))
