import json
import logging
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from core.logging import JsonLinesFormatter, restore_formatters
from core.utils import dump_json_file
from survival.cox import CoxModel
from survival.tables import FeatureTable, SurvivalRecord, read_survival_csv, write_survival_csv
from .commands import band_config, collage_settings, select_family
from .orchestrator import init_worker
from .reports import evaluate_model
from .schemas import load_pipeline_config, validate_pipeline_config

SMALL_TEMPLATE = {'dims': [32, 32, 32], 'spacing': [4.0, 4.0, 4.0], 'radius_mm': 10.0,
                  'texture': {'kind': 'oriented', 'direction': [1.0, 1.0, 0.0], 'noise_sd': 5.0}}


def run(command, *args, **options):
    return call_command(command, *args, stdout=StringIO(), **options)


def write_spec(directory, **sections):
    spec = {'seed': 7, 'phantoms': {'count': 3, 'template': SMALL_TEMPLATE}}
    spec.update(sections)
    path = Path(directory) / 'spec.json'
    dump_json_file(spec, path)
    return path


def absolute_config(config_path, edits=None):
    """The synth config with absolute paths, optionally with per-subject overrides"""
    config = load_pipeline_config(config_path)
    subjects = []
    for subject in config.subjects:
        entry = subject.model_dump()
        entry.update((edits or {}).get(subject.id, {}))
        subjects.append(entry)
    return {'subjects': subjects}


class PipelineConfigTests(SimpleTestCase):

    def test_duplicate_subject_ids_rejected(self):
        subject = {'id': 's1', 'brain': 'b', 'tumor': 't', 'peri': 'p'}
        ok, config, error = validate_pipeline_config({'subjects': [subject, subject]})
        self.assertFalse(ok)
        self.assertIn('unique', error)

    def test_bad_band_section_rejected(self):
        subject = {'id': 's1', 'brain': 'b', 'tumor': 't', 'peri': 'p'}
        ok, _, error = validate_pipeline_config({'subjects': [subject], 'bands': {'count': 0}})
        self.assertFalse(ok)
        self.assertIn('bands', error)

    def test_config_values_override_settings(self):
        subject = {'id': 's1', 'brain': 'b', 'tumor': 't', 'peri': 'p'}
        _, config, _ = validate_pipeline_config({'subjects': [subject], 'bands': {'count': 4},
                                                 'collage': {'window': 3}})
        bands = band_config(config)
        self.assertEqual((bands.count, bands.band_width_mm), (4, 5.0))
        collage = collage_settings(config)
        self.assertEqual((collage.window, collage.cooc_window, collage.bins), (3, 3, 64))
        self.assertEqual(band_config().count, 12)

    def test_relative_paths_resolve_against_config_dir(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'cfg.json'
            dump_json_file({'subjects': [{'id': 's1', 'brain': 'a/brain', 'tumor': '/abs/tumor', 'peri': 'p'}]}, path)
            config = load_pipeline_config(path)
        self.assertEqual(config.subjects[0].brain, str(Path(tmp) / 'a/brain'))
        self.assertEqual(config.subjects[0].tumor, '/abs/tumor')

    def test_family_selection(self):
        names = ['deform_b1_mean', 'tumor_collage_theta_mean_energy', 'peri_collage_phi_std_entropy', 'age']
        table = FeatureTable(['a'], names, np.zeros((1, 4)))
        self.assertEqual(select_family(table, 'all').names, names)
        self.assertEqual(select_family(table, 'rdepth').names, names[:3])
        self.assertEqual(select_family(table, 'collage').names, names[1:3])
        self.assertEqual(select_family(table, 'peri').names, names[2:3])


class SynthCommandTests(SimpleTestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def test_writes_subjects_config_and_survival(self):
        run('synth', str(write_spec(self.tmp)), output=str(self.tmp / 'out'))
        out = self.tmp / 'out'
        config = json.loads((out / 'pipeline.json').read_text())
        self.assertEqual([s['id'] for s in config['subjects']], ['subj001', 'subj002', 'subj003'])
        for kind in ('intensity', 'brain', 'tumor', 'peri', 'deformation'):
            self.assertTrue((out / 'subjects' / 'subj003' / f'{kind}.volhdr').exists())
        self.assertEqual(len(read_survival_csv(out / 'phantom_survival.csv')), 3)
        self.assertFalse((out / 'features.csv').exists())

    def test_planted_cohort_section(self):
        spec = write_spec(self.tmp, cohort={'n_subjects': 30, 'n_noise': 5})
        run('synth', str(spec), output=str(self.tmp / 'out'))
        table = FeatureTable.read_csv(self.tmp / 'out' / 'features.csv')
        self.assertEqual(table.shape, (30, 10))
        self.assertEqual([r.subject_id for r in read_survival_csv(self.tmp / 'out' / 'survival.csv')], table.subjects)

    def test_reruns_are_byte_identical(self):
        spec = write_spec(self.tmp, cohort={'n_subjects': 20, 'n_noise': 2})
        run('synth', str(spec), output=str(self.tmp / 'a'))
        run('synth', str(spec), output=str(self.tmp / 'b'))
        for name in ('subjects/subj002/deformation.volraw', 'subjects/subj001/intensity.volraw',
                     'pipeline.json', 'phantom_survival.csv', 'features.csv', 'survival.csv'):
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_invalid_spec_is_a_config_error(self):
        path = self.tmp / 'spec.json'
        dump_json_file({'phantoms': {'template': {'amplitude_mm': -1}}}, path)
        with self.assertRaises(CommandError) as ctx:
            run('synth', str(path), output=str(self.tmp / 'out'))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_missing_output_is_a_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            run('synth', str(write_spec(self.tmp)))
        self.assertEqual(ctx.exception.returncode, 1)


class ExtractCommandTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        tmp = tempfile.TemporaryDirectory()
        cls.addClassCleanup(tmp.cleanup)
        cls.tmp = Path(tmp.name)
        run('synth', str(write_spec(cls.tmp)), output=str(cls.tmp / 'phantoms'))
        cls.config = cls.tmp / 'phantoms' / 'pipeline.json'

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.out = Path(tmp.name)

    def test_three_subjects_give_full_descriptor(self):
        output = self.out / 'features.csv'
        run('extract', str(self.config), output=str(output))
        lines = output.read_text().splitlines()
        self.assertEqual(lines[0], '# rdepth-features v1 columns=320')
        frame = pd.read_csv(output, skiprows=1, dtype={'subject_id': str})
        self.assertEqual(frame.shape, (3, 321))
        self.assertEqual(list(frame['subject_id']), ['subj001', 'subj002', 'subj003'])
        self.assertEqual(frame.columns[1], 'deform_b1_mean')
        self.assertEqual(frame.columns[61], 'tumor_collage_theta_mean_energy')
        self.assertEqual(frame.columns[191], 'peri_collage_theta_mean_energy')
        self.assertTrue(all(frame['deform_b1_mean'] > frame['deform_b2_mean']))

    def test_log_json_writes_one_object_per_line(self):
        stream = StringIO()
        handler = logging.StreamHandler(stream)
        root = logging.getLogger()
        level = root.level
        root.addHandler(handler)
        root.setLevel(logging.INFO)
        try:
            run('extract', str(self.config), output=str(self.out / 'features.csv'), workers=1, log_json=True)
        finally:
            root.removeHandler(handler)
            root.setLevel(level)

        entries = [json.loads(line) for line in stream.getvalue().splitlines()]
        self.assertTrue(entries)
        for entry in entries:
            self.assertTrue({'ts', 'level', 'logger', 'message'} <= set(entry))
        extracted = [e['subject'] for e in entries if e['logger'] == 'pipeline.orchestrator' and 'subject' in e]
        self.assertEqual(extracted, ['subj001', 'subj002', 'subj003'])
        self.assertIsNone(handler.formatter)

    def test_worker_initializer_switches_to_json_lines(self):
        root = logging.getLogger()
        level = root.level
        previous = [(handler, handler.formatter) for handler in root.handlers]
        try:
            init_worker(True, logging.DEBUG)
            self.assertEqual(root.level, logging.DEBUG)
            self.assertTrue(root.handlers)
            for handler in root.handlers:
                self.assertIsInstance(handler.formatter, JsonLinesFormatter)
        finally:
            restore_formatters(previous)
            for handler in root.handlers[len(previous):]:
                root.removeHandler(handler)
            root.setLevel(level)

    def test_reruns_and_worker_counts_are_byte_identical(self):
        outputs = []
        for name, workers in (('a.csv', 1), ('b.csv', 1), ('c.csv', 2)):
            run('extract', str(self.config), output=str(self.out / name), workers=workers)
            outputs.append((self.out / name).read_bytes())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[0], outputs[2])

    def test_missing_deformation_skips_subject(self):
        config = absolute_config(self.config, {'subj002': {'deformation': str(self.out / 'absent')}})
        dump_json_file(config, self.out / 'cfg.json')
        with self.assertLogs('pipeline.orchestrator', level='WARNING') as logs:
            run('extract', str(self.out / 'cfg.json'), output=str(self.out / 'features.csv'))
        self.assertTrue(any('subj002' in line and 'deformation' in line for line in logs.output))
        table = FeatureTable.read_csv(self.out / 'features.csv')
        self.assertEqual(table.subjects, ['subj001', 'subj003'])

    def test_unreadable_input_is_a_data_error(self):
        bad = self.out / 'tumor'
        (self.out / 'tumor.volhdr').write_text('{not a header')
        config = absolute_config(self.config, {'subj001': {'tumor': str(bad)}})
        dump_json_file(config, self.out / 'cfg.json')
        with self.assertRaises(CommandError) as ctx:
            run('extract', str(self.out / 'cfg.json'), output=str(self.out / 'features.csv'))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertEqual(FeatureTable.read_csv(self.out / 'features.csv').subjects, ['subj002', 'subj003'])

    def test_invalid_config_is_a_config_error(self):
        dump_json_file({'subjects': []}, self.out / 'cfg.json')
        with self.assertRaises(CommandError) as ctx:
            run('extract', str(self.out / 'cfg.json'), output=str(self.out / 'features.csv'))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_family_subcommands(self):
        run('extract_deform', str(self.config), output=str(self.out / 'deform.csv'))
        run('extract_collage', str(self.config), output=str(self.out / 'collage.csv'))
        full = self.out / 'full.csv'
        run('extract', str(self.config), output=str(full))
        deform = FeatureTable.read_csv(self.out / 'deform.csv')
        collage = FeatureTable.read_csv(self.out / 'collage.csv')
        self.assertEqual(deform.shape, (3, 60))
        self.assertEqual(collage.shape, (3, 260))
        merged = deform.merge(collage)
        np.testing.assert_array_equal(merged.values, FeatureTable.read_csv(full).values)

    def test_debug_maps(self):
        output = self.out / 'features.csv'
        run('extract', str(self.config), output=str(output), debug_maps='default')
        maps = self.out / 'maps' / 'subj001'
        for stem in ('bands', 'tumor_theta', 'peri_phi', 'tumor_theta_entropy', 'peri_phi_energy'):
            self.assertTrue((maps / f'{stem}.volhdr').exists(), stem)
        self.assertFalse((maps / 'tumor_theta_contrast.volhdr').exists())


class FitEvaluateCommandTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        tmp = tempfile.TemporaryDirectory()
        cls.addClassCleanup(tmp.cleanup)
        cls.tmp = Path(tmp.name)
        spec = write_spec(cls.tmp, phantoms={'count': 0}, cohort={'n_subjects': 200, 'n_noise': 10})
        run('synth', str(spec), output=str(cls.tmp / 'cohort'))
        cls.features = str(cls.tmp / 'cohort' / 'features.csv')
        cls.survival = str(cls.tmp / 'cohort' / 'survival.csv')

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.out = Path(tmp.name)

    def summary(self, directory):
        return json.loads((Path(directory) / 'summary.json').read_text())

    def test_planted_cohort_separates_risk_groups(self):
        run('fit', self.features, self.survival, output=str(self.out))
        summary = self.summary(self.out)
        self.assertLess(summary['logrank']['p_value'], 0.01)
        self.assertGreater(summary['c_index'], 0.7)
        model = CoxModel.load(self.out / 'model.json')
        for name in ('signal_01', 'signal_02', 'signal_03', 'signal_04', 'signal_05'):
            self.assertIn(name, model.names)
        report = (self.out / 'report.txt').read_text()
        self.assertIn('signal_01', report)
        self.assertIn('hazard ratio', report)

        cv = pd.read_csv(self.out / 'cv.csv')
        self.assertEqual(list(cv.columns), ['lambda', 'deviance', 'chosen'])
        self.assertGreater(len(cv), 1)
        self.assertEqual(int(cv['chosen'].sum()), 1)
        chosen = cv[cv['chosen'] == 1].iloc[0]
        self.assertEqual(chosen['lambda'], summary['lambda'])
        self.assertEqual(chosen['deviance'], cv['deviance'].min())

    def test_fixed_lambda_is_deterministic(self):
        for name in ('a', 'b'):
            run('fit', self.features, self.survival, output=str(self.out / name), lam=0.05, seed=3)
        for name in ('model.json', 'risk.csv', 'km.csv', 'summary.json', 'report.txt'):
            self.assertEqual((self.out / 'a' / name).read_bytes(), (self.out / 'b' / name).read_bytes(), name)
        self.assertFalse((self.out / 'a' / 'cv.csv').exists())

    def test_evaluate_on_training_set_reproduces_fit(self):
        run('fit', self.features, self.survival, output=str(self.out / 'fit'), lam=0.05)
        run('evaluate', str(self.out / 'fit' / 'model.json'), self.features, self.survival,
            output=str(self.out / 'eval'))
        fitted, evaluated = self.summary(self.out / 'fit'), self.summary(self.out / 'eval')
        for key in ('model_id', 'logrank', 'c_index', 'hazard_ratio', 'threshold', 'n_high_risk', 'n_selected'):
            self.assertEqual(fitted[key], evaluated[key], key)
        for name in ('risk.csv', 'km.csv'):
            self.assertEqual((self.out / 'fit' / name).read_bytes(), (self.out / 'eval' / name).read_bytes(), name)

    def test_infinite_lambda_gives_empty_model(self):
        with self.assertLogs('pipeline', level='WARNING') as logs:
            run('fit', self.features, self.survival, output=str(self.out), lam=math.inf)
        self.assertTrue(any('No feature survived' in line for line in logs.output))
        model = json.loads((self.out / 'model.json').read_text(), parse_constant=float)
        self.assertEqual(model['features'], [])
        self.assertEqual(model['lambda'], math.inf)
        self.assertIsNone(model['threshold'])
        self.assertIn('selected features: none', (self.out / 'report.txt').read_text())
        summary = self.summary(self.out)
        self.assertEqual(summary['lambda'], 'inf')
        self.assertIsNone(summary['logrank'])
        self.assertEqual(summary['c_index'], 0.5)

    def test_unpenalized_covariate_survives_infinite_lambda(self):
        table = FeatureTable.read_csv(self.features)
        rng = np.random.default_rng(0)
        covariates = FeatureTable(table.subjects, ['age'], rng.normal(60, 10, (len(table.subjects), 1)))
        covariates.write_csv(self.out / 'clinical.csv')
        run('fit', self.features, self.survival, output=str(self.out / 'fit'), lam=math.inf,
            covariates=str(self.out / 'clinical.csv'), unpenalized='age')
        model = CoxModel.load(self.out / 'fit' / 'model.json')
        self.assertEqual(model.names, ['age'])
        self.assertFalse(model.selected[0].penalized)
        self.assertIsNotNone(model.threshold)

    def test_held_out_half_is_concordant(self):
        table = FeatureTable.read_csv(self.features)
        records = read_survival_csv(self.survival)
        train, test = table.subjects[:100], table.subjects[100:]
        for name, subjects in (('train', train), ('test', test)):
            table.subset(subjects).write_csv(self.out / f'{name}_features.csv')
            write_survival_csv([r for r in records if r.subject_id in set(subjects)], self.out / f'{name}_survival.csv')
        run('fit', str(self.out / 'train_features.csv'), str(self.out / 'train_survival.csv'),
            output=str(self.out / 'fit'), lam=0.05)
        run('evaluate', str(self.out / 'fit' / 'model.json'), str(self.out / 'test_features.csv'),
            str(self.out / 'test_survival.csv'), output=str(self.out / 'eval'))
        self.assertGreater(self.summary(self.out / 'eval')['c_index'], 0.7)
        risk = pd.read_csv(self.out / 'eval' / 'risk.csv', dtype={'subject_id': str})
        self.assertEqual(list(risk['subject_id']), test)
        self.assertTrue(set(risk['group']) <= {'low', 'high'})

    def test_shuffled_survival_labels_are_not_separated(self):
        run('fit', self.features, self.survival, output=str(self.out), lam=0.05)
        model = CoxModel.load(self.out / 'model.json')
        table = FeatureTable.read_csv(self.features)
        records = read_survival_csv(self.survival)
        not_significant = 0
        for seed in range(50):
            order = np.random.default_rng(seed).permutation(len(records))
            shuffled = [SurvivalRecord(r.subject_id, records[k].time, records[k].event)
                        for r, k in zip(records, order)]
            evaluation = evaluate_model(model, table, shuffled)
            not_significant += evaluation.logrank.p_value > 0.05
        self.assertGreaterEqual(not_significant, 45)

    def test_family_without_columns_is_a_data_error(self):
        with self.assertRaises(CommandError) as ctx:
            run('fit', self.features, self.survival, output=str(self.out), family='deform')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_too_few_subjects_is_a_data_error(self):
        table = FeatureTable.read_csv(self.features)
        table.subset(table.subjects[:5]).write_csv(self.out / 'small.csv')
        with self.assertRaises(CommandError) as ctx:
            run('fit', str(self.out / 'small.csv'), self.survival, output=str(self.out / 'fit'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_evaluate_rejects_missing_model_features(self):
        run('fit', self.features, self.survival, output=str(self.out / 'fit'), lam=0.05)
        table = FeatureTable.read_csv(self.features)
        table.select(['noise_01']).write_csv(self.out / 'partial.csv')
        with self.assertRaises(CommandError) as ctx:
            run('evaluate', str(self.out / 'fit' / 'model.json'), str(self.out / 'partial.csv'), self.survival,
                output=str(self.out / 'eval'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_corrupt_model_is_a_data_error(self):
        (self.out / 'model.json').write_text('{"features": 3}')
        with self.assertRaises(CommandError) as ctx:
            run('evaluate', str(self.out / 'model.json'), self.features, self.survival, output=str(self.out / 'eval'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_arguments_are_usage_errors(self):
        with self.assertRaises(CommandError) as ctx:
            run('fit', self.features)
        self.assertEqual(ctx.exception.returncode, 1)
        with self.assertRaises(CommandError) as ctx:
            run('fit', self.features, self.survival, '--family', 'bogus', output=str(self.out))
        self.assertEqual(ctx.exception.returncode, 1)
