import json
import logging
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from .exceptions import ConfigError
from .logging import JsonLinesFormatter, restore_formatters, use_json_lines
from .utils import compute_hash, derive_seed, load_json_file


class UtilsTests(SimpleTestCase):

    def test_compute_hash_ignores_key_order(self):
        self.assertEqual(compute_hash({'a': 1, 'b': 2}), compute_hash({'b': 2, 'a': 1}))

    def test_derive_seed_is_stable_and_key_dependent(self):
        self.assertEqual(derive_seed(7, 'subj-1'), derive_seed(7, 'subj-1'))
        self.assertNotEqual(derive_seed(7, 'subj-1'), derive_seed(7, 'subj-2'))
        self.assertNotEqual(derive_seed(7, 'subj-1'), derive_seed(8, 'subj-1'))

    def test_load_json_file_errors(self):
        with tempfile.TemporaryDirectory() as tmp:
            bad = Path(tmp) / 'bad.json'
            bad.write_text('{oops')
            with self.assertRaises(ConfigError):
                load_json_file(bad)
            with self.assertRaises(ConfigError):
                load_json_file(Path(tmp) / 'missing.json')


class JsonLinesFormatterTests(SimpleTestCase):

    def test_record_with_extra_fields(self):
        record = logging.LogRecord('pipeline', logging.WARNING, __file__, 1, 'skipped %s', ('s1',), None)
        record.subject_id = 's1'
        line = JsonLinesFormatter().format(record)
        payload = json.loads(line)
        self.assertEqual(payload['message'], 'skipped s1')
        self.assertEqual(payload['level'], 'WARNING')
        self.assertEqual(payload['subject_id'], 's1')
        self.assertNotIn('\n', line)

    def test_use_json_lines_and_restore(self):
        logger = logging.getLogger('rdepth.test.jsonlines')
        handler = logging.StreamHandler()
        plain = logging.Formatter('%(message)s')
        handler.setFormatter(plain)
        logger.addHandler(handler)
        try:
            previous = use_json_lines(logger)
            self.assertIsInstance(handler.formatter, JsonLinesFormatter)
            restore_formatters(previous)
            self.assertIs(handler.formatter, plain)
        finally:
            logger.removeHandler(handler)
