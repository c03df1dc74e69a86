import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from bands.partition import build_bands
from bands.statistics import STAT_NAMES
from core.exceptions import GeometryError, VolumeFormatError
from synth.generators import synth_deformation
from synth.schemas import PhantomSpec
from volumes.io import write_container
from .features import deformation_feature_names, deformation_features
from .fields import DeformationField, load_field, magnitude, write_field


def random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


class MagnitudeTests(SimpleTestCase):

    def test_pythagorean_triple(self):
        data = np.zeros((2, 2, 2, 3))
        data[1, 0, 1] = (3.0, 4.0, 0.0)
        result = magnitude(DeformationField(data))
        self.assertEqual(result.data[1, 0, 1], 5.0)
        self.assertEqual(result.data[0, 0, 0], 0.0)

    def test_matches_direct_recomputation(self):
        rng = np.random.default_rng(3)
        data = rng.normal(scale=4.0, size=(5, 6, 7, 3))
        result = magnitude(DeformationField(data, (1.0, 1.2, 2.0))).data
        for index in np.ndindex(5, 6, 7):
            a, b, c = data[index]
            self.assertLessEqual(abs(result[index] - math.sqrt(a * a + b * b + c * c)), 1e-15 * max(1.0, result[index]))
        self.assertEqual(magnitude(DeformationField(data, (1.0, 1.2, 2.0))).spacing, (1.0, 1.2, 2.0))

    def test_rejects_bad_shapes_and_values(self):
        with self.assertRaises(GeometryError):
            DeformationField(np.zeros((2, 2, 2, 2)))
        data = np.zeros((2, 2, 2, 3))
        data[0, 0, 0, 0] = np.nan
        with self.assertRaises(GeometryError):
            DeformationField(data)


class FieldIoTests(SimpleTestCase):

    def test_write_then_load(self):
        rng = np.random.default_rng(0)
        field = DeformationField(rng.normal(size=(3, 4, 5, 3)), (0.5, 1.0, 2.0))
        with tempfile.TemporaryDirectory() as tmp:
            write_field(field, Path(tmp) / 'def')
            loaded = load_field(Path(tmp) / 'def')
        np.testing.assert_array_equal(loaded.data, field.data)
        self.assertEqual(loaded.spacing, field.spacing)

    def test_component_is_innermost_on_disk(self):
        data = np.zeros((2, 1, 1, 3))
        data[0] = (1.0, 2.0, 3.0)
        data[1] = (4.0, 5.0, 6.0)
        with tempfile.TemporaryDirectory() as tmp:
            write_field(DeformationField(data), Path(tmp) / 'def')
            raw = np.fromfile(Path(tmp) / 'def.volraw', dtype='<f8')
        np.testing.assert_array_equal(raw, [1, 2, 3, 4, 5, 6])

    def test_scalar_container_is_not_a_field(self):
        with tempfile.TemporaryDirectory() as tmp:
            write_container(np.zeros((2, 2, 2)), (1, 1, 1), Path(tmp) / 'scalar', 'f64')
            with self.assertRaises(VolumeFormatError):
                load_field(Path(tmp) / 'scalar')


class DeformationFeatureTests(SimpleTestCase):

    def setUp(self):
        self.spec = PhantomSpec(amplitude_mm=3.0)
        self.field, self.roi = synth_deformation(self.spec)
        self.partition = build_bands(self.roi, 5.0, 12)

    def test_sixty_named_features(self):
        names = deformation_feature_names(12)
        self.assertEqual(len(names), 60)
        self.assertEqual(names[:5], [f"deform_b1_{s}" for s in STAT_NAMES])
        self.assertEqual(names[-1], 'deform_b12_kurtosis')
        features = deformation_features(self.field, self.partition)
        self.assertEqual(list(features), names)
        self.assertFalse(any(math.isnan(v) for v in features.values()))

    def test_zero_field(self):
        zero = DeformationField(np.zeros(self.field.data.shape), self.field.spacing)
        features = deformation_features(zero, self.partition)
        self.assertTrue(all(v == 0.0 for v in features.values()))

    def test_radially_decaying_magnitude(self):
        features = deformation_features(self.field, self.partition)
        means = [features[f"deform_b{j}_mean"] for j in range(1, 13)]
        self.assertTrue(all(a > b for a, b in zip(means, means[1:])))

    def test_small_band_is_missing(self):
        features = deformation_features(self.field, self.partition, min_voxels=10 ** 9)
        self.assertTrue(all(math.isnan(v) for v in features.values()))

    def test_rotation_invariance(self):
        base = deformation_features(self.field, self.partition)
        for seed in range(5):
            rotation = random_rotation(np.random.default_rng(seed))
            rotated = DeformationField(self.field.data @ rotation.T, self.field.spacing)
            features = deformation_features(rotated, self.partition)
            for name, value in base.items():
                self.assertLessEqual(abs(features[name] - value), 1e-12 * max(1.0, abs(value)), name)

    def test_amplitude_scaling(self):
        base = deformation_features(self.field, self.partition)
        s = 2.5
        scaled = deformation_features(DeformationField(self.field.data * s, self.field.spacing), self.partition)
        for j in range(1, 13):
            for stat in ('mean', 'median', 'std'):
                name = f"deform_b{j}_{stat}"
                self.assertAlmostEqual(scaled[name], s * base[name], delta=1e-9 * abs(s * base[name]) + 1e-15)
            for stat in ('skewness', 'kurtosis'):
                name = f"deform_b{j}_{stat}"
                self.assertAlmostEqual(scaled[name], base[name], delta=1e-9)

    def test_grid_mismatch(self):
        other = DeformationField(np.zeros((10, 10, 10, 3)), self.field.spacing)
        with self.assertRaises(GeometryError):
            deformation_features(other, self.partition)

    def test_mass_effect_monotone_for_amplitudes(self):
        for amplitude in (1.0, 2.0, 5.0):
            field, roi = synth_deformation(PhantomSpec(amplitude_mm=amplitude))
            features = deformation_features(field, build_bands(roi, 5.0, 12))
            self.assertGreater(features['deform_b1_mean'], features['deform_b12_mean'])
