import numpy as np
from django.test import SimpleTestCase
from scipy import stats
from scipy.spatial.distance import cdist

from core.exceptions import GeometryError, RDepthError
from volumes.containers import Mask, RoiSet
from .partition import build_bands, distance_transform
from .statistics import first_order


def brute_force_distance(mask: np.ndarray, spacing) -> np.ndarray:
    coords = np.argwhere(np.ones(mask.shape, bool)) * np.asarray(spacing)
    foreground = np.argwhere(mask) * np.asarray(spacing)
    nearest = cdist(coords, foreground).min(axis=1)
    return nearest.reshape(mask.shape)


def sphere(shape, center, radius_mm, spacing=(1.0, 1.0, 1.0)):
    grids = np.meshgrid(*(np.arange(n) * s for n, s in zip(shape, spacing)), indexing='ij')
    r2 = sum((g - c) ** 2 for g, c in zip(grids, center))
    return np.sqrt(r2)


class DistanceTransformTests(SimpleTestCase):

    def test_pythagoras(self):
        mask = np.zeros((6, 6, 2), bool)
        mask[0, 0, 0] = True
        distance = distance_transform(Mask(mask)).data
        self.assertEqual(distance[3, 4, 0], 5.0)
        self.assertEqual(distance[0, 0, 0], 0.0)

    def test_spacing_scaling(self):
        mask = np.zeros((3, 3, 3), bool)
        mask[0, 0, 0] = True
        distance = distance_transform(Mask(mask, (2.0, 1.0, 1.0)))
        self.assertEqual(distance.spacing, (2.0, 1.0, 1.0))
        distance = distance.data
        self.assertEqual(distance[1, 0, 0], 2.0)
        self.assertEqual(distance[0, 1, 0], 1.0)

    def test_empty_mask(self):
        with self.assertRaises(GeometryError):
            distance_transform(Mask(np.zeros((3, 3, 3), bool)))

    def test_matches_brute_force_on_random_masks(self):
        spacing = (1.5, 1.0, 0.75)
        for seed in range(100):
            rng = np.random.default_rng(seed)
            mask = rng.random((16, 16, 16)) < 0.02
            mask[rng.integers(16), rng.integers(16), rng.integers(16)] = True
            expected = brute_force_distance(mask, spacing)
            np.testing.assert_allclose(distance_transform(Mask(mask, spacing)).data, expected, rtol=0, atol=1e-12)


class BuildBandsTests(SimpleTestCase):

    def test_spherical_tumor_first_band(self):
        shape = (60, 60, 60)
        spacing = (2.0, 2.0, 2.0)
        r = sphere(shape, (60.0, 60.0, 60.0), 0, spacing)
        tumor = r <= 10.0
        roi = RoiSet(Mask(np.ones(shape, bool), spacing), Mask(tumor, spacing), Mask(np.zeros(shape, bool), spacing))
        partition = build_bands(roi, 5.0, 12)
        band1 = partition.band(1)
        self.assertTrue(band1.any())
        # distance to the voxelized surface is at most 5 mm, so the shell sits just outside r = 10
        self.assertTrue(np.all(r[band1] > 10.0))
        self.assertTrue(np.all(r[band1] <= 15.0 + 2.0 * np.sqrt(3)))
        self.assertFalse(np.any(partition.labels[tumor]))

    def test_tumor_covering_brain_gives_empty_bands(self):
        shape = (8, 8, 8)
        everything = np.ones(shape, bool)
        roi = RoiSet(Mask(everything), Mask(everything), Mask(np.zeros(shape, bool)))
        partition = build_bands(roi, 5.0, 12)
        self.assertTrue(all(n == 0 for n in partition.counts().values()))

    def test_empty_tumor(self):
        shape = (4, 4, 4)
        roi = RoiSet(Mask(np.ones(shape, bool)), Mask(np.zeros(shape, bool)), Mask(np.zeros(shape, bool)))
        with self.assertRaises(GeometryError):
            build_bands(roi)

    def random_roi(self, seed):
        rng = np.random.default_rng(seed)
        shape = (16, 16, 16)
        r = sphere(shape, rng.uniform(5, 10, 3), 0)
        tumor = r <= rng.uniform(1.5, 3.0)
        peri = (r <= 4.0) & ~tumor & (rng.random(shape) < 0.7)
        brain = (rng.random(shape) < 0.9) | tumor | peri
        return RoiSet(Mask(brain), Mask(tumor), Mask(peri))

    def test_labels_agree_with_brute_force_oracle(self):
        w, m = 2.0, 6
        for seed in range(20):
            roi = self.random_roi(seed)
            lesion = roi.tumor.data | roi.peri.data
            distance = brute_force_distance(lesion, roi.spacing)
            expected = np.zeros(roi.dims, np.uint8)
            for j in range(1, m + 1):
                in_band = roi.brain.data & ~lesion & (distance > (j - 1) * w) & (distance <= j * w)
                expected[in_band] = j
            np.testing.assert_array_equal(build_bands(roi, w, m).labels, expected)

    def test_partition_invariants_and_prefix_stability(self):
        roi = self.random_roi(42)
        full = build_bands(roi, 1.5, 12)
        lesion = roi.lesion.data
        self.assertFalse(np.any(full.labels[lesion]))
        self.assertFalse(np.any(full.labels[~roi.brain.data]))
        short = build_bands(roi, 1.5, 5)
        for j in range(1, 6):
            np.testing.assert_array_equal(short.band(j), full.band(j))
        self.assertFalse(np.any(short.labels > 5))

    def test_shell_counts_track_shell_volume(self):
        shape = (64, 64, 64)
        r = sphere(shape, (32.0, 32.0, 32.0), 0)
        tumor = r <= 10.0
        roi = RoiSet(Mask(np.ones(shape, bool)), Mask(tumor), Mask(np.zeros(shape, bool)))
        partition = build_bands(roi, 6.0, 3)
        radius = 10.0
        for j, n in partition.counts().items():
            inner, outer = radius + (j - 1) * 6.0, radius + j * 6.0
            shell = 4.0 / 3.0 * np.pi * (outer ** 3 - inner ** 3)
            self.assertLess(abs(n - shell) / shell, 0.10)


class FirstOrderTests(SimpleTestCase):

    def test_symmetric_sequence(self):
        result = first_order([1, 2, 3, 4, 5])
        self.assertEqual(result.mean, 3.0)
        self.assertEqual(result.median, 3.0)
        self.assertAlmostEqual(result.std, np.sqrt(2.0), places=14)
        self.assertEqual(result.skewness, 0.0)

    def test_constant_convention(self):
        result = first_order([7, 7, 7])
        self.assertEqual((result.std, result.skewness, result.kurtosis), (0.0, 0.0, 0.0))

    def test_even_length_median(self):
        self.assertEqual(first_order([4, 1, 3, 2]).median, 2.5)

    def test_matches_moment_oracle(self):
        values = [1, 2, 3, 4, 100]
        result = first_order(values)
        self.assertAlmostEqual(result.mean, np.mean(values), delta=1e-12)
        self.assertAlmostEqual(result.median, 3.0, delta=1e-12)
        self.assertAlmostEqual(result.std, np.std(values), delta=1e-12)
        self.assertAlmostEqual(result.skewness, stats.skew(values, bias=True), delta=1e-12)
        self.assertAlmostEqual(result.kurtosis, stats.kurtosis(values, fisher=False, bias=True), delta=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        values = rng.gamma(2.0, size=101)
        a = first_order(values).as_tuple()
        b = first_order(rng.permutation(values)).as_tuple()
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_empty(self):
        with self.assertRaises(RDepthError):
            first_order([])
