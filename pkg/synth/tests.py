import numpy as np
from django.test import SimpleTestCase
from pydantic import ValidationError
from scipy import stats

from core.exceptions import ConfigError
from deform.fields import magnitude
from survival.estimators import concordance_index
from survival.tables import FeatureTable, record_arrays
from .generators import (
    censoring_bound, subject_amplitudes, synth_deformation, synth_feature_table, synth_planted_cohort,
    synth_survival, synth_texture,
)
from .schemas import CohortSpec, PhantomCohortSpec, PhantomSpec, PlantedCohortSpec, TextureSpec, validate_synth_spec


def normal_table(n, p, seed):
    rng = np.random.default_rng(seed)
    return FeatureTable([f"s{i}" for i in range(n)], [f"x{j}" for j in range(p)], rng.standard_normal((n, p)))


class PhantomSpecTests(SimpleTestCase):

    def test_defaults_are_valid(self):
        spec = PhantomSpec()
        self.assertEqual(spec.center, (94.0, 94.0, 94.0))

    def test_radius_must_fit(self):
        with self.assertRaises(ValidationError):
            PhantomSpec(dims=(10, 10, 10), spacing=(1, 1, 1), radius_mm=5.0)

    def test_negative_amplitude_rejected(self):
        with self.assertRaises(ValidationError):
            PhantomSpec(amplitude_mm=-1.0)

    def test_synth_spec_validation(self):
        ok, spec, error = validate_synth_spec({'seed': 3, 'phantoms': {'count': 2}})
        self.assertTrue(ok)
        self.assertEqual(spec.phantoms.count, 2)
        ok, spec, error = validate_synth_spec({'phantoms': {'amplitude_range_mm': [5, 1]}})
        self.assertFalse(ok)
        self.assertIn('amplitude_range_mm', error)


class DeformationPhantomTests(SimpleTestCase):

    def test_radial_profile(self):
        spec = PhantomSpec(amplitude_mm=2.0, decay_mm=10.0)
        field, roi = synth_deformation(spec)
        axes = [np.arange(n) * s - c for n, s, c in zip(spec.dims, spec.spacing, spec.center)]
        r = np.sqrt(sum(g ** 2 for g in np.meshgrid(*axes, indexing='ij')))
        mag = magnitude(field).data
        outside = r > spec.radius_mm
        np.testing.assert_allclose(mag[outside] * np.exp((r[outside] - spec.radius_mm) / 10.0), 2.0, rtol=1e-12)
        self.assertTrue(np.all(mag[~outside] == 0))

    def test_surface_magnitude_equals_amplitude(self):
        spec = PhantomSpec(dims=(33, 33, 33), spacing=(1, 1, 1), center_mm=(16, 16, 16),
                           radius_mm=7.999999, amplitude_mm=4.0)
        field, _ = synth_deformation(spec)
        self.assertAlmostEqual(magnitude(field).data[24, 16, 16], 4.0, places=5)
        np.testing.assert_allclose(field.data[24, 16, 16] / magnitude(field).data[24, 16, 16], [1, 0, 0], atol=1e-12)

    def test_zero_amplitude(self):
        field, _ = synth_deformation(PhantomSpec(amplitude_mm=0.0))
        self.assertFalse(field.data.any())

    def test_masks_are_consistent(self):
        spec = PhantomSpec()
        _, roi = synth_deformation(spec)
        self.assertGreater(roi.tumor.count, 0)
        self.assertGreater(roi.peri.count, 0)
        self.assertFalse((roi.tumor.data & roi.peri.data).any())
        self.assertTrue(np.all(roi.brain.data[roi.lesion.data]))
        self.assertGreater(roi.brain.count, 10 * roi.lesion.count)

    def test_deterministic(self):
        a, _ = synth_deformation(PhantomSpec(seed=5))
        b, _ = synth_deformation(PhantomSpec(seed=5))
        self.assertEqual(a.data.tobytes(), b.data.tobytes())


class TextureTests(SimpleTestCase):

    def test_constant(self):
        vol = synth_texture(PhantomSpec(texture=TextureSpec(kind='constant', base=7.0)))
        self.assertTrue(np.all(vol.data == 7.0))

    def test_oriented_varies_along_direction_only(self):
        vol = synth_texture(PhantomSpec(texture=TextureSpec(kind='oriented', direction=(0, 1, 0))))
        np.testing.assert_array_equal(vol.data[:, 5, :], np.full((48, 48), vol.data[0, 5, 0]))
        self.assertGreater(np.ptp(vol.data[0, :, 0]), 0)

    def test_noise_is_seeded(self):
        spec = PhantomSpec(texture=TextureSpec(kind='noise', noise_sd=10.0), seed=1)
        a = synth_texture(spec).data
        b = synth_texture(spec).data
        c = synth_texture(spec.model_copy(update={'seed': 2})).data
        self.assertEqual(a.tobytes(), b.tobytes())
        self.assertNotEqual(a.tobytes(), c.tobytes())
        self.assertAlmostEqual(a.std(), 10.0, delta=0.5)

    def test_subject_amplitudes_are_stable_and_in_range(self):
        spec = PhantomCohortSpec(count=4, amplitude_range_mm=(1.0, 5.0))
        first = subject_amplitudes(spec, 11)
        self.assertEqual(first, subject_amplitudes(spec, 11))
        self.assertEqual(list(first), ['subj001', 'subj002', 'subj003', 'subj004'])
        self.assertTrue(all(1.0 <= a <= 5.0 for a in first.values()))


class SurvivalGeneratorTests(SimpleTestCase):

    def test_deterministic(self):
        table = normal_table(50, 2, 0)
        spec = CohortSpec(n=50, beta={'x0': 0.7}, seed=9)
        self.assertEqual(synth_survival(table, spec), synth_survival(table, spec))

    def test_null_model_is_uninformative(self):
        table = normal_table(2000, 1, 1)
        records = synth_survival(table, CohortSpec(n=2000, seed=4))
        c = concordance_index(table.column('x0'), records)
        self.assertAlmostEqual(c, 0.5, delta=0.05)

    def test_doubling_hazard_halves_median(self):
        table = normal_table(10_000, 1, 2)
        slow = synth_survival(table, CohortSpec(n=10_000, baseline_hazard=0.01, censoring_rate=0.0, seed=1))
        fast = synth_survival(table, CohortSpec(n=10_000, baseline_hazard=0.02, censoring_rate=0.0, seed=1))
        ratio = np.median(record_arrays(fast)[0]) / np.median(record_arrays(slow)[0])
        self.assertAlmostEqual(ratio, 0.5, delta=0.025)
        self.assertAlmostEqual(np.mean(record_arrays(slow)[0]), 100.0, delta=5.0)
        self.assertTrue(all(r.event for r in slow))

    def test_planted_coefficient_shortens_times(self):
        table = normal_table(500, 1, 3)
        records = synth_survival(table, CohortSpec(n=500, beta={'x0': 1.0}, censoring_rate=0.0, seed=3))
        tau, _ = stats.kendalltau(table.column('x0'), record_arrays(records)[0])
        self.assertLess(tau, 0)

    def test_censoring_rate_is_calibrated(self):
        table = normal_table(5000, 1, 4)
        records = synth_survival(table, CohortSpec(n=5000, beta={'x0': 0.5}, censoring_rate=0.4, seed=5))
        censored = 1 - np.mean(record_arrays(records)[1])
        self.assertAlmostEqual(censored, 0.4, delta=0.03)

    def test_censoring_bound_solves_expected_fraction(self):
        rates = np.array([0.01, 0.02, 0.05])
        c = censoring_bound(rates, 0.25)
        self.assertAlmostEqual(np.mean(-np.expm1(-rates * c) / (rates * c)), 0.25, places=9)

    def test_unknown_coefficient_name(self):
        with self.assertRaises(ConfigError):
            synth_survival(normal_table(5, 1, 0), CohortSpec(n=5, beta={'nope': 1.0}))
        with self.assertRaises(ConfigError):
            synth_survival(normal_table(5, 1, 0), CohortSpec(n=6))

    def test_planted_cohort_layout(self):
        spec = PlantedCohortSpec(n_subjects=20, n_noise=3)
        table, records, beta = synth_planted_cohort(spec, 7)
        self.assertEqual(table.names[:5], ['signal_01', 'signal_02', 'signal_03', 'signal_04', 'signal_05'])
        self.assertEqual(len(table.names), 8)
        self.assertEqual([r.subject_id for r in records], table.subjects)
        self.assertEqual(beta['signal_02'], -0.9)
        again, _ = synth_feature_table(spec, 7)
        np.testing.assert_array_equal(again.values, table.values)
