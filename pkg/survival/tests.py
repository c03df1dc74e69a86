import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from core.exceptions import ConfigError, ModelFileError, SurvivalDataError
from synth.generators import synth_planted_cohort, synth_survival
from synth.schemas import CohortSpec, PlantedCohortSpec
from .cox import (
    CoordinateDescent, CoxModel, SelectedFeature, Standardization, cox_objective, fit_lasso_cox, lambda_path,
    newton_cox, risk_score, risk_scores, stratified_folds,
)
from .estimators import concordance_index, hazard_ratio, kaplan_meier, logrank
from .tables import (
    FeatureTable, SurvivalRecord, align, parse_name_list, read_survival_csv, record_arrays, write_survival_csv,
)
from .thresholds import PERCENTILES, find_threshold, partition, split_groups


def make_records(times, events, prefix='s'):
    return [SurvivalRecord(f"{prefix}{i}", float(t), bool(e)) for i, (t, e) in enumerate(zip(times, events))]


def random_instance(rng, n, p, ties=True):
    X = rng.standard_normal((n, p))
    times = rng.integers(1, max(2, n // 3), size=n) if ties else rng.exponential(100, size=n) + 1e-3
    events = rng.random(n) < 0.7
    events[0] = True
    return X, make_records(times, events)


def breslow_nll(beta, X, records):
    times, events = record_arrays(records)
    eta = X @ beta
    total = 0.0
    for i in np.flatnonzero(events):
        at_risk = times >= times[i]
        total -= eta[i] - math.log(np.exp(eta[at_risk]).sum())
    return total


def all_pairs_cindex(risks, records):
    concordant = 0.0
    permissible = 0
    for i, a in enumerate(records):
        for j, b in enumerate(records):
            if a.event and a.time < b.time:
                permissible += 1
                if risks[i] > risks[j]:
                    concordant += 1
                elif risks[i] == risks[j]:
                    concordant += 0.5
    return concordant / permissible


class FeatureTableTests(SimpleTestCase):

    def test_csv_write_then_read(self):
        table = FeatureTable(['a', 'b'], ['x', 'y'], [[1.5, math.nan], [0.1, -2.0]])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            table.write_csv(path)
            lines = path.read_text().splitlines()
            loaded = FeatureTable.read_csv(path)
        self.assertEqual(lines[0], '# rdepth-features v1 columns=2')
        self.assertEqual(lines[1], 'subject_id,x,y')
        self.assertEqual(lines[2], 'a,1.5,')
        self.assertEqual(loaded.subjects, ['a', 'b'])
        np.testing.assert_array_equal(loaded.values, table.values)

    def test_numeric_looking_subject_ids_stay_strings(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            path.write_text('subject_id,x\n007,1\n')
            self.assertEqual(FeatureTable.read_csv(path).subjects, ['007'])

    def test_hash_and_na_subject_ids_read_verbatim(self):
        table = FeatureTable(['pt#1', 'NA', 'p3'], ['x', 'y'], [[1.0, 2.0], [3.0, math.nan], [5.0, 6.0]])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            table.write_csv(path)
            loaded = FeatureTable.read_csv(path)
        self.assertEqual(loaded.subjects, ['pt#1', 'NA', 'p3'])
        np.testing.assert_array_equal(loaded.values, table.values)

    def test_unknown_header_version_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            path.write_text('# rdepth-features v9 columns=1\nsubject_id,x\na,1\n')
            with self.assertRaises(SurvivalDataError):
                FeatureTable.read_csv(path)

    def test_empty_subject_id_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            path.write_text('subject_id,x\n,1\n')
            with self.assertRaises(SurvivalDataError):
                FeatureTable.read_csv(path)

    def test_duplicate_names_rejected(self):
        with self.assertRaises(SurvivalDataError):
            FeatureTable(['a'], ['x', 'x'], [[1, 2]])

    def test_merge_keeps_shared_subjects(self):
        left = FeatureTable(['a', 'b', 'c'], ['x'], [[1], [2], [3]])
        right = FeatureTable(['c', 'a'], ['age'], [[70], [50]])
        with self.assertLogs('survival.tables', 'WARNING'):
            merged = left.merge(right)
        self.assertEqual(merged.subjects, ['a', 'c'])
        self.assertEqual(merged.row('c'), {'x': 3.0, 'age': 70.0})

    def test_select_prefix(self):
        table = FeatureTable(['a'], ['deform_b1_mean', 'tumor_collage_x', 'peri_collage_y'], [[1, 2, 3]])
        self.assertEqual(table.select_prefix(['tumor_', 'peri_']).names, ['tumor_collage_x', 'peri_collage_y'])

    def test_parse_name_list(self):
        self.assertEqual(parse_name_list(' age, gender '), ['age', 'gender'])
        self.assertEqual(parse_name_list(None), [])
        with self.assertRaises(ConfigError):
            parse_name_list('age,age')


class SurvivalRecordTests(SimpleTestCase):

    def test_time_must_be_positive(self):
        with self.assertRaises(SurvivalDataError):
            SurvivalRecord('a', 0.0, True)
        with self.assertRaises(SurvivalDataError):
            SurvivalRecord('a', math.inf, False)

    def test_csv_write_then_read(self):
        records = make_records([10.5, 3.0], [True, False])
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'survival.csv'
            write_survival_csv(records, path)
            self.assertEqual(path.read_text().splitlines()[0], 'subject_id,time_days,event')
            self.assertEqual(read_survival_csv(path), records)

    def test_hash_and_na_subject_ids_read_verbatim(self):
        records = [SurvivalRecord('pt#1', 10.0, True), SurvivalRecord('NA', 20.0, False)]
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'survival.csv'
            write_survival_csv(records, path)
            self.assertEqual(read_survival_csv(path), records)

    def test_missing_event_flag(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'survival.csv'
            path.write_text('subject_id,time_days,event\na,3,\n')
            with self.assertRaises(SurvivalDataError):
                read_survival_csv(path)

    def test_bad_event_flag(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'survival.csv'
            path.write_text('subject_id,time_days,event\na,3,2\n')
            with self.assertRaises(SurvivalDataError):
                read_survival_csv(path)

    def test_align_requires_enough_subjects(self):
        table = FeatureTable(['a', 'b'], ['x'], [[1], [2]])
        records = make_records([1.0], [True], prefix='zz')
        with self.assertRaises(SurvivalDataError):
            align(table, records, min_subjects=1)


class CoxObjectiveTests(SimpleTestCase):

    def test_gradient_at_zero(self):
        rng = np.random.default_rng(0)
        X, records = random_instance(rng, 25, 3)
        times, events = record_arrays(records)
        expected = np.zeros(3)
        for i in np.flatnonzero(events):
            expected -= X[i] - X[times >= times[i]].mean(axis=0)
        _, gradient = cox_objective(np.zeros(3), X, records)
        np.testing.assert_allclose(gradient, expected, rtol=1e-12, atol=1e-12)

    def test_two_subjects_one_event(self):
        X = np.array([[0.7], [-1.2]])
        records = make_records([1.0, 2.0], [True, False])
        for beta in (-1.5, 0.0, 0.4, 2.0):
            value, _ = cox_objective(np.array([beta]), X, records)
            expected = -(0.7 * beta - math.log(math.exp(0.7 * beta) + math.exp(-1.2 * beta)))
            self.assertAlmostEqual(value, expected, places=12)

    def test_value_matches_breslow_loop_with_ties(self):
        rng = np.random.default_rng(1)
        X, records = random_instance(rng, 30, 4)
        beta = rng.normal(size=4)
        self.assertAlmostEqual(cox_objective(beta, X, records)[0], breslow_nll(beta, X, records), places=9)

    def test_gradient_matches_finite_differences(self):
        h = 1e-6
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(5, 51))
            p = int(rng.integers(1, 21))
            X, records = random_instance(rng, n, p)
            beta = rng.normal(scale=0.3, size=p)
            _, gradient = cox_objective(beta, X, records)
            numeric = np.zeros(p)
            for j in range(p):
                step = np.zeros(p)
                step[j] = h
                numeric[j] = (cox_objective(beta + step, X, records)[0]
                              - cox_objective(beta - step, X, records)[0]) / (2 * h)
            error = np.linalg.norm(numeric - gradient) / max(np.linalg.norm(gradient), 1.0)
            self.assertLess(error, 1e-5, f"seed {seed}")

    def test_all_censored(self):
        with self.assertRaises(SurvivalDataError):
            cox_objective(np.zeros(1), np.ones((3, 1)), make_records([1, 2, 3], [False] * 3))


class CoordinateDescentTests(SimpleTestCase):

    def setUp(self):
        rng = np.random.default_rng(11)
        X = rng.standard_normal((80, 8))
        self.Z = (X - X.mean(axis=0)) / X.std(axis=0)
        table = FeatureTable([f"s{i}" for i in range(80)], [f"f{j}" for j in range(8)], self.Z)
        self.records = synth_survival(table, CohortSpec(n=80, beta={'f0': 1.0, 'f3': -0.8}, seed=2))
        self.times, self.events = record_arrays(self.records)

    def test_objective_never_increases(self):
        solver = CoordinateDescent(self.Z, self.times, self.events)
        for lam in lambda_path(solver.lambda_max(np.zeros(8)), 10, 0.01):
            history = solver.fit(lam).history
            self.assertTrue(all(b <= a for a, b in zip(history, history[1:])))

    def test_kkt_conditions_at_convergence(self):
        solver = CoordinateDescent(self.Z, self.times, self.events, tol=1e-9)
        lam_max = solver.lambda_max(np.zeros(8))
        for lam in (0.5 * lam_max, 0.1 * lam_max, 0.02 * lam_max):
            result = solver.fit(lam)
            self.assertTrue(result.converged)
            gradient = solver.smooth_gradient(result.beta)
            for g, b in zip(gradient, result.beta):
                if b != 0:
                    self.assertAlmostEqual(abs(g), lam, delta=1e-4)
                    self.assertLess(g * b, 0)
                else:
                    self.assertLessEqual(abs(g), lam + 1e-4)

    def test_lambda_max_zeroes_everything(self):
        solver = CoordinateDescent(self.Z, self.times, self.events)
        lam = solver.lambda_max(np.zeros(8))
        self.assertFalse(solver.fit(lam).beta.any())
        self.assertTrue(solver.fit(0.9 * lam).beta.any())

    def test_infinite_lambda_keeps_unpenalized_only(self):
        penalized = [True] * 7 + [False]
        solver = CoordinateDescent(self.Z, self.times, self.events, penalized)
        beta = solver.fit(math.inf).beta
        self.assertFalse(beta[:7].any())
        self.assertNotEqual(beta[7], 0)

    def test_stratified_folds(self):
        folds = stratified_folds(self.events, 5, 0)
        np.testing.assert_array_equal(folds, stratified_folds(self.events, 5, 0))
        for k in range(5):
            self.assertLessEqual(abs(self.events[folds == k].sum() - self.events.sum() / 5), 1)


class FitLassoCoxTests(SimpleTestCase):

    def test_zero_lambda_matches_newton(self):
        rng = np.random.default_rng(5)
        X = rng.normal(loc=[3.0, -1.0], scale=[2.0, 0.5], size=(20, 2))
        table = FeatureTable([f"s{i}" for i in range(20)], ['a', 'b'], X)
        records = synth_survival(table, CohortSpec(n=20, beta={'a': 0.3, 'b': -0.5}, censoring_rate=0.2, seed=1))
        model = fit_lasso_cox(table, records, lambda_grid=[0.0], tol=1e-12)
        oracle = newton_cox(X, *record_arrays(records))
        self.assertEqual(model.names, ['a', 'b'])
        np.testing.assert_allclose([f.original_coef for f in model.selected], oracle.beta, rtol=1e-6)

    def test_infinite_lambda_selects_nothing(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=60, n_noise=5), 1)
        model = fit_lasso_cox(table, records, lambda_grid=[math.inf])
        self.assertTrue(model.is_empty)
        self.assertEqual(model.lambda_, math.inf)
        self.assertTrue(np.all(risk_scores(model, table) == 0))

    def test_unpenalized_covariate_survives_full_shrinkage(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=60, n_noise=5), 2)
        model = fit_lasso_cox(table, records, lambda_grid=[math.inf], unpenalized=['signal_01'])
        self.assertEqual(model.names, ['signal_01'])
        self.assertFalse(model.selected[0].penalized)

    def test_constant_feature_dropped_with_warning(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=40, n_noise=2), 3)
        values = np.hstack([table.values, np.full((40, 1), 4.2)])
        table = FeatureTable(table.subjects, table.names + ['flat'], values)
        with self.assertLogs('survival.cox', 'WARNING') as logs:
            model = fit_lasso_cox(table, records, n_lambda=5)
        self.assertTrue(any('flat' in line for line in logs.output))
        self.assertNotIn('flat', model.names)

    def test_missing_values_take_training_median(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=40, n_noise=2), 4)
        values = table.values.copy()
        values[0, 0] = math.nan
        standardization, dropped = Standardization.fit(FeatureTable(table.subjects, table.names, values))
        self.assertEqual(dropped, [])
        self.assertEqual(standardization.median[0], np.median(values[1:, 0]))

    def test_needs_two_events(self):
        table = FeatureTable(['0', '1', '2'], ['x'], [[1], [2], [3]])
        with self.assertRaises(SurvivalDataError):
            fit_lasso_cox(table, make_records([1, 2, 3], [True, False, False], prefix=''))

    def test_same_seed_same_model(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=80, n_noise=10), 6)
        first = fit_lasso_cox(table, records, seed=3, n_lambda=10)
        second = fit_lasso_cox(table, records, seed=3, n_lambda=10)
        self.assertEqual(json.dumps(first.to_dict()), json.dumps(second.to_dict()))
        np.testing.assert_array_equal(first.cv.deviance, second.cv.deviance)

    def test_cv_curve_chooses_minimum_deviance(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=80, n_noise=10), 6)
        model = fit_lasso_cox(table, records, seed=3, n_lambda=10)
        self.assertEqual(len(model.cv.lambdas), 10)
        self.assertEqual(model.cv.chosen, int(np.argmin(model.cv.deviance)))
        self.assertEqual(model.lambda_, float(model.cv.lambdas[model.cv.chosen]))
        self.assertIsNone(fit_lasso_cox(table, records, lambda_grid=[0.1]).cv)

    def test_planted_signal_recovery(self):
        spec = PlantedCohortSpec(n_subjects=400)
        table, records, beta = synth_planted_cohort(spec, 2024)
        train, test = table.subjects[:200], table.subjects[200:]
        by_id = {r.subject_id: r for r in records}
        train_records = [by_id[s] for s in train]
        test_records = [by_id[s] for s in test]

        model = fit_lasso_cox(table.subset(train), train_records, seed=0)
        coefs = {f.name: f.coef for f in model.selected}
        for name, true in beta.items():
            self.assertIn(name, coefs)
            self.assertEqual(np.sign(coefs[name]), np.sign(true))

        test_risks = risk_scores(model, table.subset(test))
        self.assertGreaterEqual(concordance_index(test_risks, test_records), 0.7)
        threshold = find_threshold(risk_scores(model, table.subset(train)), train_records).threshold
        high = split_groups(test_risks, threshold)
        low_group = [r for r, h in zip(test_records, high) if not h]
        high_group = [r for r, h in zip(test_records, high) if h]
        self.assertLess(logrank(low_group, high_group).p_value, 0.01)


class RiskScoreTests(SimpleTestCase):

    def setUp(self):
        self.model = CoxModel([SelectedFeature('f', 2.0, mean=10.0, std=2.0, median=9.0)], lambda_=0.1)

    def test_empty_model_scores_zero(self):
        model = CoxModel([], lambda_=math.inf)
        self.assertEqual(risk_score(model, {'anything': 3.0}), 0.0)

    def test_weighted_standardized_value(self):
        self.assertEqual(risk_score(self.model, {'f': 13.0, 'other': 1.0}), 3.0)

    def test_missing_value_uses_median(self):
        self.assertEqual(risk_score(self.model, {'f': math.nan}), -1.0)

    def test_unknown_feature(self):
        with self.assertRaises(ModelFileError):
            risk_score(self.model, {'g': 1.0})
        with self.assertRaises(ModelFileError):
            risk_scores(self.model, FeatureTable(['a'], ['g'], [[1.0]]))

    def test_table_scores_match_single_scores(self):
        table = FeatureTable(['a', 'b', 'c'], ['f'], [[13.0], [math.nan], [4.0]])
        expected = [risk_score(self.model, table.row(s)) for s in table.subjects]
        np.testing.assert_allclose(risk_scores(self.model, table), expected)

    def test_ranking_invariant_to_affine_rescaling(self):
        table, records, _ = synth_planted_cohort(PlantedCohortSpec(n_subjects=100, n_noise=5), 8)
        shifted = FeatureTable(table.subjects, table.names, 3.0 * table.values + 7.0)
        first = fit_lasso_cox(table, records, lambda_grid=[0.05])
        second = fit_lasso_cox(shifted, records, lambda_grid=[0.05])
        np.testing.assert_array_equal(np.argsort(risk_scores(first, table)), np.argsort(risk_scores(second, shifted)))

    def test_save_then_load(self):
        model = CoxModel([SelectedFeature('f', 2.0, 10.0, 2.0, 9.0, False)], lambda_=0.1, threshold=0.5, seed=4)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'model.json'
            model.save(path)
            loaded = CoxModel.load(path)
        self.assertEqual(loaded.to_dict(), model.to_dict())

    def test_corrupt_model_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'model.json'
            path.write_text('{"features": [{"name": "f", "coef": 1, "mean": 0, "std": 0, "median": 0}], "lambda": 1}')
            with self.assertRaises(ModelFileError):
                CoxModel.load(path)
            path.write_text('not json')
            with self.assertRaises(ModelFileError):
                CoxModel.load(path)


class KaplanMeierTests(SimpleTestCase):

    def test_hand_computed(self):
        curve = kaplan_meier(make_records([1, 2, 3], [True, True, False]))
        np.testing.assert_array_equal(curve.times, [1, 2, 3])
        self.assertAlmostEqual(curve.survival[0], 2 / 3, places=15)
        self.assertAlmostEqual(curve.survival[1], 1 / 3, places=15)
        self.assertEqual(curve.survival[2], curve.survival[1])
        np.testing.assert_array_equal(curve.at_risk, [3, 2, 1])

    def test_all_censored(self):
        curve = kaplan_meier(make_records([4, 1, 9], [False] * 3))
        self.assertTrue(np.all(curve.survival == 1.0))

    def test_no_censoring_is_empirical_survival(self):
        rng = np.random.default_rng(0)
        times = rng.integers(1, 20, size=40)
        curve = kaplan_meier(make_records(times, [True] * 40))
        for t, s in zip(curve.times, curve.survival):
            self.assertAlmostEqual(s, np.mean(times > t), places=12)

    def test_step_function_shape(self):
        rng = np.random.default_rng(1)
        curve = kaplan_meier(make_records(rng.exponential(10, 50) + 0.1, rng.random(50) < 0.6))
        self.assertTrue(np.all(np.diff(curve.survival) <= 0))
        self.assertEqual(curve.at(0.0), 1.0)
        self.assertEqual(curve.at(curve.times[3]), curve.survival[3])


class LogRankTests(SimpleTestCase):

    def test_identical_groups(self):
        records = make_records([5, 8, 12, 20], [True, False, True, True])
        result = logrank(records, list(records))
        self.assertEqual(result.statistic, 0.0)
        self.assertEqual(result.p_value, 1.0)

    def test_six_subject_table(self):
        a = make_records([2, 4, 6], [True, True, False], prefix='a')
        b = make_records([1, 3, 5], [True, True, True], prefix='b')
        result = logrank(a, b)
        self.assertAlmostEqual(result.statistic, 529 / 1091, delta=1e-10)
        self.assertAlmostEqual(result.expected_a, 83 / 30, delta=1e-12)
        self.assertAlmostEqual(result.p_value, stats.chi2.sf(529 / 1091, 1), delta=1e-12)

    def test_strong_separation(self):
        rng = np.random.default_rng(0)
        times = rng.exponential(10, 50) + 0.01
        result = logrank(make_records(times, [True] * 50, 'a'), make_records(times * 10, [True] * 50, 'b'))
        self.assertLess(result.p_value, 0.001)

    def test_no_events_is_degenerate(self):
        result = logrank(make_records([1, 2], [False, False]), make_records([3], [False]))
        self.assertEqual(result.p_value, 1.0)

    def test_empty_group(self):
        with self.assertRaises(SurvivalDataError):
            logrank([], make_records([1], [True]))


class ConcordanceTests(SimpleTestCase):

    def test_perfect_concordance(self):
        times = np.arange(1, 21, dtype=float)
        self.assertEqual(concordance_index(-times, make_records(times, [True] * 20)), 1.0)

    def test_chance_level(self):
        rng = np.random.default_rng(0)
        records = make_records(rng.exponential(10, 3000) + 0.01, rng.random(3000) < 0.7)
        self.assertAlmostEqual(concordance_index(rng.random(3000), records), 0.5, delta=0.05)

    def test_matches_all_pairs_oracle(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            records = make_records(rng.integers(1, 10, 30), rng.random(30) < 0.6)
            if not any(r.event for r in records):
                continue
            risks = rng.integers(0, 5, 30).astype(float)
            self.assertEqual(concordance_index(risks, records), all_pairs_cindex(risks, records))

    def test_negated_risks(self):
        rng = np.random.default_rng(3)
        records = make_records(rng.exponential(5, 40) + 0.01, rng.random(40) < 0.7)
        risks = rng.normal(size=40)
        self.assertAlmostEqual(concordance_index(-risks, records), 1 - concordance_index(risks, records), places=12)

    def test_no_permissible_pairs(self):
        with self.assertRaises(SurvivalDataError):
            concordance_index([1.0, 2.0], make_records([1, 2], [False, False]))


class HazardRatioTests(SimpleTestCase):

    def test_identical_groups(self):
        records = make_records([3, 5, 8, 13, 21], [True, True, False, True, True])
        labels = [0] * 5 + [1] * 5
        result = hazard_ratio(labels, records + records)
        self.assertAlmostEqual(result.hazard_ratio, 1.0, delta=1e-9)
        self.assertLess(result.ci_low, 1.0)
        self.assertGreater(result.ci_high, 1.0)

    def test_planted_hazard_ratio(self):
        rng = np.random.default_rng(12)
        labels = (rng.random(500) < 0.5).astype(float)
        table = FeatureTable([f"s{i}" for i in range(500)], ['group'], labels[:, None])
        records = synth_survival(table, CohortSpec(n=500, beta={'group': math.log(2)}, seed=12))
        result = hazard_ratio(labels, records)
        self.assertGreaterEqual(result.hazard_ratio, 1.6)
        self.assertLessEqual(result.hazard_ratio, 2.5)
        self.assertLess(result.ci_low, result.hazard_ratio)
        self.assertGreater(result.ci_high, result.hazard_ratio)

    def test_label_swap_gives_reciprocal(self):
        rng = np.random.default_rng(4)
        records = make_records(rng.exponential(10, 60) + 0.01, rng.random(60) < 0.7)
        labels = rng.random(60) < 0.4
        forward = hazard_ratio(labels, records)
        backward = hazard_ratio(~labels, records)
        self.assertAlmostEqual(forward.hazard_ratio * backward.hazard_ratio, 1.0, delta=1e-9)

    def test_group_without_events_is_separated(self):
        records = make_records([1, 2, 3, 4], [True, True, False, False])
        result = hazard_ratio([1, 1, 0, 0], records)
        self.assertTrue(result.separated)
        self.assertEqual(result.hazard_ratio, math.inf)
        self.assertEqual(result.ci_high, math.inf)


class ThresholdTests(SimpleTestCase):

    def test_separated_clusters(self):
        risks = np.array([0.0] * 30 + [1.0] * 30)
        records = make_records(np.r_[np.arange(100, 130), np.arange(1, 31)], [True] * 60)
        result = find_threshold(risks, records)
        self.assertGreater(result.threshold, 0.0)
        self.assertLess(result.threshold, 1.0)
        self.assertLess(result.p_value, 1e-6)
        self.assertGreater(result.n_candidates, 0)

    def test_identical_risks(self):
        with self.assertRaises(SurvivalDataError):
            find_threshold(np.ones(20), make_records(np.arange(1, 21), [True] * 20))

    def test_exchangeable_survival_is_not_significant(self):
        n = 500
        risks = np.arange(n, dtype=float)
        records = make_records((np.arange(n) % 10) + 1, [True] * n)
        self.assertGreater(find_threshold(risks, records).p_value, 0.05)

    def test_groups_keep_minimum_size(self):
        rng = np.random.default_rng(0)
        risks = rng.normal(size=100)
        records = make_records(rng.exponential(10, 100) + 0.01, rng.random(100) < 0.7)
        result = find_threshold(risks, records)
        high = split_groups(risks, result.threshold)
        self.assertGreaterEqual(min(high.sum(), (~high).sum()), 10)

    def test_recovers_planted_groups(self):
        rng = np.random.default_rng(21)
        labels = rng.random(200) < 0.5
        table = FeatureTable([f"s{i}" for i in range(200)], ['group'], labels[:, None].astype(float))
        records = synth_survival(table, CohortSpec(n=200, beta={'group': math.log(4)}, seed=21))
        risks = labels + rng.normal(scale=0.1, size=200)
        result = find_threshold(risks, records)
        accuracy = np.mean(split_groups(risks, result.threshold) == labels)
        self.assertGreaterEqual(accuracy, 0.9)

    def test_strong_split_picks_largest_statistic(self):
        n = 2000
        risks = np.arange(n, dtype=float)
        index = np.arange(n)
        times = np.where(index >= 1400, 10 + index % 7, 1000 + index % 13)
        events = (index >= 1400) | (index % 2 == 0)
        records = make_records(times, events)
        result = find_threshold(risks, records)

        statistics = {}
        for cutoff in np.unique(np.percentile(risks, PERCENTILES)):
            high = split_groups(risks, cutoff)
            if min(high.sum(), (~high).sum()) >= 200:
                statistics[float(cutoff)] = logrank(*partition(records, high)).statistic
        self.assertEqual(result.p_value, 0.0)
        self.assertEqual(result.statistic, max(statistics.values()))
        self.assertAlmostEqual(result.threshold, np.percentile(risks, 70))
        self.assertTrue(np.array_equal(split_groups(risks, result.threshold), index >= 1400))
