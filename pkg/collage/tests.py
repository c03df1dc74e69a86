import math

import numpy as np
from django.test import SimpleTestCase

from volumes.containers import Mask, Volume
from volumes.gradients import gradients
from .cooccurrence import CoocMatrix, cooccurrence
from .features import collage_feature_names, collage_features, compute_collage, haralick_maps
from .haralick import EPS, HARALICK_NAMES, haralick
from .orientation import (
    angles_from_vectors, dominant_orientation, local_gradient_matrix, orientations_at, quantize,
)
from .schemas import CollageSettings, unit_directions


def coordinate_grid(shape):
    return np.meshgrid(*(np.arange(n, dtype=float) for n in shape), indexing='ij')


def ball(shape, radius):
    x, y, z = coordinate_grid(shape)
    c = [(n - 1) / 2 for n in shape]
    return (x - c[0]) ** 2 + (y - c[1]) ** 2 + (z - c[2]) ** 2 <= radius ** 2


def oracle_haralick(P):
    """Formula-by-formula statistics with explicit loops"""
    B = P.shape[0]
    p = P / P.sum()
    lv = range(1, B + 1)
    px = [sum(p[a, b] for b in range(B)) for a in range(B)]
    py = [sum(p[a, b] for a in range(B)) for b in range(B)]
    mux = sum(i * px[i - 1] for i in lv)
    muy = sum(j * py[j - 1] for j in lv)
    sx = math.sqrt(sum((i - mux) ** 2 * px[i - 1] for i in lv))
    sy = math.sqrt(sum((j - muy) ** 2 * py[j - 1] for j in lv))

    def ent(values):
        return max(0.0, -sum(v * math.log(v + EPS) for v in values))

    psum = [0.0] * (2 * B - 1)
    pdiff = [0.0] * B
    energy = contrast = cross = idm = hxy = hxy1 = hxy2 = 0.0
    for i in lv:
        for j in lv:
            v = p[i - 1, j - 1]
            energy += v * v
            contrast += (i - j) ** 2 * v
            cross += i * j * v
            idm += v / (1 + (i - j) ** 2)
            psum[i + j - 2] += v
            pdiff[abs(i - j)] += v
            q = px[i - 1] * py[j - 1]
            hxy1 -= v * math.log(q + EPS)
            hxy2 -= q * math.log(q + EPS)
    correlation = (cross - mux * muy) / (sx * sy) if sx * sy > 0 else 1.0
    variance = sum((i - mux) ** 2 * px[i - 1] for i in lv)
    sa = sum((k + 2) * v for k, v in enumerate(psum))
    sv = sum((k + 2 - sa) ** 2 * v for k, v in enumerate(psum))
    da = sum(k * v for k, v in enumerate(pdiff))
    dv = sum((k - da) ** 2 * v for k, v in enumerate(pdiff))
    hxy = ent(p.ravel())
    hx, hy = ent(px), ent(py)
    imc1 = (hxy - hxy1) / max(hx, hy) if max(hx, hy) > 0 else 0.0
    imc2 = math.sqrt(1 - math.exp(-2 * max(hxy2 - hxy, 0.0)))
    return [energy, contrast, correlation, variance, idm, sa, sv, ent(psum), hxy, dv, ent(pdiff), imc1, imc2]


class SettingsTests(SimpleTestCase):

    def test_defaults(self):
        cfg = CollageSettings()
        self.assertEqual((cfg.window, cfg.bins, cfg.cooc_window), (5, 64, 5))
        self.assertEqual(len(cfg.offsets), 13)
        self.assertEqual(cfg.offsets[0], (1, 0, 0))

    def test_unit_directions_are_non_antiparallel(self):
        directions = unit_directions()
        self.assertEqual(len(set(directions)), 13)
        for d in directions:
            self.assertNotIn(tuple(-v for v in d), directions)

    def test_rejects_bad_values(self):
        for kwargs in ({'window': 4}, {'cooc_window': 6}, {'bins': 1},
                       {'offsets': [(0, 0, 0)]}, {'offsets': [(1, 0, 0), (-1, 0, 0)]}):
            with self.assertRaises(ValueError):
                CollageSettings(**kwargs)


class LocalGradientMatrixTests(SimpleTestCase):

    def test_linear_field_rows(self):
        x, y, z = coordinate_grid((7, 7, 7))
        grads = gradients(Volume(2 * x + 3 * y + 5 * z))
        F = local_gradient_matrix(grads, (3, 3, 3), 5)
        self.assertEqual(F.shape, (125, 3))
        np.testing.assert_allclose(F, np.tile([2.0, 3.0, 5.0], (125, 1)), atol=1e-12)

    def test_constant_volume(self):
        grads = gradients(Volume(np.full((5, 5, 5), 3.0)))
        self.assertTrue(np.all(local_gradient_matrix(grads, (2, 2, 2), 3) == 0))

    def test_matches_stencil_oracle(self):
        rng = np.random.default_rng(11)
        f = rng.normal(size=(7, 7, 7))
        F = local_gradient_matrix(gradients(Volume(f)), (3, 4, 2), 3)
        rows = []
        for dz in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    x, y, z = 3 + dx, 4 + dy, 2 + dz
                    rows.append([(f[x + 1, y, z] - f[x - 1, y, z]) / 2,
                                 (f[x, y + 1, z] - f[x, y - 1, z]) / 2,
                                 (f[x, y, z + 1] - f[x, y, z - 1]) / 2])
        np.testing.assert_allclose(F, rows, atol=1e-12)

    def test_window_is_clamped_at_edges(self):
        grads = gradients(Volume(np.zeros((6, 6, 6))))
        self.assertEqual(local_gradient_matrix(grads, (0, 0, 0), 5).shape, (27, 3))


class DominantOrientationTests(SimpleTestCase):

    def test_diagonal_in_plane(self):
        theta, phi = dominant_orientation(np.tile([1.0, 1.0, 0.0], (27, 1)))
        self.assertAlmostEqual(theta, np.pi / 4, places=12)
        self.assertAlmostEqual(phi, 0.0, places=12)

    def test_axis_aligned_z(self):
        theta, phi = dominant_orientation(np.tile([0.0, 0.0, 1.0], (27, 1)))
        self.assertEqual(theta, 0.0)
        self.assertAlmostEqual(phi, np.pi / 2, places=12)

    def test_zero_matrix(self):
        self.assertEqual(dominant_orientation(np.zeros((27, 3))), (0.0, 0.0))

    def test_sign_of_rows_does_not_matter(self):
        F = np.tile([-1.0, 2.0, 0.5], (8, 1))
        np.testing.assert_allclose(dominant_orientation(F), dominant_orientation(-F), atol=1e-12)

    def test_matches_eigenvector_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            F = rng.normal(size=(27, 3)) @ rng.normal(size=(3, 3))
            values, vectors = np.linalg.eigh(F.T @ F)
            expected = angles_from_vectors(vectors[:, np.argmax(values)])
            theta, phi = dominant_orientation(F)
            self.assertAlmostEqual(theta, float(expected[0]), delta=1e-9)
            self.assertAlmostEqual(phi, float(expected[1]), delta=1e-9)
            self.assertTrue(-np.pi / 2 < theta <= np.pi / 2)
            self.assertTrue(-np.pi / 2 < phi <= np.pi / 2)

    def test_linear_ramps_give_constant_analytic_angles(self):
        x, y, z = coordinate_grid((9, 9, 9))
        centers = np.argwhere(np.ones((9, 9, 9), bool))
        for a, b, c in [(2, 3, 5), (1, -2, 0.5), (-1, 0, 4)]:
            grads = [g.data for g in gradients(Volume(a * x + b * y + c * z))]
            theta, phi = orientations_at(grads, centers, 5)
            sign = -1 if a < 0 else 1
            psi = sign * np.array([a, b, c], float)
            np.testing.assert_allclose(theta, np.arctan2(psi[1], psi[0]), atol=1e-6)
            np.testing.assert_allclose(phi, np.arctan2(psi[2], np.hypot(psi[0], psi[1])), atol=1e-6)

    def test_quantize_range(self):
        q = quantize(np.array([-np.pi / 2 + 1e-9, 0.0, np.pi / 2]), 64)
        self.assertEqual(q[0], 0)
        self.assertEqual(q[2], 63)
        self.assertTrue(0 <= q[1] < 64)


class CooccurrenceTests(SimpleTestCase):

    def test_uniform_map(self):
        qmap = np.full((5, 5, 5), 3)
        M = cooccurrence(qmap, (2, 2, 2), CollageSettings(bins=8, window=3))
        p = M.normalized()
        self.assertEqual(p[3, 3], 1.0)
        self.assertEqual(np.count_nonzero(p), 1)

    def test_checkerboard_along_x(self):
        x, y, z = coordinate_grid((4, 4, 4))
        qmap = ((x + y + z) % 2).astype(int)
        cfg = CollageSettings(bins=2, window=3, cooc_window=5, offsets=[(1, 0, 0)])
        p = cooccurrence(qmap, (2, 2, 2), cfg).normalized()
        np.testing.assert_array_equal(p, [[0.0, 0.5], [0.5, 0.0]])

    def test_matches_pair_enumeration(self):
        rng = np.random.default_rng(8)
        cfg = CollageSettings(bins=4, window=3)
        h = cfg.cooc_window // 2
        for _ in range(10):
            qmap = rng.integers(0, 4, size=(6, 6, 6))
            qmap[rng.random((6, 6, 6)) < 0.3] = -1
            c = tuple(int(v) for v in rng.integers(0, 6, size=3))
            expected = np.zeros((4, 4))
            lo = [max(ci - h, 0) for ci in c]
            hi = [min(ci + h, 5) for ci in c]
            for px in range(lo[0], hi[0] + 1):
                for py in range(lo[1], hi[1] + 1):
                    for pz in range(lo[2], hi[2] + 1):
                        for o in cfg.offsets:
                            q = (px + o[0], py + o[1], pz + o[2])
                            if not all(l <= v <= u for l, v, u in zip(lo, q, hi)):
                                continue
                            a, b = qmap[px, py, pz], qmap[q]
                            if a >= 0 and b >= 0:
                                expected[a, b] += 1
                                expected[b, a] += 1
            M = cooccurrence(qmap, c, cfg)
            np.testing.assert_array_equal(M.counts, expected)
            if M.total:
                self.assertAlmostEqual(M.normalized().sum(), 1.0, places=12)
                np.testing.assert_array_equal(M.counts, M.counts.T)


class HaralickTests(SimpleTestCase):

    def test_uniform_matrix(self):
        h = haralick(CoocMatrix(np.ones((4, 4))))
        self.assertEqual(h.energy, 0.0625)
        self.assertAlmostEqual(h.entropy, math.log(16), places=9)

    def test_single_entry(self):
        counts = np.zeros((4, 4))
        counts[2, 2] = 5
        h = haralick(CoocMatrix(counts))
        self.assertEqual(h.energy, 1.0)
        self.assertEqual(h.entropy, 0.0)
        self.assertEqual(h.contrast, 0.0)

    def test_empty_matrix_is_missing(self):
        h = haralick(CoocMatrix(np.zeros((4, 4))))
        self.assertTrue(all(math.isnan(v) for v in h.as_tuple()))

    def test_matches_formula_oracle(self):
        rng = np.random.default_rng(1973)
        for trial in range(1000):
            P = rng.random((8, 8))
            if trial % 3 == 0:
                P[rng.random((8, 8)) < 0.6] = 0.0
                P[0, 0] += 0.1
            values = haralick(CoocMatrix(P)).as_tuple()
            expected = oracle_haralick(P)
            for name, got, want in zip(HARALICK_NAMES, values, expected):
                self.assertAlmostEqual(got, want, delta=1e-10, msg=f"{name} trial {trial}")

    def test_invariants_on_random_matrices(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            h = haralick(CoocMatrix(rng.random((6, 6))))
            self.assertTrue(0 < h.energy <= 1)
            for value in (h.entropy, h.sum_entropy, h.difference_entropy):
                self.assertGreaterEqual(value, 0.0)


class CollageFeatureTests(SimpleTestCase):
    cfg = CollageSettings(window=3, bins=16)

    def noise_phantom(self, seed, shape=(12, 12, 12)):
        rng = np.random.default_rng(seed)
        return Volume(rng.random(shape)), Mask(ball(shape, 4.0))

    def test_feature_count_and_names(self):
        vol, roi = self.noise_phantom(0)
        features = collage_features(vol, roi, self.cfg)
        self.assertEqual(len(features), 130)
        self.assertEqual(list(features), collage_feature_names())
        self.assertIn('collage_theta_mean_energy', features)
        self.assertIn('collage_phi_kurtosis_info_correlation_2', features)

    def test_default_settings_give_130(self):
        vol, roi = self.noise_phantom(1)
        self.assertEqual(len(collage_features(vol, roi)), 130)

    def test_constant_roi(self):
        shape = (10, 10, 10)
        features = collage_features(Volume(np.full(shape, 5.0)), Mask(ball(shape, 3.0)), self.cfg)
        self.assertEqual(features['collage_theta_mean_energy'], 1.0)
        self.assertEqual(features['collage_theta_std_energy'], 0.0)
        self.assertEqual(features['collage_phi_mean_energy'], 1.0)

    def test_small_roi_is_missing(self):
        mask = np.zeros((8, 8, 8), bool)
        mask[3:5, 3:5, 3] = True
        features = collage_features(Volume(np.random.default_rng(0).random((8, 8, 8))), Mask(mask), self.cfg)
        self.assertTrue(all(math.isnan(v) for v in features.values()))

    def test_oriented_texture_has_lower_theta_entropy(self):
        shape = (16, 16, 16)
        x, y, z = coordinate_grid(shape)
        roi = Mask(ball(shape, 6.0))
        oriented = Volume(np.sin(2 * np.pi * (x + 0.5 * y) / 6.0))
        noise = Volume(np.random.default_rng(3).normal(size=shape))
        key = 'collage_theta_mean_entropy'
        self.assertLess(collage_features(oriented, roi, self.cfg)[key],
                        collage_features(noise, roi, self.cfg)[key])

    def test_offset_and_scale_invariance(self):
        for seed in range(20):
            vol, roi = self.noise_phantom(100 + seed, shape=(10, 10, 10))
            base = np.array(list(collage_features(vol, roi, self.cfg).values()))
            shifted = np.array(list(collage_features(vol.with_data(vol.data + 8.0), roi, self.cfg).values()))
            scaled = np.array(list(collage_features(vol.with_data(vol.data * 3.7), roi, self.cfg).values()))
            np.testing.assert_allclose(shifted, base, rtol=0, atol=1e-12)
            np.testing.assert_allclose(scaled, base, rtol=0, atol=1e-9)

    def test_maps_independent_of_visitation_order(self):
        vol, roi = self.noise_phantom(9)
        centers = np.argwhere(roi.data)
        grads = [g.data for g in gradients(vol)]
        theta, _ = orientations_at(grads, centers, self.cfg.window)
        qmap = np.full(vol.dims, -1)
        qmap[tuple(centers.T)] = quantize(theta, self.cfg.bins)
        forward = haralick_maps(qmap, centers, self.cfg)
        order = np.random.default_rng(0).permutation(len(centers))
        shuffled = haralick_maps(qmap, centers[order], self.cfg)
        np.testing.assert_allclose(shuffled, forward[order], rtol=0, atol=1e-12)

    def test_keep_maps(self):
        vol, roi = self.noise_phantom(2)
        result = compute_collage(vol, roi, self.cfg, keep_maps=True)
        self.assertTrue(np.all(np.isnan(result.orientations.theta.data[~roi.data])))
        self.assertTrue(np.all(np.isfinite(result.orientations.theta.data[roi.data])))
        self.assertEqual(len(result.statistic_maps), 26)
