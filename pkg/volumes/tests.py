import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import GeometryError, VolumeFormatError
from .containers import Volume, Mask, RoiSet
from .gradients import gradient
from .io import container_paths, load_mask, load_volume, read_container, write_container, write_mask, write_volume


def write_raw(stem: Path, header: dict, values: np.ndarray) -> None:
    header_path, payload_path = container_paths(stem)
    header_path.write_text(json.dumps(header))
    values.tofile(payload_path)


class VolumeIOTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_hand_written_float32_file(self):
        write_raw(self.dir / 'vol', {'dims': [2, 2, 2], 'spacing': [1, 1, 1], 'dtype': 'f32',
                                     'order': 'xyz-row-major'},
                  np.arange(8, dtype='<f4'))
        vol = load_volume(self.dir / 'vol')
        self.assertEqual(vol.dims, (2, 2, 2))
        self.assertEqual(vol.data.dtype, np.float64)
        np.testing.assert_array_equal(vol.data.ravel(order='F'), np.arange(8.0))
        # x is the fastest axis on disk
        self.assertEqual(vol.data[1, 0, 0], 1.0)
        self.assertEqual(vol.data[0, 1, 0], 2.0)
        self.assertEqual(vol.data[0, 0, 1], 4.0)

    def test_payload_size_mismatch(self):
        write_raw(self.dir / 'short', {'dims': [2, 2, 2], 'spacing': [1, 1, 1], 'dtype': 'f32'},
                  np.arange(7, dtype='<f4'))
        with self.assertRaises(VolumeFormatError):
            load_volume(self.dir / 'short')

    def test_malformed_header(self):
        header_path, payload_path = container_paths(self.dir / 'bad')
        header_path.write_text('{"dims": [2, 2]')
        np.zeros(8, dtype='<f4').tofile(payload_path)
        with self.assertRaises(VolumeFormatError):
            load_volume(self.dir / 'bad')

    def test_non_finite_spacing(self):
        write_raw(self.dir / 'nan', {'dims': [2, 2, 2], 'spacing': [1, float('nan'), 1], 'dtype': 'f64'},
                  np.zeros(8, dtype='<f8'))
        with self.assertRaises(VolumeFormatError):
            load_volume(self.dir / 'nan')

    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(3)
        vol = Volume(rng.normal(size=(16, 16, 16)) * 1e3, (0.5, 1.0, 2.5))
        write_volume(vol, self.dir / 'rt')
        loaded = load_volume(self.dir / 'rt.volhdr')
        self.assertEqual(loaded.spacing, vol.spacing)
        self.assertEqual(loaded.data.tobytes(), vol.data.tobytes())

    def test_mask_round_trip(self):
        rng = np.random.default_rng(4)
        mask = Mask(rng.random((5, 6, 7)) > 0.5, (1.0, 2.0, 3.0))
        write_mask(mask, self.dir / 'mask')
        loaded = load_mask(self.dir / 'mask.volraw')
        np.testing.assert_array_equal(loaded.data, mask.data)

    def test_multichannel_component_is_innermost(self):
        array = np.zeros((2, 1, 1, 3))
        array[0, 0, 0] = (1, 2, 3)
        array[1, 0, 0] = (4, 5, 6)
        write_container(array, (1, 1, 1), self.dir / 'field', 'f64')
        payload = np.fromfile(container_paths(self.dir / 'field')[1], dtype='<f8')
        np.testing.assert_array_equal(payload, [1, 2, 3, 4, 5, 6])
        header, loaded = read_container(self.dir / 'field')
        self.assertEqual(header.channels, 3)
        np.testing.assert_array_equal(loaded, array)


class ContainerTests(SimpleTestCase):

    def test_volume_is_immutable(self):
        vol = Volume(np.zeros((2, 2, 2)))
        with self.assertRaises(ValueError):
            vol.data[0, 0, 0] = 1.0

    def test_rejects_bad_spacing(self):
        with self.assertRaises(GeometryError):
            Volume(np.zeros((2, 2, 2)), (1.0, 0.0, 1.0))

    def test_roiset_invariants(self):
        brain = np.zeros((4, 4, 4), bool)
        brain[1:3, 1:3, 1:3] = True
        tumor = np.zeros_like(brain)
        tumor[1, 1, 1] = True
        peri = np.zeros_like(brain)
        peri[2, 2, 2] = True
        roi = RoiSet(Mask(brain), Mask(tumor), Mask(peri))
        self.assertEqual(roi.lesion.count, 2)

        with self.assertRaises(GeometryError):
            RoiSet(Mask(brain), Mask(tumor), Mask(tumor))
        outside = np.zeros_like(brain)
        outside[0, 0, 0] = True
        with self.assertRaises(GeometryError):
            RoiSet(Mask(brain), Mask(outside), Mask(peri))


class GradientTests(SimpleTestCase):

    def grid(self, shape=(6, 5, 4)):
        return np.meshgrid(*(np.arange(n, dtype=float) for n in shape), indexing='ij')

    def test_linear_ramp(self):
        x, _, _ = self.grid()
        grad = gradient(Volume(3 * x), 'x')
        np.testing.assert_allclose(grad.data, 3.0, rtol=0, atol=1e-12)

    def test_spacing_divides(self):
        x, _, _ = self.grid()
        grad = gradient(Volume(3 * x, (2.0, 1.0, 1.0)), 'x')
        np.testing.assert_allclose(grad.data, 1.5, rtol=0, atol=1e-12)

    def test_constant_is_exactly_zero(self):
        vol = Volume(np.full((4, 4, 4), 7.25))
        for axis in 'xyz':
            self.assertTrue(np.all(gradient(vol, axis).data == 0.0))

    def test_quadratic_interior_is_exact(self):
        x = np.arange(5, dtype=float)
        data = np.broadcast_to((x ** 2)[:, None, None], (5, 2, 2))
        grad = gradient(Volume(data), 'x')
        self.assertEqual(grad.data[2, 0, 0], 4.0)
        # one-sided at the boundary
        self.assertEqual(grad.data[0, 0, 0], 1.0)
        self.assertEqual(grad.data[4, 0, 0], 7.0)

    def test_linearity(self):
        rng = np.random.default_rng(0)
        f = rng.normal(size=(6, 7, 8))
        g = rng.normal(size=(6, 7, 8))
        spacing = (0.7, 1.3, 2.0)
        for axis in 'xyz':
            combined = gradient(Volume(2.5 * f - 1.5 * g, spacing), axis).data
            separate = 2.5 * gradient(Volume(f, spacing), axis).data - 1.5 * gradient(Volume(g, spacing), axis).data
            np.testing.assert_allclose(combined, separate, rtol=0, atol=1e-12)

    def test_short_axis_and_bad_axis(self):
        vol = Volume(np.zeros((4, 4, 1)))
        with self.assertRaises(GeometryError):
            gradient(vol, 'z')
        with self.assertRaises(GeometryError):
            gradient(vol, 'w')
