import numpy as np
from django.test import SimpleTestCase

from wigner.lab import imaging, states
from wigner.lab.phase_grid import PhaseSpaceField, make_grid


class PaletteTests(SimpleTestCase):
    def test_diverging_colours(self):
        rgb = imaging.diverging_rgb(np.array([[-1.0, 0.0, 1.0, 2.0]]), 1.0)
        np.testing.assert_array_equal(rgb[0], [[0, 0, 255], [255, 255, 255], [255, 0, 0], [255, 0, 0]])

    def test_joint_scale_takes_largest_field(self):
        grid = make_grid(64, 64, (-16, 16), (-16, 16))
        narrow = states.gaussian_wigner(grid)
        wide = states.classical_gaussian(grid, 0, 0, 2, 2)
        self.assertEqual(imaging.joint_scale([wide, narrow]), narrow.max_abs)


class ReferenceBoxTests(SimpleTestCase):
    def test_area_in_hbar_units(self):
        grid = make_grid(64, 64, (-8, 8), (-8, 8), hbar=0.5)
        q0, p0, q1, p1 = imaging.reference_box(grid)
        self.assertAlmostEqual((q1 - q0) * (p1 - p0), 4.0 * 0.5)
        self.assertAlmostEqual(q0 + q1, 0.0)

    def test_side_scales_with_root_hbar(self):
        full = imaging.reference_box(make_grid(64, 64, (-8, 8), (-8, 8), hbar=1.0))
        half = imaging.reference_box(make_grid(64, 64, (-8, 8), (-8, 8), hbar=0.5))
        self.assertAlmostEqual(full[2] - full[0], 2.0)
        self.assertAlmostEqual((half[2] - half[0]) / (full[2] - full[0]), 1 / np.sqrt(2.0))
        self.assertAlmostEqual((half[3] - half[1]) / (full[3] - full[1]), 1 / np.sqrt(2.0))

    def test_render_size_and_orientation(self):
        grid = make_grid(32, 16, (-8, 8), (-4, 4))
        values = np.zeros(grid.shape)
        values[24, 12] = 1.0
        image = imaging.render(PhaseSpaceField(grid, values), 1.0, zoom=2)
        self.assertEqual(image.size, (64, 32))
        # sample (24, 12) covers q in [4, 4.5] and p in [2, 2.5]; p grows upwards
        x, y = imaging.to_pixel(grid, 4.25, 2.25, zoom=2)
        self.assertEqual(image.getpixel((int(x), int(y))), (255, 0, 0))
        self.assertEqual(image.getpixel((int(x), 32 - int(y))), (255, 255, 255))
