from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase
from hypothesis import assume, given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wigner.lab import diagnostics, states
from wigner.lab.dynamics import DecoherenceSpec, EvolutionConfig, HamiltonianSpec, run
from wigner.lab.exceptions import GridError, PartitionError, StateError
from wigner.lab.phase_grid import ClassicalDensity, IndexBox, PhaseSpaceField, WignerField, make_grid
from wigner.lab.sweeps import fit_exponent
from wigner.lab.weyl_wigner import wigner_of_pure


class FieldMeasureTests(SimpleTestCase):
    def setUp(self):
        self.grid = make_grid(128, 128, (-8, 8), (-8, 8))

    def test_negativity_of_positive_fields(self):
        coherent = states.gaussian_wigner(self.grid, 1.0, -1.0)
        classical = states.classical_gaussian(self.grid, 0.0, 0.0, 1.0, 1.0)
        self.assertLessEqual(abs(diagnostics.negativity_volume(coherent)), 1e-10)
        self.assertLessEqual(abs(diagnostics.negativity_volume(classical)), 1e-10)
        self.assertTrue(diagnostics.is_positive(coherent))

    def test_support_of_coherent_state(self):
        area = diagnostics.effective_support_area(states.gaussian_wigner(self.grid))
        self.assertAlmostEqual(area, np.pi * np.log(100.0), delta=0.05 * np.pi * np.log(100.0))

    def test_support_of_single_cell(self):
        area = diagnostics.effective_support_area(states.cell_density(self.grid))
        self.assertAlmostEqual(area, self.grid.cell_area_hbar)

    def test_moments_of_gaussian(self):
        field = states.classical_gaussian(self.grid, 1.0, -0.5, 0.8, 0.9)
        mean_q, mean_p, var_q, var_p = diagnostics.moments(field)
        self.assertAlmostEqual(mean_q, 1.0, places=9)
        self.assertAlmostEqual(mean_p, -0.5, places=9)
        self.assertAlmostEqual(var_q, 0.64, places=9)
        self.assertAlmostEqual(var_p, 0.81, places=9)


class TimeDerivativeTests(SimpleTestCase):
    def test_exact_for_quartic_series(self):
        t = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(diagnostics.time_derivative(t ** 4, 0.1), 4 * t ** 3, atol=1e-9)

    def test_too_few_points(self):
        self.assertTrue(np.all(np.isnan(diagnostics.time_derivative([1.0, 2.0, 3.0], 0.1))))


class PositivityTimeTests(SimpleTestCase):
    def setUp(self):
        grid = make_grid(96, 128, (-12, 12), (-8, 8))
        self.positive = states.gaussian_wigner(grid)
        self.negative = WignerField(grid, states.cat_wigner_values(grid)).validated()

    def trajectory(self, pattern):
        snapshots = [self.positive if flag else self.negative for flag in pattern]
        return SimpleNamespace(snapshots=snapshots, times=np.arange(len(pattern), dtype=float))

    def test_sustained_run_required(self):
        pattern = [False, True, True, False] + [True] * 10
        self.assertEqual(diagnostics.positivity_time(self.trajectory(pattern)), 4.0)

    def test_shorter_sustain(self):
        pattern = [False, True, True, False]
        self.assertEqual(diagnostics.positivity_time(self.trajectory(pattern), sustain=2), 1.0)

    def test_never_positive(self):
        self.assertIsNone(diagnostics.positivity_time(self.trajectory([False] * 12)))


class CoarseGrainTests(SimpleTestCase):
    def setUp(self):
        self.grid = make_grid(192, 128, (-12, 12), (-8, 8))
        self.cat = wigner_of_pure(states.cat_state(self.grid, 3.0, 1.0))

    def test_factor_for_four_hbar_cells(self):
        self.assertEqual(diagnostics.coarse_factor(self.grid, 4.0), 16)

    def test_preserves_integral(self):
        coarse = diagnostics.coarse_grain(self.cat, 8)
        self.assertEqual(coarse.grid.shape, (24, 16))
        self.assertAlmostEqual(coarse.norm(), self.cat.norm(), places=12)
        self.assertIsInstance(coarse, WignerField)

    def test_unit_factor_is_identity(self):
        self.assertIs(diagnostics.coarse_grain(self.cat, 1), self.cat)

    def test_factor_must_divide_grid(self):
        with self.assertRaises(GridError):
            diagnostics.coarse_grain(self.cat, 5)

    def test_negativity_never_grows(self):
        fine = diagnostics.negativity_volume(self.cat)
        for factor in (2, 4, 8, 16):
            coarse = diagnostics.coarse_grain(self.cat, factor)
            self.assertLessEqual(diagnostics.negativity_volume(coarse), fine + 1e-12)

    def test_four_hbar_cells_wash_out_interference(self):
        fine = diagnostics.negativity_volume(self.cat)
        coarse = diagnostics.coarse_grain(self.cat, diagnostics.coarse_factor(self.grid, 4.0))
        self.assertGreaterEqual(coarse.grid.cell_area_hbar, 4.0)
        self.assertLessEqual(10 * diagnostics.negativity_volume(coarse), fine)


class MeasureTests(SimpleTestCase):
    def setUp(self):
        self.small = make_grid(16, 16, (-4, 4), (-4, 4))

    def test_cat_is_a_quasi_probability(self):
        grid = make_grid(160, 128, (-10, 10), (-8, 8))
        cat = wigner_of_pure(states.cat_state(grid, 3.0, 1.0))
        report = diagnostics.validate_measure(cat, diagnostics.parse_partition("4x4", grid))
        self.assertTrue(report.normalized)
        self.assertTrue(report.finitely_additive)
        self.assertFalse(report.positive)
        self.assertEqual(report.classification, diagnostics.QUASI)

    def test_classical_density_is_a_probability(self):
        grid = make_grid(64, 64, (-8, 8), (-8, 8))
        density = states.classical_gaussian(grid, 0, 0, 1, 1)
        report = diagnostics.validate_measure(density, diagnostics.parse_partition("4x4", grid))
        self.assertEqual(report.classification, diagnostics.CLASSICAL)
        self.assertEqual(report.empty_measure, 0.0)

    def test_overlapping_partition(self):
        field = PhaseSpaceField(self.small, np.full(self.small.shape, 1 / 64))
        boxes = [IndexBox(0, 10, 0, 16), IndexBox(8, 16, 0, 16)]
        with self.assertRaises(PartitionError):
            diagnostics.validate_measure(field, boxes)

    def test_partition_with_gap(self):
        field = PhaseSpaceField(self.small, np.full(self.small.shape, 1 / 64))
        with self.assertRaises(PartitionError):
            diagnostics.validate_measure(field, [IndexBox(0, 8, 0, 16)])

    def test_bad_partition_spec(self):
        with self.assertRaises(PartitionError):
            diagnostics.parse_partition("four", self.small)
        with self.assertRaises(PartitionError):
            diagnostics.parse_partition("32x1", self.small)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, (16, 16), elements=st.floats(0, 1, allow_nan=False)))
    def test_normalised_positive_fields_are_probabilities(self, values):
        assume(values.sum() > 1e-3)
        field = PhaseSpaceField(self.small, values / (values.sum() * self.small.cell_area))
        report = diagnostics.validate_measure(field, diagnostics.parse_partition("4x4", self.small))
        self.assertEqual(report.classification, diagnostics.CLASSICAL)
        self.assertLessEqual(report.additivity_residue, 1e-10)

    @settings(max_examples=100, deadline=None)
    @given(
        arrays(np.float64, (16, 16), elements=st.floats(0, 1, allow_nan=False)),
        st.integers(0, 255),
        st.integers(0, 255),
    )
    def test_negative_cells_make_quasi_probabilities(self, values, source, target):
        assume(values.sum() > 1e-3 and source != target)
        values = values / (values.sum() * self.small.cell_area)
        shift = 10.0 * values.max() + 1.0
        values.flat[source] -= shift
        values.flat[target] += shift
        report = diagnostics.validate_measure(
            PhaseSpaceField(self.small, values), diagnostics.parse_partition("2x2", self.small)
        )
        self.assertTrue(report.normalized)
        self.assertFalse(report.positive)
        self.assertEqual(report.classification, diagnostics.QUASI)


class FluxDeviationTests(SimpleTestCase):
    def setUp(self):
        self.grid = make_grid(64, 64, (-8, 8), (-8, 8))

    def test_region_too_small(self):
        with self.assertRaises(GridError):
            diagnostics.region_weights(self.grid, IndexBox(10, 12, 10, 20))

    def harmonic_deviation(self, initial):
        region = IndexBox.from_physical(self.grid, (1, 3), (-1, 1))
        config = EvolutionConfig(0.0025, 0.5, stride=4)
        trajectory = run(initial, HamiltonianSpec.harmonic(), DecoherenceSpec(), config, regions=[region])
        return np.array([record.flux_deviation[0] for record in trajectory.records])

    def test_classical_transport_has_no_deviation(self):
        density = states.classical_gaussian(self.grid, 2.0, 0.0, np.sqrt(0.5), np.sqrt(0.5))
        self.assertLessEqual(np.abs(self.harmonic_deviation(density)).max(), 1e-5)

    def test_quadratic_quantum_dynamics_is_classical(self):
        field = states.gaussian_wigner(self.grid, 2.0, 0.0)
        self.assertLessEqual(np.abs(self.harmonic_deviation(field)).max(), 1e-5)

    def quartic_deviation(self, hbar):
        grid = make_grid(64, 64, (-8, 8), (-8, 8), hbar=hbar)
        width = np.sqrt(0.5)
        field = states.gaussian_wigner(grid, 1.0, 0.5, width, width)
        region = IndexBox.from_physical(grid, (0, 2), (0.5, 2))
        trajectory = run(field, HamiltonianSpec.quartic(), DecoherenceSpec(),
                         EvolutionConfig(5e-4, 0.1, stride=10))
        return float(np.abs(diagnostics.flux_deviation(trajectory, region)).max())

    def test_quartic_quantum_deviation_scales_with_hbar_squared(self):
        hbars = [1.0, 0.5, 0.25]
        deviations = [self.quartic_deviation(h) for h in hbars]
        self.assertGreater(deviations[0], 1e-4)
        self.assertGreaterEqual(fit_exponent(hbars, deviations), 1.9)


class EhrenfestTests(SimpleTestCase):
    def test_diffusion_leaves_mean_momentum(self):
        grid = make_grid(64, 64, (-8, 8), (-8, 8))
        field = states.gaussian_wigner(grid, 0.0, 1.0)
        trajectory = run(field, HamiltonianSpec.free(), DecoherenceSpec(1.0, True), EvolutionConfig(0.005, 0.5, 10))
        report = diagnostics.ehrenfest_check(trajectory)
        self.assertLessEqual(report.momentum_residual, 1e-8)
        self.assertLessEqual(report.position_residual, 1e-6)


class RecordTests(SimpleTestCase):
    def test_csv_column_order(self):
        grid = make_grid(64, 64, (-8, 8), (-8, 8))
        density = states.classical_gaussian(grid, 1.0, 0.0, 1.0, 1.0)
        region = IndexBox.from_physical(grid, (0, 2), (-1, 1))
        trajectory = run(density, HamiltonianSpec.harmonic(), DecoherenceSpec(),
                         EvolutionConfig(0.005, 0.05, stride=1), regions=[region])
        self.assertEqual(len(trajectory.records), 11)
        self.assertEqual(list(trajectory.records[0].as_row()), [
            "time", "norm", "min_value", "negativity_volume", "purity", "mean_q", "mean_p",
            "var_q", "var_p", "flux_dev_region0", "support_area", "positive",
        ])


class DoubleEmergenceTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        grid = make_grid(128, 128, (-16, 16), (-8, 8))
        cat = WignerField(grid, states.cat_wigner_values(grid, 3.0, 1.0)).validated()
        cls.region = IndexBox.from_physical(grid, (-1, 1), (-1, 1))
        cls.trajectory = run(cat, HamiltonianSpec.free(), DecoherenceSpec(4.0, True),
                             EvolutionConfig(5e-4, 1.5, stride=10))

    def test_reaches_a_classical_measure(self):
        report = diagnostics.double_emergence(self.trajectory, self.region)
        self.assertIsNotNone(report.positivity_time)
        self.assertGreaterEqual(report.cell_area_hbar, 4.0)
        self.assertGreater(report.negativity_before, 0.05)
        self.assertLessEqual(report.negativity_after, 1e-6)
        self.assertEqual(report.measure.classification, diagnostics.CLASSICAL)

    def test_free_transport_is_classical_at_both_scales(self):
        report = diagnostics.double_emergence(self.trajectory, self.region)
        self.assertLessEqual(report.fine_deviation, 1e-4)
        self.assertLessEqual(report.coarse_deviation, 1e-4)

    def test_requires_positivity(self):
        early = SimpleNamespace(snapshots=self.trajectory.snapshots[:5], times=self.trajectory.times[:5])
        with self.assertRaises(StateError):
            diagnostics.double_emergence(early, self.region)


class ClassicalDensityRunTests(SimpleTestCase):
    def test_spectral_run_reports_clipped_mass(self):
        grid = make_grid(64, 64, (-8, 8), (-8, 8))
        cell = states.cell_density(grid, 0.0, 0.0)
        trajectory = run(cell, HamiltonianSpec.harmonic(), DecoherenceSpec(),
                         EvolutionConfig(0.005, 0.05, stride=5))
        self.assertIsInstance(trajectory.final(), ClassicalDensity)
        self.assertGreater(trajectory.clipped_mass, 0.0)
        self.assertGreaterEqual(trajectory.final().min_value, 0.0)
        self.assertAlmostEqual(trajectory.final().norm(), 1.0, delta=1e-10)
