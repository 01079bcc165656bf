import numpy as np
from django.test import SimpleTestCase
from scipy.integrate import quad

from wigner.lab import states
from wigner.lab.diagnostics import negativity_volume
from wigner.lab.exceptions import BoundaryDecayError, GridError
from wigner.lab.moyal import Q, PolynomialSymbol
from wigner.lab.phase_grid import WaveFunction, make_grid
from wigner.lab.sweeps import fit_exponent
from wigner.lab.weyl_wigner import (
    WeylSymbol,
    expectation,
    inverse_wigner,
    marginals,
    momentum_limit,
    purity,
    trace_pairing,
    wigner_of_density,
    wigner_of_pure,
)


def cat_amplitude(x, q0=3.0, sigma=1.0):
    norm = np.sqrt(2 * sigma * np.sqrt(np.pi) * (1 + np.exp(-(q0 ** 2) / sigma ** 2)))
    return (np.exp(-((x - q0) ** 2) / (2 * sigma ** 2)) + np.exp(-((x + q0) ** 2) / (2 * sigma ** 2))) / norm


def wigner_by_quadrature(q, p, hbar=1.0):
    """W(q, p) = (1/pi hbar) Int psi(q + y) psi(q - y) cos(2 p y / hbar) dy for a real psi."""
    value, _ = quad(
        lambda y: cat_amplitude(q + y) * cat_amplitude(q - y) * np.cos(2 * p * y / hbar),
        -20.0, 20.0, limit=400,
    )
    return value / (np.pi * hbar)


class GroundStateTests(SimpleTestCase):
    def setUp(self):
        self.grid = make_grid(128, 128, (-8, 8), (-8, 8))
        self.psi = states.gaussian_packet(self.grid, 0.0, 0.0, 1.0)
        self.field = wigner_of_pure(self.psi)

    def test_matches_closed_form(self):
        q, p = self.grid.mesh()
        expected = np.exp(-(q ** 2) - p ** 2) / np.pi
        self.assertLessEqual(np.abs(self.field.values - expected).max(), 1e-6)

    def test_normalised_and_bounded(self):
        self.assertAlmostEqual(self.field.norm(), 1.0, places=8)
        self.assertLessEqual(self.field.max_abs, 2.0 / self.grid.hbar)

    def test_marginals(self):
        position, momentum = marginals(self.field)
        np.testing.assert_allclose(position, np.abs(self.psi.amplitudes) ** 2, atol=1e-8)
        expected = np.exp(-self.grid.p ** 2) / np.sqrt(np.pi)
        np.testing.assert_allclose(momentum, expected, atol=1e-8)

    def test_purity_of_pure_state(self):
        self.assertAlmostEqual(purity(self.field), 1.0, delta=2e-3)

    def test_position_variance(self):
        self.assertAlmostEqual(expectation(PolynomialSymbol(Q ** 2), self.field), 0.5, places=8)

    def test_star_product_expectation_agrees(self):
        plain = expectation(PolynomialSymbol(Q ** 2), self.field)
        starred = expectation(PolynomialSymbol(Q ** 2), self.field, use_star=True, order=2)
        self.assertAlmostEqual(starred, plain, places=8)

    def test_trace_pairing_with_identity(self):
        identity = WeylSymbol.constant(self.grid)
        state = WeylSymbol.of_state(self.field)
        self.assertAlmostEqual(trace_pairing(identity, state), 1.0, places=8)


class CatStateTests(SimpleTestCase):
    def setUp(self):
        self.grid = make_grid(160, 128, (-10, 10), (-8, 8))

    def test_interference_is_negative(self):
        field = wigner_of_pure(states.cat_state(self.grid, 3.0, 1.0))
        self.assertLess(field.min_value, -0.01)
        self.assertGreater(negativity_volume(field), 0.05)

    def test_mixture_has_no_interference(self):
        field = wigner_of_density(states.mixture(self.grid, 3.0, 1.0))
        self.assertGreaterEqual(field.min_value, -1e-9)
        self.assertAlmostEqual(purity(field), 0.5, delta=2e-3)

    def test_agrees_with_direct_quadrature(self):
        field = wigner_of_pure(states.cat_state(self.grid, 3.0, 1.0))
        for i, j in [(80, 64), (80, 68), (88, 60), (104, 64)]:
            q, p = self.grid.q[i], self.grid.p[j]
            self.assertAlmostEqual(field.values[i, j], wigner_by_quadrature(q, p), delta=1e-6)

    def test_odd_cat_matches_closed_form(self):
        field = wigner_of_pure(states.cat_state(self.grid, 3.0, 1.0, parity="odd"))
        expected = states.cat_wigner_values(self.grid, 3.0, 1.0, parity="odd")
        self.assertLessEqual(np.abs(field.values - expected).max(), 1e-6)


class TransformLimitsTests(SimpleTestCase):
    def test_momentum_window_beyond_alias_limit(self):
        grid = make_grid(64, 64, (-8, 8), (-8, 8))
        self.assertLess(momentum_limit(grid), 8)
        with self.assertRaises(GridError):
            wigner_of_pure(states.gaussian_packet(grid))

    def test_plane_wave_does_not_decay(self):
        grid = make_grid(64, 64, (-8, 8), (-6, 6))
        psi = WaveFunction.normalized(grid, np.exp(1j * grid.q))
        with self.assertRaises(BoundaryDecayError):
            wigner_of_pure(psi)


class InverseTransformTests(SimpleTestCase):
    def test_recovers_every_entry(self):
        grid = make_grid(128, 128, (-8, 8), (-8, 8))
        rho = states.gaussian_packet(grid, 0.5, 1.0, 1.0).density_matrix()
        recovered = inverse_wigner(wigner_of_density(rho))
        scale = np.abs(rho.entries).max()
        self.assertLessEqual(np.abs(recovered.entries - rho.entries).max(), 1e-8 * scale)
        # entries whose midpoint falls between samples
        odd = (np.add.outer(np.arange(128), np.arange(128)) % 2).astype(bool)
        self.assertGreater(np.abs(recovered.entries[odd]).max(), 0.1 * scale)
        self.assertAlmostEqual(recovered.trace(), 1.0, delta=1e-8)

    def test_recovers_a_mixture(self):
        grid = make_grid(160, 128, (-10, 10), (-8, 8))
        rho = states.mixture(grid, 2.0, 1.0, 0.5)
        recovered = inverse_wigner(wigner_of_density(rho))
        self.assertLessEqual(np.abs(recovered.entries - rho.entries).max(), 1e-8 * np.abs(rho.entries).max())
        self.assertAlmostEqual(recovered.purity(), rho.purity(), delta=1e-8)


class OscillatorEigenstateTests(SimpleTestCase):
    def test_first_excited_state_at_origin(self):
        for hbar, window in ((1.0, 8.0), (0.5, 4.0)):
            with self.subTest(hbar=hbar):
                grid = make_grid(128, 64 if hbar < 1 else 128, (-10, 10), (-window, window), hbar=hbar)
                field = wigner_of_pure(states.oscillator_eigenstate(grid, 1))
                i, j = np.argmin(np.abs(grid.q)), np.argmin(np.abs(grid.p))
                self.assertLess(abs(grid.q[i]) + abs(grid.p[j]), 1e-12)
                self.assertAlmostEqual(field.values[i, j], -1 / (np.pi * hbar), delta=1e-9)
                self.assertAlmostEqual(field.min_value, -1 / (np.pi * hbar), delta=1e-9)

    def test_orthogonal_states_have_zero_overlap(self):
        grid = make_grid(128, 128, (-10, 10), (-8, 8))
        ground = wigner_of_pure(states.oscillator_eigenstate(grid, 0))
        excited = wigner_of_pure(states.oscillator_eigenstate(grid, 1))
        self.assertLessEqual(abs(trace_pairing(ground, excited)), 1e-12)
        # Tr[rho^2] = (2 pi hbar)^2 times the pairing of W with itself
        self.assertAlmostEqual((2 * np.pi) ** 2 * trace_pairing(excited, excited), 1.0, delta=1e-8)


class BoundScalingTests(SimpleTestCase):
    def test_cat_peak_scales_as_inverse_hbar(self):
        hbars = [1.0, 0.5, 0.25]
        peaks = []
        for hbar in hbars:
            window = 6 * np.sqrt(hbar)
            grid = make_grid(256, 128, (-9, 9), (-window, window), hbar=hbar)
            field = wigner_of_pure(states.cat_state(grid, 3.0, np.sqrt(hbar)))
            self.assertLessEqual(field.max_abs, 2.0 / hbar * (1 + 1e-6))
            peaks.append(field.max_abs)
        self.assertAlmostEqual(fit_exponent(hbars, peaks), -1.0, delta=0.1)
