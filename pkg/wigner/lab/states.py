"""
Initial states: position-space packets, cats and mixtures, plus closed-form
Gaussian Wigner fields and single-cell classical densities.

A packet of width sigma is psi(x) ~ exp(-(x - q0)^2 / 2 sigma^2 + i p0 x / hbar);
its Wigner function is a Gaussian with variances sigma^2/2 and hbar^2/(2 sigma^2).
"""
import numpy as np
from scipy.special import eval_hermite, factorial

from .exceptions import StateError
from .phase_grid import ClassicalDensity, WaveFunction, WignerField


def packet_amplitudes(grid, q0=0.0, p0=0.0, sigma=1.0):
    x = grid.q
    return np.exp(-((x - q0) ** 2) / (2.0 * sigma ** 2) + 1j * p0 * x / grid.hbar)


def gaussian_packet(grid, q0=0.0, p0=0.0, sigma=1.0):
    return WaveFunction.normalized(grid, packet_amplitudes(grid, q0, p0, sigma))


def cat_state(grid, q0=3.0, sigma=1.0, parity="even", p0=0.0):
    """Superposition of packets at +q0 and -q0."""
    sign = {"even": 1.0, "odd": -1.0}.get(parity)
    if sign is None:
        raise StateError(f"cat parity must be 'even' or 'odd', got {parity!r}")
    amplitudes = packet_amplitudes(grid, q0, p0, sigma) + sign * packet_amplitudes(grid, -q0, p0, sigma)
    return WaveFunction.normalized(grid, amplitudes)


def mixture(grid, q0=3.0, sigma=1.0, p0=0.0):
    """Incoherent equal mixture of the two packets of a cat: no coherences."""
    left = gaussian_packet(grid, -q0, p0, sigma).density_matrix()
    right = gaussian_packet(grid, q0, p0, sigma).density_matrix()
    return 0.5 * (left + right)


def oscillator_eigenstate(grid, n=0, mass=1.0, omega=1.0):
    scale = np.sqrt(mass * omega / grid.hbar)
    xi = scale * grid.q
    amplitudes = eval_hermite(n, xi) * np.exp(-xi ** 2 / 2.0) / np.sqrt(2.0 ** n * factorial(n))
    return WaveFunction.normalized(grid, amplitudes)


def gaussian_values(grid, q0, p0, sigma_q, sigma_p):
    q, p = grid.mesh()
    return np.exp(-((q - q0) ** 2) / (2 * sigma_q ** 2) - ((p - p0) ** 2) / (2 * sigma_p ** 2)) / (
        2 * np.pi * sigma_q * sigma_p
    )


def gaussian_wigner(grid, q0=0.0, p0=0.0, sigma_q=None, sigma_p=None, time=0.0):
    """
    Gaussian Wigner field; defaults to the coherent state sigma_q = sigma_p = sqrt(hbar/2).

    Widths with sigma_q * sigma_p < hbar/2 violate the uncertainty relation and are refused.
    """
    minimal = np.sqrt(grid.hbar / 2.0)
    sigma_q = minimal if sigma_q is None else sigma_q
    sigma_p = minimal if sigma_p is None else sigma_p
    if sigma_q * sigma_p < grid.hbar / 2.0 * (1 - 1e-12):
        raise StateError(
            f"sigma_q * sigma_p = {sigma_q * sigma_p:.4g} is below hbar/2: not the Wigner field of any state"
        )
    return WignerField(grid, gaussian_values(grid, q0, p0, sigma_q, sigma_p), time).validated()


def coherent_wigner(grid, q0=0.0, p0=0.0, sigma=1.0, time=0.0):
    return gaussian_wigner(grid, q0, p0, sigma / np.sqrt(2.0), grid.hbar / (np.sqrt(2.0) * sigma), time)


def cat_wigner_values(grid, q0=3.0, sigma=1.0, parity="even"):
    """Closed-form Wigner function of a two-packet cat (momentum-free packets)."""
    sign = 1.0 if parity == "even" else -1.0
    hbar = grid.hbar
    q, p = grid.mesh()
    overlap = np.exp(-(q0 ** 2) / sigma ** 2)

    def lobe(center):
        return np.exp(-((q - center) ** 2) / sigma ** 2 - (sigma * p / hbar) ** 2) / (np.pi * hbar)

    fringes = 2.0 * lobe(0.0) * np.cos(2.0 * q0 * p / hbar)
    return (lobe(q0) + lobe(-q0) + sign * fringes) / (2.0 * (1.0 + sign * overlap))


def classical_gaussian(grid, q0=0.0, p0=0.0, sigma_q=1.0, sigma_p=1.0, time=0.0):
    return ClassicalDensity(grid, gaussian_values(grid, q0, p0, sigma_q, sigma_p), time).validated()


def classical_mixture(grid, q0=3.0, sigma=1.0, time=0.0):
    """Classical twin of a cat: the two packets' Gaussians without interference."""
    sq, sp = sigma / np.sqrt(2.0), grid.hbar / (np.sqrt(2.0) * sigma)
    values = 0.5 * (gaussian_values(grid, q0, 0.0, sq, sp) + gaussian_values(grid, -q0, 0.0, sq, sp))
    return ClassicalDensity(grid, values, time).validated()


def cell_density(grid, q0=0.0, p0=0.0, time=0.0):
    """All probability in the single cell nearest (q0, p0)."""
    i = int(np.clip(np.rint((q0 - grid.q_min) / grid.dq), 0, grid.n_q - 1))
    j = int(np.clip(np.rint((p0 - grid.p_min) / grid.dp), 0, grid.n_p - 1))
    values = np.zeros(grid.shape)
    values[i, j] = 1.0 / grid.cell_area
    return ClassicalDensity(grid, values, time).validated()

