"""Fourier helpers shared by the Moyal, dynamics and diagnostics code."""
import numpy as np


def angular_frequencies(n, spacing):
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


def real_angular_frequencies(n, spacing):
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=spacing)


def _derivative_factor(n, spacing, order):
    k = angular_frequencies(n, spacing)
    factor = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        # the Nyquist mode has no sign, so odd derivatives drop it
        factor[n // 2] = 0.0
    return factor


def derivative(values, grid, order_q=0, order_p=0):
    """Spectral partial derivative d^order_q/dq d^order_p/dp of a periodic grid function."""
    if order_q == 0 and order_p == 0:
        return np.array(values, copy=True)
    spectrum = np.fft.fft2(values)
    if order_q:
        spectrum *= _derivative_factor(grid.n_q, grid.dq, order_q)[:, None]
    if order_p:
        spectrum *= _derivative_factor(grid.n_p, grid.dp, order_p)[None, :]
    result = np.fft.ifft2(spectrum)
    return result.real if np.isrealobj(values) else result
