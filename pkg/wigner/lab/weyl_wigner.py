"""
Wigner transform of position-space states, its inverse, marginals and
expectation values.

Conventions: W(q, p) = (1/2 pi hbar) Int dy rho(q + y/2, q - y/2) exp(-i p y / hbar),
normalised so that the integral of W over phase space is 1 and |W| <= 1/(pi hbar).
The Weyl symbol of an operator A is A(q, p) = Int dy <q + y/2|A|q - y/2> exp(-i p y / hbar),
so the symbol of rho itself is 2 pi hbar W and

    Tr[A B] = (1 / 2 pi hbar) Int A B dq dp,     <A> = Int W A dq dp.

The 1/hbar prefactor often printed for the trace rule corresponds to measuring
action in units of h = 2 pi hbar; with this normalisation marginals and norms
come out exactly.
"""
from dataclasses import dataclass
import logging

import numpy as np

from . import spectral
from .conf import get_tolerances
from .exceptions import BoundaryDecayError, GridError, GridMismatchError, StateError
from .phase_grid import DensityMatrix, WignerField, check_boundary_decay

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class WeylSymbol:
    """Phase-space function of an observable, sampled on a grid."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != self.grid.shape:
            raise GridMismatchError(f"symbol of shape {values.shape} on grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise StateError("symbol contains NaN or Inf")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_polynomial(cls, symbol, grid):
        values = symbol.evaluate(grid)
        if np.iscomplexobj(values):
            if np.abs(values.imag).max() > get_tolerances().IMAG_RESIDUE * max(1.0, np.abs(values).max()):
                raise StateError("symbol of a Hermitian observable must be real")
            values = values.real
        return cls(grid, values)

    @classmethod
    def constant(cls, grid, value=1.0):
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def of_state(cls, field):
        """Weyl symbol 2 pi hbar W of the density operator behind a Wigner field."""
        return cls(field.grid, 2.0 * np.pi * field.grid.hbar * field.values)


def _require_position_match(rho_grid, grid):
    if (rho_grid.n_q, rho_grid.q_min, rho_grid.q_max, rho_grid.hbar) != (grid.n_q, grid.q_min, grid.q_max, grid.hbar):
        raise GridMismatchError("density matrix position samples or hbar do not match the phase grid")


def momentum_limit(grid):
    """Largest |p| representable without aliasing for offsets sampled every 2 dq."""
    return np.pi * grid.hbar / (2.0 * grid.dq)


def _antidiagonals(entries):
    """R[i, k] = rho(x_{i+k}, x_{i-k}) for k = -(n-1)..(n-1), zero outside the grid."""
    n = entries.shape[0]
    offsets = np.arange(-(n - 1), n)
    rows = np.arange(n)[:, None]
    a = rows + offsets[None, :]
    b = rows - offsets[None, :]
    inside = (a >= 0) & (a < n) & (b >= 0) & (b < n)
    gathered = entries[np.clip(a, 0, n - 1), np.clip(b, 0, n - 1)]
    return np.where(inside, gathered, 0.0), offsets, inside


def _kernel(grid, offsets, sign):
    return np.exp(sign * 2j * np.outer(offsets * grid.dq, grid.p) / grid.hbar)


def wigner_of_density(rho, grid=None, time=0.0):
    grid = rho.grid if grid is None else grid
    _require_position_match(rho.grid, grid)
    rho.validated()
    tol = get_tolerances()
    limit = momentum_limit(grid)
    if np.abs(grid.p).max() > limit * (1 + 1e-12):
        raise GridError(
            f"momentum bounds ({grid.p_min}, {grid.p_max}) exceed the alias-free range +-{limit:.6g} "
            f"set by dq={grid.dq:.6g} and hbar={grid.hbar}"
        )
    entries = 0.5 * (rho.entries + rho.entries.conj().T)
    density = np.abs(np.diag(entries))
    if max(density[0], density[-1]) > tol.BOUNDARY_DECAY * density.max():
        raise BoundaryDecayError("position density does not decay at the grid boundary")

    ridges, offsets, _ = _antidiagonals(entries)
    values = (grid.dq / (np.pi * grid.hbar)) * (ridges @ _kernel(grid, offsets, -1.0))
    residue = float(np.abs(values.imag).max())
    scale = max(1.0, float(np.abs(values.real).max()))
    assert residue <= tol.IMAG_RESIDUE * scale, f"imaginary residue {residue:.3g} in Wigner transform"
    values = values.real
    if not check_boundary_decay(values, tol.BOUNDARY_DECAY):
        raise BoundaryDecayError("Wigner field does not decay at the momentum boundary")
    return WignerField(grid, values, time).validated()


def wigner_of_pure(psi, grid=None, time=0.0):
    return wigner_of_density(psi.density_matrix(), grid, time)


def inverse_wigner(field):
    """
    Density matrix recovered by the momentum integral
    rho(Q + y/2, Q - y/2) = Int W(Q, p) exp(i p y / hbar) dp.

    Entries whose midpoint Q is a grid sample use the rows of W. The others
    have Q halfway between samples and use W moved half a cell along q by
    spectral interpolation, which needs W to decay at the q boundary.
    """
    grid = field.grid
    n = grid.n_q
    kappa = spectral.real_angular_frequencies(n, grid.dq)[:, None]
    halfway = np.fft.irfft(np.fft.rfft(field.values, axis=0) * np.exp(0.5j * kappa * grid.dq), n=n, axis=0)
    steps = np.arange(-n, n)
    rows = np.arange(n)[:, None]
    entries = np.zeros((n, n), dtype=complex)
    for samples, shift in ((field.values, 0), (halfway, 1)):
        coefficients = (samples.astype(complex) @ _kernel(grid, steps + 0.5 * shift, 1.0).T) * grid.dp
        a = rows + steps[None, :] + shift
        b = rows - steps[None, :]
        inside = (a >= 0) & (a < n) & (b >= 0) & (b < n)
        entries[a[inside], b[inside]] = coefficients[inside]
    return DensityMatrix(grid, entries)


def marginals(field):
    grid = field.grid
    position = field.values.sum(axis=1) * grid.dp
    momentum = field.values.sum(axis=0) * grid.dq
    return position, momentum


def expectation(symbol, field, use_star=False, order=None):
    """
    <A> = Int W A for a WeylSymbol or a polynomial symbol.

    With use_star the integrand is the truncated star product A * W, which has
    the same integral; polynomial symbols keep exact derivatives on that path.
    """
    polynomial = None
    if not isinstance(symbol, WeylSymbol):
        polynomial = symbol
        symbol = WeylSymbol.from_polynomial(symbol, field.grid)
    symbol.grid.require_same(field.grid)
    if not use_star:
        return float(np.sum(symbol.values * field.values) * field.grid.cell_area)
    from .moyal import star_product

    left = symbol.values if polynomial is None else polynomial
    product = star_product(left, field, order=order, grid=field.grid)
    return float(np.sum(product.real) * field.grid.cell_area)


def trace_pairing(a, b):
    a.grid.require_same(b.grid)
    grid = a.grid
    return float(np.sum(a.values * b.values) * grid.cell_area / (2.0 * np.pi * grid.hbar))


def purity(field):
    """Tr[rho^2] of the state behind a Wigner field."""
    symbol = WeylSymbol.of_state(field)
    return trace_pairing(symbol, symbol)
