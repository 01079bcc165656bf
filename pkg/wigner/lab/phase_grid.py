"""
Phase-space discretisation, field containers and quadrature.

Every array on a grid is indexed [i_q, i_p] (position outer, momentum inner).
Sample i maps to q_min + i*dq with dq = (q_max - q_min)/n_q, so the upper bound
itself is not sampled; Fourier-based operations treat the grid as periodic.
"""
from dataclasses import dataclass, field, replace
from functools import cached_property
import logging

import numpy as np

from .conf import get_tolerances
from .exceptions import GridError, GridMismatchError, StateError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8


@dataclass(frozen=True)
class PhaseGrid:
    n_q: int
    n_p: int
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise GridError(f"hbar must be positive, got {self.hbar}")
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise GridError(
                f"unordered bounds: q=({self.q_min}, {self.q_max}) p=({self.p_min}, {self.p_max})"
            )
        if self.n_q < MIN_SAMPLES or self.n_p < MIN_SAMPLES:
            raise GridError(f"grid needs at least {MIN_SAMPLES} samples per axis, got {self.n_q}x{self.n_p}")

    @property
    def dq(self):
        return (self.q_max - self.q_min) / self.n_q

    @property
    def dp(self):
        return (self.p_max - self.p_min) / self.n_p

    @property
    def cell_area(self):
        return self.dq * self.dp

    @property
    def cell_area_hbar(self):
        """Cell area in units of hbar."""
        return self.cell_area / self.hbar

    @property
    def shape(self):
        return (self.n_q, self.n_p)

    @cached_property
    def q(self):
        return self.q_min + self.dq * np.arange(self.n_q)

    @cached_property
    def p(self):
        return self.p_min + self.dp * np.arange(self.n_p)

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    def with_hbar(self, hbar):
        return replace(self, hbar=hbar)

    def require_same(self, other):
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


def make_grid(n_q, n_p, q_bounds, p_bounds, hbar=1.0):
    grid = PhaseGrid(int(n_q), int(n_p), float(q_bounds[0]), float(q_bounds[1]),
                     float(p_bounds[0]), float(p_bounds[1]), float(hbar))
    logger.debug(f"grid {grid.n_q}x{grid.n_p}, cell area {grid.cell_area_hbar:.3g} hbar")
    return grid


@dataclass(frozen=True)
class IndexBox:
    """Half-open rectangle of grid indices [q_start, q_stop) x [p_start, p_stop)."""

    q_start: int
    q_stop: int
    p_start: int
    p_stop: int

    @classmethod
    def whole(cls, grid):
        return cls(0, grid.n_q, 0, grid.n_p)

    @classmethod
    def empty(cls):
        return cls(0, 0, 0, 0)

    @classmethod
    def from_physical(cls, grid, q_range, p_range):
        """Smallest index box whose samples lie inside the physical rectangle."""
        qa = int(np.ceil((q_range[0] - grid.q_min) / grid.dq - 1e-9))
        qb = int(np.floor((q_range[1] - grid.q_min) / grid.dq + 1e-9)) + 1
        pa = int(np.ceil((p_range[0] - grid.p_min) / grid.dp - 1e-9))
        pb = int(np.floor((p_range[1] - grid.p_min) / grid.dp + 1e-9)) + 1
        box = cls(max(qa, 0), min(qb, grid.n_q), max(pa, 0), min(pb, grid.n_p))
        box.check(grid)
        return box

    @property
    def is_empty(self):
        return self.q_stop <= self.q_start or self.p_stop <= self.p_start

    @property
    def cells(self):
        return 0 if self.is_empty else (self.q_stop - self.q_start) * (self.p_stop - self.p_start)

    @property
    def slices(self):
        return slice(self.q_start, self.q_stop), slice(self.p_start, self.p_stop)

    def check(self, grid):
        if not (0 <= self.q_start <= self.q_stop <= grid.n_q and 0 <= self.p_start <= self.p_stop <= grid.n_p):
            raise GridError(f"region {self} out of bounds for grid {grid.shape}")

    def overlaps(self, other):
        if self.is_empty or other.is_empty:
            return False
        return (self.q_start < other.q_stop and other.q_start < self.q_stop
                and self.p_start < other.p_stop and other.p_start < self.p_stop)

    def mask(self, grid):
        m = np.zeros(grid.shape, dtype=bool)
        m[self.slices] = True
        return m


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PhaseSpaceField:
    """A real grid function at one time instant; base of Wigner fields and classical densities."""

    grid: PhaseGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != self.grid.shape:
            raise GridMismatchError(f"values of shape {values.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise StateError("field contains NaN or Inf")
        object.__setattr__(self, "values", values)

    def norm(self):
        return quadrature(self)

    @property
    def min_value(self):
        return float(self.values.min())

    @property
    def max_abs(self):
        return float(np.abs(self.values).max())

    def evolve_to(self, values, time):
        """Same kind of field on the same grid with new values."""
        return replace(self, values=values, time=float(time))

    def boundary_decays(self, rel_tol=None):
        tol = get_tolerances().BOUNDARY_DECAY if rel_tol is None else rel_tol
        return check_boundary_decay(self.values, tol)

    def validated(self):
        tol = get_tolerances()
        norm = self.norm()
        if abs(norm - 1.0) > tol.NORM_TOLERANCE:
            raise StateError(f"field norm {norm:.12g} deviates from 1 by more than {tol.NORM_TOLERANCE}")
        return self


@dataclass(frozen=True, eq=False)
class WignerField(PhaseSpaceField):
    """Quasi-probability density W(q, p) in units of 1/action."""

    def bound(self):
        """|W| may not exceed 1/epsilon with epsilon = hbar/2."""
        return 2.0 / self.grid.hbar

    def validated(self):
        super().validated()
        tol = get_tolerances()
        limit = self.bound() * (1.0 + 1e-6)
        if self.max_abs > limit:
            raise StateError(f"|W| = {self.max_abs:.6g} exceeds the bound 2/hbar = {self.bound():.6g}")
        area = support_area(self.values, self.grid, tol.SUPPORT_MASS)
        if area < tol.SUPPORT_SLACK:
            raise StateError(
                f"effective support {area:.3g} hbar is below the minimum phase-space volume of one hbar"
            )
        return self


@dataclass(frozen=True, eq=False)
class ClassicalDensity(PhaseSpaceField):
    """Phase-space probability density rho(q, p); may concentrate on a single cell."""

    def validated(self):
        super().validated()
        floor = -get_tolerances().NORM_TOLERANCE * max(self.max_abs, 1.0)
        if self.min_value < floor:
            raise StateError(f"classical density has negative value {self.min_value:.3g}")
        return self


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Position-representation amplitudes psi(x_i) on the grid's q samples."""

    grid: PhaseGrid
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = _frozen(self.amplitudes, complex)
        if amps.shape != (self.grid.n_q,):
            raise GridMismatchError(f"{amps.shape[0]} amplitudes for {self.grid.n_q} position samples")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, grid, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(grid, amps / np.sqrt(np.sum(np.abs(amps) ** 2) * grid.dq))

    def norm(self):
        return float(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dq)

    def validated(self):
        tol = get_tolerances().NORM_TOLERANCE
        if abs(self.norm() - 1.0) > tol:
            raise StateError(f"wavefunction norm {self.norm():.12g} is not 1")
        return self

    def density_matrix(self):
        return DensityMatrix(self.grid, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """rho(x, x') in position representation, units 1/length."""

    grid: PhaseGrid
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = _frozen(self.entries, complex)
        if entries.shape != (self.grid.n_q, self.grid.n_q):
            raise GridMismatchError(f"density matrix of shape {entries.shape} on grid with n_q={self.grid.n_q}")
        object.__setattr__(self, "entries", entries)

    def trace(self):
        return float(np.real(np.trace(self.entries)) * self.grid.dq)

    def purity(self):
        return float(np.real(np.trace(self.entries @ self.entries)) * self.grid.dq ** 2)

    def hermitian_residue(self):
        return float(np.abs(self.entries - self.entries.conj().T).max())

    def validated(self):
        tol = get_tolerances()
        scale = max(float(np.abs(self.entries).max()), 1.0)
        if self.hermitian_residue() > tol.HERMITIAN_TOLERANCE * scale:
            raise StateError(f"density matrix is not Hermitian (residue {self.hermitian_residue():.3g})")
        if abs(self.trace() - 1.0) > tol.NORM_TOLERANCE:
            raise StateError(f"density matrix trace {self.trace():.12g} is not 1")
        if np.real(np.diag(self.entries)).min() < -tol.NORM_TOLERANCE * scale:
            raise StateError("density matrix has negative diagonal entries")
        return self

    def __add__(self, other):
        self.grid.require_same(other.grid)
        return DensityMatrix(self.grid, self.entries + other.entries)

    def __mul__(self, factor):
        return DensityMatrix(self.grid, self.entries * factor)

    __rmul__ = __mul__


def quadrature(field, region=None):
    """Riemann sum of the field over an index box (the whole grid by default)."""
    grid = field.grid
    box = IndexBox.whole(grid) if region is None else region
    box.check(grid)
    if box.is_empty:
        return 0.0
    # numpy sums contiguous rows pairwise, in a fixed order
    return float(np.sum(field.values[box.slices]) * grid.cell_area)


def check_boundary_decay(values, rel_tol):
    """True if every edge sample is within rel_tol of the field's maximum magnitude."""
    peak = np.abs(values).max()
    if peak == 0:
        return True
    edges = np.concatenate([values[0, :], values[-1, :], values[:, 0], values[:, -1]])
    return bool(np.abs(edges).max() <= rel_tol * peak)


def support_area(values, grid, mass=0.99):
    """Area, in units of hbar, of the fewest cells carrying `mass` of the integral of |values|."""
    weights = np.sort(np.abs(values), axis=None)[::-1]
    total = weights.sum()
    if total == 0:
        return 0.0
    cells = int(np.searchsorted(np.cumsum(weights), mass * total)) + 1
    return min(cells, weights.size) * grid.cell_area_hbar
