"""
Diagnostics over fields and trajectories: negativity, positivity time,
continuity-flux deviation, Ehrenfest residuals, support area, coarse graining
and the measure-axiom report.

Trajectory functions accept any object with `snapshots`, `times`,
`hamiltonian`, `decoherence` and `snapshot_spacing`, which is what
`dynamics.run` returns.
"""
from dataclasses import asdict, dataclass
import logging

import numpy as np
from scipy.ndimage import uniform_filter

from . import spectral
from .conf import get_tolerances
from .exceptions import GridError, PartitionError, StateError
from .phase_grid import IndexBox, PhaseGrid, quadrature, support_area
from .weyl_wigner import WeylSymbol, expectation, purity

logger = logging.getLogger(__name__)

QUASI = "quasi-probability"
CLASSICAL = "classical-probability"
MIN_REGION_CELLS = 4
MIN_FD_POINTS = 5


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    norm: float
    min_value: float
    negativity_volume: float
    purity: float
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    flux_deviation: tuple
    support_area: float
    positive: bool

    def as_row(self):
        row = asdict(self)
        flux = row.pop("flux_deviation")
        positive = row.pop("positive")
        support = row.pop("support_area")
        for index, value in enumerate(flux):
            row[f"flux_dev_region{index}"] = value
        row["support_area"] = support
        row["positive"] = positive
        return row


@dataclass(frozen=True)
class MeasureReport:
    normalized: bool
    finitely_additive: bool
    positive: bool
    bounded_by: float
    classification: str
    norm: float
    min_value: float
    empty_measure: float
    additivity_residue: float

    def as_dict(self):
        return asdict(self)


def negativity_volume(field):
    """Integral of |W| minus 1; zero for any normalised non-negative field."""
    grid = field.grid
    return float(np.sum(np.abs(field.values)) * grid.cell_area - 1.0)


def is_positive(field):
    return field.min_value > -get_tolerances().positivity_threshold(field.grid.hbar)


def effective_support_area(field):
    """Area in units of hbar of the fewest cells carrying the configured share of the integral of |field|."""
    return support_area(field.values, field.grid, get_tolerances().SUPPORT_MASS)


def moments(field):
    """(mean_q, mean_p, var_q, var_p) of a normalised field."""
    q, p = field.grid.mesh()
    w = field.values * field.grid.cell_area
    mass = w.sum()
    mean_q = float((q * w).sum() / mass)
    mean_p = float((p * w).sum() / mass)
    var_q = float(((q - mean_q) ** 2 * w).sum() / mass)
    var_p = float(((p - mean_p) ** 2 * w).sum() / mass)
    return mean_q, mean_p, var_q, var_p


def positivity_time(trajectory, sustain=None):
    """
    First snapshot time from which min W stays above -threshold for `sustain`
    consecutive snapshots; None if that never happens.
    """
    sustain = get_tolerances().POSITIVITY_SUSTAIN if sustain is None else sustain
    flags = [is_positive(snapshot) for snapshot in trajectory.snapshots]
    times = trajectory.times
    run = 0
    for index, flag in enumerate(flags):
        run = run + 1 if flag else 0
        if run >= sustain:
            return float(times[index - sustain + 1])
    return None


def time_derivative(series, spacing):
    """Fourth-order finite differences; one-sided five-point stencils at the ends."""
    f = np.asarray(series, dtype=float)
    n = f.size
    if n < MIN_FD_POINTS:
        return np.full(n, np.nan)
    d = np.empty(n)
    d[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / 12.0
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / 12.0
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / 12.0
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / 12.0
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / 12.0
    return d / spacing


def classical_rate(field, hamiltonian, rate=0.0):
    """{H, F} + (rate/2) d^2F/dp^2, the right-hand side of the classical transport equation."""
    grid = field.grid
    q, p = grid.mesh()
    d_q = spectral.derivative(field.values, grid, order_q=1)
    d_p = spectral.derivative(field.values, grid, order_p=1)
    result = hamiltonian.slope_at(q) * d_p - (p / hamiltonian.mass) * d_q
    if rate > 0:
        result = result + 0.5 * rate * spectral.derivative(field.values, grid, order_p=2)
    return result


def region_weights(grid, region, resolution=1):
    """
    Indicator of the region, blurred over `resolution` cells: the region as
    seen by a measurement that cannot resolve finer than `resolution` cells.
    """
    region.check(grid)
    if min(region.q_stop - region.q_start, region.p_stop - region.p_start) < MIN_REGION_CELLS:
        raise GridError(f"region {region} is smaller than {MIN_REGION_CELLS}x{MIN_REGION_CELLS} cells")
    weights = region.mask(grid).astype(float)
    if resolution > 1:
        weights = uniform_filter(weights, size=int(resolution), mode="wrap")
    return weights


def flux_deviation(trajectory, region, resolution=1):
    """
    Per snapshot: rate of change of the region's mass minus the classical
    continuity flux into it (including the diffusion term of the run).
    Zero for classical transport; the Moyal corrections show up here.
    """
    grid = trajectory.snapshots[0].grid
    weights = region_weights(grid, region, resolution)
    masses = [float(np.sum(weights * s.values) * grid.cell_area) for s in trajectory.snapshots]
    rate = trajectory.decoherence.rate
    inflow = np.array([
        float(np.sum(weights * classical_rate(s, trajectory.hamiltonian, rate)) * grid.cell_area)
        for s in trajectory.snapshots
    ])
    return time_derivative(masses, trajectory.snapshot_spacing) - inflow


@dataclass(frozen=True)
class EhrenfestReport:
    times: np.ndarray
    mean_q: np.ndarray
    mean_p: np.ndarray
    position_residual: float
    momentum_residual: float

    @property
    def max_residual(self):
        return max(self.position_residual, self.momentum_residual)


def ehrenfest_check(trajectory, hamiltonian=None):
    """
    Compare d<q>/dt with <p>/m and d<p>/dt with -<V'> along a trajectory.
    The same code serves Wigner and classical trajectories.
    """
    hamiltonian = trajectory.hamiltonian if hamiltonian is None else hamiltonian
    snapshots = trajectory.snapshots
    grid = snapshots[0].grid
    p_symbol = WeylSymbol(grid, np.broadcast_to(grid.p[None, :], grid.shape))
    q_symbol = WeylSymbol(grid, np.broadcast_to(grid.q[:, None], grid.shape))
    force = WeylSymbol.from_polynomial(hamiltonian.force_symbol, grid)

    mean_q = np.array([expectation(q_symbol, s) for s in snapshots])
    mean_p = np.array([expectation(p_symbol, s) for s in snapshots])
    mean_force = np.array([expectation(force, s) for s in snapshots])
    spacing = trajectory.snapshot_spacing
    q_residual = time_derivative(mean_q, spacing) - mean_p / hamiltonian.mass
    p_residual = time_derivative(mean_p, spacing) + mean_force
    return EhrenfestReport(
        trajectory.times, mean_q, mean_p,
        float(np.nanmax(np.abs(q_residual))) if len(snapshots) >= MIN_FD_POINTS else float("nan"),
        float(np.nanmax(np.abs(p_residual))) if len(snapshots) >= MIN_FD_POINTS else float("nan"),
    )


def coarse_grain(field, cell_factor):
    """Block means over cell_factor x cell_factor cells; the integral is unchanged."""
    grid = field.grid
    f = int(cell_factor)
    if f < 1 or grid.n_q % f or grid.n_p % f:
        raise GridError(f"cell factor {cell_factor} does not divide the grid {grid.shape}")
    if f == 1:
        return field
    blocks = field.values.reshape(grid.n_q // f, f, grid.n_p // f, f).mean(axis=(1, 3))
    # samples move to block centres
    q_shift = 0.5 * (f - 1) * grid.dq
    p_shift = 0.5 * (f - 1) * grid.dp
    coarse = PhaseGrid(grid.n_q // f, grid.n_p // f, grid.q_min + q_shift, grid.q_max + q_shift,
                       grid.p_min + p_shift, grid.p_max + p_shift, grid.hbar)
    logger.debug(f"coarse grained by {f}: cells of {coarse.cell_area_hbar:.3g} hbar")
    return type(field)(coarse, blocks, field.time)


def coarse_factor(grid, min_area_hbar=4.0):
    """Smallest factor dividing both grid dimensions whose cells cover at least min_area_hbar."""
    for f in range(1, min(grid.n_q, grid.n_p) + 1):
        if grid.n_q % f == 0 and grid.n_p % f == 0 and f * f * grid.cell_area_hbar >= min_area_hbar:
            return f
    raise GridError(f"no cell factor of grid {grid.shape} reaches {min_area_hbar} hbar")


def uniform_partition(grid, blocks_q, blocks_p):
    """Split the grid into blocks_q x blocks_p near-equal boxes."""
    if not (1 <= blocks_q <= grid.n_q and 1 <= blocks_p <= grid.n_p):
        raise PartitionError(f"cannot split grid {grid.shape} into {blocks_q}x{blocks_p} boxes")
    q_cuts = np.linspace(0, grid.n_q, blocks_q + 1).round().astype(int)
    p_cuts = np.linspace(0, grid.n_p, blocks_p + 1).round().astype(int)
    return [
        IndexBox(int(q_cuts[i]), int(q_cuts[i + 1]), int(p_cuts[j]), int(p_cuts[j + 1]))
        for i in range(blocks_q) for j in range(blocks_p)
    ]


def parse_partition(spec, grid):
    """'4x4' -> uniform_partition(grid, 4, 4)."""
    try:
        blocks_q, blocks_p = (int(part) for part in str(spec).lower().split("x"))
    except ValueError:
        raise PartitionError(f"partition must look like '4x4', got {spec!r}") from None
    return uniform_partition(grid, blocks_q, blocks_p)


def _check_partition(grid, partition):
    boxes = [box for box in partition if not box.is_empty]
    for box in boxes:
        try:
            box.check(grid)
        except GridError as exc:
            raise PartitionError(str(exc)) from None
    for i, box in enumerate(boxes):
        for other in boxes[i + 1:]:
            if box.overlaps(other):
                raise PartitionError(f"boxes {box} and {other} overlap")
    covered = sum(box.cells for box in boxes)
    if covered != grid.n_q * grid.n_p:
        raise PartitionError(f"partition covers {covered} of {grid.n_q * grid.n_p} cells")
    return boxes


def validate_measure(field, partition):
    """
    Check the set function induced by the field against the probability axioms.

    Positivity is judged on the cells themselves, the atoms of the event
    algebra, so a coarse partition cannot hide negative cells.
    """
    tol = get_tolerances()
    grid = field.grid
    boxes = _check_partition(grid, partition)
    total = quadrature(field)
    empty = quadrature(field, IndexBox.empty())
    parts = np.array([quadrature(field, box) for box in boxes])
    residue = abs(float(parts.sum()) - total)
    scale = max(1.0, float(np.abs(parts).sum()))
    normalized = abs(total - 1.0) <= tol.NORM_TOLERANCE and empty == 0.0
    additive = residue <= tol.ADDITIVITY_TOLERANCE * scale
    positive = is_positive(field)
    classical = normalized and additive and positive
    report = MeasureReport(
        normalized=bool(normalized),
        finitely_additive=bool(additive),
        positive=bool(positive),
        bounded_by=field.max_abs,
        classification=CLASSICAL if classical else QUASI,
        norm=total,
        min_value=field.min_value,
        empty_measure=empty,
        additivity_residue=residue,
    )
    logger.debug(f"measure validated: {report.classification}, norm {total:.12g}, min {report.min_value:.3g}")
    return report


def build_records(trajectory, regions=()):
    """One DiagnosticsRecord per snapshot."""
    snapshots = trajectory.snapshots
    fluxes = [flux_deviation(trajectory, region) for region in regions]
    records = []
    for index, snapshot in enumerate(snapshots):
        mean_q, mean_p, var_q, var_p = moments(snapshot)
        records.append(DiagnosticsRecord(
            time=snapshot.time,
            norm=snapshot.norm(),
            min_value=snapshot.min_value,
            negativity_volume=negativity_volume(snapshot),
            purity=purity(snapshot),
            mean_q=mean_q,
            mean_p=mean_p,
            var_q=var_q,
            var_p=var_p,
            flux_deviation=tuple(float(series[index]) for series in fluxes),
            support_area=effective_support_area(snapshot),
            positive=is_positive(snapshot),
        ))
    return records


@dataclass(frozen=True)
class EmergenceReport:
    positivity_time: float
    cell_factor: int
    cell_area_hbar: float
    fine_deviation: float
    coarse_deviation: float
    negativity_before: float
    negativity_after: float
    measure: MeasureReport

    @property
    def flux_reduction(self):
        if self.coarse_deviation == 0:
            return float("inf")
        return self.fine_deviation / self.coarse_deviation


def double_emergence(trajectory, region, min_area_hbar=4.0, partition="4x4"):
    """
    Decoherence to Wigner positivity, then coarse graining to cells of at least
    `min_area_hbar`. Flux deviations are compared at the positivity time for
    the region seen sharply and at the coarse resolution.
    """
    t_d = positivity_time(trajectory)
    if t_d is None:
        raise StateError("trajectory never reaches sustained Wigner positivity")
    index = int(np.argmin(np.abs(trajectory.times - t_d)))
    positive_field = trajectory.snapshots[index]
    factor = coarse_factor(positive_field.grid, min_area_hbar)
    fine = flux_deviation(trajectory, region)
    coarse = flux_deviation(trajectory, region, resolution=factor)
    grained = coarse_grain(positive_field, factor)
    report = EmergenceReport(
        positivity_time=t_d,
        cell_factor=factor,
        cell_area_hbar=grained.grid.cell_area_hbar,
        fine_deviation=float(abs(fine[index])),
        coarse_deviation=float(abs(coarse[index])),
        negativity_before=negativity_volume(trajectory.snapshots[0]),
        negativity_after=negativity_volume(grained),
        measure=validate_measure(grained, parse_partition(partition, grained.grid)),
    )
    logger.info(
        f"double emergence at t_D={t_d:.4g}: flux deviation {report.fine_deviation:.3g} fine, "
        f"{report.coarse_deviation:.3g} coarse (factor {factor})"
    )
    return report
