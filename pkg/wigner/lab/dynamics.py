"""
Time evolution of Wigner fields and classical densities.

Quantum fields follow dW/dt = {{H, W}} + (D/2) d^2W/dp^2 for H = p^2/2m + V(q);
classical densities follow the same equation with the Poisson bracket in
place of the Moyal bracket. Both are integrated by a Strang split step:

    half kinetic shear  ->  potential kick and momentum diffusion  ->  half kinetic shear

The kinetic shear is applied in (kappa, p) space, kappa conjugate to q. The kick
and the diffusion are applied in (q, theta) space, theta conjugate to p, where the
Moyal potential term is diagonal:

    quantum:    exp(i dt [V(q + hbar theta/2) - V(q - hbar theta/2)] / hbar)
    classical:  exp(i dt theta V'(q))
    diffusion:  exp(-dt D theta^2 / 2)

For quadratic V the two kicks coincide, so both solvers share one code path.
"""
from dataclasses import dataclass, field
from functools import cached_property
import logging
import time as wallclock

import numpy as np
from scipy.fft import irfft, rfft

from . import diagnostics, snapshots, spectral
from .conf import get_tolerances
from .exceptions import ConfigError, NumericalAbort, StabilityError, StateError
from .moyal import P, PolynomialSymbol, exact
from .phase_grid import ClassicalDensity, WignerField

logger = logging.getLogger(__name__)

INTEGRATORS = ("split-step-spectral", "rk4-spectral")
CLASSICAL_SCHEMES = ("spectral", "semi-lagrangian")
MAX_POTENTIAL_DEGREE = 6


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """H = p^2/2m + V(q)."""

    mass: float
    potential: PolynomialSymbol

    def __post_init__(self):
        if not self.mass > 0:
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if self.potential.depends_on_p:
            raise ConfigError("the potential may not depend on p")
        if self.potential.degree > MAX_POTENTIAL_DEGREE:
            raise ConfigError(f"potential degree {self.potential.degree} exceeds {MAX_POTENTIAL_DEGREE}")
        if not self.potential.is_real:
            raise ConfigError("the potential must have real coefficients")

    @classmethod
    def free(cls, mass=1.0):
        return cls(float(mass), PolynomialSymbol.potential([0]))

    @classmethod
    def harmonic(cls, mass=1.0, omega=1.0):
        return cls(float(mass), PolynomialSymbol.potential([0, 0, mass * omega ** 2 / 2]))

    @classmethod
    def quartic(cls, mass=1.0, a=-1.0, b=0.05):
        return cls(float(mass), PolynomialSymbol.potential([0, 0, a, 0, b]))

    @property
    def is_free(self):
        return self.potential.diff(1).expr == 0

    @property
    def is_quadratic(self):
        return self.potential.degree <= 2

    @cached_property
    def symbol(self):
        """H(q, p) as a polynomial symbol."""
        return PolynomialSymbol(P ** 2 / (2 * exact(self.mass)) + self.potential.expr)

    @cached_property
    def force_symbol(self):
        """dV/dq."""
        return self.potential.diff(1)

    def potential_at(self, q):
        return np.broadcast_to(np.asarray(self.potential(q, 0.0), dtype=float), np.shape(q))

    def slope_at(self, q):
        return np.broadcast_to(np.asarray(self.force_symbol(q, 0.0), dtype=float), np.shape(q))

    def describe(self):
        return {"mass": self.mass, "potential": str(self.potential.expr)}


@dataclass(frozen=True)
class DecoherenceSpec:
    D: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        if self.D < 0:
            raise ConfigError(f"localisation rate D must be non-negative, got {self.D}")

    @property
    def rate(self):
        """Effective diffusion constant: D when enabled, else 0."""
        return self.D if self.enabled else 0.0

    def timescale(self, mass):
        """t0 = sqrt(m / D), or None without decoherence."""
        if self.rate <= 0:
            return None
        return float(np.sqrt(mass / self.rate))


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_end: float
    stride: int = 1
    integrator: str = "split-step-spectral"
    classical_scheme: str = "spectral"

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")
        if self.stride < 1:
            raise ConfigError(f"stride must be a positive integer, got {self.stride}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"unknown integrator {self.integrator!r}; expected one of {INTEGRATORS}")
        if self.classical_scheme not in CLASSICAL_SCHEMES:
            raise ConfigError(f"unknown classical scheme {self.classical_scheme!r}")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


def stable_time_step(grid, hamiltonian, decoherence):
    """Largest dt the stability rule allows: safety * min(dq m/p_max, dp/max|V'|, dp^2/D)."""
    limits = [grid.dq * hamiltonian.mass / max(abs(grid.p_min), abs(grid.p_max))]
    slope = float(np.abs(hamiltonian.slope_at(grid.q)).max())
    if slope > 0:
        limits.append(grid.dp / slope)
    if decoherence.rate > 0:
        limits.append(grid.dp ** 2 / decoherence.rate)
    return get_tolerances().STABILITY_SAFETY * min(limits)


def check_stability(grid, hamiltonian, decoherence, dt):
    limit = stable_time_step(grid, hamiltonian, decoherence)
    if dt > limit * (1 + 1e-12):
        logger.error(f"stability check failed: dt={dt:.6g}, limit {limit:.6g}")
        raise StabilityError(f"dt = {dt:.6g} exceeds the stable limit {limit:.6g} for this grid and Hamiltonian")
    return limit


class _Propagator:
    """Precomputed spectral factors for one (grid, H, D, dt, kind) combination."""

    def __init__(self, grid, hamiltonian, decoherence, dt, quantum):
        self.grid = grid
        self.dt = dt
        self.quantum = quantum
        self.mass = hamiltonian.mass
        self.rate = decoherence.rate
        self.kappa = spectral.real_angular_frequencies(grid.n_q, grid.dq)
        self.theta = spectral.real_angular_frequencies(grid.n_p, grid.dp)
        self.phase = self._potential_phase(hamiltonian)

    def _potential_phase(self, hamiltonian):
        """[V(q + hbar theta/2) - V(q - hbar theta/2)] / hbar, or theta V'(q) classically."""
        q = self.grid.q[:, None]
        theta = self.theta[None, :]
        if not self.quantum:
            return theta * hamiltonian.slope_at(q)
        half = 0.5 * self.grid.hbar * theta
        return (hamiltonian.potential_at(q + half) - hamiltonian.potential_at(q - half)) / self.grid.hbar

    @cached_property
    def _half_shear(self):
        return np.exp(-1j * np.outer(self.kappa, self.grid.p) * (0.5 * self.dt / self.mass))

    @cached_property
    def _kick(self):
        return np.exp(1j * self.dt * self.phase - 0.5 * self.dt * self.rate * self.theta[None, :] ** 2)

    def shear(self, values):
        return irfft(rfft(values, axis=0) * self._half_shear, n=self.grid.n_q, axis=0)

    def kick(self, values):
        return irfft(rfft(values, axis=1) * self._kick, n=self.grid.n_p, axis=1)

    def split_step(self, values):
        return self.shear(self.kick(self.shear(values)))

    def generator(self, values):
        """Right-hand side of the evolution equation, evaluated spectrally."""
        kappa = self.kappa[:, None]
        transport = irfft(
            rfft(values, axis=0) * (-1j * kappa * self.grid.p[None, :] / self.mass), n=self.grid.n_q, axis=0
        )
        theta = self.theta[None, :]
        forcing = irfft(
            rfft(values, axis=1) * (1j * self.phase - 0.5 * self.rate * theta ** 2), n=self.grid.n_p, axis=1
        )
        return transport + forcing

    def rk4_step(self, values):
        h = self.dt
        k1 = self.generator(values)
        k2 = self.generator(values + 0.5 * h * k1)
        k3 = self.generator(values + 0.5 * h * k2)
        k4 = self.generator(values + h * k3)
        return values + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _clip_negative(values, mass):
    """Zero negative samples and rescale to the given total; returns (values, clipped mass)."""
    negative = values < 0
    if not negative.any():
        return values, 0.0
    clipped = -float(values[negative].sum())
    values = np.where(negative, 0.0, values)
    total = float(values.sum())
    if total > 0:
        values *= mass / total
    return values, clipped


def _periodic_shift(values, shifts, axis):
    """Shift each line of values along axis by shifts (in cells) with linear interpolation."""
    n = values.shape[axis]
    whole = np.floor(shifts).astype(int)
    frac = shifts - whole
    idx = np.arange(n)
    if axis == 0:
        lower = (idx[:, None] - whole[None, :]) % n
        upper = (lower - 1) % n
        cols = np.arange(values.shape[1])[None, :]
        return (1 - frac[None, :]) * values[lower, cols] + frac[None, :] * values[upper, cols]
    lower = (idx[None, :] - whole[:, None]) % n
    upper = (lower - 1) % n
    rows = np.arange(values.shape[0])[:, None]
    return (1 - frac[:, None]) * values[rows, lower] + frac[:, None] * values[rows, upper]


def _semi_lagrangian_step(values, grid, hamiltonian, rate, dt):
    half_shift = (0.5 * dt / hamiltonian.mass) * grid.p / grid.dq
    values = _periodic_shift(values, half_shift, axis=0)
    values = _periodic_shift(values, -dt * hamiltonian.slope_at(grid.q) / grid.dp, axis=1)
    if rate > 0:
        r = 0.5 * rate * dt / grid.dp ** 2
        values = values + r * (np.roll(values, 1, axis=1) - 2 * values + np.roll(values, -1, axis=1))
    return _periodic_shift(values, half_shift, axis=0)


def _require_decay(field):
    if not field.boundary_decays():
        raise StateError("field does not decay at the grid boundary; spectral steps would alias")


def _guard(values, before, grid, step=None, time=None):
    if not np.all(np.isfinite(values)):
        logger.error(f"numerical abort at step {step}: non-finite values")
        raise NumericalAbort("non-finite values after step", step=step, time=time)
    after = float(values.sum() * grid.cell_area)
    drift = abs(after - before)
    if drift > get_tolerances().NORM_ABORT:
        logger.error(f"numerical abort at step {step}: norm drift {drift:.3g}")
        raise NumericalAbort(f"norm drift {drift:.3g} in one step", step=step, time=time)


def _advance(values, propagator, integrator):
    if integrator == "rk4-spectral":
        return propagator.rk4_step(values)
    return propagator.split_step(values)


def step_quantum(W, hamiltonian, decoherence, dt, integrator="split-step-spectral"):
    """Advance a Wigner field by one time step."""
    _require_decay(W)
    check_stability(W.grid, hamiltonian, decoherence, dt)
    values = _advance(W.values, _Propagator(W.grid, hamiltonian, decoherence, dt, True), integrator)
    _guard(values, W.norm(), W.grid)
    return W.evolve_to(values, W.time + dt)


def step_classical(rho, hamiltonian, decoherence, dt, integrator="split-step-spectral", scheme="spectral"):
    """Advance a classical density by one time step."""
    check_stability(rho.grid, hamiltonian, decoherence, dt)
    values, _ = _classical_update(rho.values, rho.grid, hamiltonian, decoherence, dt, integrator, scheme, None)
    _guard(values, rho.norm(), rho.grid)
    return rho.evolve_to(values, rho.time + dt)


def _classical_update(values, grid, hamiltonian, decoherence, dt, integrator, scheme, propagator):
    if scheme == "semi-lagrangian":
        return _semi_lagrangian_step(values, grid, hamiltonian, decoherence.rate, dt), 0.0
    if propagator is None:
        propagator = _Propagator(grid, hamiltonian, decoherence, dt, False)
    return _clip_negative(_advance(values, propagator, integrator), float(values.sum()))


def diosi_propagate(W0, mass, D, t, hamiltonian=None):
    """
    Closed-form free-particle evolution under momentum diffusion: shear the initial
    field by p t/m, then convolve with the Gaussian of covariance
    D t [[t^2/3m^2, t/2m], [t/2m, 1]].
    """
    if t < 0:
        raise ConfigError(f"propagation time must be non-negative, got {t}")
    if hamiltonian is not None and not hamiltonian.is_free:
        raise ConfigError("the closed-form propagator applies to the free particle only")
    if not mass > 0 or D < 0:
        raise ConfigError(f"need m > 0 and D >= 0, got m={mass}, D={D}")
    if t == 0:
        return W0
    grid = W0.grid
    kappa = spectral.angular_frequencies(grid.n_q, grid.dq)[:, None]
    theta = spectral.angular_frequencies(grid.n_p, grid.dp)[None, :]
    sheared = np.fft.ifft(np.fft.fft(W0.values, axis=0) * np.exp(-1j * kappa * grid.p[None, :] * t / mass), axis=0)
    c_qq = D * t ** 3 / (3 * mass ** 2)
    c_qp = D * t ** 2 / (2 * mass)
    c_pp = D * t
    smoothing = np.exp(-0.5 * (c_qq * kappa ** 2 + 2 * c_qp * kappa * theta + c_pp * theta ** 2))
    values = np.fft.ifft2(np.fft.fft2(sheared) * smoothing).real
    return W0.evolve_to(values, W0.time + t)


@dataclass(eq=False)
class Trajectory:
    """Snapshots of one run, every `stride` steps, with the inputs that produced them."""

    kind: str
    hamiltonian: HamiltonianSpec
    decoherence: DecoherenceSpec
    config: EvolutionConfig
    snapshots: list = field(default_factory=list)
    boundary_flagged: bool = False
    clipped_mass: float = 0.0
    records: list = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.snapshots[0].grid

    @property
    def times(self):
        return np.array([s.time for s in self.snapshots])

    @property
    def snapshot_spacing(self):
        return self.config.dt * self.config.stride

    @property
    def quantum(self):
        return self.kind == "quantum"

    def final(self):
        return self.snapshots[-1]


def run(initial, hamiltonian, decoherence, config, regions=(), output_dir=None, label=None, inputs=None):
    """
    Evolve `initial` (a WignerField or ClassicalDensity) to config.t_end.

    The stability rule is checked before the first step. Boundary-decay loss
    during the run is flagged, not raised. With output_dir the snapshots,
    diagnostics CSV and manifest are written there. `inputs` is echoed into the
    manifest as its "config" entry.
    """
    quantum = isinstance(initial, WignerField)
    if not quantum and not isinstance(initial, ClassicalDensity):
        raise StateError(f"cannot evolve a {type(initial).__name__}")
    grid = initial.grid
    if quantum:
        _require_decay(initial)
    check_stability(grid, hamiltonian, decoherence, config.dt)

    trajectory = Trajectory("quantum" if quantum else "classical", hamiltonian, decoherence, config, [initial])
    started = wallclock.perf_counter()
    logger.info(
        f"run {label} started: {trajectory.kind}, {config.n_steps} steps of {config.dt:.4g}, "
        f"D={decoherence.rate:g}, hbar={grid.hbar:g}"
    )
    propagator = _Propagator(grid, hamiltonian, decoherence, config.dt, quantum)
    values = initial.values
    norm = initial.norm()
    for step in range(1, config.n_steps + 1):
        t = initial.time + step * config.dt
        if quantum:
            values = _advance(values, propagator, config.integrator)
        else:
            values, clipped = _classical_update(
                values, grid, hamiltonian, decoherence, config.dt,
                config.integrator, config.classical_scheme, propagator,
            )
            trajectory.clipped_mass += clipped * grid.cell_area
        _guard(values, norm, grid, step, t)
        norm = float(values.sum() * grid.cell_area)
        if step % config.stride == 0:
            snapshot = initial.evolve_to(values, t)
            if not trajectory.boundary_flagged and not snapshot.boundary_decays():
                trajectory.boundary_flagged = True
                logger.warning(f"run {label}: boundary decay lost at step {step} (t={t:.4g})")
            trajectory.snapshots.append(snapshot)

    elapsed = wallclock.perf_counter() - started
    if trajectory.clipped_mass > get_tolerances().CLIP_MASS_LIMIT:
        logger.warning(f"run {label}: clipped mass {trajectory.clipped_mass:.3g} above limit")
    elif trajectory.clipped_mass > 0:
        logger.info(f"run {label}: clipped mass {trajectory.clipped_mass:.3g}")

    trajectory.records = diagnostics.build_records(trajectory, regions)
    trajectory.manifest = _manifest(trajectory, regions, elapsed, label)
    if inputs is not None:
        trajectory.manifest["config"] = inputs
    logger.info(f"run {label} finished in {elapsed:.2f}s with {len(trajectory.snapshots)} snapshots")
    if output_dir is not None:
        snapshots.write_trajectory(trajectory, output_dir)
    return trajectory


def _manifest(trajectory, regions, elapsed, label):
    from wigner import __version__

    grid = trajectory.grid
    cfg = trajectory.config
    return {
        "label": label,
        "version": __version__,
        "kind": trajectory.kind,
        "grid": {"n_q": grid.n_q, "n_p": grid.n_p, "q_min": grid.q_min, "q_max": grid.q_max,
                 "p_min": grid.p_min, "p_max": grid.p_max, "hbar": grid.hbar},
        "hamiltonian": trajectory.hamiltonian.describe(),
        "decoherence": {"D": trajectory.decoherence.D, "enabled": trajectory.decoherence.enabled,
                        "t0": trajectory.decoherence.timescale(trajectory.hamiltonian.mass)},
        "evolution": {"dt": cfg.dt, "t_end": cfg.t_end, "stride": cfg.stride, "integrator": cfg.integrator,
                      "classical_scheme": cfg.classical_scheme, "steps": cfg.n_steps},
        "regions": [list(map(int, (r.q_start, r.q_stop, r.p_start, r.p_stop))) for r in regions],
        "boundary_flagged": trajectory.boundary_flagged,
        "clipped_mass": trajectory.clipped_mass,
        "wall_time": elapsed,
    }
