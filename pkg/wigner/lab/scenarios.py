"""
Run configuration: named scenario defaults, key = value files and the
objects a run is built from.
"""
from pathlib import Path
from typing import Literal, Optional
import logging

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, NonNegativeFloat, PositiveFloat, PositiveInt, ValidationError, model_validator

from . import diagnostics, states
from .dynamics import DecoherenceSpec, EvolutionConfig, HamiltonianSpec, run
from .exceptions import ConfigError, StateError
from .imaging import reference_box, write_panels
from .moyal import PolynomialSymbol
from .phase_grid import IndexBox, WignerField, make_grid
from .snapshots import write_field_csv, write_manifest
from .weyl_wigner import wigner_of_density, wigner_of_pure

logger = logging.getLogger(__name__)

_CAT_GRID = {"n_q": 256, "n_p": 128, "q_min": -20.0, "q_max": 20.0, "p_min": -10.0, "p_max": 10.0}

SCENARIOS = {
    "coherent": {
        "n_q": 128, "n_p": 128, "q_min": -10.0, "q_max": 10.0, "p_min": -8.0, "p_max": 8.0,
        "potential": "0,0,0.5", "state": "coherent", "q0": 2.0, "p0": 0.0, "sigma": 1.0,
        "dt": 2 * np.pi / 2560, "t_end": 2 * np.pi, "stride": 40, "regions": "-1:1,-1:1",
    },
    "cat": {
        **_CAT_GRID, "potential": "0,0,0.5", "state": "cat", "q0": 3.0, "sigma": 1.0,
        "dt": 1e-3, "t_end": 2.0, "stride": 50,
    },
    "free-jooszeh": {
        **_CAT_GRID, "potential": "0", "state": "cat", "q0": 3.0, "sigma": 1.0,
        "D": 1.0, "decoherence": True, "dt": 1e-3, "t_end": 4.0, "stride": 20,
    },
    "quartic": {
        "n_q": 160, "n_p": 128, "q_min": -10.0, "q_max": 10.0, "p_min": -8.0, "p_max": 8.0,
        "potential": "0,0,-1,0,0.05", "state": "cat", "q0": 2.0, "sigma": 1.0,
        "D": 0.5, "decoherence": True, "dt": 1.25e-4, "t_end": 4.0, "stride": 100,
        "regions": "-1:1,-1:1",
    },
    "custom": {},
}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: Literal["coherent", "cat", "free-jooszeh", "quartic", "custom"] = "custom"
    n_q: PositiveInt
    n_p: PositiveInt
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    hbar: PositiveFloat = 1.0
    mass: PositiveFloat = 1.0
    potential: Optional[str] = None
    potential_file: Optional[str] = None
    D: NonNegativeFloat = 0.0
    decoherence: bool = False
    dt: PositiveFloat
    t_end: NonNegativeFloat
    stride: PositiveInt = 1
    integrator: Literal["split-step-spectral", "rk4-spectral"] = "split-step-spectral"
    classical_scheme: Literal["spectral", "semi-lagrangian"] = "spectral"
    state: Literal["coherent", "cat", "mixture", "gaussian", "excited", "cell"] = "coherent"
    q0: float = 0.0
    p0: float = 0.0
    sigma: PositiveFloat = 1.0
    sigma_q: Optional[PositiveFloat] = None
    sigma_p: Optional[PositiveFloat] = None
    parity: Literal["even", "odd"] = "even"
    solver: Literal["quantum", "classical"] = "quantum"
    regions: str = ""
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _one_potential(self):
        if (self.potential is None) == (self.potential_file is None):
            raise ValueError("give exactly one of potential and potential_file")
        return self

    def replace(self, **changes):
        return make_config({**self.model_dump(), **changes})


def make_config(values):
    """Merge scenario defaults under the given values and validate."""
    values = {k: v for k, v in values.items() if v is not None and (v != "" or k == "regions")}
    scenario = values.get("scenario", "custom")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {sorted(SCENARIOS)}")
    defaults = dict(SCENARIOS[scenario])
    if "potential_file" in values:
        defaults.pop("potential", None)
    merged = {**defaults, **values, "scenario": scenario}
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc


def _describe(exc):
    return "; ".join(f"{'.'.join(map(str, e['loc'])) or 'config'}: {e['msg']}" for e in exc.errors())


def load_config(path, overrides=None):
    """Read a key = value run file (comments with #) and apply overrides."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    values = dict(dotenv_values(path))
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigError(f"keys without a value: {', '.join(missing)}")
    values.update(overrides or {})
    config = make_config(values)
    logger.debug(f"config {path} loaded, scenario {config.scenario}")
    return config


def build_grid(config):
    return make_grid(config.n_q, config.n_p, (config.q_min, config.q_max), (config.p_min, config.p_max), config.hbar)


def build_hamiltonian(config):
    if config.potential_file:
        potential = PolynomialSymbol.from_csv(config.potential_file)
    else:
        try:
            coefficients = [c.strip() for c in config.potential.split(",")]
            potential = PolynomialSymbol.potential(coefficients)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"cannot read potential coefficients {config.potential!r}: {exc}") from exc
    return HamiltonianSpec(config.mass, potential)


def build_decoherence(config):
    return DecoherenceSpec(config.D, config.decoherence)


def build_evolution(config):
    return EvolutionConfig(config.dt, config.t_end, config.stride, config.integrator, config.classical_scheme)


def parse_regions(spec, grid):
    """'qa:qb,pa:pb;...' -> index boxes covering those physical rectangles."""
    boxes = []
    for chunk in filter(None, (part.strip() for part in (spec or "").split(";"))):
        try:
            q_part, p_part = chunk.split(",")
            q_range = tuple(float(x) for x in q_part.split(":"))
            p_range = tuple(float(x) for x in p_part.split(":"))
            if len(q_range) != 2 or len(p_range) != 2:
                raise ValueError(chunk)
        except ValueError:
            raise ConfigError(f"region must look like 'qa:qb,pa:pb', got {chunk!r}") from None
        boxes.append(IndexBox.from_physical(grid, q_range, p_range))
    return boxes


def _oscillator_frequency(config, grid):
    return grid.hbar / (config.mass * config.sigma ** 2)


def build_initial(config, grid=None, solver=None):
    """Initial Wigner field or classical density for the configured state."""
    grid = build_grid(config) if grid is None else grid
    solver = config.solver if solver is None else solver
    if solver == "classical":
        return _classical_initial(config, grid)

    if config.state == "coherent":
        return wigner_of_pure(states.gaussian_packet(grid, config.q0, config.p0, config.sigma))
    if config.state == "cat":
        return wigner_of_pure(states.cat_state(grid, config.q0, config.sigma, config.parity, config.p0))
    if config.state == "mixture":
        return wigner_of_density(states.mixture(grid, config.q0, config.sigma, config.p0))
    if config.state == "gaussian":
        return states.gaussian_wigner(grid, config.q0, config.p0, config.sigma_q, config.sigma_p)
    if config.state == "excited":
        return wigner_of_pure(states.oscillator_eigenstate(grid, 1, config.mass, _oscillator_frequency(config, grid)))
    # a single-cell quasi-density breaks the bound and the minimum support
    return WignerField(grid, states.cell_density(grid, config.q0, config.p0).values).validated()


def _classical_initial(config, grid):
    hbar = grid.hbar
    if config.state == "coherent":
        sq, sp = config.sigma / np.sqrt(2.0), hbar / (np.sqrt(2.0) * config.sigma)
        return states.classical_gaussian(grid, config.q0, config.p0, sq, sp)
    if config.state == "gaussian":
        sq = config.sigma_q or config.sigma / np.sqrt(2.0)
        sp = config.sigma_p or hbar / (np.sqrt(2.0) * config.sigma)
        return states.classical_gaussian(grid, config.q0, config.p0, sq, sp)
    if config.state in ("cat", "mixture"):
        return states.classical_mixture(grid, config.q0, config.sigma)
    if config.state == "cell":
        return states.cell_density(grid, config.q0, config.p0)
    raise StateError(f"state {config.state!r} has no classical counterpart")


def run_config(config, output_dir=None, solver=None, label=None, **changes):
    """Build everything a configuration names and run it; the manifest echoes the configuration."""
    if solver is not None:
        changes["solver"] = solver
    if changes:
        config = config.replace(**changes)
    grid = build_grid(config)
    initial = build_initial(config, grid)
    return run(
        initial,
        build_hamiltonian(config),
        build_decoherence(config),
        build_evolution(config),
        regions=parse_regions(config.regions, grid),
        output_dir=output_dir,
        label=label or config.scenario,
        inputs=config.model_dump(),
    )


TRANSFORMED_STATES = ("coherent", "cat", "mixture", "excited")


def _even_at_least(value):
    n = int(np.ceil(value - 1e-9))
    return n + n % 2


def at_hbar(config, hbar):
    """
    The configuration moved to another hbar with its classical picture kept.

    States built through the Wigner transform keep minimum-uncertainty shape:
    the packet width scales as sqrt(hbar), and when hbar shrinks both grid axes
    are refined by hbar0/hbar so the momentum window stays alias-free and the
    interference fringes stay resolved. dt shrinks with the cells and the stride
    grows so snapshots keep their spacing. Fixed-width gaussian and cell states
    only change hbar.
    """
    if not hbar > 0:
        raise ConfigError(f"hbar must be positive, got {hbar:g}")
    ratio = config.hbar / hbar
    changes = {"hbar": hbar}
    if config.state in TRANSFORMED_STATES and config.solver == "quantum":
        changes["sigma"] = config.sigma / np.sqrt(ratio)
        if ratio > 1:
            stride = _even_at_least(config.stride * ratio)
            changes.update(
                n_q=_even_at_least(config.n_q * ratio),
                n_p=_even_at_least(config.n_p * ratio),
                stride=stride,
                dt=config.dt * config.stride / stride,
            )
    rescaled = config.replace(**changes)
    logger.debug(f"hbar {config.hbar:g} -> {hbar:g}: grid {rescaled.n_q}x{rescaled.n_p}, dt {rescaled.dt:.4g}")
    return rescaled


PANELS = ("a_quantum", "b_decohered", "c_classical")


def run_triptych(config, output_dir):
    """
    Three runs to the same time from matched initial conditions: quantum without
    decoherence, quantum with it, and the classical twin with the same diffusion.
    Writes one PPM and one CSV grid per panel plus triptych.json.
    """
    if config.scenario != "quartic":
        raise ConfigError(f"the triptych needs the quartic scenario, got {config.scenario!r}")
    out = Path(output_dir)
    coherent = run_config(config, out / PANELS[0], solver="quantum", label=PANELS[0], decoherence=False)
    decohered = run_config(config, out / PANELS[1], solver="quantum", label=PANELS[1], decoherence=True)
    classical = run_config(config, out / PANELS[2], solver="classical", label=PANELS[2], decoherence=True)
    runs = (coherent, decohered, classical)

    finals = [trajectory.final() for trajectory in runs]
    for field, name in zip(finals, PANELS):
        write_field_csv(field, out / f"{name}.csv")
    paths, scale = write_panels(finals, PANELS, out)
    summary = {
        "time": finals[0].time,
        "palette_scale": scale,
        "box_area_hbar": 4.0,
        "box": list(reference_box(finals[0].grid, None, 4.0)),
        "t0": decohered.decoherence.timescale(decohered.hamiltonian.mass),
        "positivity_time": diagnostics.positivity_time(decohered),
        "panels": {
            name: {
                "image": str(path.name),
                "min_value": field.min_value,
                "negativity_volume": diagnostics.negativity_volume(field),
                "boundary_flagged": trajectory.boundary_flagged,
            }
            for name, path, field, trajectory in zip(PANELS, paths, finals, runs)
        },
    }
    write_manifest(summary, out / "triptych.json")
    logger.info(f"triptych at t={summary['time']:.4g} written to {out}")
    return summary
