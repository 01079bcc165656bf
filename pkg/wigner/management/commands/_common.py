"""Shared plumbing for the phase-space lab commands."""
from contextlib import contextmanager
from pathlib import Path
import logging

from django.core.management.base import CommandError

from wigner.lab.exceptions import (
    ConfigError,
    GridError,
    NumericalAbort,
    PartitionError,
    SnapshotFormatError,
    StabilityError,
    StateError,
    SymbolError,
)

logger = logging.getLogger("wigner.commands")

INPUT_ERRORS = (ConfigError, GridError, SymbolError, SnapshotFormatError, PartitionError, StateError)
NUMERICAL_ERRORS = (StabilityError, NumericalAbort)


@contextmanager
def exit_codes():
    """Map lab exceptions onto the 2 (bad input) / 3 (numerical failure) exit codes."""
    try:
        yield
    except NUMERICAL_ERRORS as exc:
        raise CommandError(f"{type(exc).__name__}: {exc}", returncode=3) from exc
    except INPUT_ERRORS as exc:
        raise CommandError(f"{type(exc).__name__}: {exc}", returncode=2) from exc


def add_config_arguments(parser):
    parser.add_argument("--config", required=True, help="key = value run configuration file")
    parser.add_argument("--out", help="output directory (default: output_dir from the config)")
    parser.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
        help="override one configuration key; may be repeated",
    )


def parse_overrides(pairs):
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override must look like KEY=VALUE, got {pair!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def output_dir(options, config, default):
    return Path(options.get("out") or config.output_dir or Path("runs") / default)
