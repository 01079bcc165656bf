"""
WIG1 snapshot files, CSV exports and run manifests.

A WIG1 file is a 64-byte ASCII header

    WIG1 n_q n_p q_min q_max p_min p_max hbar time

padded with spaces and terminated by a newline, followed by n_q * n_p
little-endian float64 values in row-major [i_q, i_p] order.
"""
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import SnapshotFormatError
from .phase_grid import PhaseGrid, PhaseSpaceField

logger = logging.getLogger(__name__)

MAGIC = "WIG1"
HEADER_SIZE = 64
DTYPE = np.dtype("<f8")


def _header(field):
    grid = field.grid
    numbers = [grid.q_min, grid.q_max, grid.p_min, grid.p_max, grid.hbar, field.time]
    for precision in (8, 6, 4):
        text = " ".join([MAGIC, str(grid.n_q), str(grid.n_p)] + [f"{x:.{precision}g}" for x in numbers])
        if len(text) < HEADER_SIZE:
            return (text.ljust(HEADER_SIZE - 1) + "\n").encode("ascii")
    raise SnapshotFormatError("header does not fit in 64 bytes")


def encode_snapshot(field):
    return _header(field) + np.ascontiguousarray(field.values, dtype=DTYPE).tobytes()


def decode_snapshot(data, kind=PhaseSpaceField):
    if len(data) < HEADER_SIZE:
        raise SnapshotFormatError(f"file truncated inside the header at byte offset {len(data)}", len(data))
    try:
        fields = data[:HEADER_SIZE].decode("ascii").split()
    except UnicodeDecodeError:
        raise SnapshotFormatError("header is not ASCII", 0) from None
    if not fields or fields[0] != MAGIC:
        raise SnapshotFormatError(f"missing {MAGIC} magic at byte offset 0", 0)
    if len(fields) != 9 or data[HEADER_SIZE - 1:HEADER_SIZE] != b"\n":
        raise SnapshotFormatError("malformed header", 0)
    try:
        n_q, n_p = int(fields[1]), int(fields[2])
        q_min, q_max, p_min, p_max, hbar, time = (float(x) for x in fields[3:])
    except ValueError:
        raise SnapshotFormatError("non-numeric header field", 0) from None
    expected = HEADER_SIZE + n_q * n_p * DTYPE.itemsize
    if len(data) < expected:
        raise SnapshotFormatError(
            f"file truncated at byte offset {len(data)}; expected {expected} bytes", len(data)
        )
    if len(data) > expected:
        raise SnapshotFormatError(f"unexpected trailing data at byte offset {expected}", expected)
    grid = PhaseGrid(n_q, n_p, q_min, q_max, p_min, p_max, hbar)
    values = np.frombuffer(data, dtype=DTYPE, offset=HEADER_SIZE).reshape(n_q, n_p)
    return kind(grid, values, time)


def write_snapshot(field, path):
    Path(path).write_bytes(encode_snapshot(field))
    logger.debug(f"snapshot t={field.time:.6g} written to {path}")


def read_snapshot(path, kind=PhaseSpaceField):
    return decode_snapshot(Path(path).read_bytes(), kind)


def field_frame(field):
    """Long-format (q, p, value) table of a field."""
    q, p = field.grid.mesh()
    return pd.DataFrame({"q": q.ravel(), "p": p.ravel(), "value": field.values.ravel()})


def write_field_csv(field, path):
    field_frame(field).to_csv(path, index=False, float_format="%.17g")


def records_frame(records):
    return pd.DataFrame([record.as_row() for record in records])


def write_records_csv(records, path):
    records_frame(records).to_csv(path, index=False, float_format="%.17g")


def write_manifest(manifest, path):
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable))


def _jsonable(value):
    if isinstance(value, (np.integer, np.floating, np.bool_)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialise {type(value).__name__}")


def write_trajectory(trajectory, output_dir):
    """snapshots/NNNNNN.wig, diagnostics.csv and manifest.json under output_dir."""
    out = Path(output_dir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    names = []
    for index, snapshot in enumerate(trajectory.snapshots):
        name = f"snapshots/{index:06d}.wig"
        write_snapshot(snapshot, out / name)
        names.append(name)
    write_records_csv(trajectory.records, out / "diagnostics.csv")
    manifest = dict(trajectory.manifest, snapshots=names)
    write_manifest(manifest, out / "manifest.json")
    logger.info(f"{len(names)} snapshots written to {out}")
    return out
