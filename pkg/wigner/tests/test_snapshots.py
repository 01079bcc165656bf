import json
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from wigner.lab import snapshots, states
from wigner.lab.dynamics import DecoherenceSpec, EvolutionConfig, HamiltonianSpec, run
from wigner.lab.exceptions import SnapshotFormatError
from wigner.lab.phase_grid import WignerField, make_grid


class SnapshotCodecTests(SimpleTestCase):
    def setUp(self):
        grid = make_grid(16, 8, (-4, 4), (-2, 2), hbar=0.5)
        values = np.random.default_rng(7).normal(size=grid.shape)
        self.field = WignerField(grid, values, time=0.75)
        self.data = snapshots.encode_snapshot(self.field)

    def test_header_layout(self):
        self.assertEqual(len(self.data), 64 + 16 * 8 * 8)
        header = self.data[:64].decode("ascii")
        self.assertTrue(header.startswith("WIG1 16 8 "))
        self.assertTrue(header.endswith("\n"))

    def test_values_survive_exactly(self):
        decoded = snapshots.decode_snapshot(self.data, WignerField)
        self.assertIsInstance(decoded, WignerField)
        self.assertTrue(np.array_equal(decoded.values, self.field.values))
        self.assertEqual(decoded.time, 0.75)
        self.assertEqual(decoded.grid.hbar, 0.5)
        self.assertEqual(decoded.grid.shape, (16, 8))

    def test_truncated_file_reports_offset(self):
        cut = self.data[:-10]
        with self.assertRaises(SnapshotFormatError) as cm:
            snapshots.decode_snapshot(cut)
        self.assertEqual(cm.exception.offset, len(cut))

    def test_truncated_header(self):
        with self.assertRaises(SnapshotFormatError) as cm:
            snapshots.decode_snapshot(self.data[:20])
        self.assertEqual(cm.exception.offset, 20)

    def test_bad_magic(self):
        with self.assertRaises(SnapshotFormatError) as cm:
            snapshots.decode_snapshot(b"WIG2" + self.data[4:])
        self.assertEqual(cm.exception.offset, 0)

    def test_trailing_data(self):
        with self.assertRaises(SnapshotFormatError) as cm:
            snapshots.decode_snapshot(self.data + b"\x00" * 8)
        self.assertEqual(cm.exception.offset, len(self.data))

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "field.wig"
            snapshots.write_snapshot(self.field, path)
            decoded = snapshots.read_snapshot(path)
        self.assertTrue(np.array_equal(decoded.values, self.field.values))

    def test_field_csv_is_long_format(self):
        frame = snapshots.field_frame(self.field)
        self.assertEqual(list(frame.columns), ["q", "p", "value"])
        self.assertEqual(len(frame), 16 * 8)
        self.assertEqual(frame["value"].iloc[9], self.field.values[1, 1])


class TrajectoryOutputTests(SimpleTestCase):
    def test_run_writes_snapshots_records_and_manifest(self):
        grid = make_grid(64, 64, (-8, 8), (-6, 6))
        initial = states.gaussian_wigner(grid, 1.0, 0.0)
        with tempfile.TemporaryDirectory() as tmp:
            trajectory = run(
                initial, HamiltonianSpec.harmonic(), DecoherenceSpec(), EvolutionConfig(0.004, 0.04, 5),
                output_dir=tmp, label="unit",
            )
            out = Path(tmp)
            written = sorted(p.name for p in (out / "snapshots").iterdir())
            self.assertEqual(written, ["000000.wig", "000001.wig", "000002.wig"])
            last = snapshots.read_snapshot(out / "snapshots" / "000002.wig")
            self.assertTrue(np.array_equal(last.values, trajectory.final().values))
            frame = pd.read_csv(out / "diagnostics.csv")
            manifest = json.loads((out / "manifest.json").read_text())
        self.assertEqual(list(frame.columns[:9]), [
            "time", "norm", "min_value", "negativity_volume", "purity", "mean_q", "mean_p", "var_q", "var_p",
        ])
        self.assertEqual(list(frame.columns[-2:]), ["support_area", "positive"])
        self.assertEqual(len(frame), 3)
        self.assertEqual(manifest["label"], "unit")
        self.assertEqual(manifest["evolution"]["steps"], 10)
        self.assertEqual(len(manifest["snapshots"]), 3)
