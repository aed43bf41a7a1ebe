"""Tests for the command-line interface and artifact writing."""

import csv
import json

import numpy as np
import pytest

from resonance_mcp.cli import main
from resonance_mcp.config import default_run_config
from resonance_mcp.runner import DISPERSION_COLUMNS, RESONANCE_COLUMNS, write_csv


def _write_config(tmp_path, **overrides) -> str:
    document = json.loads(default_run_config("resonances").to_json())
    document.update(overrides)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(document))
    return str(path)


def _read_rows(path) -> list[dict]:
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


class TestOracleCommand:
    """Tests for the oracle-disk subcommand."""

    def test_writes_dispersion_and_manifest(self, tmp_path):
        """Test exit code 0 and the written artifacts."""
        out = tmp_path / "out"
        assert main(["oracle-disk", "--out", str(out)]) == 0
        rows = _read_rows(out / "dispersion.csv")
        assert rows
        assert all(float(row["omega_im"]) < 0 for row in rows)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["task"] == "oracle"
        assert manifest["artifacts"] == ["dispersion.csv"]
        assert manifest["thresholds"]["beyn_rank"] == 1e-8

    def test_byte_identical_reruns(self, tmp_path):
        """Test that two runs with the same inputs give identical CSVs."""
        main(["oracle-disk", "--out", str(tmp_path / "a")])
        main(["oracle-disk", "--out", str(tmp_path / "b")])
        first = (tmp_path / "a" / "dispersion.csv").read_bytes()
        assert first == (tmp_path / "b" / "dispersion.csv").read_bytes()


class TestConfigErrors:
    """Tests for exit code 2 on malformed input."""

    def test_malformed_config(self, tmp_path, capsys):
        """Test that a bad field exits with 2 and a JSON report naming it."""
        config = _write_config(tmp_path, jump_mode="exact")
        assert main(["resonances", "--config", config, "--out", str(tmp_path / "out")]) == 2
        report = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert report["error"] == "ConfigError"
        assert report["details"]["field"] == "jump_mode"

    def test_missing_config(self, tmp_path):
        """Test that a missing file exits with 2."""
        assert main(["validate", "--config", str(tmp_path / "absent.json")]) == 2

    def test_negative_seed(self, tmp_path):
        """Test that --seed must be non-negative."""
        assert main(["oracle-disk", "--seed", "-3", "--out", str(tmp_path)]) == 2

    def test_unknown_subcommand(self):
        """Test that argparse rejects unknown subcommands."""
        with pytest.raises(SystemExit):
            main(["plot"])


class TestUnexpectedErrors:
    """Tests for exit code 1 on exceptions outside the solver hierarchy."""

    def test_unexpected_exception(self, tmp_path, monkeypatch, capsys):
        """Test that a non-solver exception exits with 1 and writes error.json."""

        def fail(config, out):
            raise ValueError("bad shape")

        monkeypatch.setattr("resonance_mcp.runner._run_task", fail)
        out = tmp_path / "out"
        assert main(["oracle-disk", "--out", str(out)]) == 1
        report = json.loads((out / "error.json").read_text())
        assert report["error"] == "ResonanceError"
        assert report["exit_code"] == 1
        assert report["details"]["exception"] == "ValueError"
        assert "bad shape" in report["message"]
        assert json.loads(capsys.readouterr().err.strip().splitlines()[-1]) == report

    def test_unexpected_exception_while_loading(self, tmp_path, monkeypatch):
        """Test exit code 1 when reading the configuration fails outside validation."""

        def fail(path):
            raise PermissionError("denied")

        monkeypatch.setattr("resonance_mcp.cli.load_run_config", fail)
        assert main(["validate", "--config", str(tmp_path / "run.json")]) == 1


class TestTasks:
    """Tests for task artifacts."""

    def test_empty_contour_writes_header(self, tmp_path):
        """Test that a resonance-free contour gives a header-only CSV."""
        config = _write_config(
            tmp_path,
            n_outer=32,
            contours=[{"center": [0.3, 2.0], "radius": 0.2, "points": 16, "probe_rank": 4}],
        )
        out = tmp_path / "out"
        assert main(["resonances", "--config", config, "--out", str(out)]) == 0
        assert (out / "resonances.csv").read_text() == ",".join(RESONANCE_COLUMNS) + "\n"

    def test_polarization_task(self, tmp_path):
        """Test the bundled polarization job with the mean contrast."""
        out = tmp_path / "out"
        assert main(["polarization", "--out", str(out)]) == 0
        [row] = _read_rows(out / "polarization.csv")
        assert float(row["m11"]) == pytest.approx(1.2 * np.pi, abs=1e-8)
        assert row["contrast"] == "mean"

    def test_write_csv_header_only(self, tmp_path):
        """Test the fixed header for an empty row list."""
        path = tmp_path / "empty.csv"
        write_csv(path, DISPERSION_COLUMNS, [])
        assert path.read_text() == "mode,omega_re,omega_im,residual\n"
