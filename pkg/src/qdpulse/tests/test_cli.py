"""Tests for the qdpulse CLI"""

import json
import os

import pytest
from click.testing import CliRunner

from qdpulse import __version__
from qdpulse.cli import cli
from qdpulse.core.dynamics import CSV_COLUMNS
from qdpulse.core.manifest import MANIFEST_NAME
from qdpulse.sweep.runner import SWEEP_CSV_COLUMNS


def read_lines(path):
    with open(path) as f:
        return f.read().splitlines()


class TestCLIHelp:
    """Test command discovery"""

    def test_help_shows_all_commands(self):
        """Test that main help shows all available commands"""
        runner = CliRunner()
        result = runner.invoke(cli, ["--help"])

        assert result.exit_code == 0
        for command in ("check", "validate", "simulate", "sweep", "dephasing-study",
                        "noise-study", "verify", "presets"):
            assert command in result.output

    def test_version(self):
        """Test --version prints the package version"""
        result = CliRunner().invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_simulate_options(self):
        """Test simulate accepts both --pulse and --shape"""
        from qdpulse.cli import simulate

        opts = {opt for param in simulate.params for opt in getattr(param, "opts", [])}
        assert {"--pulse", "--shape", "--point", "--dephasing-ghz", "--set", "-c"} <= opts

    def test_presets(self):
        """Test presets lists H, M and P"""
        result = CliRunner().invoke(cli, ["presets"])
        assert result.exit_code == 0
        assert "H: (9, 0.035)" in result.output
        assert "M: (5, 0.065)" in result.output
        assert "P: (2, 0.09)" in result.output


class TestCLIValidate:
    """Test the validate command"""

    def test_valid_config(self, write_config, fast_document):
        """Test a valid file exits 0"""
        result = CliRunner().invoke(cli, ["validate", "-c", write_config(fast_document)])
        assert result.exit_code == 0
        assert "✓ Configuration is valid" in result.output
        assert "2 x 1" in result.output

    def test_unknown_key(self, write_config):
        """Test an unknown key exits 1 naming the key"""
        result = CliRunner().invoke(cli, ["validate", "-c", write_config({"pulse": {"colour": "red"}})])
        assert result.exit_code == 1
        assert "pulse.colour" in result.output

    def test_semantic_error(self):
        """Test J <= J' fails validation with exit 1"""
        result = CliRunner().invoke(cli, ["validate", "--set", "model.J_ueV=100"])
        assert result.exit_code == 1

    def test_missing_file(self):
        """Test a nonexistent config path is a usage error"""
        result = CliRunner().invoke(cli, ["validate", "-c", "/nonexistent/config.yaml"])
        assert result.exit_code == 2


class TestCLICheck:
    """Test the oracle suite command"""

    def test_degenerate_couplings(self):
        """Test J == J' reports DegenerateDenominator and exits 1"""
        result = CliRunner().invoke(cli, ["check", "--J-ueV", "200", "--Jp-ueV", "200"])
        assert result.exit_code == 1
        assert "DegenerateDenominator" in result.output
        assert "✓ spectrum" in result.output

    @pytest.mark.slow
    def test_default_passes(self):
        """Test every oracle passes at the default parameters"""
        result = CliRunner().invoke(cli, ["check"])
        assert result.exit_code == 0, result.output
        assert "✓ All oracles passed" in result.output


class TestCLISimulate:
    """Test simulate and verify end to end"""

    def test_simulate_writes_run(self, write_config, fast_document):
        """Test data.csv and manifest.json are written and verify passes"""
        runner = CliRunner()
        result = runner.invoke(cli, ["simulate", "-c", write_config(fast_document), "--point", "h"])
        assert result.exit_code == 0, result.output
        assert "Max negativity" in result.output

        run_dir = fast_document["output_dir"]
        lines = read_lines(os.path.join(run_dir, "data.csv"))
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) > 2

        with open(os.path.join(run_dir, MANIFEST_NAME)) as f:
            manifest = json.load(f)
        assert manifest["command"] == "simulate"
        assert manifest["resolved_config"]["pulse"]["point"] == "H"
        assert "post_pulse_linear_entropy" in manifest["summary"]

        verified = runner.invoke(cli, ["verify", run_dir])
        assert verified.exit_code == 0
        assert "✓ All outputs match the manifest" in verified.output

    def test_verify_detects_tampering(self, write_config, fast_document):
        """Test a modified output makes verify exit 1"""
        runner = CliRunner()
        runner.invoke(cli, ["simulate", "-c", write_config(fast_document)])
        run_dir = fast_document["output_dir"]
        with open(os.path.join(run_dir, "data.csv"), "a") as f:
            f.write("0,0,0,0,0,0,0,0,0\n")

        result = runner.invoke(cli, ["verify", run_dir])
        assert result.exit_code == 1
        assert "data.csv" in result.output

    def test_rerun_from_manifest(self, write_config, fast_document, temp_dir):
        """Test a manifest reproduces the run byte for byte"""
        runner = CliRunner()
        fast_document["noise"] = {"amplitude_over_gamma": 1.0, "scope": "pulse_only", "seed": 9}
        first = runner.invoke(cli, ["simulate", "-c", write_config(fast_document)])
        assert first.exit_code == 0, first.output

        manifest_path = os.path.join(fast_document["output_dir"], MANIFEST_NAME)
        rerun_dir = os.path.join(temp_dir, "rerun")
        second = runner.invoke(cli, ["simulate", "-c", manifest_path, "-o", rerun_dir])
        assert second.exit_code == 0, second.output

        original = read_lines(os.path.join(fast_document["output_dir"], "data.csv"))
        assert read_lines(os.path.join(rerun_dir, "data.csv")) == original

    def test_invalid_override_exit_code(self, write_config, fast_document):
        """Test a bad override exits 1 with the field name"""
        result = CliRunner().invoke(
            cli, ["simulate", "-c", write_config(fast_document), "--set", "dynamics.record_every=0"])
        assert result.exit_code == 1
        assert "dynamics.record_every" in result.output


class TestCLIStudies:
    """Test sweep and study commands on small grids"""

    def test_sweep(self, write_config, fast_document):
        """Test the sweep writes one row per grid point"""
        result = CliRunner().invoke(
            cli, ["sweep", "-c", write_config(fast_document), "--seed", "5", "--no-progress"])
        assert result.exit_code == 0, result.output
        lines = read_lines(os.path.join(fast_document["output_dir"], "data.csv"))
        assert lines[0] == ",".join(SWEEP_CSV_COLUMNS)
        assert len(lines) == 3
        assert all(line.endswith(",ok") for line in lines[1:])
        assert "Best cell" in result.output

    def test_dephasing_study(self, write_config, fast_document):
        """Test one series directory per rate"""
        result = CliRunner().invoke(
            cli, ["dephasing-study", "-c", write_config(fast_document),
                  "--rate", "0", "--rate", "1", "--no-progress"])
        assert result.exit_code == 0, result.output
        run_dir = fast_document["output_dir"]
        assert os.path.exists(os.path.join(run_dir, "rate_0ghz", "data.csv"))
        assert os.path.exists(os.path.join(run_dir, "rate_1ghz", "data.csv"))

    def test_noise_study(self, write_config, fast_document):
        """Test one series directory per amplitude"""
        result = CliRunner().invoke(
            cli, ["noise-study", "-c", write_config(fast_document), "--amplitude", "1.5",
                  "--scope", "full_evolution", "--no-progress"])
        assert result.exit_code == 0, result.output
        assert os.path.exists(os.path.join(fast_document["output_dir"], "amp_1.5", "data.csv"))
        assert "A = 1.5 gamma" in result.output
