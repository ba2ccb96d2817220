#!/usr/bin/env python3
"""Command-line tests using pytest framework"""

import json
import math
import os
import subprocess
import sys
import time
from pathlib import Path
from typing import Any, Dict, List

import pytest

_test_dir = Path(__file__).parent
if str(_test_dir) not in sys.path:
    sys.path.insert(0, str(_test_dir))

from testdata.map_configs import CLI_TIMEOUT, HYPERBOLIC_QUADRATIC, degenerate_quartic, quadratic, write_map

from henondyn.common.args import RunConfig, parse_args, str2complex


class TestArguments:
    """Parser and run configuration"""

    @pytest.mark.parametrize("text,value", [
        ("0.3", 0.3), ("-0.669+0.73j", -0.669 + 0.73j), ("1-2i", 1 - 2j), ("0.5,0.25", 0.5 + 0.25j)])
    def test_str2complex(self, text, value):
        assert str2complex(text) == value

    def test_aliases(self):
        args = parse_args(["scan", "--modulus", "0.99", "--angles", "10", "--random-seed", "4"])
        assert args.moduli == [0.99]
        assert args.seed == 4
        assert args.family == "quadratic"

    def test_plain_output_from_environment(self, monkeypatch):
        monkeypatch.setenv("HENONDYN_PLAIN_OUTPUT", "1")
        assert parse_args(["selftest"]).plain_output is True
        assert parse_args(["selftest", "--plain-output", "false"]).plain_output is False

    def test_run_config(self):
        config = RunConfig.from_namespace(parse_args(["analyze-quadratic", "--param", "0.25+0.5j"]))
        assert config.subcommand == "analyze-quadratic"
        assert config.param == "0.25+0.5j"

    def test_slice_argument_group(self, capsys):
        with pytest.raises(SystemExit):
            parse_args(["slice", "--help"])
        help_text = capsys.readouterr().out
        assert "Slice:" in help_text
        assert "Scan:" not in help_text

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit):
            parse_args(["render"])


class TestCommandLine:
    """End-to-end runs of the henondyn command"""

    @pytest.fixture(autouse=True)
    def setup_workspace(self, tmp_path):
        self.workdir = tmp_path
        yield

    def _run_henondyn_command(self, cmd_args: List[str], timeout: int = CLI_TIMEOUT) -> Dict[str, Any]:
        """Run a henondyn subcommand and return its outcome"""
        full_cmd = [sys.executable, "-m", "henondyn.cli"] + cmd_args
        env = dict(os.environ, HENONDYN_PLAIN_OUTPUT="1")
        start_time = time.time()
        try:
            result = subprocess.run(full_cmd, capture_output=True, text=True, timeout=timeout,
                                    check=False, env=env)
            return {
                "returncode": result.returncode,
                "stdout": result.stdout,
                "stderr": result.stderr,
                "duration": time.time() - start_time,
                "cmd": " ".join(full_cmd),
            }
        except subprocess.TimeoutExpired:
            return {
                "returncode": -1,
                "stdout": "",
                "stderr": f"Command timed out after {timeout} seconds",
                "duration": timeout,
                "cmd": " ".join(full_cmd),
            }

    def _json(self, result: Dict[str, Any]) -> Dict[str, Any]:
        assert result["stdout"], f"No JSON on stdout\nstderr: {result['stderr']}\nCommand: {result['cmd']}"
        return json.loads(result["stdout"])

    def test_selftest(self):
        result = self._run_henondyn_command(["selftest", "--out", "-"])
        print(f"\n⏱️  Duration: {result['duration']:.2f}s")
        assert result["returncode"] == 0, f"stderr: {result['stderr']}"
        report = self._json(result)
        assert report["passed"] is True
        assert len(report["checks"]) == 7

    def test_analyze_quadratic(self):
        result = self._run_henondyn_command(["analyze-quadratic", "--param", "0.25", "--out", "-"])
        assert result["returncode"] == 0, f"stderr: {result['stderr']}"
        report = self._json(result)
        assert report["alpha"]["orbit_type"] == "attracting"
        assert report["beta"]["point"][0] == pytest.approx([0.75, 0.0])

    def test_spectrum_comparison(self):
        first = write_map(self.workdir / "f1.json", degenerate_quartic(0.5))
        second = write_map(self.workdir / "f2.json", degenerate_quartic(1.2 + 0.3j))
        out = self.workdir / "cmp.json"
        result = self._run_henondyn_command(["spectrum", "--map", first, "--compare", second,
                                             "--max-period", "2", "--tol", "1e-9", "--out", str(out)])
        assert result["returncode"] == 0, f"stderr: {result['stderr']}"
        assert json.loads(out.read_text())["equal"] is True

    def test_deterministic_output(self):
        path = write_map(self.workdir / "f.json", quadratic({"a": 0.2 + 0.1j, "c": -0.3}))
        args = ["spectrum", "--map", path, "--max-period", "3", "--seed", "5", "--out", "-"]
        first = self._run_henondyn_command(args)
        second = self._run_henondyn_command(args + ["--workers", "2"])
        assert first["returncode"] == second["returncode"] == 0
        assert first["stdout"] == second["stdout"]

    def test_green(self):
        path = write_map(self.workdir / "f.json", quadratic(HYPERBOLIC_QUADRATIC))
        result = self._run_henondyn_command(["green", "--map", path, "--point", "100", "0",
                                             "--point", "0", "0", "--out", "-"])
        assert result["returncode"] == 0, f"stderr: {result['stderr']}"
        values = [v["value"][0] for v in self._json(result)["values"]]
        assert values[0] == pytest.approx(math.log(100), abs=1e-3)
        assert values[1] == 0.0

    def test_fold_hypotheses_unmet(self):
        path = write_map(self.workdir / "f.json", quadratic(HYPERBOLIC_QUADRATIC))
        result = self._run_henondyn_command(["fold", "--map", path, "--out", "-"])
        assert result["returncode"] == 2
        assert self._json(result)["status"] == "hypotheses-unmet"

    def test_bottcher_uncertified(self):
        path = write_map(self.workdir / "f.json", quadratic({"a": 100.0, "c": 0.0}))
        result = self._run_henondyn_command(["green", "--map", path, "--point", "1e4", "0",
                                             "--function", "bottcher-plus", "--out", "-"])
        assert result["returncode"] == 2
        assert self._json(result)["error"]["kind"] == "hypotheses-unmet"

    def test_missing_map(self):
        result = self._run_henondyn_command(["spectrum", "--map", str(self.workdir / "missing.json")])
        assert result["returncode"] == 1
        assert "not found" in result["stderr"]

    def test_malformed_map(self):
        path = self.workdir / "broken.json"
        path.write_text('{"factors": [{"a": [0.3, 0.0], "poly": {"degree": 2, "coeffs": []}}]}')
        out = self.workdir / "error.json"
        result = self._run_henondyn_command(["spectrum", "--map", str(path), "--out", str(out)])
        assert result["returncode"] == 1
        error = json.loads(out.read_text())["error"]
        assert error["kind"] == "configuration"
        assert "factors.0.poly" in error["message"]

    def test_slice_image(self):
        image = self.workdir / "slice.ppm"
        result = self._run_henondyn_command(["slice", "--family", "quadratic", "--param", "0.05",
                                             "--resolution", "16", "8", "--max-iter", "200",
                                             "--image", str(image), "--out", "-"])
        assert result["returncode"] == 0, f"stderr: {result['stderr']}"
        assert image.read_bytes().startswith(b"P6\n16 8\n255\n")
        counts = self._json(result)["class_counts"]
        assert sum(counts.values()) == 16 * 8


if __name__ == "__main__":
    pytest.main([__file__, "-v", "-s", "--tb=short"])
