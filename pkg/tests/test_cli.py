import json
import subprocess
import sys

import numpy as np
import pytest

from smcsim.cli import main
from smcsim.config import load_config, preset_path
from smcsim.errors import TuningWarning


def write_scenario(tmp_path, cfg, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def short_smooth(tmp_path, t_end=1.0, name="short.json", **ctl_patch):
    cfg = load_config(preset_path("regulation-smooth"))
    cfg["integration"]["t_end"] = t_end
    if ctl_patch:
        cfg["controller"].update(ctl_patch)
    cfg["name"] = name.removesuffix(".json")
    return write_scenario(tmp_path, cfg, name)


class TestRun:
    def test_run_writes_outputs(self, tmp_path, capsys):
        rc = main(["run", short_smooth(tmp_path), "--out", str(tmp_path / "out")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "chattering_index" in out
        assert (tmp_path / "out" / "short.csv").exists()
        assert (tmp_path / "out" / "short.metrics.json").exists()
        assert (tmp_path / "out" / "short.metrics.txt").exists()
        payload = json.loads((tmp_path / "out" / "short.metrics.json").read_text())
        assert payload["meta"]["dt"] == 1e-4
        assert "ultimate_bound" in payload

    def test_run_accepts_preset_name_and_overrides(self, tmp_path):
        # the coarse dt legitimately trips the sample-rate rule of thumb
        with pytest.warns(TuningWarning):
            rc = main(["run", "regulation-smooth", "--out", str(tmp_path),
                       "--t-end", "0.5", "--dt", "0.001"])
        assert rc == 0
        data = np.loadtxt(tmp_path / "regulation-smooth.csv", delimiter=",", skiprows=1)
        assert data.shape[0] == 501

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        cfg = load_config(preset_path("regulation-smooth"))
        cfg["controller"]["phi"] = -1.0
        rc = main(["run", write_scenario(tmp_path, cfg), "--out", str(tmp_path)])
        assert rc == 2
        assert "phi" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.json")]) == 2

    def test_blow_up_exits_3(self, tmp_path, capsys):
        cfg = {
            "name": "boom",
            "plant": {"kind": "linear", "a": 60.0, "b": 1.0},
            "uncertainty": {"kind": "smooth_multi_sine", "amplitudes": [0.0],
                            "frequencies": [1.0], "phases": [0.0], "bound": 1.0},
            "controller": {"kind": "classical", "K": 0.001},
            "x0": [1.0],
            "integration": {"dt": 0.01, "substeps": 1, "t_end": 30.0},
        }
        rc = main(["run", write_scenario(tmp_path, cfg), "--out", str(tmp_path)])
        assert rc == 3
        assert "blow-up" in capsys.readouterr().err


class TestCompare:
    def test_shared_scenario_table(self, tmp_path, capsys):
        files = []
        for preset in ("compare-smooth-adaptive", "compare-smooth-plestan-fast"):
            cfg = load_config(preset_path(preset))
            cfg["integration"]["t_end"] = 2.0
            files.append(write_scenario(tmp_path, cfg, preset + ".json"))
        rc = main(["compare", *files, "--out", str(tmp_path / "cmp")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "lowest chattering_index" in out
        assert "compare-smooth-adaptive" in out
        assert (tmp_path / "cmp" / "compare-smooth-adaptive.csv").exists()
        assert (tmp_path / "cmp" / "compare-smooth-plestan-fast.csv").exists()

    def test_adaptive_flagged_lowest_chattering(self, tmp_path, capsys):
        files = []
        for preset in ("compare-smooth-adaptive", "compare-smooth-plestan-fast"):
            cfg = load_config(preset_path(preset))
            cfg["integration"]["t_end"] = 2.0
            files.append(write_scenario(tmp_path, cfg, preset + ".json"))
        main(["compare", *files, "--out", str(tmp_path / "cmp")])
        out = capsys.readouterr().out
        assert "* lowest chattering_index: compare-smooth-adaptive" in out

    def test_mismatched_plants_rejected(self, tmp_path, capsys):
        a = short_smooth(tmp_path, name="a.json")
        cfg = load_config(preset_path("regulation-smooth"))
        cfg["integration"]["t_end"] = 1.0
        cfg["x0"] = [0.5]
        b = write_scenario(tmp_path, cfg, "b.json")
        rc = main(["compare", a, b, "--out", str(tmp_path)])
        assert rc == 2
        assert "share" in capsys.readouterr().err

    def test_needs_two(self, tmp_path):
        assert main(["compare", short_smooth(tmp_path)]) == 2


class TestVerify:
    def test_reports_bounds_and_checks(self, tmp_path, capsys):
        rc = main(["verify", short_smooth(tmp_path, t_end=5.0)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "eta = " in out
        assert "sigma = " in out
        assert "delta = " in out
        assert "ultimate-bound check:" in out
        assert "excursion-bound check: pass" in out
        assert "decay check" in out

    def test_k_zero_not_applicable_exit_0(self, tmp_path, capsys):
        path = short_smooth(tmp_path, t_end=1.0, k=0.0)
        rc = main(["verify", path])
        assert rc == 0
        assert "not applicable" in capsys.readouterr().out

    def test_tracking_has_no_bound(self, tmp_path, capsys):
        cfg = load_config(preset_path("tracking"))
        cfg["integration"]["t_end"] = 1.0
        rc = main(["verify", write_scenario(tmp_path, cfg)])
        assert rc == 0
        assert "not applicable" in capsys.readouterr().out

    def test_non_adaptive_rejected(self, tmp_path, capsys):
        rc = main(["verify", "regulation-smooth-classical"])
        assert rc == 2
        assert "delta_adaptive" in capsys.readouterr().err


class TestPresetsCommand:
    def test_list(self, capsys):
        assert main(["presets", "list"]) == 0
        out = capsys.readouterr().out
        assert "regulation-smooth" in out
        assert "tracking" in out


class TestEndToEndDeterminism:
    def test_byte_identical_runs_through_real_cli(self, tmp_path):
        outs = []
        for sub in ("r1", "r2"):
            res = subprocess.run(
                [sys.executable, "-m", "smcsim", "run", "regulation-smooth",
                 "--t-end", "1.0", "--out", str(tmp_path / sub)],
                capture_output=True, text=True,
            )
            assert res.returncode == 0, res.stderr
            outs.append((tmp_path / sub / "regulation-smooth.csv").read_bytes())
        assert outs[0] == outs[1]
