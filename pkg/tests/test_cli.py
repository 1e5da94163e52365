import json
import math
from pathlib import Path

import pytest

from amlab.cli import main, run, validate

GOLDEN_60 = [1] * 60


def small_two_hole_config(**over):
    cfg = {
        "experiment": "two-hole-weak-mixing",
        "cf": {"partial_quotients": GOLDEN_60, "depth": 60},
        "beta": "1/2",
        "epsilon": 1 / math.pi,
        "lambda_count": 40,
        "suspect_count": 5,
        "N_schedule": [500, 2000],
        "x_samples": 2,
        "relation_bound": 20,
        "seed": 7,
    }
    cfg.update(over)
    return cfg


def small_one_hole_config(**over):
    cfg = {
        "experiment": "one-hole-rigidity",
        "cf": {"partial_quotients": GOLDEN_60, "depth": 60},
        "jumps": {"C": "1/4", "Delta": "1/2", "K_jump": 60, "mean": 1.0},
        "m_max": 1000,
        "grid_size": 25,
        "N_schedule": [500, 2000],
        "x_samples": 2,
        "seed": 7,
    }
    cfg.update(over)
    return cfg


class TestValidate:
    def test_well_formed_is_clean(self):
        assert validate(small_two_hole_config()) == []

    def test_unknown_experiment(self):
        diags = validate({"experiment": "nope"})
        assert diags and diags[0]["level"] == "error"

    def test_epsilon_out_of_range(self):
        diags = validate(small_two_hole_config(epsilon=2.0))
        assert any("epsilon" in d["message"] for d in diags
                   if d["level"] == "error")

    def test_beta_on_alpha_orbit_warns(self):
        cfg = small_two_hole_config()
        # beta = alpha: ||q_n beta|| -> 0, general position fails
        import amlab.arithmetic as arith
        cf = arith.build_cf(GOLDEN_60)
        cfg["beta"] = str(cf.alpha)
        diags = validate(cfg)
        assert any(d["level"] == "warning" and "general position"
                   in d["message"] for d in diags)

    def test_insufficient_depth_flagged(self):
        cfg = small_two_hole_config()
        cfg["cf"] = {"partial_quotients": [1, 1, 1, 1, 1]}
        cfg["N_schedule"] = [10**5]
        diags = validate(cfg)
        assert any("insufficient depth" in d["message"] for d in diags
                   if d["level"] == "error")


class TestRun:
    def test_two_hole_outputs(self, tmp_path):
        verdict = run(small_two_hole_config(), out_dir=str(tmp_path))
        assert verdict["verdict"] == "decay-evidence"
        for name in ("verdicts.json", "manifest.json", "scan.csv", "norms.csv"):
            assert (tmp_path / name).exists()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert "eigenvalue_scan" in manifest["operations"]
        assert manifest["seed"] == 7

    def test_one_hole_outputs(self, tmp_path):
        verdict = run(small_one_hole_config(), out_dir=str(tmp_path))
        assert verdict["verdict"] == "bounded-spread + eigenvalue-evidence"
        assert (tmp_path / "spread.csv").exists()
        assert (tmp_path / "weyl.csv").exists()

    def test_half_cover(self, tmp_path):
        cfg = small_two_hole_config()
        cfg["experiment"] = "half-cover-corollary"
        del cfg["beta"]
        verdict = run(cfg, out_dir=str(tmp_path))
        assert verdict["verdict"] == "decay-evidence"
        assert verdict["parity_certificate"]["count"] >= 20
        assert (tmp_path / "parity.csv").exists()

    def test_determinism_byte_identical(self, tmp_path):
        cfg = small_two_hole_config()
        run(cfg, out_dir=str(tmp_path / "a"))
        run(cfg, out_dir=str(tmp_path / "b"))
        for name in ("scan.csv", "norms.csv", "verdicts.json"):
            assert (tmp_path / "a" / name).read_bytes() \
                == (tmp_path / "b" / name).read_bytes()

    def test_seed_changes_sample_points(self, tmp_path):
        cfg = small_two_hole_config()
        run(cfg, out_dir=str(tmp_path / "a"))
        run(cfg, out_dir=str(tmp_path / "b"), seed=8)
        assert (tmp_path / "a" / "scan.csv").read_bytes() \
            != (tmp_path / "b" / "scan.csv").read_bytes()


class TestMainEntry:
    def test_run_exit_codes(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps(small_two_hole_config()))
        assert main(["run", "--config", str(cfg_file),
                     "--out-dir", str(tmp_path / "out")]) == 0

    def test_invalid_config_nonzero(self, tmp_path, capsys):
        cfg_file = tmp_path / "bad.json"
        cfg_file.write_text(json.dumps(small_two_hole_config(epsilon=2.0)))
        assert main(["run", "--config", str(cfg_file),
                     "--out-dir", str(tmp_path / "out")]) == 1
        out = json.loads(capsys.readouterr().out)
        assert "epsilon" in out["message"]

    def test_unreadable_config(self, tmp_path):
        missing = tmp_path / "nope.json"
        assert main(["run", "--config", str(missing)]) == 2

    def test_validate_command(self, tmp_path, capsys):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps(small_two_hole_config()))
        assert main(["validate", "--config", str(cfg_file)]) == 0
        assert json.loads(capsys.readouterr().out) == []
