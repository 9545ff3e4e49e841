import json
import subprocess
import sys

import pytest

from lsrsim.cli import main


def write_config(tmp_path, name="cfg.json", **overrides):
    data = {
        "snr_db": [4.0, 5.0],
        "n_r_list": [4],
        "rate_bits": 1.0,
        "trials": 1500,
        "search": {"coarse_points": 9, "refine_iters": 0},
    }
    data.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


class TestExitCodes:
    def test_success(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "r.csv"
        assert main(["outage-curve", "--config", str(cfg), "--seed", "3",
                     "--out", str(out)]) == 0
        assert out.exists()

    def test_missing_config_file_is_io_error(self, tmp_path):
        assert main(["outage-curve", "--config", str(tmp_path / "nope.json"),
                     "--seed", "3", "--out", str(tmp_path / "r.csv")]) == 4

    def test_malformed_json_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["outage-curve", "--config", str(bad), "--seed", "3",
                     "--out", str(tmp_path / "r.csv")]) == 2

    def test_validation_failure_reports_field(self, tmp_path, capsys):
        cfg = write_config(tmp_path, snr_db=[])
        code = main(["outage-curve", "--config", str(cfg), "--seed", "3",
                     "--out", str(tmp_path / "r.csv")])
        assert code == 2
        assert "snr_db" in capsys.readouterr().err

    def test_kind_mismatch_rejected(self, tmp_path):
        cfg = write_config(tmp_path, kind="b_vs_snr")
        assert main(["outage-curve", "--config", str(cfg), "--seed", "3",
                     "--out", str(tmp_path / "r.csv")]) == 2

    def test_unbracketed_gain_flags_runtime(self, tmp_path):
        # two SNR points around 50% outage never reach 1e-6
        cfg = write_config(tmp_path, snr_db=[0.0, 1.0], trials=500)
        code = main(["outage-curve", "--config", str(cfg), "--seed", "3",
                     "--out", str(tmp_path / "r.csv"), "--gain-target", "1e-6"])
        assert code == 3
        assert (tmp_path / "r.csv").exists()  # results still written

    def test_unwritable_output_is_io_error(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "no_dir" / "r.csv"
        assert main(["outage-curve", "--config", str(cfg), "--seed", "3",
                     "--out", str(out)]) == 4


class TestReproducibility:
    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["outage-curve", "--config", str(cfg), "--seed", "9",
                     "--out", str(a)]) == 0
        assert main(["outage-curve", "--config", str(cfg), "--seed", "9",
                     "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_worker_count_does_not_change_output(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["outage-curve", "--config", str(cfg), "--seed", "9", "--out", str(a)])
        main(["outage-curve", "--config", str(cfg), "--seed", "9", "--out", str(b),
              "--workers", "4"])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path, seed=1)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["outage-curve", "--config", str(cfg), "--seed", "2", "--out", str(a)])
        cfg2 = write_config(tmp_path, name="cfg2.json", seed=999)
        main(["outage-curve", "--config", str(cfg2), "--seed", "2", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_trials_flag_overrides_config(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "r.csv"
        main(["outage-curve", "--config", str(cfg), "--seed", "2",
              "--out", str(out), "--trials", "800"])
        assert ",800," in out.read_text().splitlines()[1]


class TestFormatsAndCommands:
    def test_json_output(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "r.json"
        assert main(["outage-curve", "--config", str(cfg), "--seed", "3",
                     "--out", str(out), "--format", "json"]) == 0
        rows = json.loads(out.read_text())
        assert len(rows) == 2
        assert rows[0]["n_r"] == 4

    def test_b_sweep_command(self, tmp_path):
        cfg = write_config(tmp_path, snr_db=[5.0], b_over_a=[0.5, 1.0])
        out = tmp_path / "r.csv"
        assert main(["b-sweep", "--config", str(cfg), "--seed", "3",
                     "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 3

    def test_gmi_hist_command(self, tmp_path):
        cfg = write_config(tmp_path, snr_db=[5.0], bins=6, trials=500)
        out = tmp_path / "r.csv"
        assert main(["gmi-hist", "--config", str(cfg), "--seed", "3",
                     "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 2 * 6

    def test_asymptotic_scan_command(self, tmp_path):
        cfg = write_config(tmp_path, snr_db=[0.0], n_r_list=[4, 8, 16, 32], trials=400)
        out = tmp_path / "r.csv"
        assert main(["asymptotic-scan", "--config", str(cfg), "--seed", "3",
                     "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 1 + 8

    def test_b_vs_snr_command(self, tmp_path):
        cfg = write_config(tmp_path, snr_db=[5.0])
        out = tmp_path / "r.csv"
        assert main(["b-vs-snr", "--config", str(cfg), "--seed", "3",
                     "--out", str(out)]) == 0

    def test_module_entry_point(self, tmp_path):
        # the installed console path: python -m lsrsim.cli
        cfg = write_config(tmp_path, trials=300)
        out = tmp_path / "r.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "lsrsim.cli", "outage-curve", "--config",
             str(cfg), "--seed", "3", "--out", str(out), "--lmmse-only"],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert out.exists()
