import json

import numpy as np
import pytest
from click.testing import CliRunner

from pcpriv.cli import main
from pcpriv.geometry import PointCloud, save_xyz


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def chair_file(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "chair.xyz"
    save_xyz(path, PointCloud(rng.normal(size=(64, 3))))
    return path


class TestRegenCommand:
    def test_writes_cloud_and_sidecar(self, runner, chair_file, tmp_path):
        out = tmp_path / "out.xyz"
        result = runner.invoke(main, ["regen", "--in", str(chair_file), "--l", "0.5",
                                      "--seed", "7", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert out.exists()
        sidecar = json.loads(out.with_suffix(".json").read_text())
        assert sidecar["epoch"] == 150  # ceil(0.5 * 300)
        assert sidecar["l"] == 0.5 and sidecar["seed"] == 7
        assert len(out.read_text().splitlines()) == 2048

    def test_epoch_follows_e_max(self, runner, chair_file, tmp_path):
        out = tmp_path / "out.xyz"
        result = runner.invoke(main, ["regen", "--in", str(chair_file), "--l", "0.5",
                                      "--out", str(out), "--e-max", "60", "--count", "128"])
        assert result.exit_code == 0
        assert json.loads(out.with_suffix(".json").read_text())["epoch"] == 30

    def test_zero_privilege_fails_cleanly(self, runner, chair_file, tmp_path):
        result = runner.invoke(main, ["regen", "--in", str(chair_file), "--l", "0",
                                      "--out", str(tmp_path / "x.xyz")])
        assert result.exit_code == 1
        err = result.output.strip().splitlines()[-1]
        assert err.startswith("error: ")

    def test_deterministic(self, runner, chair_file, tmp_path):
        a, b = tmp_path / "a.xyz", tmp_path / "b.xyz"
        for out in (a, b):
            assert runner.invoke(main, ["regen", "--in", str(chair_file), "--l", "0.4",
                                        "--seed", "3", "--out", str(out)]).exit_code == 0
        assert a.read_bytes() == b.read_bytes()


class TestCorpusCommands:
    def test_gen_corpus(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "corpus": {"num_classes": 2, "objects_per_class": 2, "points_per_cloud": 64},
            "seed": 1,
        }))
        out = tmp_path / "corpus"
        result = runner.invoke(main, ["gen-corpus", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "manifest.jsonl").exists()
        assert len((out / "manifest.jsonl").read_text().splitlines()) == 4

    def test_ingest(self, runner, tmp_path):
        rng = np.random.default_rng(1)
        src = tmp_path / "raw"
        for cls in ("a", "b"):
            (src / cls).mkdir(parents=True)
            for j in range(2):
                save_xyz(src / cls / f"{j}.xyz", PointCloud(rng.normal(size=(16, 3))))
        out = tmp_path / "ingested"
        result = runner.invoke(main, ["ingest", "--dir", str(src), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "manifest.jsonl").exists()


class TestExperimentCommand:
    def test_full_pipeline_and_auc(self, runner, tmp_path):
        cfg = tmp_path / "micro.json"
        cfg.write_text(json.dumps({
            "corpus": {"num_classes": 2, "objects_per_class": 2, "points_per_cloud": 128},
            "e_max": 20,
            "count_per_object": 5,
            "test_replicates": 1,
            "privilege_grid": [0.2, 1.0],
            "attackers": ["J1"],
            "seed": 2,
        }))
        out = tmp_path / "results"
        result = runner.invoke(main, ["experiment", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "auc.json").exists()

        auc_result = runner.invoke(main, ["auc", "--results", str(out)])
        assert auc_result.exit_code == 0
        table = json.loads(auc_result.output)
        assert set(table) == {"pi1", "pi2"}

        ev = runner.invoke(main, ["evaluate", "--results", str(out), "--object", "box_000",
                                  "--l", "0.4", "--seed", "3"])
        assert ev.exit_code == 0, ev.output
        body = json.loads(ev.output)
        for key in ("pi1", "pi2", "q1", "q2_static", "q2_dynamic", "chamfer", "points"):
            assert key in body

    def test_config_from_environment(self, runner, tmp_path, monkeypatch):
        cfg = tmp_path / "env.json"
        cfg.write_text(json.dumps({
            "corpus": {"num_classes": 2, "objects_per_class": 2, "points_per_cloud": 64},
            "seed": 4,
        }))
        monkeypatch.setenv("PCPRIV_CONFIG", str(cfg))
        out = tmp_path / "corpus"
        result = runner.invoke(main, ["gen-corpus", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert len((out / "manifest.jsonl").read_text().splitlines()) == 4


class TestDispatch:
    def test_unknown_subcommand_usage_error(self, runner):
        result = runner.invoke(main, ["frobnicate"])
        assert result.exit_code == 2
        assert "Usage" in result.output or "No such command" in result.output

    def test_unknown_flag_usage_error(self, runner):
        result = runner.invoke(main, ["regen", "--bogus", "1"])
        assert result.exit_code == 2

    def test_help_lists_subcommands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for cmd in ("gen-corpus", "ingest", "regen", "train-attacker",
                    "evaluate", "experiment", "auc", "serve"):
            assert cmd in result.output

    def test_auc_without_run(self, runner, tmp_path):
        result = runner.invoke(main, ["auc", "--results", str(tmp_path)])
        assert result.exit_code == 1
        assert "error:" in result.output
