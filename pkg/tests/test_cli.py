import json

import numpy as np
import pytest
from click.testing import CliRunner

from impsy import mdrnn, sessionlog
from impsy.cli import main
from impsy.core import save_config, validate_config
from impsy.mdrnn.weights import load_weights
from conftest import minimal_config_dict, write_model


@pytest.fixture
def runner():
    return CliRunner()


class TestSynthAndDataset:
    def test_synth_writes_sessions(self, runner, tmp_path):
        out = tmp_path / "corpus"
        result = runner.invoke(main, ["synth", "--out", str(out), "--minutes", "0.5",
                                      "--sessions", "2", "--seed", "1"])
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("*.csv"))) == 2

    def test_dataset_two_sessions_two_sequences(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.5",
                             "--sessions", "2", "--seed", "1"])
        out = tmp_path / "data.impd"
        result = runner.invoke(main, ["dataset", "--logs", str(corpus), "--dim", "1",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        ds = sessionlog.load_dataset(out)
        assert len(ds.sequences) == 2
        assert ds.sequences[1][0, 0] == 0.0  # no dt across files

    def test_dataset_row_count_reconciles_with_log_lines(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.4",
                             "--sessions", "2", "--seed", "3"])
        total_lines = sum(
            len(sessionlog.read_log(p)[1]) for p in corpus.glob("*.csv")
        )
        out = tmp_path / "data.impd"
        result = runner.invoke(main, ["dataset", "--logs", str(corpus), "--dim", "1",
                                      "--out", str(out)])
        assert result.exit_code == 0
        assert sessionlog.load_dataset(out).n_frames == total_lines

    def test_corrupt_trailing_line_warns_but_succeeds(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.3",
                             "--sessions", "1", "--seed", "2"])
        log = next(corpus.glob("*.csv"))
        log.write_text(log.read_text() + "2026-01-01T12:00:99,hum", "utf-8")
        result = runner.invoke(main, ["dataset", "--logs", str(corpus), "--dim", "1",
                                      "--out", str(tmp_path / "d.impd")])
        assert result.exit_code == 0
        assert "skipped 1 corrupt line" in result.output

    def test_dimension_mismatch_fails(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.3",
                             "--seed", "2"])
        result = runner.invoke(main, ["dataset", "--logs", str(corpus), "--dim", "4",
                                      "--out", str(tmp_path / "d.impd")])
        assert result.exit_code != 0


class TestTrain:
    def test_epochs_zero_writes_initialization(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.5", "--seed", "4"])
        out = tmp_path / "model.mdrn"
        result = runner.invoke(main, [
            "train", "--data", str(corpus), "--epochs", "0", "--units", "8",
            "--seed", "11", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        fresh = mdrnn.init_params(D=1, L=2, H=8, K=5, rng=np.random.default_rng(11))
        loaded = load_weights(out)
        for (_, a), (_, b) in zip(fresh.tensors(), loaded.tensors()):
            assert np.array_equal(a, b)

    def test_seeded_runs_are_byte_identical(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.5", "--seed", "4"])
        args = ["train", "--data", str(corpus), "--epochs", "2", "--units", "8",
                "--batch-size", "8", "--seed", "11"]
        out1, out2 = tmp_path / "a.mdrn", tmp_path / "b.mdrn"
        assert runner.invoke(main, args + ["--out", str(out1)]).exit_code == 0
        assert runner.invoke(main, args + ["--out", str(out2)]).exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_loss_history_written(self, runner, tmp_path):
        corpus = tmp_path / "corpus"
        runner.invoke(main, ["synth", "--out", str(corpus), "--minutes", "0.5", "--seed", "4"])
        out = tmp_path / "model.mdrn"
        result = runner.invoke(main, [
            "train", "--data", str(corpus), "--epochs", "1", "--units", "8",
            "--batch-size", "8", "--seed", "1", "--out", str(out),
        ])
        assert result.exit_code == 0
        history = json.loads((tmp_path / "model.mdrn.losses.json").read_text())
        assert len(history["train"]) == 2  # pre-training eval + epoch 1


class TestBench:
    def test_small_bench_runs(self, runner, tmp_path):
        out = tmp_path / "bench.csv"
        result = runner.invoke(main, ["bench", "--units", "8,16", "--dims", "2",
                                      "--iters", "100", "--warmup", "5",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "units,dims,iters,mean_ms,p50_ms,p99_ms"
        assert len(lines) == 3

    def test_iters_below_100_is_usage_error(self, runner):
        result = runner.invoke(main, ["bench", "--iters", "0"])
        assert result.exit_code == 2
        result = runner.invoke(main, ["bench", "--iters", "99"])
        assert result.exit_code == 2

    def test_p50_stable_run_to_run(self):
        from impsy.cli import bench_predict

        first = bench_predict([32], dims=2, iters=400, warmup=50)[0]["p50_ms"]
        second = bench_predict([32], dims=2, iters=400, warmup=50)[0]["p50_ms"]
        assert abs(first - second) / max(first, second) < 0.20


class TestRun:
    def test_invalid_config_exits_nonzero_with_violations(self, runner, tmp_path):
        config = tmp_path / "config.json"
        raw = minimal_config_dict()
        raw["outputs"][0].update(out_lo=9, out_hi=1)
        config.write_text(json.dumps(raw), "utf-8")
        result = runner.invoke(main, ["run", "--config", str(config), "--virtual"])
        assert result.exit_code == 1
        assert "out_lo" in result.output

    def test_missing_model_names_path(self, runner, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps(minimal_config_dict(model_file="absent.mdrn")), "utf-8")
        result = runner.invoke(main, ["run", "--config", str(config), "--virtual"])
        assert result.exit_code == 1
        assert "absent.mdrn" in result.output

    def test_virtual_ai_only_run_emits_frames(self, runner, tmp_path):
        write_model(tmp_path / "model.mdrn", D=1, H=4)
        raw = minimal_config_dict(
            interaction={"mode": "ai_only", "switchover_s": 0.5, "tick_hz": 100.0},
            dt_max=0.3,
        )
        config = tmp_path / "config.json"
        save_config(validate_config(raw, base_dir=tmp_path), config)
        result = runner.invoke(main, [
            "run", "--config", str(config), "--virtual", "--no-service",
            "--run-for", "1.5",
        ])
        assert result.exit_code == 0, result.output
        assert "engine ready in" in result.output
        ready_s = float(result.output.split("engine ready in ")[1].split(" s")[0])
        assert ready_s < 2.0  # desk-scale startup bound
        # the run logged generated frames to a session file
        logs = list((tmp_path / "logs").glob("*.csv"))
        assert logs
        _, records, _ = sessionlog.read_log(logs[0])
        assert any(r.source == "ai" for r in records)
