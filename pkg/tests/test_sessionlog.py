from datetime import datetime, timedelta

import numpy as np
import pytest

from impsy.sessionlog import (
    Dataset,
    DimensionMismatch,
    LogRecord,
    LogWriter,
    build_dataset,
    format_record,
    load_dataset,
    parse_record,
    read_log,
    save_dataset,
)


T0 = datetime(2026, 3, 1, 20, 15, 0)


def rec(offset_s, source="human", dims=(0.5,)):
    return LogRecord(at=T0 + timedelta(seconds=offset_s), source=source, dims=dims)


class TestRecordFormat:
    def test_round_trip(self):
        record = rec(1.2345, "ai", (0.25, 0.75))
        parsed = parse_record(format_record(record))
        assert parsed.source == "ai"
        assert parsed.dims == pytest.approx(record.dims)
        # millisecond precision on the wire
        assert abs((parsed.at - record.at).total_seconds()) < 0.001

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_record("not,a,record")
        with pytest.raises(ValueError):
            parse_record("2026-03-01T20:15:00.000,martian,0.5")


class TestLogWriter:
    def test_writes_header_and_parseable_lines(self, tmp_path):
        writer = LogWriter(tmp_path, dimension=2)
        writer.rotate(T0)
        for i in range(100):
            writer.write(rec(i * 0.1, dims=(0.1, 0.9)))
        writer.close()
        dims, records, skipped = read_log(writer.path)
        assert dims == 2
        assert len(records) == 100
        assert skipped == 0
        assert writer.path.name == "20260301T201500.csv"

    def test_rotation_leaves_previous_file_untouched(self, tmp_path):
        writer = LogWriter(tmp_path, dimension=1)
        first = writer.rotate(T0)
        writer.write(rec(0.0))
        before = first.read_bytes()
        second = writer.rotate(T0 + timedelta(hours=1))
        writer.write(rec(0.0))
        writer.close()
        assert first != second
        assert first.read_bytes() == before

    def test_unwritable_dir_disables_logging_not_crash(self, tmp_path):
        blocker = tmp_path / "blocked"
        blocker.write_text("a file, not a dir")
        writer = LogWriter(blocker / "logs", dimension=1)
        writer.rotate(T0)
        assert writer.disabled
        writer.write(rec(0.0))  # no raise


class TestReadLog:
    def test_corrupt_trailing_line_skipped(self, tmp_path):
        path = tmp_path / "s.csv"
        good = format_record(rec(0.0))
        path.write_text(f"#impsy-log v1 dims=1\n{good}\n2026-03-01T20:15:01.0,hum", "utf-8")
        dims, records, skipped = read_log(path)
        assert dims == 1
        assert len(records) == 1
        assert skipped == 1

    def test_wrong_width_row_skipped(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text(
            "#impsy-log v1 dims=2\n"
            + format_record(rec(0.0, dims=(0.5, 0.5))) + "\n"
            + format_record(rec(1.0, dims=(0.5,))) + "\n",
            "utf-8",
        )
        _, records, skipped = read_log(path)
        assert len(records) == 1 and skipped == 1


class TestBuildDataset:
    def write_session(self, path, offsets, dims=1):
        lines = [f"#impsy-log v1 dims={dims}"]
        lines += [format_record(rec(o, dims=(0.5,) * dims)) for o in offsets]
        path.write_text("\n".join(lines) + "\n", "utf-8")

    def test_dt_is_timestamp_difference(self, tmp_path):
        path = tmp_path / "a.csv"
        self.write_session(path, [0.0, 1.5])
        ds = build_dataset([path], D=1)
        assert ds.sequences[0][0, 0] == 0.0
        assert ds.sequences[0][1, 0] == pytest.approx(1.5, abs=1e-3)

    def test_dt_capped_at_dt_max(self, tmp_path):
        path = tmp_path / "a.csv"
        self.write_session(path, [0.0, 60.0])
        ds = build_dataset([path], D=1, dt_max=5.0)
        assert ds.sequences[0][1, 0] == 5.0

    def test_sessions_stay_separate(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        self.write_session(a, [0.0, 1.0])
        self.write_session(b, [100.0, 101.0])
        ds = build_dataset([a, b], D=1)
        assert len(ds.sequences) == 2
        assert ds.sequences[1][0, 0] == 0.0  # no dt across files

    def test_source_tags_preserved(self, tmp_path):
        path = tmp_path / "a.csv"
        lines = [
            "#impsy-log v1 dims=1",
            format_record(rec(0.0, "human")),
            format_record(rec(0.5, "ai")),
        ]
        path.write_text("\n".join(lines) + "\n", "utf-8")
        ds = build_dataset([path], D=1)
        assert ds.sources[0] == ("human", "ai")

    def test_dimension_mismatch_raises(self, tmp_path):
        path = tmp_path / "a.csv"
        self.write_session(path, [0.0, 1.0], dims=2)
        with pytest.raises(DimensionMismatch):
            build_dataset([path], D=1)


class TestPackedDataset:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = Dataset(
            D=2,
            sequences=[rng.uniform(0, 1, (5, 3)), rng.uniform(0, 1, (9, 3))],
            sources=[("human",) * 5, ("ai",) * 9],
        )
        path = tmp_path / "data.impd"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert loaded.D == 2
        assert len(loaded.sequences) == 2
        for a, b in zip(ds.sequences, loaded.sequences):
            assert np.array_equal(a, b)

    def test_corruption_detected(self, tmp_path):
        ds = Dataset(D=1, sequences=[np.zeros((4, 2))], sources=[("human",) * 4])
        path = tmp_path / "data.impd"
        save_dataset(ds, path)
        blob = bytearray(path.read_bytes())
        blob[20] ^= 0x01
        path.write_bytes(bytes(blob))
        with pytest.raises(ValueError, match="checksum"):
            load_dataset(path)
