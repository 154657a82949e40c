"""Text and binary event codecs, scores files and result tables."""

import io

import numpy as np
import pandas as pd
import pytest

from src.errors import CsvParseError, PolarityError, StreamFormatError, StreamLengthError
from src.io_formats import (
    HEADER, MAGIC, read_binary, read_csv, read_scores, read_stream, read_table, write_binary, write_csv,
    write_scores, write_stream, write_table,
)
from src.models import EventStream, SensorGeometry


def _csv(text: str) -> io.BytesIO:
    return io.BytesIO(text.encode("utf-8"))


def _csv_bytes(stream: EventStream) -> bytes:
    sink = io.BytesIO()
    write_csv(stream, sink)
    return sink.getvalue()


def _bin_bytes(stream: EventStream) -> bytes:
    sink = io.BytesIO()
    write_binary(stream, sink)
    return sink.getvalue()


class TestReadCsv:

    def test_header_only(self):
        s = read_csv(_csv("# width=4 height=3\nt_us,x,y,p\n"))
        assert len(s) == 0
        assert s.geometry == SensorGeometry(4, 3)

    def test_single_row(self):
        s = read_csv(_csv("# width=10 height=10\nt_us,x,y,p\n1000,5,7,1\n"))
        assert (int(s.t[0]), int(s.x[0]), int(s.y[0]), int(s.p[0])) == (1000, 5, 7, 1)
        assert not s.labeled

    def test_labels(self):
        s = read_csv(_csv("# width=10 height=10\nt_us,x,y,p,label\n1,0,0,1,1\n2,1,1,-1,0\n"))
        assert s.labeled
        np.testing.assert_array_equal(s.labels, [1, 0])

    def test_geometry_argument(self):
        s = read_csv(_csv("t_us,x,y,p\n1,2,3,1\n"), geometry=SensorGeometry(8, 8))
        assert s.geometry == SensorGeometry(8, 8)

    def test_malformed_row_reports_line(self):
        with pytest.raises(CsvParseError) as info:
            read_csv(_csv("# width=10 height=10\nt_us,x,y,p\n1,2,3,1\n2,abc,3,1\n"))
        assert info.value.line == 4

    def test_polarity_out_of_range(self):
        with pytest.raises(PolarityError):
            read_csv(_csv("# width=10 height=10\nt_us,x,y,p\n1,2,3,0\n"))

    def test_coordinate_outside_sensor(self):
        with pytest.raises(CsvParseError):
            read_csv(_csv("# width=4 height=4\nt_us,x,y,p\n1,4,0,1\n"))

    def test_bad_header(self):
        with pytest.raises(CsvParseError):
            read_csv(_csv("# width=4 height=4\ntime,x,y,p\n1,0,0,1\n"))


class TestWriteCsv:

    def test_round_trip(self, rng, make_stream):
        s = make_stream(rng, 10_000, geometry=SensorGeometry(346, 260), duration=5_000_000, labeled=True)
        assert read_csv(io.BytesIO(_csv_bytes(s))) == s

    def test_deterministic_bytes(self, rng, make_stream):
        s = make_stream(rng, 10_000)
        assert _csv_bytes(s) == _csv_bytes(s)

    def test_empty_is_header_only(self, small_geometry):
        text = _csv_bytes(EventStream.empty(small_geometry, 0, 10)).decode()
        lines = text.splitlines()
        assert lines[0].startswith("# schema=aocc-events/1")
        assert lines[1:] == ["t_us,x,y,p"]

    def test_labeled_has_five_columns(self, labeled_stream):
        header = _csv_bytes(labeled_stream).decode().splitlines()[1]
        assert header == "t_us,x,y,p,label"

    def test_lf_line_endings(self, tiny_stream):
        assert b"\r" not in _csv_bytes(tiny_stream)


class TestBinary:

    def test_empty_labeled_is_header(self):
        data = _bin_bytes(EventStream.empty(SensorGeometry(346, 260), labeled=True))
        assert len(data) == 16
        assert data[:4] == MAGIC
        assert HEADER.unpack(data) == (MAGIC, 1, 346, 260, 0, 1)

    def test_single_event_layout(self):
        s = EventStream.from_arrays(SensorGeometry(346, 260), [1], [2], [3], [1])
        record = _bin_bytes(s)[16:]
        assert record == bytes.fromhex("0100000000000000" "0200" "0300" "01" "ff" "0000")

    def test_size(self, rng, make_stream):
        s = make_stream(rng, 1234)
        assert len(_bin_bytes(s)) == 16 + 16 * 1234

    def test_round_trip(self, rng):
        n = 100_000
        g = SensorGeometry(346, 260)
        t = np.sort(rng.integers(0, 10_000_000, size=n))
        s = EventStream.from_arrays(g, t, rng.integers(0, 346, n), rng.integers(0, 260, n),
                                    rng.choice([-1, 1], n), label=rng.integers(0, 2, n))
        assert read_binary(io.BytesIO(_bin_bytes(s))) == s

    def test_csv_cross_conversion(self, rng, make_stream):
        s = make_stream(rng, 2_000)
        s = EventStream(s.geometry, s.events, int(s.t[0]), int(s.t[-1]))
        via_binary = read_binary(io.BytesIO(_bin_bytes(s)))
        assert read_csv(io.BytesIO(_csv_bytes(via_binary))) == s

    def test_bad_magic(self, tiny_stream):
        data = bytearray(_bin_bytes(tiny_stream))
        data[:4] = b"XXXX"
        with pytest.raises(StreamFormatError):
            read_binary(io.BytesIO(bytes(data)))

    def test_bad_version(self, tiny_stream):
        data = bytearray(_bin_bytes(tiny_stream))
        data[4] = 9
        with pytest.raises(StreamFormatError):
            read_binary(io.BytesIO(bytes(data)))

    def test_truncated(self, tiny_stream):
        data = _bin_bytes(tiny_stream)
        with pytest.raises(StreamLengthError):
            read_binary(io.BytesIO(data[:-3]))
        with pytest.raises(StreamLengthError):
            read_binary(io.BytesIO(data[:10]))

    def test_bounds_default_to_events(self, tiny_stream):
        s = read_binary(io.BytesIO(_bin_bytes(tiny_stream)))
        assert (s.t_start, s.t_end) == (0, 40)


class TestDispatchAndTables:

    def test_suffix_dispatch(self, tmp_path, tiny_stream):
        write_stream(tiny_stream, tmp_path / "a.bin")
        write_stream(tiny_stream, tmp_path / "a.csv")
        assert (tmp_path / "a.bin").read_bytes()[:4] == MAGIC
        assert read_stream(tmp_path / "a.csv") == tiny_stream

    def test_scores_round_trip(self):
        scores = np.array([0.0, 0.25, 1.0])
        sink = io.BytesIO()
        write_scores(scores, sink)
        sink.seek(0)
        np.testing.assert_array_equal(read_scores(sink), scores)

    def test_table_meta_and_footer(self):
        sink = io.BytesIO()
        write_table(pd.DataFrame({"a": [1.5, float("inf")]}), sink, "demo/1", {"k": 3}, footer={"auc": 0.5})
        sink.seek(0)
        meta, df = read_table(sink)
        assert meta == {"schema": "demo/1", "k": "3", "auc": "0.5"}
        assert df["a"].tolist() == [1.5, float("inf")]
