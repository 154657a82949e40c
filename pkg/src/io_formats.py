import io
import re
import struct
import logging
from pathlib import Path
from typing import BinaryIO, Mapping

import numpy as np
import pandas as pd

from src import config
from src.errors import (
    CsvParseError, PolarityError, StreamFormatError, StreamLengthError, StreamValidationError,
)
from src.models import EVENT_DTYPE, UNLABELED, EventStream, SensorGeometry, validate


#-----------------------------
# ::  Logger Variable
#-----------------------------

"""
This line creates a logger named after the current module for logging messages and errors.
"""

logger = logging.getLogger(__name__)


#-----------------------------
# :: Format Constants
#-----------------------------

"""
Binary layout: a 16-byte header (magic, version, width, height, event count, labeled flag,
one pad byte) followed by fixed 16-byte little-endian records.
"""

MAGIC = b"AOCC"
VERSION = 1
HEADER = struct.Struct("<4sHHHIBx")
RECORD_DTYPE = np.dtype({
    "names": ["t", "x", "y", "p", "label"],
    "formats": ["<u8", "<u2", "<u2", "i1", "i1"],
    "offsets": [0, 8, 10, 12, 13],
    "itemsize": 16,
})
EVENTS_SCHEMA = "aocc-events/1"
CSV_COLUMNS = ["t_us", "x", "y", "p"]
_META_PAIR = re.compile(r"([A-Za-z_]+)\s*=\s*(\S+)")


#-----------------------------
# :: Open Helpers
#-----------------------------

def _read_bytes(source: BinaryIO | str | Path) -> bytes:
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    return source.read()


def _write_bytes(sink: BinaryIO | str | Path, payload: bytes) -> None:
    try:
        if isinstance(sink, (str, Path)):
            Path(sink).write_bytes(payload)
        else:
            sink.write(payload)
            sink.flush()
    except OSError as e:
        logger.error(f"Failed to write {len(payload)} bytes ({type(e).__name__}): {e}")
        raise


def _checked(stream: EventStream) -> EventStream:
    violations = validate(stream)
    if violations:
        raise StreamValidationError(violations)
    return stream


#-----------------------------
# :: Metadata Line Functions
#-----------------------------

"""
Every CSV the tool writes starts with `# schema=<name>/<version> key=value ...`.
Parsing collects key=value pairs from all leading comment lines.
"""

def format_meta_line(schema: str, meta: Mapping[str, object] | None = None) -> str:
    pairs = " ".join(f"{k}={v}" for k, v in (meta or {}).items())
    return f"# schema={schema}" + (f" {pairs}" if pairs else "") + "\n"


def parse_meta_lines(lines: list[str]) -> dict[str, str]:
    """Merges the key=value pairs of every comment line; later lines win."""
    meta: dict[str, str] = {}
    for line in lines:
        meta.update(dict(_META_PAIR.findall(line.lstrip("#"))))
    return meta


def _split_comments(text: str) -> tuple[list[str], str, int]:
    """Leading comment lines, the remaining body, and the number of lines consumed."""
    lines = text.splitlines(keepends=True)
    n = 0
    while n < len(lines) and lines[n].lstrip().startswith("#"):
        n += 1
    return [l.strip() for l in lines[:n]], "".join(lines[n:]), n


#-----------------------------
# :: Table Writers
#-----------------------------

"""
Writes a DataFrame as schema-tagged CSV: `.` decimals, LF endings, inf/nan spelled out.
"""

def write_table(df: pd.DataFrame, sink: BinaryIO | str | Path, schema: str,
                meta: Mapping[str, object] | None = None, footer: Mapping[str, object] | None = None) -> None:
    body = df.to_csv(index=False, lineterminator="\n", na_rep="nan")
    tail = "".join(f"# {k}={v}\n" for k, v in (footer or {}).items())
    _write_bytes(sink, (format_meta_line(schema, meta) + body + tail).encode("utf-8"))


def read_table(source: BinaryIO | str | Path) -> tuple[dict[str, str], pd.DataFrame]:
    """Meta pairs from the header and footer comments, plus the CSV body."""
    text = _read_bytes(source).decode("utf-8")
    comments, body, _ = _split_comments(text)
    trailing = [l.strip() for l in body.splitlines() if l.lstrip().startswith("#")]
    df = pd.read_csv(io.StringIO(body), comment="#")
    return parse_meta_lines(comments + trailing), df


#-----------------------------
# :: Read CSV Function
#-----------------------------

"""
Parses the text event format: comment lines with geometry/bounds, then a
`t_us,x,y,p[,label]` header and one integer row per event. Geometry comes from the
comment line, else from the `geometry` argument, else from the configured default.
"""

def read_csv(source: BinaryIO | str | Path, geometry: SensorGeometry | None = None) -> EventStream:
    try:
        text = _read_bytes(source).decode("utf-8")
    except UnicodeDecodeError as e:
        raise CsvParseError(f"source is not UTF-8 ({e})") from e
    comments, body, header_line = _split_comments(text)
    header_line += 1
    meta = parse_meta_lines(comments)
    if not body.strip():
        raise CsvParseError("missing header line", header_line)

    try:
        df = pd.read_csv(io.StringIO(body), dtype=str, keep_default_na=False, index_col=False)
    except pd.errors.ParserError as e:
        found = re.search(r"line (\d+)", str(e))
        line = header_line + int(found.group(1)) - 1 if found else None
        raise CsvParseError(f"malformed row ({e})", line) from e

    columns = [c.strip() for c in df.columns]
    if columns not in (CSV_COLUMNS, CSV_COLUMNS + ["label"]):
        raise CsvParseError(f"unexpected header {','.join(columns)}", header_line)
    df.columns = columns
    labeled = "label" in columns

    values = {}
    for column in columns:
        numeric = pd.to_numeric(df[column].str.strip(), errors="coerce")
        bad = numeric.isna() | (numeric % 1 != 0)
        if column != "p":
            bad |= numeric < 0
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise CsvParseError(f"invalid {column} value '{df[column].iloc[row]}'", header_line + row + 1)
        values[column] = numeric.to_numpy(dtype=np.int64)

    bad_p = (values["p"] != 1) & (values["p"] != -1)
    if bad_p.any():
        row = int(np.flatnonzero(bad_p)[0])
        raise PolarityError(f"line {header_line + row + 1}: polarity {values['p'][row]} not in {{-1, 1}}")
    if labeled:
        bad_label = (values["label"] != 0) & (values["label"] != 1)
        if bad_label.any():
            row = int(np.flatnonzero(bad_label)[0])
            raise CsvParseError(f"label {values['label'][row]} not in {{0, 1}}", header_line + row + 1)

    if "width" in meta and "height" in meta:
        geometry = SensorGeometry(int(meta["width"]), int(meta["height"]))
    elif geometry is None:
        geometry = SensorGeometry(config.DEFAULT_SENSOR_WIDTH, config.DEFAULT_SENSOR_HEIGHT)
        logger.warning(f"No geometry in CSV; using default {geometry.width}x{geometry.height}")

    for column in ("x", "y"):
        limit = geometry.width if column == "x" else geometry.height
        if values[column].size and values[column].max() >= limit:
            row = int(np.argmax(values[column] >= limit))
            raise CsvParseError(f"{column}={values[column][row]} outside sensor ({limit})", header_line + row + 1)

    stream = EventStream.from_arrays(
        geometry, values["t_us"], values["x"], values["y"], values["p"],
        label=values["label"] if labeled else None,
        t_start=int(meta["t_start"]) if "t_start" in meta else None,
        t_end=int(meta["t_end"]) if "t_end" in meta else None,
    )
    logger.debug(f"Read {len(stream)} events from CSV")
    return _checked(stream)


#-----------------------------
# :: Write CSV Function
#-----------------------------

"""
Writes the text event format. Output is byte-deterministic for a given stream.
"""

def write_csv(stream: EventStream, sink: BinaryIO | str | Path) -> None:
    df = pd.DataFrame({
        "t_us": stream.t.astype(np.int64),
        "x": stream.x.astype(np.int64),
        "y": stream.y.astype(np.int64),
        "p": stream.p.astype(np.int64),
    })
    if stream.labeled:
        df["label"] = stream.labels.astype(np.int64)
    meta = {
        "width": stream.geometry.width,
        "height": stream.geometry.height,
        "t_start": stream.t_start,
        "t_end": stream.t_end,
    }
    write_table(df, sink, EVENTS_SCHEMA, meta)


#-----------------------------
# :: Read Binary Function
#-----------------------------

"""
Decodes the fixed-width binary format. The file must hold exactly 16 + 16*count bytes.
Window bounds are not stored; they default to the first/last event timestamps.
"""

def read_binary(source: BinaryIO | str | Path, t_start: int | None = None, t_end: int | None = None) -> EventStream:
    data = _read_bytes(source)
    if len(data) < HEADER.size:
        raise StreamLengthError(f"file holds {len(data)} bytes, header needs {HEADER.size}")
    magic, version, width, height, count, labeled = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise StreamFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise StreamFormatError(f"unsupported version {version}, expected {VERSION}")
    expected = HEADER.size + RECORD_DTYPE.itemsize * count
    if len(data) != expected:
        raise StreamLengthError(f"file holds {len(data)} bytes, header announces {count} events ({expected} bytes)")

    records = np.frombuffer(data, dtype=RECORD_DTYPE, count=count, offset=HEADER.size)
    events = np.zeros(count, dtype=EVENT_DTYPE)
    for name in EVENT_DTYPE.names:
        events[name] = records[name]
    if count:
        t_start = int(events["t"][0]) if t_start is None else t_start
        t_end = int(events["t"][-1]) if t_end is None else t_end
    stream = EventStream(SensorGeometry(width, height), events,
                         0 if t_start is None else t_start, 0 if t_end is None else t_end, bool(labeled))
    logger.debug(f"Read {count} events from binary")
    return _checked(stream)


#-----------------------------
# :: Write Binary Function
#-----------------------------

def write_binary(stream: EventStream, sink: BinaryIO | str | Path) -> None:
    geometry = stream.geometry
    if geometry.width > 0xFFFF or geometry.height > 0xFFFF:
        raise StreamFormatError(f"geometry {geometry.width}x{geometry.height} exceeds 16-bit fields")
    if len(stream) > 0xFFFFFFFF:
        raise StreamFormatError(f"{len(stream)} events exceed the 32-bit count field")
    header = HEADER.pack(MAGIC, VERSION, geometry.width, geometry.height, len(stream), int(stream.labeled))
    records = np.zeros(len(stream), dtype=RECORD_DTYPE)
    for name in EVENT_DTYPE.names:
        records[name] = stream.events[name]
    if not stream.labeled:
        records["label"] = UNLABELED
    _write_bytes(sink, header + records.tobytes())


#-----------------------------
# :: Format Dispatch
#-----------------------------

"""
Chooses the codec from an explicit format name or the file suffix (.bin/.aocc vs anything else).
"""

def detect_format(path: str | Path, fmt: str | None = None) -> str:
    if fmt:
        return fmt
    return "bin" if Path(path).suffix.lower() in (".bin", ".aocc") else "csv"


def read_stream(path: str | Path, fmt: str | None = None, geometry: SensorGeometry | None = None) -> EventStream:
    """Reads a CSV or binary event file; the format follows the suffix unless `fmt` is given."""
    if detect_format(path, fmt) == "bin":
        return read_binary(path)
    return read_csv(path, geometry)


def write_stream(stream: EventStream, path: str | Path, fmt: str | None = None) -> None:
    """Mirror of `read_stream`."""
    if detect_format(path, fmt) == "bin":
        write_binary(stream, path)
    else:
        write_csv(stream, path)
    logger.info(f"Wrote {len(stream)} events to {path}")


#-----------------------------
# :: Scores Files
#-----------------------------

"""
Per-event classifier scores: a single `score` column, one row per event in stream order.
"""

SCORES_SCHEMA = "aocc-scores/1"
CCC_SCHEMA = "aocc-ccc/1"
SWEEP_SCHEMA = "aocc-sweep/1"
ROC_SCHEMA = "aocc-roc/1"
EVAL_SCHEMA = "aocc-eval/1"


def read_scores(source: BinaryIO | str | Path) -> np.ndarray:
    """One score per event, in stream order, from an aocc-scores CSV."""
    _, df = read_table(source)
    if "score" not in df.columns:
        raise CsvParseError(f"scores file needs a 'score' column, got {list(df.columns)}", 1)
    scores = pd.to_numeric(df["score"], errors="coerce").to_numpy(dtype=np.float64)
    if np.isnan(scores).any():
        row = int(np.flatnonzero(np.isnan(scores))[0])
        raise CsvParseError(f"invalid score in data row {row + 1}")
    return scores


def write_scores(scores: np.ndarray, sink: BinaryIO | str | Path) -> None:
    write_table(pd.DataFrame({"score": np.asarray(scores, dtype=np.float64)}), sink, SCORES_SCHEMA)
