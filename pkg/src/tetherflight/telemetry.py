"""CSV telemetry and identification-dataset files.

Telemetry files start with a schema line, then a header row, then one row per
logged tick. Numbers are written with 9 significant digits so that a
deterministic run always produces the same bytes.
"""
from __future__ import annotations

import csv
import io
import math
import os

import numpy as np

from .errors import TelemetryFormatError
from .sim import TELEMETRY_COLUMNS
from .sysid import IdDataset

SCHEMA = "tetherflight-telemetry"
SCHEMA_VERSION = 1
ID_SCHEMA = "tetherflight-iddata"
ID_SCHEMA_VERSION = 1
TEXT_COLUMNS = frozenset({"phase", "target"})


def format_value(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    # adding 0.0 folds -0.0 into 0.0
    return format(float(value) + 0.0, ".9g")


def _schema_line(name, version):
    return f"# {name} v{version}\n"


def _check_schema(line, name, version):
    parts = line.strip().lstrip("#").split()
    if len(parts) != 2 or parts[0] != name:
        raise TelemetryFormatError(f"not a {name} file (first line {line.strip()!r})")
    if parts[1] != f"v{version}":
        raise TelemetryFormatError(f"schema version {parts[1]} is not supported (need v{version})")


def write_telemetry(rows, sink, columns=TELEMETRY_COLUMNS):
    """Write rows to ``sink`` (a path or a text stream). Returns the row count."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            return write_telemetry(rows, fh, columns)
    sink.write(_schema_line(SCHEMA, SCHEMA_VERSION))
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(columns)
    count = 0
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(columns)}")
        writer.writerow([format_value(v) for v in row])
        count += 1
    return count


def read_telemetry(source):
    """Read a telemetry file into ``{column: array}`` (text columns stay str)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_telemetry(fh)
    _check_schema(source.readline(), SCHEMA, SCHEMA_VERSION)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise TelemetryFormatError("missing header row") from None
    if tuple(header) != TELEMETRY_COLUMNS:
        raise TelemetryFormatError("column layout does not match this schema version")
    raw = list(reader)
    out = {}
    for i, name in enumerate(header):
        values = [r[i] for r in raw]
        out[name] = np.array(values) if name in TEXT_COLUMNS else np.array(values, dtype=float)
    return out


def telemetry_bytes(rows):
    buf = io.StringIO()
    write_telemetry(rows, buf)
    return buf.getvalue().encode("utf-8")


# -- identification datasets ------------------------------------------------

def write_id_dataset(dataset, sink, channel="roll"):
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="") as fh:
            return write_id_dataset(dataset, fh, channel)
    sink.write(_schema_line(ID_SCHEMA, ID_SCHEMA_VERSION))
    sink.write(f"# Ts = {dataset.Ts!r}\n# K_id = {dataset.K_id!r}\n")
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["t", channel, f"{channel}_rate", f"{channel}_ref"])
    for k in range(len(dataset)):
        writer.writerow([format_value(k * dataset.Ts), repr(float(dataset.angle[k])),
                         repr(float(dataset.rate[k])), repr(float(dataset.ref[k]))])
    return len(dataset)


def _read_id_file(fh, channel, K_id):
    meta = {}
    header = None
    body = []
    for line in fh:
        if line.startswith("#"):
            key, _, value = line.lstrip("#").partition("=")
            if value:
                meta[key.strip()] = float(value)
            continue
        if header is None:
            header = next(csv.reader([line]))
        elif line.strip():
            body.append(next(csv.reader([line])))
    names = (channel, f"{channel}_rate", f"{channel}_ref")
    missing = [n for n in names if n not in (header or [])]
    if missing:
        raise TelemetryFormatError(f"dataset lacks columns {missing}")
    idx = [header.index(n) for n in names]
    cols = [np.array([float(r[i]) for r in body]) for i in idx]
    if "Ts" in meta:
        Ts = meta["Ts"]
    else:
        t = np.array([float(r[header.index("t")]) for r in body])
        Ts = float(np.median(np.diff(t)))
    k = meta.get("K_id", K_id) if K_id is None else K_id
    if k is None or not math.isfinite(k):
        raise TelemetryFormatError("K_id is not recorded in the file; pass it explicitly")
    return IdDataset(Ts, k, *cols)


def read_id_dataset(path, channel="roll", K_id=None):
    """Load an identification dataset from a dataset file or a telemetry file.

    Telemetry logs carry no identification gain, so ``K_id`` must be given for
    them; dataset files record it in their preamble.
    """
    if channel not in ("roll", "pitch"):
        raise ValueError("channel must be 'roll' or 'pitch'")
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if first.startswith(f"# {SCHEMA} "):
            _check_schema(first, SCHEMA, SCHEMA_VERSION)
        else:
            _check_schema(first, ID_SCHEMA, ID_SCHEMA_VERSION)
        return _read_id_file(fh, channel, K_id)
