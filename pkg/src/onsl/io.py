"""Persistence: sample batches (CSV and binary), run records, sweep and rate-fit CSVs."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .sampler import SampleBatch

MAGIC = b"ONSL"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sHIQ")

SWEEP_COLUMNS = ("variant", "K", "c", "d", "eps_score", "kl_nats", "floor_nats", "corrected_nats")
RATE_COLUMNS = ("K", "value", "floor", "corrected", "ln_K", "ln_corrected")


class FormatError(ValueError):
    """A file does not match the expected layout."""


def atomic_write(path, data: bytes | str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(x: float) -> str:
    """Shortest round-trip repr, so text outputs are bit-faithful."""
    return repr(float(x))


# -- sample batches ---------------------------------------------------------

def batch_to_csv(batch: SampleBatch) -> str:
    buf = io.StringIO()
    buf.write(f"# at_time={fmt(batch.at_time)} config_hash={batch.provenance}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j}" for j in range(batch.d)])
    for row in batch.points:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_batch_csv(batch: SampleBatch, path) -> Path:
    return atomic_write(path, batch_to_csv(batch))


def read_batch_csv(path) -> SampleBatch:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise FormatError(f"{path}: missing batch header line")
    meta = dict(item.split("=", 1) for item in lines[0][2:].split())
    try:
        at_time, provenance = float(meta["at_time"]), meta["config_hash"]
    except KeyError as exc:
        raise FormatError(f"{path}: header lacks {exc.args[0]}") from None
    rows = list(csv.reader(lines[2:]))
    pts = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    return SampleBatch(pts.reshape(len(rows), -1), at_time, provenance)


def batch_to_bytes(batch: SampleBatch) -> bytes:
    pts = np.ascontiguousarray(batch.points, dtype="<f8")
    return _HEADER.pack(MAGIC, BINARY_VERSION, batch.d, batch.n) + pts.tobytes()


def write_batch_binary(batch: SampleBatch, path) -> Path:
    return atomic_write(path, batch_to_bytes(batch))


def read_batch_binary(path) -> np.ndarray:
    """Points of a binary dump as an ``(n, d)`` float64 array."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, d, n = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != BINARY_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    body = blob[_HEADER.size:]
    if len(body) != 8 * n * d:
        raise FormatError(f"{path}: expected {n * d} values, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(n, d).astype(np.float64)


# -- JSON ---------------------------------------------------------------------

def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    to_dict = getattr(obj, "to_dict", None)
    if to_dict is not None:
        return to_dict()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def write_json(obj, path) -> Path:
    return atomic_write(path, dumps(obj))


# -- sweep and rate-fit tables ----------------------------------------------

def sweep_rows_to_csv(rows, config_hash: str) -> str:
    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([r["variant"], int(r["K"])] + [fmt(r[c]) for c in SWEEP_COLUMNS[2:3]]
                   + [int(r["d"])] + [fmt(r[c]) for c in SWEEP_COLUMNS[4:]])
    return buf.getvalue()


def read_table(path, columns):
    """Parse a hashed CSV; returns ``(config_hash, rows)`` with rows as dicts of strings."""
    lines = Path(path).read_text().splitlines()
    config_hash = None
    if lines and lines[0].startswith("# "):
        meta = dict(item.split("=", 1) for item in lines[0][2:].split() if "=" in item)
        config_hash = meta.get("config_hash")
        lines = lines[1:]
    if not lines:
        raise FormatError(f"{path}: empty table")
    reader = csv.DictReader(lines)
    missing = [c for c in columns if c not in (reader.fieldnames or [])]
    if missing:
        raise FormatError(f"{path}: missing columns {missing}")
    return config_hash, list(reader)


def rate_rows_to_csv(rows, config_hash: str) -> str:
    """``rows`` holds dicts with K, value, floor, corrected; logs are derived here."""
    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATE_COLUMNS)
    for r in rows:
        corr = float(r["corrected"])
        ln_corr = fmt(math.log(corr)) if corr > 0 else "nan"
        w.writerow([int(r["K"]), fmt(r["value"]), fmt(r["floor"]), fmt(corr),
                    fmt(math.log(int(r["K"]))), ln_corr])
    return buf.getvalue()
