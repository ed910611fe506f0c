"""File formats: CSV/JSON for sampled functions, JSON with "p/q" strings for exact data."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .exact import as_fraction, format_fraction
from .functions import Piece, PiecewiseFunction, SampledFunction

__all__ = [
    "num_out",
    "num_in",
    "piecewise_to_json",
    "piecewise_from_json",
    "sampled_to_json",
    "sampled_from_json",
    "write_sampled_csv",
    "read_sampled_csv",
    "read_sampled",
    "dump_json",
    "file_sha256",
]


def num_out(x):
    if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
        return format_fraction(Fraction(x))
    return float(x)


def num_in(x):
    if isinstance(x, str):
        return as_fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def piecewise_to_json(f: PiecewiseFunction) -> dict:
    return {
        "breakpoints": [num_out(x) for x in f.breakpoints],
        "values": [num_out(v) for v in f.values],
        "slopes": [num_out(p.slope) for p in f.pieces],
        "intercepts": [num_out(p.intercept) for p in f.pieces],
    }


def piecewise_from_json(data: dict) -> PiecewiseFunction:
    pieces = [Piece(num_in(s), num_in(c)) for s, c in zip(data["slopes"], data["intercepts"])]
    return PiecewiseFunction([num_in(x) for x in data["breakpoints"]],
                             [num_in(v) for v in data["values"]], pieces)


def sampled_to_json(f: SampledFunction) -> dict:
    return {"grid": [float(x) for x in f.grid], "values": [float(y) for y in f.values]}


def sampled_from_json(data: dict) -> SampledFunction:
    return SampledFunction(np.asarray(data["grid"], dtype=float),
                           np.asarray(data["values"], dtype=float))


def write_sampled_csv(f: SampledFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(sampled_csv_text(f))


def sampled_csv_text(f: SampledFunction) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y"])
    for x, y in zip(f.grid, f.values):
        writer.writerow([repr(float(x)), repr(float(y))])
    return buf.getvalue()


def read_sampled_csv(path) -> SampledFunction:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["x", "y"]:
            raise ValueError(f"{path}: expected a header row 'x,y'")
        xs, ys = [], []
        for row in reader:
            if not row:
                continue
            xs.append(float(row[0]))
            ys.append(float(row[1]))
    return SampledFunction(np.asarray(xs), np.asarray(ys))


def read_sampled(path) -> SampledFunction:
    path = Path(path)
    if path.suffix.lower() == ".json":
        return sampled_from_json(json.loads(path.read_text()))
    return read_sampled_csv(path)


def dump_json(data, path=None) -> str:
    text = json.dumps(data, indent=1, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
