"""
File formats: CSV elements, masked triples, benchmark tables, PGM images and JSON.
"""
import csv
import io
import json
import math
from dataclasses import fields
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from config import CSV_FLOAT_FORMAT
from elements import MaskedMatrix
from errors import UsageError

TRIPLE_HEADER = ("i", "j", "value")


def read_element(filename: str) -> np.ndarray:
    """CSV without header, one line per matrix row; a single row or column reads as a vector."""
    try:
        data = np.loadtxt(filename, delimiter=",", ndmin=2, dtype=float)
    except (OSError, ValueError) as e:
        raise UsageError(f"Could not read {filename}: {e}") from e
    if data.shape[0] == 1 or data.shape[1] == 1:
        return data.ravel()
    return data


def element_text(x: np.ndarray) -> str:
    x = np.asarray(x, dtype=float)
    rows = x.reshape(-1, 1) if x.ndim == 1 else x
    buf = io.StringIO()
    np.savetxt(buf, rows, delimiter=",", fmt=CSV_FLOAT_FORMAT)
    return buf.getvalue()


def write_element(filename: str, x: np.ndarray) -> None:
    with open(filename, 'w') as f:
        f.write(element_text(x))


def read_masked(filename: str, shape: Optional[Sequence[int]] = None) -> MaskedMatrix:
    """Triples CSV with header i,j,value; the shape defaults to the index extent."""
    try:
        with open(filename, 'r', newline='') as f:
            reader = csv.reader(f)
            header = next(reader)
            if tuple(h.strip() for h in header) != TRIPLE_HEADER:
                raise UsageError(f"{filename}: expected header i,j,value, got {header}")
            triples = [(int(r[0]), int(r[1]), float(r[2])) for r in reader if r]
    except (OSError, ValueError, IndexError, StopIteration) as e:
        raise UsageError(f"Could not read {filename}: {e}") from e
    if shape is None:
        shape = (max((t[0] for t in triples), default=-1) + 1, max((t[1] for t in triples), default=-1) + 1)
    return MaskedMatrix.from_triples(tuple(shape), triples)


def write_masked(filename: str, mask: MaskedMatrix) -> None:
    with open(filename, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRIPLE_HEADER)
        for i, j, v in mask.triples():
            writer.writerow([i, j, CSV_FLOAT_FORMAT % v])


def rows_text(rows: Iterable[Any], include_time: bool = True) -> str:
    """CSV table of dataclass rows with a header; *_s timing columns dropped unless include_time."""
    rows = list(rows)
    if not rows:
        return ""
    names = [f.name for f in fields(rows[0]) if include_time or not f.name.startswith("time_")]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in rows:
        out = []
        for name in names:
            value = getattr(row, name)
            out.append(CSV_FLOAT_FORMAT % value if isinstance(value, float) else value)
        writer.writerow(out)
    return buf.getvalue()


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become "inf", "-inf" or "nan"."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def json_text(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True)


def write_json(filename: str, value: Any) -> None:
    with open(filename, 'w') as f:
        f.write(json_text(value) + "\n")


def write_pgm(filename: str, image: np.ndarray) -> None:
    """8-bit binary PGM, values mapped linearly from [min, max] to [0, 255]."""
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise UsageError("PGM images must be 2-D")
    lo, hi = float(image.min()), float(image.max())
    if hi > lo:
        scaled = np.round((image - lo) / (hi - lo) * 255.0)
    else:
        scaled = np.zeros_like(image)
    pixels = scaled.astype(np.uint8)
    h, w = pixels.shape
    with open(filename, 'wb') as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(pixels.tobytes())


def read_pgm(filename: str) -> np.ndarray:
    """Pixel values of an 8-bit P5 file as a uint8 array."""
    with open(filename, 'rb') as f:
        data = f.read()
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] not in (b"\n", b""):
                pos += 1
            continue
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5" or int(tokens[3]) != 255:
        raise UsageError(f"{filename} is not an 8-bit P5 image")
    w, h = int(tokens[1]), int(tokens[2])
    pos += 1
    return np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w)
