"""Bit-exact raster file IO and CSV emission.

File layout: a single JSON header line terminated by ``\\n`` followed by the
raw payload.  Header keys: ``width``, ``height``, ``bands``, ``dtype``
(``f32``/``u8``/``u32``), ``interleave`` (always ``bsq``) and ``byte_order``
(always ``little``).  Floating payloads are 32-bit on disk regardless of the
float64 in-memory representation.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import GroundTruthMask, HsiCube, ScoreMap
from .errors import RasterFormatError

__all__ = [
    "load_cube",
    "save_cube",
    "load_mask",
    "save_mask",
    "load_scores",
    "save_scores",
    "load_labels",
    "save_labels",
    "write_score_csv",
]

_DTYPES = {"f32": np.dtype("<f4"), "u8": np.dtype("<u1"), "u32": np.dtype("<u4")}


def _write(path, array: np.ndarray, width: int, height: int, bands: int, dtype: str) -> None:
    header = {
        "width": width,
        "height": height,
        "bands": bands,
        "dtype": dtype,
        "interleave": "bsq",
        "byte_order": "little",
    }
    payload = np.ascontiguousarray(array.astype(_DTYPES[dtype])).tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("ascii") + b"\n")
        fh.write(payload)


def _read(path) -> tuple[dict, np.ndarray]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"raster file not found: {path}")
    with open(path, "rb") as fh:
        line = fh.readline()
        blob = fh.read()
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise RasterFormatError(f"{path}: malformed header: {exc}") from exc
    for key in ("width", "height", "bands", "dtype", "interleave", "byte_order"):
        if key not in header:
            raise RasterFormatError(f"{path}: header missing key {key!r}")
    if header["interleave"] != "bsq" or header["byte_order"] != "little":
        raise RasterFormatError(f"{path}: unsupported interleave/byte order")
    dtype = _DTYPES.get(header["dtype"])
    if dtype is None:
        raise RasterFormatError(f"{path}: unsupported dtype {header['dtype']!r}")
    w, h, b = header["width"], header["height"], header["bands"]
    if not all(isinstance(v, int) and v >= 1 for v in (w, h, b)):
        raise RasterFormatError(f"{path}: non-positive dimensions in header")
    expected = w * h * b * dtype.itemsize
    if len(blob) != expected:
        raise RasterFormatError(
            f"{path}: payload is {len(blob)} bytes, header declares {expected}"
        )
    values = np.frombuffer(blob, dtype=dtype).reshape(b, h, w)
    return header, values


def save_cube(cube: HsiCube, path) -> None:
    _write(path, cube.values, cube.width, cube.height, cube.bands, "f32")


def load_cube(path) -> HsiCube:
    header, values = _read(path)
    if header["dtype"] != "f32":
        raise RasterFormatError(f"{path}: cube payload must be f32")
    values = values.astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise RasterFormatError(f"{path}: cube payload contains non-finite values")
    return HsiCube(header["width"], header["height"], header["bands"], values)


def save_mask(mask: GroundTruthMask, path) -> None:
    _write(path, mask.labels, mask.width, mask.height, 1, "u8")


def load_mask(path) -> GroundTruthMask:
    header, values = _read(path)
    if header["dtype"] != "u8" or header["bands"] != 1:
        raise RasterFormatError(f"{path}: mask must be a single-band u8 raster")
    return GroundTruthMask(header["width"], header["height"], values[0])


def save_scores(scores: ScoreMap, path) -> None:
    _write(path, scores.scores, scores.width, scores.height, 1, "f32")


def load_scores(path) -> ScoreMap:
    header, values = _read(path)
    if header["dtype"] != "f32" or header["bands"] != 1:
        raise RasterFormatError(f"{path}: score map must be a single-band f32 raster")
    values = values[0].astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise RasterFormatError(f"{path}: score payload contains non-finite values")
    return ScoreMap(header["width"], header["height"], values)


def save_labels(labels: np.ndarray, path) -> None:
    """Store an integer label plane (height, width) as a u32 raster."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError("label plane must be 2-D")
    if arr.min() < 0:
        raise ValueError("labels must be nonnegative")
    _write(path, arr, arr.shape[1], arr.shape[0], 1, "u32")


def load_labels(path) -> np.ndarray:
    header, values = _read(path)
    if header["dtype"] != "u32" or header["bands"] != 1:
        raise RasterFormatError(f"{path}: label map must be a single-band u32 raster")
    return values[0].astype(np.int64)


def write_score_csv(scores: ScoreMap, path) -> None:
    """Emit ``pixel_index,row,col,score`` rows with LF line endings."""
    lines = ["pixel_index,row,col,score"]
    flat = scores.flat
    for idx in range(flat.size):
        row, col = divmod(idx, scores.width)
        lines.append(f"{idx},{row},{col},{float(flat[idx])!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
