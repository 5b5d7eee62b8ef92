"""Feature matrix / label containers and their on-disk formats.

Two feature formats are supported:

* ``csv`` -- headerless, one sample per line, comma separated decimals.
* ``epb`` -- ``b"EPB1"`` magic, ``n_samples`` and ``n_dims`` as little-endian
  uint64, then ``n_samples * n_dims`` little-endian float64 values, row-major.

Labels are always a text file with one non-negative integer per line,
0-based, whatever the feature format.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IoError, FormatError, ParseError, ValidationError

EPB_MAGIC = b"EPB1"
_EPB_HEADER = struct.Struct("<4sQQ")
FORMATS = ("csv", "epb")


def as_feature_matrix(values, copy: bool = False) -> np.ndarray:
    """Validate ``values`` as a finite float64 matrix with at least one row and column."""
    arr = np.array(values, dtype=np.float64) if copy else np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"feature matrix must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise ValidationError(f"non-finite value at row {bad[0]}, column {bad[1]}")
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """A feature matrix with optional 0-based class labels.

    ``n_classes`` is inferred as ``max(label) + 1`` when labels are given
    without it.  Arrays are made read-only on construction.
    """

    features: np.ndarray
    labels: Optional[np.ndarray] = None
    n_classes: Optional[int] = field(default=None)

    def __post_init__(self):
        feats = as_feature_matrix(self.features, copy=True)
        feats.setflags(write=False)
        object.__setattr__(self, "features", feats)
        if self.labels is None:
            if self.n_classes is not None:
                raise ValidationError("n_classes given without labels")
            return
        labels = np.array(self.labels)
        if labels.ndim != 1:
            raise ValidationError("labels must be 1-D")
        if labels.shape[0] != feats.shape[0]:
            raise ValidationError(
                f"{labels.shape[0]} labels for {feats.shape[0]} samples"
            )
        if labels.dtype.kind == "f":
            if not np.all(np.isfinite(labels)) or np.any(labels != np.round(labels)):
                raise ValidationError("labels must be integers")
        elif labels.dtype.kind not in "iu":
            raise ValidationError(f"labels must be integers, got dtype {labels.dtype}")
        labels = labels.astype(np.int64)
        if labels.min() < 0:
            raise ValidationError("labels must be non-negative")
        n_classes = self.n_classes
        if n_classes is None:
            n_classes = int(labels.max()) + 1
        n_classes = int(n_classes)
        if labels.max() >= n_classes:
            raise ValidationError(
                f"label {int(labels.max())} out of range for {n_classes} classes"
            )
        missing = np.setdiff1d(np.arange(n_classes), labels)
        if missing.size:
            raise ValidationError(f"classes {missing.tolist()} have no samples")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_dims(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def without_labels(self) -> "Dataset":
        return Dataset(self.features)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        if self.labels is None:
            return Dataset(self.features[indices])
        return Dataset(self.features[indices], self.labels[indices])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if not np.array_equal(self.features, other.features):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is None:
            return True
        return self.n_classes == other.n_classes and np.array_equal(self.labels, other.labels)

    __hash__ = None


# --- CSV ---------------------------------------------------------------------

def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _write_bytes(path, data: bytes) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _lines(text: str):
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [ln[:-1] if ln.endswith("\r") else ln for ln in lines]


def parse_csv_features(text: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(_lines(text), start=1):
        if not line.strip():
            raise ParseError(f"line {lineno}: empty row")
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"line {lineno}: expected {width} columns, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ParseError(f"line {lineno}: non-numeric cell in {line!r}") from None
    if not rows:
        raise ParseError("no rows")
    return as_feature_matrix(np.array(rows, dtype=np.float64))


def format_csv_features(matrix: np.ndarray) -> str:
    # repr() of a Python float is the shortest string that round-trips exactly
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in matrix)


def parse_labels(text: str) -> np.ndarray:
    out = []
    for lineno, line in enumerate(_lines(text), start=1):
        s = line.strip()
        if not s or not s.isdigit():
            raise ParseError(f"line {lineno}: expected a non-negative integer, got {line!r}")
        out.append(int(s))
    if not out:
        raise ParseError("no labels")
    return np.array(out, dtype=np.int64)


def format_labels(labels) -> str:
    return "".join(f"{int(v)}\n" for v in labels)


# --- EPB ---------------------------------------------------------------------

def encode_epb(matrix: np.ndarray) -> bytes:
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    n, d = matrix.shape
    return _EPB_HEADER.pack(EPB_MAGIC, n, d) + matrix.tobytes(order="C")


def decode_epb(data: bytes) -> np.ndarray:
    if len(data) < _EPB_HEADER.size:
        raise FormatError("epb file truncated in header")
    magic, n, d = _EPB_HEADER.unpack_from(data)
    if magic != EPB_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {EPB_MAGIC!r}")
    expected = _EPB_HEADER.size + 8 * n * d
    if len(data) != expected:
        raise FormatError(f"epb payload is {len(data)} bytes, expected {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=_EPB_HEADER.size).reshape(n, d)
    return as_feature_matrix(values.astype(np.float64))


# --- public API --------------------------------------------------------------

def _check_format(fmt: str) -> None:
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def guess_format(path) -> str:
    return "epb" if str(path).endswith(".epb") else "csv"


def load_features(path, fmt: str = "csv") -> np.ndarray:
    _check_format(fmt)
    if fmt == "csv":
        return parse_csv_features(_read_text(path))
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return decode_epb(data)


def save_features(matrix, path, fmt: str = "csv") -> None:
    _check_format(fmt)
    matrix = as_feature_matrix(matrix)
    if fmt == "csv":
        _write_bytes(path, format_csv_features(matrix).encode("utf-8"))
    else:
        _write_bytes(path, encode_epb(matrix))


def load_dataset(features_path, labels_path=None, fmt: str = "csv",
                 n_classes: Optional[int] = None) -> Dataset:
    features = load_features(features_path, fmt)
    labels = None
    if labels_path is not None:
        labels = parse_labels(_read_text(labels_path))
    return Dataset(features, labels, n_classes if labels is not None else None)


def save_dataset(d: Dataset, features_path, labels_path=None, fmt: str = "csv") -> None:
    save_features(d.features, features_path, fmt)
    if labels_path is not None:
        if d.labels is None:
            raise ValidationError("dataset has no labels to save")
        _write_bytes(labels_path, format_labels(d.labels).encode("utf-8"))
