"""File formats: binary stream files, CSV reports and JSON run configs.

Stream file layout (all little-endian)::

    bytes 0-3   b"ABCS"
    byte  4     version, 0x01
    byte  5     reserved, 0x00
    bytes 6-9   n as uint32
    then        n^2 + 2n float64 values: c, B row-major, a
"""
from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..linalg import PromiseInstance

MAGIC = b"ABCS"
VERSION = 1
HEADER = struct.Struct("<4sBBI")


class StreamFormatError(ValueError):
    pass


@dataclass(frozen=True)
class StreamFile:
    n: int
    values: np.ndarray  # flat float64, length n^2 + 2n

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype="<f8").ravel()
        if v.size != self.n * self.n + 2 * self.n:
            raise StreamFormatError(f"expected {self.n * self.n + 2 * self.n} values, got {v.size}")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_instance(cls, inst: PromiseInstance) -> "StreamFile":
        return cls(inst.n, inst.stream())

    @property
    def c(self) -> np.ndarray:
        return self.values[: self.n]

    @property
    def B(self) -> np.ndarray:
        return self.values[self.n: self.n + self.n * self.n].reshape(self.n, self.n)

    @property
    def a(self) -> np.ndarray:
        return self.values[self.n + self.n * self.n:]

    def to_bytes(self) -> bytes:
        return HEADER.pack(MAGIC, VERSION, 0, self.n) + self.values.tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "StreamFile":
        if len(data) < HEADER.size:
            raise StreamFormatError("file shorter than the header")
        magic, version, _, n = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise StreamFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise StreamFormatError(f"unsupported version {version}")
        body = len(data) - HEADER.size
        if body != 8 * (n * n + 2 * n):
            raise StreamFormatError(f"body has {body} bytes, n={n} needs {8 * (n * n + 2 * n)}")
        return cls(n, np.frombuffer(data, dtype="<f8", offset=HEADER.size).copy())

    def write(self, path) -> None:
        try:
            with open(path, "wb") as fh:
                fh.write(self.to_bytes())
        except OSError as exc:
            raise OSError(f"cannot write stream file {path}: {exc.strerror}") from exc

    @classmethod
    def read(cls, path) -> "StreamFile":
        try:
            with open(path, "rb") as fh:
                return cls.from_bytes(fh.read())
        except OSError as exc:
            raise OSError(f"cannot read stream file {path}: {exc.strerror}") from exc

    @classmethod
    def from_text(cls, text: str) -> "StreamFile":
        """One value per line (blank lines and ``#`` comments ignored); n is inferred."""
        vals = [float(line) for line in (l.split("#")[0].strip() for l in text.splitlines()) if line]
        n = round(math.sqrt(len(vals) + 1)) - 1
        if n < 1 or n * n + 2 * n != len(vals):
            raise StreamFormatError(f"{len(vals)} values is not n^2 + 2n for any n")
        return cls(n, np.array(vals))


TRADEOFF_SCHEMA = ("k", "net_size", "charlie_bits", "bob_bits", "trials", "error_rate")
EQUATOR_SCHEMA = ("trial", "mass", "d_alpha_restricted", "d_alpha_full", "degenerate")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def format_csv(rows, schema) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(schema)
    for i, row in enumerate(rows):
        if isinstance(row, dict):
            if set(row) != set(schema):
                raise ValueError(f"row {i} has fields {sorted(row)}, schema is {list(schema)}")
            row = [row[k] for k in schema]
        elif len(row) != len(schema):
            raise ValueError(f"row {i} has {len(row)} cells, schema has {len(schema)}")
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(rows, schema, path) -> None:
    """Header then one line per row; numbers to 12 significant digits, LF endings."""
    text = format_csv(rows, schema)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV {path}: {exc.strerror}") from exc


@dataclass
class RunConfig:
    command: str | None = None
    n: int | None = None
    seed: int | None = None
    eps: float | None = None
    k: float | None = None
    capacity_factor: float | None = None
    alpha: float | None = None
    kappa: float | None = None
    trials: int | None = None
    output: str | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    def merged(self, overrides: dict) -> "RunConfig":
        """A copy where every non-None entry of ``overrides`` wins."""
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None and k in data})
        return RunConfig(**data)

