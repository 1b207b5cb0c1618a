"""Experiment configuration and atomic table output with provenance."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .. import __version__
from ..potentials import Potential

__all__ = ["ExperimentConfig", "write_text_atomic", "write_table", "parse_grid"]

KINDS = ("doubleslit", "groundstate", "scan-gamma", "doublewell", "evolve", "validate")


def parse_grid(text: str) -> tuple[int, int]:
    """``"128x128"`` -> ``(128, 128)``."""
    try:
        nz, np_ = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"grid must look like NZxNP, got {text!r}") from None
    if nz <= 0 or np_ <= 0 or nz % 2 or np_ % 2:
        raise ValueError(f"grid sizes must be positive and even, got {text!r}")
    return nz, np_


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n_z: int
    n_p: int
    z_extent: float
    potential: Potential
    gammas: tuple
    horizon: float
    dt: float
    out: str = "."
    seed: int = 0
    snapshots: int = 0
    table_format: str = "csv"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        for g in self.gammas:
            if not 0.0 <= g <= math.pi / 2 + 1e-12:
                raise ValueError(f"gamma {g!r} outside [0, pi/2]")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.table_format not in ("csv", "json"):
            raise ValueError("format must be csv or json")

    def provenance(self) -> dict:
        d = asdict(self)
        d["potential"] = self.potential.to_text()
        d["version"] = __version__
        return d


def write_text_atomic(path, text: str) -> Path:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_table(path, columns: list[str], rows, provenance: dict | None = None, fmt: str = "csv") -> Path:
    """CSV (``# {provenance json}`` first line, then the header) or JSON.

    ``path`` is given without an extension; ``.csv`` or ``.json`` is appended.
    """
    path = Path(path)
    rows = [list(r) for r in rows]
    if fmt == "json":
        doc = {"provenance": provenance or {}, "columns": columns,
               "rows": [dict(zip(columns, r)) for r in rows]}
        return write_text_atomic(path.with_suffix(".json"), json.dumps(doc, indent=2, default=_jsonable))
    buf = io.StringIO()
    if provenance:
        buf.write("# " + json.dumps(provenance, default=_jsonable) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in r])
    return write_text_atomic(path.with_suffix(".csv"), buf.getvalue())


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, Potential):
        return obj.to_text()
    return str(obj)
