"""CSV/JSON artifacts and run manifests."""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .params import canonical_json


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: str | Path, header: Sequence[str], rows) -> int:
    """Write a numeric table with a header row; returns the number of data rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.asarray(rows, dtype=float).reshape(-1, len(header))
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_float(x) for x in row) + "\n")
    return rows.shape[0]


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        data = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                data.append([float(c) for c in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field") from None
    return header, np.array(data, dtype=float).reshape(-1, len(header))


def read_columns(path: str | Path, expected: Sequence[str]) -> np.ndarray:
    header, data = read_csv(path)
    if header != list(expected):
        raise ValueError(f"{path}: header must be {','.join(expected)}, got {','.join(header)}")
    return data


def write_json(path: str | Path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass
class RunManifest:
    """Provenance record written next to every CLI output."""

    config: dict
    command_line: str
    tool_version: str = __version__
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: list[dict] = field(default_factory=list)

    @property
    def config_digest(self) -> str:
        return hashlib.sha256(canonical_json(self.config).encode()).hexdigest()

    def add_output(self, path: str | Path, row_count: int | None) -> None:
        self.outputs.append({"path": str(path), "row_count": row_count,
                             "digest": file_digest(path)})

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "config_digest": self.config_digest,
            "config": self.config,
            "command_line": self.command_line,
            "started": self.started,
            "finished": self.finished,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "outputs": self.outputs,
        }

    def write(self, path: str | Path) -> None:
        self.finished = _now()
        write_json(path, self.to_dict())


def manifest_path_for(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")
