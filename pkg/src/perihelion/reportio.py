"""Deterministic file outputs and the per-run manifest.

Every command writes a manifest naming the files it produced together
with the fully resolved configuration, so a run can be reproduced from
the manifest alone.  Data files (CSV, JSON) are written with canonical
formatting: identical inputs give byte-identical files.  Wall-clock time
lives only in the manifest, never in data outputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict[str, Any]
    tool_version: str
    outputs: tuple[str, ...]
    wall_clock_s: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "tool_version": self.tool_version,
            "outputs": list(self.outputs),
            "wall_clock_s": self.wall_clock_s,
        }


def _cell(value: Any) -> str:
    # repr of a float is the shortest round-trip form, stable across runs
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row width {len(row)} != header width {width}")
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, payload: Mapping[str, Any]) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    path = out_dir / f"{manifest.command}_manifest.json"
    write_json(path, manifest.as_dict())
    return path
