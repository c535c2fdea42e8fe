"""CSV/JSON output with a provenance header."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def provenance_lines(config: dict | None, seed: int | None) -> list[str]:
    lines = [f"# omegarec {__version__}"]
    if config is not None:
        lines.append(f"# config_sha256 {config_hash(config)}")
    if seed is not None:
        lines.append(f"# seed {seed}")
    return lines


def render_csv(columns: Sequence[str], rows: Iterable[Sequence], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, columns, rows, header: Sequence[str] = ()) -> None:
    Path(path).write_text(render_csv(columns, rows, header))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
