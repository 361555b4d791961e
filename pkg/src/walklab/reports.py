"""Deterministic CSV/JSON emission.

Floats are written in shortest round-trip form (Python repr), so goldens
are byte-stable; every file opens with a single comment line carrying
the run metadata (version, config hash, seed).  Thread budget and output
paths never appear in file contents: identical config + seed must give
byte-identical files under any thread budget.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

VERSION = "0.1.0"


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def config_hash(resolved: dict) -> str:
    """Stable across key ordering: canonical JSON, sha256, 12 hex chars."""
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def meta_line(meta: dict) -> str:
    parts = [f"walklab={VERSION}"] + [f"{k}={fmt(v)}" for k, v in sorted(meta.items())]
    return "# " + " ".join(parts)


def write_csv(path, columns, rows, meta=None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    if meta is not None:
        lines.append(meta_line(meta))
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
