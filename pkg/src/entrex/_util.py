"""Small shared plumbing: atomic file writes, float formatting, format id."""

from __future__ import annotations

import os
from pathlib import Path

# Version of every on-disk format this package writes (grid files, manifests,
# CSV summaries).  Bump on any schema change.
FORMAT_VERSION = "1"


def fmt(x) -> str:
    """Shortest round-trip decimal representation of a float."""
    return repr(float(x) + 0.0)  # + 0.0 normalizes -0.0


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write a file via temp-then-rename so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)
