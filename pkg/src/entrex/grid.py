"""Occupancy grids: data model, space partitions, gradients, and dilation.

A grid stores per-cell occupancy probability in [0, 1] on a dense row-major
(height, width) array.  Cell (row, col) covers the world square whose center
is ``origin + ((col + 0.5) res, (row + 0.5) res)``; flat cell indices are
``row * width + col``.  Cell sets are represented as boolean masks of the
grid shape.

The partition follows the occupancy-value conventions: unknown cells sit at
exactly 0.5, known cells at the extremes (within ``eps_known``), everything
else is uncertain; free/occupied are thresholded at tau_fs / tau_ob over the
non-unknown cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from ._util import FORMAT_VERSION, atomic_write_text, fmt

__all__ = [
    "GridPartition",
    "Kernel",
    "OccupancyGrid",
    "convolve_binary",
    "gradient_nonzero",
    "partition",
    "read_grid",
    "write_grid",
]

GRADIENT_TOL = 1e-12
UNKNOWN_TOL = 1e-12


@dataclass
class OccupancyGrid:
    """Dense occupancy-probability field with resolution and origin metadata."""

    cells: NDArray[np.float64]
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.ndim != 2 or cells.size == 0:
            raise ValueError("cells must be a non-empty 2-D array")
        if np.any(cells < 0.0) or np.any(cells > 1.0):
            raise ValueError("occupancy values must lie in [0, 1]")
        if not (self.resolution > 0.0 and math.isfinite(self.resolution)):
            raise ValueError(f"resolution must be positive, got {self.resolution!r}")
        self.cells = cells
        self.origin = (float(self.origin[0]), float(self.origin[1]))

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def n_cells(self) -> int:
        return self.cells.size

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.cells.copy(), self.resolution, self.origin)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """(row, col) of the cell containing world point (x, y)."""
        col = int(math.floor((x - self.origin[0]) / self.resolution))
        row = int(math.floor((y - self.origin[1]) / self.resolution))
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise ValueError(f"point ({x!r}, {y!r}) lies outside the grid")
        return row, col

    def center_of(self, flat_index: int) -> tuple[float, float]:
        """World coordinates of a cell center, from its flat index."""
        row, col = divmod(int(flat_index), self.width)
        return (
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (row + 0.5) * self.resolution,
        )


@dataclass(frozen=True)
class GridPartition:
    """Boolean masks for the five occupancy classes of one grid."""

    unknown: NDArray[np.bool_]
    uncertain: NDArray[np.bool_]
    known: NDArray[np.bool_]
    free: NDArray[np.bool_]
    occupied: NDArray[np.bool_]


@dataclass(frozen=True)
class Kernel:
    """Odd square non-negative neighborhood kernel with at least one positive entry."""

    weights: NDArray[np.float64]

    def __init__(self, weights) -> None:
        arr = np.asarray(weights, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 == 0:
            raise ValueError("kernel must be an odd square matrix")
        if np.any(arr < 0.0) or not np.any(arr > 0.0):
            raise ValueError("kernel must be non-negative with a positive entry")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    @classmethod
    def ones(cls, side: int = 3) -> "Kernel":
        return cls(np.ones((side, side)))


def partition(
    grid: OccupancyGrid,
    tau_fs: float,
    tau_ob: float,
    eps_known: float = 0.02,
) -> GridPartition:
    """Split cells into unknown / uncertain / known and free / occupied.

    Requires 0 < tau_fs <= tau_ob < 1 and 0 <= eps_known < 0.5.  Unknown wins
    over known so the classes stay disjoint.
    """
    if not (0.0 < tau_fs <= tau_ob < 1.0):
        raise ValueError(
            f"need 0 < tau_fs <= tau_ob < 1, got tau_fs={tau_fs!r}, tau_ob={tau_ob!r}"
        )
    if not (0.0 <= eps_known < 0.5):
        raise ValueError(f"need 0 <= eps_known < 0.5, got {eps_known!r}")
    v = grid.cells
    unknown = np.abs(v - 0.5) <= UNKNOWN_TOL
    known = ((v <= eps_known) | (v >= 1.0 - eps_known)) & ~unknown
    uncertain = ~unknown & ~known
    not_unknown = ~unknown
    free = not_unknown & (v < tau_fs)
    occupied = not_unknown & (v > tau_ob)
    return GridPartition(
        unknown=unknown, uncertain=uncertain, known=known, free=free, occupied=occupied
    )


def gradient_nonzero(grid: OccupancyGrid) -> NDArray[np.bool_]:
    """Cells whose value differs from any 4-neighbor by more than 1e-12.

    The zero set is exactly the locally constant cells; missing neighbors at
    the borders are ignored.
    """
    v = grid.cells
    out = np.zeros(v.shape, dtype=bool)
    dh = np.abs(v[:, 1:] - v[:, :-1]) > GRADIENT_TOL
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    dv = np.abs(v[1:, :] - v[:-1, :]) > GRADIENT_TOL
    out[1:, :] |= dv
    out[:-1, :] |= dv
    return out


def convolve_binary(mask: NDArray[np.bool_], kernel: Kernel) -> NDArray[np.bool_]:
    """Binary dilation: cell set iff the kernel placed on it covers a mask cell.

    Out-of-grid positions count as non-mask.  Formally, with kernel center c,
    out[r, c'] = OR over positive kernel entries (ki, kj) of
    mask[r + ki - c, c' + kj - c].
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    h, w = mask.shape
    center = kernel.weights.shape[0] // 2
    out = np.zeros_like(mask)
    for ki, kj in np.argwhere(kernel.weights > 0.0):
        di, dj = int(ki) - center, int(kj) - center
        r0, r1 = max(0, -di), min(h, h - di)
        c0, c1 = max(0, -dj), min(w, w - dj)
        if r0 < r1 and c0 < c1:
            out[r0:r1, c0:c1] |= mask[r0 + di : r1 + di, c0 + dj : c1 + dj]
    return out


def write_grid(grid: OccupancyGrid, path: str | Path, scale: str = "prob") -> None:
    """Write the plain-text grid format (header + row-major cells), atomically."""
    if scale not in ("prob", "percent"):
        raise ValueError(f"scale must be 'prob' or 'percent', got {scale!r}")
    factor = 100.0 if scale == "percent" else 1.0
    lines = [
        f"entrex-grid {FORMAT_VERSION}",
        f"width {grid.width}",
        f"height {grid.height}",
        f"resolution {fmt(grid.resolution)}",
        f"origin {fmt(grid.origin[0])} {fmt(grid.origin[1])}",
        f"scale {scale}",
    ]
    for row in grid.cells:
        lines.append(" ".join(fmt(v * factor) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_pgm(tokens: list[str], path: Path) -> OccupancyGrid:
    # P2 ASCII maps, values interpreted on the 0-100 percent scale.
    if len(tokens) < 4:
        raise ValueError(f"{path}: truncated PGM header")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    data = np.array([float(t) for t in tokens[4:]], dtype=np.float64)
    if data.size != w * h:
        raise ValueError(f"{path}: expected {w * h} cells, found {data.size}")
    if maxval < 100 or np.any(data > 100.0):
        raise ValueError(f"{path}: PGM occupancy must be on the 0-100 scale")
    return OccupancyGrid(data.reshape(h, w) / 100.0, resolution=1.0)


def read_grid(path: str | Path) -> OccupancyGrid:
    """Read a grid file (native text format, or P2 PGM on the percent scale)."""
    path = Path(path)
    raw = path.read_text()
    content_lines = [
        ln for ln in raw.splitlines() if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not content_lines:
        raise ValueError(f"{path}: empty grid file")
    if content_lines[0].split()[0] == "P2":
        tokens = [t for ln in content_lines for t in ln.split()]
        return _read_pgm(tokens, path)

    header = content_lines[0].split()
    if header[:1] != ["entrex-grid"]:
        raise ValueError(f"{path}: not a grid file (missing 'entrex-grid' header)")
    if len(header) != 2 or header[1] != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported grid format version {header[1:]!r}")

    meta: dict[str, list[str]] = {}
    body_start = None
    for i, ln in enumerate(content_lines[1:], start=1):
        parts = ln.split()
        if parts[0] in ("width", "height", "resolution", "origin", "scale"):
            meta[parts[0]] = parts[1:]
        else:
            body_start = i
            break
    required = ("width", "height", "resolution", "origin", "scale")
    missing = [k for k in required if k not in meta]
    if missing:
        raise ValueError(f"{path}: missing header fields {missing}")
    width = int(meta["width"][0])
    height = int(meta["height"][0])
    resolution = float(meta["resolution"][0])
    origin = (float(meta["origin"][0]), float(meta["origin"][1]))
    scale = meta["scale"][0]
    if scale not in ("prob", "percent"):
        raise ValueError(f"{path}: scale must be 'prob' or 'percent', got {scale!r}")
    if body_start is None:
        raise ValueError(f"{path}: no cell data")
    values = np.array(
        [float(t) for ln in content_lines[body_start:] for t in ln.split()],
        dtype=np.float64,
    )
    if values.size != width * height:
        raise ValueError(f"{path}: expected {width * height} cells, found {values.size}")
    if scale == "percent":
        values = values / 100.0
    return OccupancyGrid(values.reshape(height, width), resolution, origin)
