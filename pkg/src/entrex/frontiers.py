"""Frontier extraction and clustering over an occupancy grid.

Raw frontier cells are the free cells that sit in the non-constant part of
the map (nonzero gradient) and are not obstacle neighbors.  They are binned
into axis-aligned square tiles of side ``tau_cl`` cells (anchored at the
grid origin), and one uniformly random representative is picked per tile;
``tau_cl = 1`` means no clustering and the representatives are exactly the
raw cells.

Coarser tiles mean fewer clusters; this is guaranteed monotone along nested
tile sizes (each 2t-tile is a union of t-tiles, so doubling the size never
increases the count).  Between incommensurate sizes the anchored grids
realign and the count can tick up in corner cases (rows {2, 3} form one
tau=2 tile but straddle two tau=3 tiles).

A proof-of-concept mode replaces the partition-based rule with the simpler
"occupancy below a free threshold and nonzero gradient" test (obstacles are
already excluded by the value threshold there, so no neighbor subtraction).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .grid import Kernel, OccupancyGrid, convolve_binary, gradient_nonzero, partition

__all__ = ["FrontierConfig", "FrontierList", "extract_frontiers"]


@dataclass(frozen=True)
class FrontierConfig:
    tau_fs: float = 0.3
    tau_ob: float = 0.7
    tau_cl: int = 1
    kernel: Kernel = field(default_factory=Kernel.ones)
    rng_seed: int = 0
    eps_known: float = 0.02
    poc_mode: bool = False
    poc_free_threshold: float = 0.02

    def __post_init__(self) -> None:
        if not (0.0 < self.tau_fs <= self.tau_ob < 1.0):
            raise ValueError(
                f"need 0 < tau_fs <= tau_ob < 1, got {self.tau_fs!r}, {self.tau_ob!r}"
            )
        if self.tau_cl < 1:
            raise ValueError(f"tau_cl must be >= 1, got {self.tau_cl!r}")
        if not (0.0 < self.poc_free_threshold < 1.0):
            raise ValueError(
                f"poc_free_threshold must be in (0, 1), got {self.poc_free_threshold!r}"
            )


@dataclass(frozen=True)
class FrontierList:
    """Raw frontier cells, their tile clusters, and one representative per cluster.

    All cells are flat grid indices; clusters partition ``raw`` and each
    representative belongs to its cluster.  Cluster membership is stored
    compactly (members reordered by cluster plus boundary offsets); the
    ``clusters`` property materializes the per-cluster arrays.
    """

    representatives: NDArray[np.int64]
    cluster_members: NDArray[np.int64]
    cluster_bounds: NDArray[np.int64]
    raw: NDArray[np.int64]

    @property
    def clusters(self) -> tuple[NDArray[np.int64], ...]:
        return tuple(
            self.cluster_members[a:b]
            for a, b in zip(self.cluster_bounds[:-1], self.cluster_bounds[1:])
        )

    def __len__(self) -> int:
        return int(self.representatives.size)

    def __bool__(self) -> bool:
        return self.representatives.size > 0

    def to_csv(self, grid_width: int) -> str:
        """Debug/visualization export: cluster_id, rep_row, rep_col, cluster_size."""
        lines = ["cluster_id,rep_row,rep_col,cluster_size"]
        sizes = np.diff(self.cluster_bounds)
        for cid, (rep, size) in enumerate(zip(self.representatives, sizes)):
            row, col = divmod(int(rep), grid_width)
            lines.append(f"{cid},{row},{col},{int(size)}")
        return "\n".join(lines) + "\n"


def extract_frontiers(grid: OccupancyGrid, cfg: FrontierConfig) -> FrontierList:
    """Extract, cluster, and pick representative frontier cells.

    Deterministic for fixed (grid, cfg): clusters are ordered by tile, raw
    cells ascending within each cluster, and the per-cluster random pick is
    seeded by ``cfg.rng_seed``.
    """
    grad = gradient_nonzero(grid)
    if cfg.poc_mode:
        raw_mask = (grid.cells < cfg.poc_free_threshold) & grad
    else:
        part = partition(grid, cfg.tau_fs, cfg.tau_ob, cfg.eps_known)
        obstacle_neighbors = convolve_binary(part.occupied, cfg.kernel)
        raw_mask = part.free & grad & ~obstacle_neighbors

    raw = np.flatnonzero(raw_mask).astype(np.int64)
    if raw.size == 0 or cfg.tau_cl == 1:
        # No clustering: every raw cell is its own cluster and representative.
        bounds = np.arange(raw.size + 1, dtype=np.int64)
        return FrontierList(
            representatives=raw, cluster_members=raw, cluster_bounds=bounds, raw=raw
        )

    rows, cols = np.divmod(raw, grid.width)
    tile_rows = rows // cfg.tau_cl
    tile_cols = cols // cfg.tau_cl
    n_tile_cols = (grid.width + cfg.tau_cl - 1) // cfg.tau_cl
    tile_key = tile_rows * n_tile_cols + tile_cols

    order = np.argsort(tile_key, kind="stable")
    sorted_keys = tile_key[order]
    sorted_raw = raw[order]
    _, starts = np.unique(sorted_keys, return_index=True)
    bounds = np.append(starts, sorted_raw.size).astype(np.int64)

    rng = np.random.default_rng(cfg.rng_seed)
    picks = bounds[:-1] + rng.integers(0, bounds[1:] - bounds[:-1])
    return FrontierList(
        representatives=sorted_raw[picks],
        cluster_members=sorted_raw,
        cluster_bounds=bounds,
        raw=raw,
    )
