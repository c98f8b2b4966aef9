"""Frontier extraction and clustering against a per-definition reference."""

import numpy as np
import pytest

from entrex.frontiers import FrontierConfig, extract_frontiers
from entrex.grid import Kernel, OccupancyGrid


def make_grid(values):
    return OccupancyGrid(np.asarray(values, dtype=float), 0.1)


def reference_raw_frontiers(cells, cfg: FrontierConfig):
    """Literal per-cell implementation of the frontier definition."""
    h, w = cells.shape
    raw = set()
    for r in range(h):
        for c in range(w):
            v = cells[r, c]
            grad = False
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and abs(v - cells[rr, cc]) > 1e-12:
                    grad = True
            if not grad:
                continue
            if cfg.poc_mode:
                if v < cfg.poc_free_threshold:
                    raw.add(r * w + c)
                continue
            unknown = abs(v - 0.5) <= 1e-12
            free = (not unknown) and v < cfg.tau_fs
            if not free:
                continue
            # obstacle neighborhood: any occupied cell under the kernel stencil
            side = cfg.kernel.weights.shape[0]
            center = side // 2
            near_obstacle = False
            for ki in range(side):
                for kj in range(side):
                    if cfg.kernel.weights[ki, kj] <= 0:
                        continue
                    rr, cc = r + ki - center, c + kj - center
                    if 0 <= rr < h and 0 <= cc < w:
                        vo = cells[rr, cc]
                        if abs(vo - 0.5) > 1e-12 and vo > cfg.tau_ob:
                            near_obstacle = True
            if not near_obstacle:
                raw.add(r * w + c)
    return raw


def random_world(rng, shape=(30, 30)):
    cells = np.full(shape, 0.5)
    # free blobs, obstacle blobs, and speckle noise
    for _ in range(6):
        r, c = rng.integers(0, shape[0] - 6), rng.integers(0, shape[1] - 6)
        hgt, wid = rng.integers(3, 7), rng.integers(3, 7)
        cells[r : r + hgt, c : c + wid] = rng.choice([0.0, 1.0, 0.12, 0.88])
    speckle = rng.random(shape) < 0.08
    cells[speckle] = rng.uniform(0, 1, speckle.sum())
    return cells


class TestExtraction:
    def test_fully_known_free_map(self):
        fl = extract_frontiers(make_grid(np.zeros((8, 8))), FrontierConfig())
        assert len(fl) == 0 and not fl

    def test_half_free_half_unknown(self):
        cells = np.full((10, 10), 0.5)
        cells[:, :5] = 0.0
        fl = extract_frontiers(make_grid(cells), FrontierConfig(tau_cl=1))
        expected = [r * 10 + 4 for r in range(10)]
        np.testing.assert_array_equal(fl.raw, expected)
        np.testing.assert_array_equal(fl.representatives, expected)
        assert len(fl.clusters) == 10

    def test_clustered_variant(self):
        cells = np.full((10, 10), 0.5)
        cells[:, :5] = 0.0
        fl = extract_frontiers(make_grid(cells), FrontierConfig(tau_cl=5, rng_seed=3))
        assert len(fl.clusters) == 2
        assert len(fl.representatives) == 2
        for rep, cluster in zip(fl.representatives, fl.clusters):
            assert rep in cluster
            tile = (rep // 10) // 5
            assert all((c // 10) // 5 == tile for c in cluster)

    def test_matches_reference_on_random_grids(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            cells = random_world(rng)
            for poc in (False, True):
                cfg = FrontierConfig(poc_mode=poc)
                fl = extract_frontiers(make_grid(cells), cfg)
                assert set(fl.raw.tolist()) == reference_raw_frontiers(cells, cfg)

    def test_representative_never_occupied_or_unknown(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            cells = random_world(rng)
            cfg = FrontierConfig(tau_cl=3, rng_seed=11)
            fl = extract_frontiers(make_grid(cells), cfg)
            for rep in fl.representatives:
                v = cells.reshape(-1)[rep]
                assert abs(v - 0.5) > 1e-12  # not unknown
                assert v < cfg.tau_fs  # free, hence not occupied

    def test_cluster_count_monotone_along_nested_tile_sizes(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            cells = random_world(rng)
            counts = [
                len(extract_frontiers(make_grid(cells), FrontierConfig(tau_cl=t)))
                for t in (1, 2, 4, 8, 16)
            ]
            assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_cluster_count_can_tick_up_between_unaligned_sizes(self):
        # documented tiling corner case: rows {2, 3} share a tau=2 tile but
        # straddle two tau=3 tiles
        cells = np.full((6, 3), 0.5)
        cells[2:4, 0] = 0.0
        g = make_grid(cells)
        n2 = len(extract_frontiers(g, FrontierConfig(tau_cl=2)))
        n3 = len(extract_frontiers(g, FrontierConfig(tau_cl=3)))
        assert (n2, n3) == (1, 2)

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        cells = random_world(rng)
        cfg = FrontierConfig(tau_cl=4, rng_seed=99)
        a = extract_frontiers(make_grid(cells), cfg)
        b = extract_frontiers(make_grid(cells), cfg)
        np.testing.assert_array_equal(a.representatives, b.representatives)
        np.testing.assert_array_equal(a.raw, b.raw)

    def test_clusters_partition_raw(self):
        rng = np.random.default_rng(10)
        cells = random_world(rng)
        fl = extract_frontiers(make_grid(cells), FrontierConfig(tau_cl=4))
        merged = np.concatenate([c for c in fl.clusters]) if fl.clusters else np.array([])
        assert sorted(merged.tolist()) == sorted(fl.raw.tolist())
        assert len(fl.representatives) == len(fl.clusters)


def test_config_validation():
    with pytest.raises(ValueError):
        FrontierConfig(tau_fs=0.8, tau_ob=0.3)
    with pytest.raises(ValueError):
        FrontierConfig(tau_cl=0)
    with pytest.raises(ValueError):
        FrontierConfig(poc_free_threshold=0.0)
    FrontierConfig(kernel=Kernel.ones(5))


def test_frontier_csv_export():
    cells = np.full((10, 10), 0.5)
    cells[:, :5] = 0.0
    fl = extract_frontiers(make_grid(cells), FrontierConfig(tau_cl=5, rng_seed=3))
    lines = fl.to_csv(grid_width=10).splitlines()
    assert lines[0] == "cluster_id,rep_row,rep_col,cluster_size"
    assert len(lines) == 1 + 2
    for line, cluster in zip(lines[1:], fl.clusters):
        cid, row, col, size = (int(x) for x in line.split(","))
        assert row * 10 + col in cluster
        assert size == cluster.size
