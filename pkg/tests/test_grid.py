"""Occupancy grid model: partitions, gradients, dilation, file formats."""

import numpy as np
import pytest

from entrex.grid import (
    Kernel,
    OccupancyGrid,
    convolve_binary,
    gradient_nonzero,
    partition,
    read_grid,
    write_grid,
)


def make_grid(values, resolution=0.1, origin=(0.0, 0.0)):
    return OccupancyGrid(np.asarray(values, dtype=float), resolution, origin)


def reference_partition(cells, tau_fs, tau_ob, eps_known):
    """Independent per-cell scan implementing the partition definitions."""
    h, w = cells.shape
    unknown = np.zeros((h, w), bool)
    known = np.zeros((h, w), bool)
    uncertain = np.zeros((h, w), bool)
    free = np.zeros((h, w), bool)
    occupied = np.zeros((h, w), bool)
    for r in range(h):
        for c in range(w):
            v = cells[r, c]
            if abs(v - 0.5) <= 1e-12:
                unknown[r, c] = True
            elif v <= eps_known or v >= 1 - eps_known:
                known[r, c] = True
            else:
                uncertain[r, c] = True
            if not unknown[r, c]:
                if v < tau_fs:
                    free[r, c] = True
                if v > tau_ob:
                    occupied[r, c] = True
    return unknown, uncertain, known, free, occupied


class TestPartition:
    def test_all_unknown(self):
        part = partition(make_grid(np.full((4, 5), 0.5)), 0.3, 0.7)
        assert part.unknown.all()
        assert not part.free.any() and not part.occupied.any()

    def test_three_values(self):
        g = make_grid([[0.0, 0.5, 1.0]])
        part = partition(g, 0.3, 0.7, eps_known=0.0)
        assert list(part.known[0]) == [True, False, True]
        assert list(part.free[0]) == [True, False, False]
        assert list(part.occupied[0]) == [False, False, True]

    def test_matches_reference_on_random_grids(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            cells = rng.choice(
                [0.0, 0.5, 1.0, 0.25, 0.75, 0.01, 0.99], size=(12, 9)
            ) * np.where(rng.random((12, 9)) < 0.8, 1.0, 1.0)
            part = partition(make_grid(cells), 0.3, 0.7, eps_known=0.02)
            ref = reference_partition(cells, 0.3, 0.7, 0.02)
            for got, want in zip(
                (part.unknown, part.uncertain, part.known, part.free, part.occupied), ref
            ):
                np.testing.assert_array_equal(got, want)

    def test_completeness_and_disjointness(self):
        rng = np.random.default_rng(1)
        cells = rng.uniform(0, 1, (20, 20))
        cells[rng.random((20, 20)) < 0.3] = 0.5
        part = partition(make_grid(cells), 0.4, 0.6, eps_known=0.05)
        total = (
            part.unknown.astype(int) + part.uncertain.astype(int) + part.known.astype(int)
        )
        assert (total == 1).all()
        assert not (part.unknown & part.known).any()
        assert not (part.free & part.unknown).any()
        assert not (part.occupied & part.unknown).any()

    def test_parameter_ordering_errors(self):
        g = make_grid([[0.5]])
        with pytest.raises(ValueError):
            partition(g, 0.8, 0.3)
        with pytest.raises(ValueError):
            partition(g, 0.3, 0.7, eps_known=0.6)


class TestGradientNonzero:
    def test_constant_grid_empty(self):
        assert not gradient_nonzero(make_grid(np.full((7, 7), 0.42))).any()

    def test_single_cell_bump(self):
        cells = np.full((5, 5), 0.2)
        cells[2, 2] = 0.9
        got = gradient_nonzero(make_grid(cells))
        want = np.zeros((5, 5), bool)
        want[2, 2] = True  # differs from all four neighbors
        want[1, 2] = want[3, 2] = want[2, 1] = want[2, 3] = True
        np.testing.assert_array_equal(got, want)

    def test_vertical_step_edge(self):
        cells = np.zeros((10, 10))
        cells[:, 5:] = 1.0
        got = gradient_nonzero(make_grid(cells))
        want = np.zeros((10, 10), bool)
        want[:, 4] = want[:, 5] = True
        np.testing.assert_array_equal(got, want)

    def test_matches_bruteforceted_scan(self):
        rng = np.random.default_rng(2)
        cells = rng.choice([0.0, 0.3, 0.3, 0.7, 1.0], size=(15, 11))
        got = gradient_nonzero(make_grid(cells))
        want = np.zeros_like(got)
        for r in range(15):
            for c in range(11):
                for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < 15 and 0 <= cc < 11:
                        if abs(cells[r, c] - cells[rr, cc]) > 1e-12:
                            want[r, c] = True
        np.testing.assert_array_equal(got, want)


def reference_dilation(mask, kernel):
    h, w = mask.shape
    side = kernel.shape[0]
    center = side // 2
    out = np.zeros_like(mask)
    for r in range(h):
        for c in range(w):
            hit = False
            for ki in range(side):
                for kj in range(side):
                    if kernel[ki, kj] <= 0:
                        continue
                    rr, cc = r + ki - center, c + kj - center
                    if 0 <= rr < h and 0 <= cc < w and mask[rr, cc]:
                        hit = True
            out[r, c] = hit
    return out


class TestConvolveBinary:
    def test_empty_mask(self):
        assert not convolve_binary(np.zeros((6, 6), bool), Kernel.ones(3)).any()

    def test_single_cell_eight_neighborhood(self):
        mask = np.zeros((5, 5), bool)
        mask[2, 2] = True
        got = convolve_binary(mask, Kernel.ones(3))
        want = np.zeros((5, 5), bool)
        want[1:4, 1:4] = True
        np.testing.assert_array_equal(got, want)

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(3)
        mask = rng.random((20, 20)) < 0.15
        for kernel in (np.ones((3, 3)), np.eye(3), np.array([[0, 1, 0]] * 3).T):
            got = convolve_binary(mask, Kernel(kernel))
            np.testing.assert_array_equal(got, reference_dilation(mask, kernel))

    def test_asymmetric_kernel_orientation(self):
        kernel = np.zeros((3, 3))
        kernel[0, 2] = 1.0  # cell is set iff its upper-right neighbor is masked
        mask = np.zeros((4, 4), bool)
        mask[1, 3] = True
        got = convolve_binary(mask, Kernel(kernel))
        want = np.zeros((4, 4), bool)
        want[2, 2] = True
        np.testing.assert_array_equal(got, reference_dilation(mask, kernel))
        np.testing.assert_array_equal(got, want)

    def test_monotone_and_extensive(self):
        rng = np.random.default_rng(4)
        small = rng.random((15, 15)) < 0.1
        big = small | (rng.random((15, 15)) < 0.1)
        k = Kernel.ones(3)
        da, db = convolve_binary(small, k), convolve_binary(big, k)
        assert not (da & ~db).any()  # monotone
        assert not (small & ~da).any()  # extensive (positive center)

    def test_kernel_validation(self):
        with pytest.raises(ValueError):
            Kernel(np.ones((2, 2)))
        with pytest.raises(ValueError):
            Kernel(np.zeros((3, 3)))
        with pytest.raises(ValueError):
            Kernel(-np.ones((3, 3)))


class TestGridModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            OccupancyGrid(np.array([[1.2]]), 0.1)
        with pytest.raises(ValueError):
            OccupancyGrid(np.array([0.5]), 0.1)
        with pytest.raises(ValueError):
            OccupancyGrid(np.array([[0.5]]), -1.0)

    def test_cell_center_round_trip(self):
        g = make_grid(np.zeros((10, 8)), resolution=0.5, origin=(2.0, -1.0))
        x, y = g.center_of(3 * 8 + 5)
        assert (x, y) == (2.0 + 5.5 * 0.5, -1.0 + 3.5 * 0.5)
        assert g.cell_of(x, y) == (3, 5)
        with pytest.raises(ValueError):
            g.cell_of(100.0, 0.0)


class TestGridIO:
    def test_round_trip_prob(self, tmp_path):
        rng = np.random.default_rng(5)
        g = make_grid(rng.uniform(0, 1, (6, 4)), resolution=0.25, origin=(1.5, -2.0))
        path = tmp_path / "map.grid"
        write_grid(g, path)
        back = read_grid(path)
        np.testing.assert_array_equal(back.cells, g.cells)
        assert back.resolution == g.resolution and back.origin == g.origin

    def test_round_trip_percent(self, tmp_path):
        g = make_grid([[0.0, 0.25], [0.5, 1.0]])
        path = tmp_path / "map.grid"
        write_grid(g, path, scale="percent")
        assert "scale percent" in path.read_text()
        back = read_grid(path)
        np.testing.assert_allclose(back.cells, g.cells, atol=1e-15)

    def test_pgm_percent(self, tmp_path):
        path = tmp_path / "map.pgm"
        path.write_text("P2\n# a comment\n3 2\n100\n0 50 100\n25 75 0\n")
        g = read_grid(path)
        np.testing.assert_allclose(
            g.cells, [[0.0, 0.5, 1.0], [0.25, 0.75, 0.0]], atol=1e-15
        )

    def test_errors(self, tmp_path):
        bad = tmp_path / "bad.grid"
        bad.write_text("not-a-grid 1\n")
        with pytest.raises(ValueError):
            read_grid(bad)
        bad.write_text("entrex-grid 99\nwidth 1\n")
        with pytest.raises(ValueError):
            read_grid(bad)
        bad.write_text("entrex-grid 1\nwidth 2\nheight 1\nresolution 0.1\norigin 0 0\nscale prob\n0.5\n")
        with pytest.raises(ValueError):
            read_grid(bad)  # wrong cell count
