"""Benchmark environment, mapping noise, trials, sweeps, and summaries."""

import numpy as np
import pytest

from entrex.entropy import BehavioralConditioned, Renyi, Shannon, bernoulli_entropy
from entrex.grid import OccupancyGrid
from entrex.poc import (
    MappingNoise,
    TrialConfig,
    TrialSeeds,
    _mapping_rng,
    apply_mapping,
    build_sweep_configs,
    completion_metrics,
    default_specs,
    generate_environment,
    group_of,
    read_trial_csv,
    run_sweep,
    run_trial,
    summary_row_from_log,
    trial_filename,
    write_summary,
)

SEEDS = TrialSeeds(env=4242, mapping=77, frontier=88)


@pytest.fixture(scope="module")
def small_env():
    return generate_environment(4242, width=60, height=90)


class TestEnvironment:
    def test_deterministic(self, small_env):
        again = generate_environment(4242, width=60, height=90)
        np.testing.assert_array_equal(small_env.ground_truth.cells, again.ground_truth.cells)
        np.testing.assert_array_equal(small_env.initial.cells, again.initial.cells)
        assert small_env.starts == again.starts

    def test_ground_truth_binary_with_obstacles(self, small_env):
        gt = small_env.ground_truth.cells
        assert set(np.unique(gt)).issubset({0.0, 1.0})
        assert 0.02 < gt.mean() < 0.6

    def test_zero_noise_reproduces_ground_truth(self):
        env = generate_environment(7, width=40, height=40, quadrant_noise=[(0, 0)] * 4)
        np.testing.assert_array_equal(env.initial.cells, env.ground_truth.cells)

    def test_quadrant_noise_bounds(self, small_env):
        gt = small_env.ground_truth.cells
        init = small_env.initial.cells
        h, w = gt.shape
        top, left = np.arange(h)[:, None] >= h / 2, np.arange(w)[None, :] < w / 2
        quadrants = {
            (True, True): 0.05,   # TL
            (True, False): 0.50,  # TR
            (False, False): 0.15, # BR
            (False, True): 0.25,  # BL
        }
        for (is_top, is_left), hi in quadrants.items():
            m = (top == is_top) & (left == is_left)
            free = m & (gt == 0.0)
            occ = m & (gt == 1.0)
            assert init[free].max() <= hi + 1e-12
            assert init[free].min() >= 0.0
            if occ.any():
                assert init[occ].min() >= 1.0 - hi - 1e-12

    def test_starts_clear_of_obstacles(self, small_env):
        gt = small_env.ground_truth
        for pose in small_env.starts:
            r, c = gt.cell_of(pose.x, pose.y)
            assert gt.cells[r, c] == 0.0

    def test_interval_validation(self):
        with pytest.raises(ValueError):
            generate_environment(1, quadrant_noise=[(0, 120)] * 4)
        with pytest.raises(ValueError):
            generate_environment(1, quadrant_noise=[(0, 5)] * 3)


class TestMappingNoise:
    def test_level_zero_exact(self, small_env):
        grid = small_env.initial.copy()
        idx = np.arange(200)
        apply_mapping(grid, idx, small_env.ground_truth, MappingNoise(0),
                      np.random.default_rng(0))
        np.testing.assert_array_equal(
            grid.cells.reshape(-1)[idx], small_env.ground_truth.cells.reshape(-1)[idx]
        )

    def test_level_two_step_bounds(self):
        gt = OccupancyGrid(np.zeros((1, 1000)), 0.1)
        grid = OccupancyGrid(np.full((1, 1000), 0.4), 0.1)
        apply_mapping(grid, np.arange(1000), gt, MappingNoise(2), np.random.default_rng(1))
        vals = grid.cells.reshape(-1)
        assert vals.max() <= 0.4 and vals.min() >= 0.25 - 1e-12

    def test_never_overshoots(self):
        gt = OccupancyGrid(np.ones((1, 500)), 0.1)
        grid = OccupancyGrid(np.full((1, 500), 0.97), 0.1)
        rng = np.random.default_rng(2)
        for _ in range(5):
            apply_mapping(grid, np.arange(500), gt, MappingNoise(1), rng)
        assert grid.cells.max() <= 1.0
        assert (grid.cells == 1.0).mean() > 0.9  # clamping reaches the exact truth

    def test_level_one_converges_faster(self):
        # Monte Carlo over 1e4 cells: larger steps need fewer observations
        gt = OccupancyGrid(np.zeros((1, 10_000)), 0.1)

        def applications_until_converged(level):
            grid = OccupancyGrid(np.full((1, 10_000), 0.5), 0.1)
            rng = np.random.default_rng(3)
            for k in range(1, 100):
                apply_mapping(grid, np.arange(10_000), gt, MappingNoise(level), rng)
                if (grid.cells == 0.0).all():
                    return k
            return 100

        assert applications_until_converged(1) < applications_until_converged(2)

    def test_level_validation(self):
        with pytest.raises(ValueError):
            MappingNoise(3)


class TestTrialConfig:
    def test_standard_sets_enforced(self):
        with pytest.raises(ValueError):
            TrialConfig(radius=7.0, noise=MappingNoise(0), start_index=1,
                        spec=Shannon(), seeds=SEEDS)
        with pytest.raises(ValueError):
            TrialConfig(radius=2.0, noise=MappingNoise(0), start_index=9,
                        spec=Shannon(), seeds=SEEDS)
        TrialConfig(radius=7.0, noise=MappingNoise(0), start_index=1,
                    spec=Shannon(), seeds=SEEDS, allow_nonstandard=True)

    def test_mapping_stream_shared_across_specs(self):
        a = TrialConfig(radius=3.0, noise=MappingNoise(2), start_index=2,
                        spec=Shannon(), seeds=SEEDS)
        b = TrialConfig(radius=3.0, noise=MappingNoise(2), start_index=2,
                        spec=BehavioralConditioned(5.0, 2), seeds=SEEDS)
        np.testing.assert_array_equal(
            _mapping_rng(a).uniform(size=32), _mapping_rng(b).uniform(size=32)
        )
        c = TrialConfig(radius=4.0, noise=MappingNoise(2), start_index=2,
                        spec=Shannon(), seeds=SEEDS)
        assert not np.array_equal(
            _mapping_rng(a).uniform(size=32), _mapping_rng(c).uniform(size=32)
        )


class TestGrouping:
    def test_groups(self):
        assert group_of(Shannon()) == "shannon"
        assert group_of(Renyi(0.5)) == "renyi_averse"
        assert group_of(Renyi(2.0)) == "renyi_ignorant"
        assert group_of(BehavioralConditioned(0.2, 2)) == "behavioral_averse"
        assert group_of(BehavioralConditioned(3.0, 2)) == "behavioral_ignorant"

    def test_default_specs_cover_benchmark(self):
        specs = default_specs()
        assert len(specs) == 14
        assert sum(isinstance(s, Shannon) for s in specs) == 1
        assert sum(isinstance(s, Renyi) for s in specs) == 7
        assert sum(isinstance(s, BehavioralConditioned) for s in specs) == 6


class TestTrialsAndSweeps:
    def test_trial_csv_byte_identical(self, small_env):
        cfg = TrialConfig(radius=2.0, noise=MappingNoise(1), start_index=1,
                          spec=Shannon(), seeds=SEEDS)
        a = run_trial(small_env, cfg).to_csv()
        b = run_trial(small_env, cfg).to_csv()
        assert a == b
        assert ",wall_ms" in a.splitlines()[next(
            i for i, ln in enumerate(a.splitlines()) if not ln.startswith("#")
        )]

    def test_timing_fills_wall_ms(self, small_env):
        cfg = TrialConfig(radius=3.0, noise=MappingNoise(0), start_index=1,
                          spec=Shannon(), seeds=SEEDS)
        log = run_trial(small_env, cfg, timing=True)
        assert all(r.wall_ms is not None and r.wall_ms >= 0 for r in log.records)

    def test_sweep_continues_after_failure(self, small_env):
        bad = BehavioralConditioned(alpha=2.0, m=3)  # engine rejects m != 2
        configs = build_sweep_configs(
            SEEDS, radii=(2.0,), noise_levels=(0,), starts=(1,),
            specs=[bad, Shannon()],
        )
        logs = run_sweep(small_env, configs)
        assert len(logs) == 2
        assert logs[0].error is not None and logs[0].termination_reason == "error"
        assert logs[1].error is None and logs[1].iterations > 0

    def test_sweep_grid_size(self):
        configs = build_sweep_configs(SEEDS, specs=default_specs())
        assert len(configs) == 14 * 4 * 3 * 5
        one_spec = [c for c in configs if isinstance(c.spec, Shannon)]
        assert len(one_spec) == 60

    def test_summary_row_round_trip(self, small_env, tmp_path):
        cfg = TrialConfig(radius=2.0, noise=MappingNoise(2), start_index=2,
                          spec=Renyi(2.0), seeds=SEEDS)
        log = run_trial(small_env, cfg)
        path = tmp_path / trial_filename(log)
        path.write_text(log.to_csv())
        assert read_trial_csv(path) == summary_row_from_log(log)

    def test_write_summary_columns(self, small_env, tmp_path):
        cfg = TrialConfig(radius=2.0, noise=MappingNoise(0), start_index=1,
                          spec=Shannon(), seeds=SEEDS)
        log = run_trial(small_env, cfg)
        out = tmp_path / "summary.csv"
        write_summary([summary_row_from_log(log)], out)
        header, row = out.read_text().splitlines()
        cols = header.split(",")
        for required in ("spec_group", "r", "sigma_m", "start", "iterations_to_99",
                         "format_version"):
            assert required in cols
        assert row.split(",")[cols.index("spec_group")] == "shannon"
        assert row.split(",")[cols.index("format_version")] == "1"


class TestCompletionMetrics:
    def test_endpoints(self, small_env):
        m0 = completion_metrics(small_env.initial, small_env.initial, small_env.ground_truth)
        assert m0.pct_entropy_complete == 0.0
        m1 = completion_metrics(small_env.ground_truth, small_env.initial, small_env.ground_truth)
        assert m1.pct_entropy_complete == pytest.approx(1.0, abs=1e-12)
        assert m1.pct_area_correct == 1.0

    def test_half_entropy_constructed_map(self):
        # build a map whose per-cell entropy is half the initial, via bisection
        rng = np.random.default_rng(9)
        initial_vals = rng.uniform(0.05, 0.45, 400)
        target = bernoulli_entropy(initial_vals, Shannon()) / 2.0
        halved = np.empty_like(initial_vals)
        for i, (v0, t) in enumerate(zip(initial_vals, target)):
            lo, hi = 1e-15, v0
            for _ in range(200):
                mid = (lo + hi) / 2
                if bernoulli_entropy(np.array([mid]), Shannon())[0] < t:
                    lo = mid
                else:
                    hi = mid
            halved[i] = (lo + hi) / 2
        gt = OccupancyGrid(np.zeros((20, 20)), 0.1)
        initial = OccupancyGrid(initial_vals.reshape(20, 20), 0.1)
        current = OccupancyGrid(halved.reshape(20, 20), 0.1)
        m = completion_metrics(current, initial, gt)
        assert m.pct_entropy_complete == pytest.approx(0.5, abs=1e-6)

    def test_dimension_mismatch(self, small_env):
        other = OccupancyGrid(np.zeros((3, 3)), 0.1)
        with pytest.raises(ValueError):
            completion_metrics(other, small_env.initial, small_env.ground_truth)


def test_run_sweep_workers_content_stable(small_env):
    configs = build_sweep_configs(
        SEEDS, radii=(2.0,), noise_levels=(0, 2), starts=(1, 2),
        specs=[Shannon(), Renyi(2.0)],
    )
    solo = run_sweep(small_env, configs, workers=1)
    multi = run_sweep(small_env, configs, workers=2)
    assert sorted(l.to_csv() for l in solo) == sorted(l.to_csv() for l in multi)
