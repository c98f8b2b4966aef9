"""Proof-of-concept benchmark: environment generation, noise models, sweeps.

The environment is a rectangular map with seeded random convex polygonal
obstacles (binary ground truth) and an initial map obtained by perturbing
every cell with quadrant-dependent uniform noise on the 0-100 percent scale:
free cells get ``0 + U[lo, hi]/100``, obstacle cells ``1 - U[lo, hi]/100``.

Observations move cells toward their ground-truth value.  Noise level 0 sets
the exact value; levels 1 and 2 take an independent uniform step (capped at
0.35 resp. 0.15 probability) toward the truth, clamped so it never
overshoots.  The larger level-1 cap converges in fewer observations, so a
higher level means less uncertainty reduction per observation.

A sweep runs one trial per control-variable combination (sensor radius,
noise level, start position, entropy spec).  The mapping-noise generator is
seeded from (radius, noise, start) only, so every entropy spec consumes an
identically seeded stream over the same schedule of control variables.
"""

from __future__ import annotations

import math
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from ._util import FORMAT_VERSION, atomic_write_text, fmt
from .entropy import (
    Behavioral,
    BehavioralConditioned,
    EntropySpec,
    Renyi,
    RenyiInfinity,
    Shannon,
    bernoulli_entropy,
    spec_label,
    theta_of,
)
from .explore import (
    AREA_TOL,
    COMPLETION_THRESHOLDS,
    DiskSensor,
    ExplorerConfig,
    Pose,
    TrialLog,
    disk_cell_count,
    explore,
)
from .frontiers import FrontierConfig
from .grid import OccupancyGrid

__all__ = [
    "CompletionMetrics",
    "DEFAULT_QUADRANT_NOISE",
    "MappingNoise",
    "PocEnvironment",
    "TrialConfig",
    "TrialSeeds",
    "apply_mapping",
    "build_sweep_configs",
    "completion_metrics",
    "default_specs",
    "generate_environment",
    "group_of",
    "make_mapping_rule",
    "read_trial_csv",
    "run_sweep",
    "run_trial",
    "summary_row_from_log",
    "trial_filename",
    "write_summary",
]

# Quadrant noise intervals on the percent scale: TL, TR, BR, BL.
DEFAULT_QUADRANT_NOISE = ((0.0, 5.0), (0.0, 50.0), (0.0, 15.0), (0.0, 25.0))

_STANDARD_RADII = (2.0, 3.0, 4.0, 5.0)
_STANDARD_STARTS = (1, 2, 3, 4, 5)

# World-unit clearance kept obstacle-free around each start position.
_START_CLEARANCE = 1.0


@dataclass(frozen=True)
class PocEnvironment:
    """Binary ground truth, noisy initial map, and start poses for one seed."""

    ground_truth: OccupancyGrid
    initial: OccupancyGrid
    quadrant_noise: tuple[tuple[float, float], ...]
    starts: tuple[Pose, ...]
    obstacle_seed: int


@dataclass(frozen=True)
class MappingNoise:
    """Observation noise level: 0 exact, 1 and 2 capped steps toward truth."""

    level: int
    level1_range: float = 0.35
    level2_range: float = 0.15

    def __post_init__(self) -> None:
        if self.level not in (0, 1, 2):
            raise ValueError(f"noise level must be 0, 1 or 2, got {self.level!r}")
        if not (0.0 < self.level1_range <= 1.0 and 0.0 < self.level2_range <= 1.0):
            raise ValueError("step ranges must lie in (0, 1]")

    @property
    def step_cap(self) -> float:
        return (0.0, self.level1_range, self.level2_range)[self.level]


@dataclass(frozen=True)
class TrialSeeds:
    env: int
    mapping: int
    frontier: int


@dataclass(frozen=True)
class TrialConfig:
    """Control variables of one trial; standard value sets unless overridden."""

    radius: float
    noise: MappingNoise
    start_index: int
    spec: EntropySpec
    seeds: TrialSeeds
    allow_nonstandard: bool = False

    def __post_init__(self) -> None:
        if not self.allow_nonstandard:
            if self.radius not in _STANDARD_RADII:
                raise ValueError(
                    f"radius {self.radius!r} outside {_STANDARD_RADII}; "
                    "set allow_nonstandard=True to override"
                )
        if self.start_index not in _STANDARD_STARTS:
            raise ValueError(f"start_index must be in 1..5, got {self.start_index!r}")


def _quadrant_masks(height: int, width: int) -> dict[str, NDArray[np.bool_]]:
    rows = np.arange(height)[:, None] >= height / 2  # top = larger y
    cols = np.arange(width)[None, :] < width / 2  # left = smaller x
    top = np.broadcast_to(rows, (height, width))
    left = np.broadcast_to(cols, (height, width))
    return {
        "TL": top & left,
        "TR": top & ~left,
        "BR": ~top & ~left,
        "BL": ~top & left,
    }


def _nominal_starts(width: int, height: int, resolution: float) -> tuple[Pose, ...]:
    # Index 1 near the map center, 2..5 near the TL/TR/BR/BL quadrant centers.
    points_cells = (
        (width / 2, height / 2),
        (width / 4, 3 * height / 4),
        (3 * width / 4, 3 * height / 4),
        (3 * width / 4, height / 4),
        (width / 4, height / 4),
    )
    return tuple(
        Pose((math.floor(cx) + 0.5) * resolution, (math.floor(cy) + 0.5) * resolution)
        for cx, cy in points_cells
    )


def _rasterize_convex(
    verts: NDArray[np.float64], height: int, width: int
) -> Optional[NDArray[np.bool_]]:
    # Vertices in (col, row) cell units, counter-clockwise.  Cells whose
    # centers lie inside (all edge cross products >= 0) are filled.
    c0 = max(0, int(math.floor(verts[:, 0].min())))
    c1 = min(width - 1, int(math.ceil(verts[:, 0].max())))
    r0 = max(0, int(math.floor(verts[:, 1].min())))
    r1 = min(height - 1, int(math.ceil(verts[:, 1].max())))
    if c0 > c1 or r0 > r1:
        return None
    px = np.arange(c0, c1 + 1)[None, :] + 0.5
    py = np.arange(r0, r1 + 1)[:, None] + 0.5
    inside = np.ones((r1 - r0 + 1, c1 - c0 + 1), dtype=bool)
    n = verts.shape[0]
    for i in range(n):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % n]
        inside &= (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1) >= 0.0
    if not inside.any():
        return None
    mask = np.zeros((height, width), dtype=bool)
    mask[r0 : r1 + 1, c0 : c1 + 1] = inside
    return mask


def generate_environment(
    seed: int,
    width: int = 300,
    height: int = 500,
    resolution: float = 0.1,
    quadrant_noise: Sequence[tuple[float, float]] = DEFAULT_QUADRANT_NOISE,
    polygon_count: tuple[int, int] = (14, 22),
    polygon_area_frac: tuple[float, float] = (0.003, 0.015),
) -> PocEnvironment:
    """Seeded environment: random convex obstacles plus quadrant-noised initial map.

    Obstacles are seeded random convex polygons, rejection-sampled so a
    clearance disk around every start position stays free.  The default is
    many small polygons (0.3-1.5% of the map each): sparser, larger
    obstacles widen the iteration spread between entropy configurations
    under perfect mapping, so the defaults are calibrated to keep routes
    comparable across behaviors.  Zero-width noise
    intervals reproduce the ground truth exactly.  Deterministic given the
    seed.
    """
    intervals = tuple((float(lo), float(hi)) for lo, hi in quadrant_noise)
    if len(intervals) != 4:
        raise ValueError("quadrant_noise needs 4 (lo, hi) intervals: TL, TR, BR, BL")
    for lo, hi in intervals:
        if not (0.0 <= lo <= hi <= 100.0):
            raise ValueError(f"noise interval ({lo!r}, {hi!r}) not within [0, 100]")

    rng = np.random.default_rng(seed)
    starts = _nominal_starts(width, height, resolution)

    protected = np.zeros((height, width), dtype=bool)
    clear_cells = max(3.0, _START_CLEARANCE / resolution)
    rr = np.arange(height)[:, None] + 0.5
    cc = np.arange(width)[None, :] + 0.5
    for p in starts:
        pc = p.x / resolution
        pr = p.y / resolution
        protected |= (rr - pr) ** 2 + (cc - pc) ** 2 <= clear_cells**2

    gt_mask = np.zeros((height, width), dtype=bool)
    n_polygons = int(rng.integers(polygon_count[0], polygon_count[1] + 1))
    for _ in range(n_polygons):
        for _attempt in range(40):
            frac = rng.uniform(*polygon_area_frac)
            base_r = math.sqrt(frac * width * height / math.pi)
            cx = rng.uniform(base_r, width - base_r) if width > 2 * base_r else width / 2
            cy = (
                rng.uniform(base_r, height - base_r)
                if height > 2 * base_r
                else height / 2
            )
            k = int(rng.integers(5, 10))
            angles = np.sort(rng.uniform(0.0, 2.0 * math.pi, k))
            radii = base_r * rng.uniform(0.75, 1.15, k)
            verts = np.column_stack(
                (cx + radii * np.cos(angles), cy + radii * np.sin(angles))
            )
            mask = _rasterize_convex(verts, height, width)
            if mask is None:
                continue
            if np.any(mask & protected):
                continue
            gt_mask |= mask
            break

    gt = gt_mask.astype(np.float64)
    quads = _quadrant_masks(height, width)
    noise = rng.uniform(0.0, 1.0, size=(height, width))
    for name, (lo, hi) in zip(("TL", "TR", "BR", "BL"), intervals):
        m = quads[name]
        noise[m] = (lo + noise[m] * (hi - lo)) / 100.0
    initial = np.where(gt_mask, 1.0 - noise, noise)

    return PocEnvironment(
        ground_truth=OccupancyGrid(gt, resolution),
        initial=OccupancyGrid(initial, resolution),
        quadrant_noise=intervals,
        starts=starts,
        obstacle_seed=seed,
    )


def apply_mapping(
    grid: OccupancyGrid,
    footprint: NDArray[np.int64],
    ground_truth: OccupancyGrid,
    noise: MappingNoise,
    rng: np.random.Generator,
) -> None:
    """Observe the footprint cells: exact update (level 0) or a capped step
    toward the ground-truth value, never overshooting it."""
    idx = np.asarray(footprint, dtype=np.int64)
    if idx.size == 0:
        return
    flat = grid.cells.reshape(-1)
    target = ground_truth.cells.reshape(-1)[idx]
    if noise.level == 0:
        flat[idx] = target
        return
    v = flat[idx]
    step = rng.uniform(0.0, noise.step_cap, size=idx.size)
    flat[idx] = v + np.clip(target - v, -step, step)


def make_mapping_rule(
    ground_truth: OccupancyGrid, noise: MappingNoise, rng: np.random.Generator
):
    """Mapping rule for the explorer, bound to one trial's noise stream.

    Level 0 consumes no randomness and sets cells to their exact truth, so it
    is flagged idempotent (the explorer may batch per-sample applications).
    """

    def rule(grid: OccupancyGrid, footprint: NDArray[np.int64]) -> None:
        apply_mapping(grid, footprint, ground_truth, noise, rng)

    rule.idempotent = noise.level == 0
    return rule


def group_of(spec: EntropySpec) -> str:
    """Reporting group: family split at parameter 1 into averse/ignorant."""
    if isinstance(spec, Shannon):
        return "shannon"
    if isinstance(spec, Renyi):
        return "renyi_averse" if spec.gamma < 1.0 else "renyi_ignorant"
    if isinstance(spec, RenyiInfinity):
        return "renyi_ignorant"
    if isinstance(spec, Behavioral):
        alpha = spec.params.alpha
        return "behavioral_averse" if alpha < 1.0 else "behavioral_ignorant"
    if isinstance(spec, BehavioralConditioned):
        return "behavioral_averse" if spec.alpha < 1.0 else "behavioral_ignorant"
    raise TypeError(f"unknown entropy spec: {spec!r}")


def default_specs() -> tuple[EntropySpec, ...]:
    """The benchmark's 14 entropy choices: Shannon, 7 Renyi orders, 6 alphas."""
    renyi = tuple(Renyi(g) for g in (0.2, 0.5, 0.8, 2.0, 10.0, 100.0, 1000.0))
    behavioral = tuple(
        BehavioralConditioned(alpha=a, m=2) for a in (0.2, 0.5, 0.8, 2.0, 3.0, 5.0)
    )
    return (Shannon(),) + renyi + behavioral


def build_sweep_configs(
    seeds: TrialSeeds,
    radii: Sequence[float] = _STANDARD_RADII,
    noise_levels: Sequence[int] = (0, 1, 2),
    starts: Sequence[int] = _STANDARD_STARTS,
    specs: Sequence[EntropySpec] = (),
    allow_nonstandard: bool = False,
) -> list[TrialConfig]:
    """One trial config per (spec, radius, noise, start), spec-major order."""
    spec_list = tuple(specs) or default_specs()
    return [
        TrialConfig(
            radius=float(r),
            noise=MappingNoise(int(lvl)),
            start_index=int(s),
            spec=spec,
            seeds=seeds,
            allow_nonstandard=allow_nonstandard,
        )
        for spec in spec_list
        for r in radii
        for lvl in noise_levels
        for s in starts
    ]


def _mapping_rng(config: TrialConfig) -> np.random.Generator:
    # Seeded by (radius, noise, start) only: entropy specs share the stream.
    seq = np.random.SeedSequence(
        (
            config.seeds.mapping,
            int(round(config.radius * 1_000_000)),
            config.noise.level,
            config.start_index,
        )
    )
    return np.random.default_rng(seq)


def _frontier_seed(config: TrialConfig) -> int:
    seq = np.random.SeedSequence(
        (
            config.seeds.frontier,
            int(round(config.radius * 1_000_000)),
            config.noise.level,
            config.start_index,
        )
    )
    return int(seq.generate_state(1, np.uint64)[0])


def _config_echo(env: PocEnvironment, config: TrialConfig, eps_info: float) -> dict:
    spec = config.spec
    return {
        "format_version": FORMAT_VERSION,
        "kind": "poc-trial",
        "spec": spec_label(spec),
        "family": _family_name(spec),
        "theta": fmt(theta_of(spec)),
        "spec_group": group_of(spec),
        "r": fmt(config.radius),
        "sigma_m": str(config.noise.level),
        "start": str(config.start_index),
        "env_seed": str(env.obstacle_seed),
        "mapping_seed": str(config.seeds.mapping),
        "frontier_seed": str(config.seeds.frontier),
        "width": str(env.initial.width),
        "height": str(env.initial.height),
        "resolution": fmt(env.initial.resolution),
        "eps_info": fmt(eps_info),
    }


def _family_name(spec: EntropySpec) -> str:
    if isinstance(spec, Shannon):
        return "shannon"
    if isinstance(spec, Renyi):
        return "renyi"
    if isinstance(spec, RenyiInfinity):
        return "renyi_inf"
    return "behavioral"


def run_trial(
    env: PocEnvironment,
    config: TrialConfig,
    eps_info: float = 1e-6,
    max_iterations: Optional[int] = None,
    timing: bool = False,
) -> TrialLog:
    """One exploration trial on a copy of the environment's initial map.

    The default iteration bound is 50x the map-to-footprint cell ratio:
    looser than the explorer's own safety default, because uncertainty-averse
    specs under heavy noise legitimately take many short steps and a sweep
    needs every standard trial to run to its information-based termination.
    """
    grid = env.initial.copy()
    start = env.starts[config.start_index - 1]
    if max_iterations is None:
        footprint = disk_cell_count(config.radius / grid.resolution)
        max_iterations = math.ceil(50.0 * grid.n_cells / footprint)
    mapping = make_mapping_rule(env.ground_truth, config.noise, _mapping_rng(config))
    frontier_cfg = FrontierConfig(
        tau_cl=1,
        rng_seed=_frontier_seed(config),
        poc_mode=True,
    )
    explorer_cfg = ExplorerConfig(
        frontier=frontier_cfg,
        sensor=DiskSensor(config.radius),
        spec=config.spec,
        mapping=mapping,
        path_length=None,  # Euclidean
        eps_info=eps_info,
        max_iterations=max_iterations,
        config_echo=_config_echo(env, config, eps_info),
    )
    return explore(grid, start, explorer_cfg, ground_truth=env.ground_truth, timing=timing)


def _failed_log(env: PocEnvironment, config: TrialConfig, eps_info: float, err: str) -> TrialLog:
    return TrialLog(
        config_echo=_config_echo(env, config, eps_info),
        records=[],
        termination_reason="error",
        incomplete=True,
        iterations_to_entropy={t: None for t in COMPLETION_THRESHOLDS},
        iterations_to_area={t: None for t in COMPLETION_THRESHOLDS},
        error=err,
    )


def _run_one(env: PocEnvironment, config: TrialConfig, eps_info: float) -> TrialLog:
    try:
        return run_trial(env, config, eps_info=eps_info)
    except Exception as exc:  # failures are recorded, the sweep continues
        return _failed_log(env, config, eps_info, f"{type(exc).__name__}: {exc}")


def run_sweep(
    env: PocEnvironment,
    configs: Sequence[TrialConfig],
    eps_info: float = 1e-6,
    workers: int = 1,
    on_result=None,
) -> list[TrialLog]:
    """Run every trial config; failures are recorded and the sweep continues.

    ``workers=1`` preserves config order (bit-reproducible summaries);
    ``workers>1`` yields completion order (content-stable, order-unstable).
    """
    logs: list[TrialLog] = []
    if workers <= 1:
        for config in configs:
            log = _run_one(env, config, eps_info)
            logs.append(log)
            if on_result is not None:
                on_result(log)
        return logs
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = {pool.submit(_run_one, env, c, eps_info) for c in configs}
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                log = fut.result()
                logs.append(log)
                if on_result is not None:
                    on_result(log)
    return logs


@dataclass(frozen=True)
class CompletionMetrics:
    pct_entropy_complete: float
    pct_area_correct: float


def completion_metrics(
    current: OccupancyGrid, initial: OccupancyGrid, ground_truth: OccupancyGrid
) -> CompletionMetrics:
    """Fraction of initial Shannon entropy removed, and of cells near the truth."""
    if current.cells.shape != ground_truth.cells.shape or (
        initial.cells.shape != ground_truth.cells.shape
    ):
        raise ValueError("grids must share dimensions")
    h_init = float(bernoulli_entropy(initial.cells, Shannon()).sum())
    h_now = float(bernoulli_entropy(current.cells, Shannon()).sum())
    pct_entropy = 1.0 if h_init == 0.0 else 1.0 - h_now / h_init
    pct_area = float((np.abs(current.cells - ground_truth.cells) <= AREA_TOL).mean())
    return CompletionMetrics(pct_entropy_complete=pct_entropy, pct_area_correct=pct_area)


# ---------------------------------------------------------------------------
# Summary CSV
# ---------------------------------------------------------------------------

SUMMARY_COLUMNS = (
    ["format_version", "spec_group", "family", "theta", "r", "sigma_m", "start"]
    + ["status", "termination_reason", "iterations"]
    + ["final_pct_entropy", "final_pct_area"]
    + [f"iterations_to_{t}" for t in COMPLETION_THRESHOLDS]
    + [f"area_iterations_to_{t}" for t in COMPLETION_THRESHOLDS]
)


def trial_filename(log: TrialLog) -> str:
    e = log.config_echo
    theta = e.get("theta", "na")
    return (
        f"trial_r{e.get('r', 'na')}_n{e.get('sigma_m', 'na')}_s{e.get('start', 'na')}"
        f"_{e.get('family', 'na')}_t{theta}.csv"
    )


def summary_row_from_log(log: TrialLog) -> dict[str, str]:
    e = log.config_echo
    row = {
        "format_version": e.get("format_version", FORMAT_VERSION),
        "spec_group": e.get("spec_group", ""),
        "family": e.get("family", ""),
        "theta": e.get("theta", ""),
        "r": e.get("r", ""),
        "sigma_m": e.get("sigma_m", ""),
        "start": e.get("start", ""),
        "status": "error" if log.error else "ok",
        "termination_reason": log.termination_reason,
        "iterations": str(log.iterations),
        "final_pct_entropy": fmt(log.final_pct_entropy),
        "final_pct_area": "" if log.final_pct_area is None else fmt(log.final_pct_area),
    }
    for thr in COMPLETION_THRESHOLDS:
        v = log.iterations_to_entropy.get(thr)
        row[f"iterations_to_{thr}"] = "" if v is None else str(v)
        a = log.iterations_to_area.get(thr)
        row[f"area_iterations_to_{thr}"] = "" if a is None else str(a)
    return row


def read_trial_csv(path: str | Path) -> dict[str, str]:
    """Summary row rebuilt from one per-trial CSV (its comment metadata)."""
    meta: dict[str, str] = {}
    n_rows = 0
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(" ")
            meta[key] = value
        elif line and not line.startswith("iteration,"):
            n_rows += 1
    row = {
        "format_version": meta.get("format_version", FORMAT_VERSION),
        "spec_group": meta.get("spec_group", ""),
        "family": meta.get("family", ""),
        "theta": meta.get("theta", ""),
        "r": meta.get("r", ""),
        "sigma_m": meta.get("sigma_m", ""),
        "start": meta.get("start", ""),
        "status": "error" if "error" in meta else "ok",
        "termination_reason": meta.get("termination_reason", ""),
        "iterations": meta.get("iterations", str(n_rows)),
        "final_pct_entropy": meta.get("final_pct_entropy", ""),
        "final_pct_area": meta.get("final_pct_area", ""),
    }
    if row["final_pct_area"] == "none":
        row["final_pct_area"] = ""
    for thr in COMPLETION_THRESHOLDS:
        v = meta.get(f"iterations_to_{thr}", "")
        row[f"iterations_to_{thr}"] = "" if v == "none" else v
        a = meta.get(f"area_iterations_to_{thr}", "")
        row[f"area_iterations_to_{thr}"] = "" if a == "none" else a
    return row


def write_summary(rows: Sequence[dict[str, str]], path: str | Path) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in rows:
        lines.append(",".join(row.get(col, "") for col in SUMMARY_COLUMNS))
    atomic_write_text(path, "\n".join(lines) + "\n")
