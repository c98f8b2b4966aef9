"""Command-line entry point.

Subcommands: entropy-eval, curves, sensitivity, perceptiveness, gen-env,
run-trial, run-sweep, summarize.  Exit codes: 0 success, 1 usage error,
2 runtime failure (diagnostics on stderr with distinct prefixes: "usage
error:", "config error:", "file error:", "error:").

Every stochastic subcommand requires explicit seeds; outputs are written
atomically and all numeric output uses shortest round-trip doubles.  When
``--out`` is omitted, files land in ``$ENTREX_OUTPUT_DIR``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from ._util import FORMAT_VERSION, atomic_write_text, fmt
from .entropy import (
    Behavioral,
    BehavioralConditioned,
    Distribution,
    EntropySpec,
    PrelecParams,
    Renyi,
    RenyiInfinity,
    Shannon,
    entropy,
    theta_of,
)
from .poc import (
    DEFAULT_QUADRANT_NOISE,
    MappingNoise,
    TrialConfig,
    TrialSeeds,
    build_sweep_configs,
    generate_environment,
    read_trial_csv,
    run_sweep,
    summary_row_from_log,
    trial_filename,
    write_summary,
)
from .poc import run_trial as poc_run_trial
from .simplex import (
    ParamGrid,
    bernoulli_entropy_curves,
    perceptiveness,
    prelec_weighting_curves,
    sensitivity,
    spec_for,
)
from .grid import write_grid

__all__ = ["main"]


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we want exit 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="entrex", description=__doc__)
    parser.add_argument(
        "--version",
        action="version",
        version=f"entrex {__version__} (config-format {FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_family(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--family",
            required=True,
            choices=["shannon", "renyi", "renyi-inf", "behavioral"],
        )
        p.add_argument("--k", type=float, default=1.0, help="Shannon scale")
        p.add_argument("--gamma", type=float, help="Renyi order")
        p.add_argument("--alpha", type=float, help="behavioral shape")
        p.add_argument("--beta", type=float, help="behavioral fixed-point control (unconditioned)")
        p.add_argument("--m", type=int, help="outcome count for behavioral conditioning")

    p = sub.add_parser("entropy-eval", help="evaluate one entropy on one distribution")
    add_family(p)
    p.add_argument("--dist", required=True, help="comma-separated probabilities")
    p.set_defaults(func=_cmd_entropy_eval)

    p = sub.add_parser("curves", help="entropy-vs-p table for Bernoulli distributions")
    p.add_argument(
        "--spec",
        action="append",
        required=True,
        metavar="SPEC",
        help="repeatable; shannon[:K] | renyi:GAMMA | renyi-inf | "
        "behavioral:ALPHA:M | behavioral-raw:ALPHA:BETA",
    )
    p.add_argument("--points", type=int, default=101)
    p.add_argument(
        "--kind",
        choices=["entropy", "weighting"],
        default="entropy",
        help="Bernoulli entropy curves, or perceived-probability weighting curves",
    )
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=_cmd_curves)

    p = sub.add_parser("sensitivity", help="Monte Carlo simplex integral of one entropy")
    add_family(p)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="optional CSV path (row also printed)")
    p.set_defaults(func=_cmd_sensitivity)

    p = sub.add_parser("perceptiveness", help="sensitivity range over a parameter grid")
    p.add_argument(
        "--family", required=True, choices=["shannon", "renyi", "behavioral"]
    )
    p.add_argument("--grid-log", metavar="LO:HI:COUNT", help="log-spaced grid")
    p.add_argument("--grid", metavar="V1,V2,...", help="explicit grid values")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="optional per-theta CSV path")
    p.set_defaults(func=_cmd_perceptiveness)

    p = sub.add_parser("gen-env", help="generate a benchmark environment")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--width", type=int, default=300)
    p.add_argument("--height", type=int, default=500)
    p.add_argument("--resolution", type=float, default=0.1)
    p.add_argument(
        "--quadrant-noise",
        metavar="TL TR BR BL",
        nargs=4,
        help="percent intervals lo:hi per quadrant",
    )
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_gen_env)

    p = sub.add_parser("run-trial", help="run one exploration trial")
    add_family(p)
    p.add_argument("--env-seed", type=int, required=True)
    p.add_argument("--width", type=int, default=300)
    p.add_argument("--height", type=int, default=500)
    p.add_argument("--resolution", type=float, default=0.1)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--noise", type=int, required=True, choices=[0, 1, 2])
    p.add_argument("--start", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p.add_argument("--mapping-seed", type=int, required=True)
    p.add_argument("--frontier-seed", type=int, required=True)
    p.add_argument("--eps-info", type=float, default=1e-6)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--nonstandard", action="store_true", help="allow radius outside {2,3,4,5}")
    p.add_argument("--timing", action="store_true", help="record wall_ms values")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=_cmd_run_trial)

    p = sub.add_parser("run-sweep", help="run a full trial sweep from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run_sweep)

    p = sub.add_parser("summarize", help="rebuild summary.csv from per-trial CSVs")
    p.add_argument("--trials", required=True, help="directory of trial CSVs")
    p.add_argument("--out", help="output CSV path")
    p.set_defaults(func=_cmd_summarize)

    return parser


def _spec_from_args(args) -> EntropySpec:
    if args.family == "shannon":
        return Shannon(args.k)
    if args.family == "renyi":
        if args.gamma is None:
            raise UsageError("--gamma is required for --family renyi")
        return Renyi(args.gamma)
    if args.family == "renyi-inf":
        return RenyiInfinity()
    if args.alpha is None:
        raise UsageError("--alpha is required for --family behavioral")
    if args.beta is not None:
        return Behavioral(PrelecParams(args.alpha, args.beta))
    if args.m is None:
        raise UsageError("behavioral needs --m (conditioned) or --beta (raw)")
    return BehavioralConditioned(alpha=args.alpha, m=args.m)


def _parse_spec_token(token: str) -> EntropySpec:
    parts = token.split(":")
    name = parts[0]
    try:
        if name == "shannon" and len(parts) <= 2:
            return Shannon(float(parts[1])) if len(parts) == 2 else Shannon()
        if name == "renyi" and len(parts) == 2:
            return Renyi(float(parts[1]))
        if name == "renyi-inf" and len(parts) == 1:
            return RenyiInfinity()
        if name == "behavioral" and len(parts) == 3:
            return BehavioralConditioned(alpha=float(parts[1]), m=int(parts[2]))
        if name == "behavioral-raw" and len(parts) == 3:
            return Behavioral(PrelecParams(float(parts[1]), float(parts[2])))
    except ValueError as exc:
        raise UsageError(f"bad spec token {token!r}: {exc}") from exc
    raise UsageError(f"bad spec token {token!r}")


def _resolve_out(explicit: Optional[str], default_name: str) -> Path:
    if explicit:
        return Path(explicit)
    base = os.environ.get("ENTREX_OUTPUT_DIR")
    if not base:
        raise UsageError("--out not given and ENTREX_OUTPUT_DIR is not set")
    return Path(base) / default_name


def _parse_interval(token: str) -> tuple[float, float]:
    try:
        lo, hi = token.split(":")
        return float(lo), float(hi)
    except ValueError as exc:
        raise UsageError(f"bad interval {token!r}, expected LO:HI") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_entropy_eval(args) -> int:
    spec = _spec_from_args(args)
    try:
        probs = [float(t) for t in args.dist.split(",") if t != ""]
    except ValueError as exc:
        raise UsageError(f"bad --dist value: {exc}") from exc
    print(fmt(entropy(Distribution(probs), spec)))
    return 0


def _cmd_curves(args) -> int:
    specs = [_parse_spec_token(t) for t in args.spec]
    if args.kind == "weighting":
        table = prelec_weighting_curves(specs, args.points)
        header = "p,spec,weight"
    else:
        table = bernoulli_entropy_curves(specs, args.points)
        header = "p,spec,entropy"
    lines = [header]
    lines.extend(f"{fmt(p)},{label},{fmt(h)}" for p, label, h in table)
    atomic_write_text(_resolve_out(args.out, "curves.csv"), "\n".join(lines) + "\n")
    return 0


_SENS_HEADER = "family,theta,M,n,seed,sensitivity,std_error"


def _family_name_cli(spec: EntropySpec) -> str:
    if isinstance(spec, Shannon):
        return "shannon"
    if isinstance(spec, Renyi):
        return "renyi"
    if isinstance(spec, RenyiInfinity):
        return "renyi_inf"
    return "behavioral"


def _sens_row(est, spec: EntropySpec, seed: int) -> str:
    theta = theta_of(spec)
    theta_s = "inf" if math.isinf(theta) else fmt(theta)
    return (
        f"{_family_name_cli(spec)},{theta_s},{est.m},{est.n_samples},{seed},"
        f"{fmt(est.value)},{fmt(est.std_error)}"
    )


def _cmd_sensitivity(args) -> int:
    if args.m is None:
        raise UsageError("--m is required")
    spec = _spec_from_args(args)
    est = sensitivity(spec, m=args.m, n=args.n, seed=args.seed)
    text = _SENS_HEADER + "\n" + _sens_row(est, spec, args.seed) + "\n"
    print(text, end="")
    if args.out:
        atomic_write_text(Path(args.out), text)
    return 0


def _cmd_perceptiveness(args) -> int:
    if bool(args.grid_log) == bool(args.grid):
        raise UsageError("exactly one of --grid-log or --grid is required")
    if args.grid_log:
        try:
            lo, hi, count = args.grid_log.split(":")
            grid = ParamGrid.log_spaced(args.family, float(lo), float(hi), int(count))
        except ValueError as exc:
            raise UsageError(f"bad --grid-log {args.grid_log!r}: {exc}") from exc
    else:
        try:
            values = tuple(float(t) for t in args.grid.split(","))
            grid = ParamGrid(values=values, family=args.family)
        except ValueError as exc:
            raise UsageError(f"bad --grid {args.grid!r}: {exc}") from exc
    est = perceptiveness(grid, m=args.m, n=args.n, seed=args.seed)
    print("family,M,n,seed,perceptiveness,argmax_theta,argmin_theta")
    print(
        f"{args.family},{args.m},{args.n},{args.seed},{fmt(est.value)},"
        f"{fmt(est.argmax_theta)},{fmt(est.argmin_theta)}"
    )
    if args.out:
        lines = [_SENS_HEADER]
        for theta, per in zip(grid.values, est.per_theta):
            lines.append(_sens_row(per, spec_for(args.family, theta, args.m), args.seed))
        atomic_write_text(Path(args.out), "\n".join(lines) + "\n")
    return 0


def _cmd_gen_env(args) -> int:
    quadrants = (
        tuple(_parse_interval(t) for t in args.quadrant_noise)
        if args.quadrant_noise
        else DEFAULT_QUADRANT_NOISE
    )
    env = generate_environment(
        args.seed,
        width=args.width,
        height=args.height,
        resolution=args.resolution,
        quadrant_noise=quadrants,
    )
    out_dir = _resolve_out(args.out, f"env-{args.seed}")
    write_grid(env.ground_truth, out_dir / "ground_truth.grid")
    write_grid(env.initial, out_dir / "initial.grid")
    lines = [
        f"entrex-env {FORMAT_VERSION}",
        f"seed {args.seed}",
        f"width {args.width}",
        f"height {args.height}",
        f"resolution {fmt(args.resolution)}",
        "quadrant_noise "
        + " ".join(f"{fmt(lo)}:{fmt(hi)}" for lo, hi in env.quadrant_noise),
        "starts " + " ".join(f"{fmt(p.x)}:{fmt(p.y)}" for p in env.starts),
    ]
    atomic_write_text(out_dir / "env.cfg", "\n".join(lines) + "\n")
    return 0


def _cmd_run_trial(args) -> int:
    spec = _spec_from_args(args)
    env = generate_environment(
        args.env_seed,
        width=args.width,
        height=args.height,
        resolution=args.resolution,
    )
    config = TrialConfig(
        radius=args.radius,
        noise=MappingNoise(args.noise),
        start_index=args.start,
        spec=spec,
        seeds=TrialSeeds(env=args.env_seed, mapping=args.mapping_seed, frontier=args.frontier_seed),
        allow_nonstandard=args.nonstandard,
    )
    log = poc_run_trial(
        env,
        config,
        eps_info=args.eps_info,
        max_iterations=args.max_iterations,
        timing=args.timing,
    )
    atomic_write_text(_resolve_out(args.out, trial_filename(log)), log.to_csv())
    return 0


def _parse_manifest(path: Path) -> dict:
    """Sectioned key-value manifest; unknown sections or keys are errors."""
    if not path.exists():
        raise FileNotFoundError(f"manifest {path} does not exist")
    known = {
        "env": {"seed", "width", "height", "resolution", "quadrant_noise"},
        "sweep": {
            "radii",
            "noise_levels",
            "starts",
            "mapping_seed",
            "frontier_seed",
            "eps_info",
        },
        "specs": None,  # free-form family lines
    }
    data: dict[str, dict[str, list[str]]] = {"env": {}, "sweep": {}}
    specs: list[EntropySpec] = []
    section = None
    version_seen = False
    for raw_line in path.read_text().splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in known:
                raise ConfigError(f"unknown manifest section [{section}]")
            continue
        parts = line.split()
        if not version_seen:
            if parts[0] != "format_version" or len(parts) != 2:
                raise ConfigError("manifest must start with 'format_version 1'")
            if parts[1] != FORMAT_VERSION:
                raise ConfigError(f"unsupported manifest format_version {parts[1]!r}")
            version_seen = True
            continue
        if section is None:
            raise ConfigError(f"key outside any section: {parts[0]!r}")
        if section == "specs":
            family = parts[0]
            if family == "shannon" and len(parts) == 1:
                specs.append(Shannon())
            elif family == "renyi" and len(parts) > 1:
                specs.extend(Renyi(float(v)) for v in parts[1:])
            elif family == "renyi-inf" and len(parts) == 1:
                specs.append(RenyiInfinity())
            elif family == "behavioral" and len(parts) > 1:
                specs.extend(
                    BehavioralConditioned(alpha=float(v), m=2) for v in parts[1:]
                )
            else:
                raise ConfigError(f"bad spec line in [specs]: {line!r}")
            continue
        key, values = parts[0], parts[1:]
        if key not in known[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]")
        if not values:
            raise ConfigError(f"key {key!r} in [{section}] has no value")
        data[section][key] = values

    if not version_seen:
        raise ConfigError("manifest must start with 'format_version 1'")
    for required_section, required_key in (
        ("env", "seed"),
        ("sweep", "mapping_seed"),
        ("sweep", "frontier_seed"),
    ):
        if required_key not in data[required_section]:
            raise ConfigError(f"missing {required_key!r} in [{required_section}]")
    if not specs:
        raise ConfigError("manifest has no [specs] entries")
    return {"env": data["env"], "sweep": data["sweep"], "specs": specs}


def _cmd_run_sweep(args) -> int:
    manifest = _parse_manifest(Path(args.manifest))
    env_cfg = manifest["env"]
    quadrants = (
        tuple(_parse_interval(t) for t in env_cfg["quadrant_noise"])
        if "quadrant_noise" in env_cfg
        else DEFAULT_QUADRANT_NOISE
    )
    env_seed = int(env_cfg["seed"][0])
    env = generate_environment(
        env_seed,
        width=int(env_cfg.get("width", ["300"])[0]),
        height=int(env_cfg.get("height", ["500"])[0]),
        resolution=float(env_cfg.get("resolution", ["0.1"])[0]),
        quadrant_noise=quadrants,
    )
    sweep_cfg = manifest["sweep"]
    seeds = TrialSeeds(
        env=env_seed,
        mapping=int(sweep_cfg["mapping_seed"][0]),
        frontier=int(sweep_cfg["frontier_seed"][0]),
    )
    configs = build_sweep_configs(
        seeds=seeds,
        radii=[float(v) for v in sweep_cfg.get("radii", ["2", "3", "4", "5"])],
        noise_levels=[int(v) for v in sweep_cfg.get("noise_levels", ["0", "1", "2"])],
        starts=[int(v) for v in sweep_cfg.get("starts", ["1", "2", "3", "4", "5"])],
        specs=manifest["specs"],
    )
    eps_info = float(sweep_cfg.get("eps_info", ["1e-6"])[0])
    out_dir = _resolve_out(args.out, f"sweep-{env_seed}")
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    done = 0

    def on_result(log) -> None:
        nonlocal done
        done += 1
        atomic_write_text(out_dir / trial_filename(log), log.to_csv())
        rows.append(summary_row_from_log(log))
        e = log.config_echo
        print(
            f"[{done}/{len(configs)}] {e.get('spec', '?')} r={e.get('r')} "
            f"sigma={e.get('sigma_m')} start={e.get('start')}: "
            f"{log.iterations} iterations ({log.termination_reason})",
            file=sys.stderr,
        )

    run_sweep(env, configs, eps_info=eps_info, workers=args.workers, on_result=on_result)
    write_summary(rows, out_dir / "summary.csv")
    return 0


def _cmd_summarize(args) -> int:
    trials_dir = Path(args.trials)
    if not trials_dir.is_dir():
        raise FileNotFoundError(f"trials directory {trials_dir} does not exist")
    paths = sorted(trials_dir.glob("trial_*.csv"))
    if not paths:
        raise FileNotFoundError(f"no trial_*.csv files in {trials_dir}")
    rows = [read_trial_csv(p) for p in paths]
    write_summary(rows, _resolve_out(args.out, "summary.csv"))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
