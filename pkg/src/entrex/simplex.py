"""Monte Carlo sensitivity and perceptiveness of entropy families.

Sensitivity is the integral of an entropy operator over the probability
simplex (Lebesgue measure, simplex volume 1/(M-1)!), estimated by averaging
over uniform samples.  Perceptiveness of a parametrized family is the range
(max - min) of sensitivity over a parameter grid; it measures how wide a
spectrum of uncertainty attitudes the family can express.

Estimates are deterministic functions of (spec, M, n, seed).  All specs fed
to these operations must be bounded above by ln M on the simplex, which holds
for Shannon (k=1), Renyi (any order, including the -ln max limit), and
conditioned behavioral entropy; unconditioned behavioral specs are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .entropy import (
    Behavioral,
    BehavioralConditioned,
    EntropySpec,
    Renyi,
    Shannon,
    _prelec_weight_array,
    entropy_rows,
    spec_label,
)

__all__ = [
    "ParamGrid",
    "PerceptivenessEstimate",
    "SensitivityEstimate",
    "bernoulli_entropy_curves",
    "perceptiveness",
    "prelec_weighting_curves",
    "sample_simplex",
    "sensitivity",
    "spec_for",
]

_FAMILIES = ("shannon", "renyi", "behavioral")
_GAMMA_ONE_BAND = 1e-9


def sample_simplex(m: int, n: int, seed: int) -> NDArray[np.float64]:
    """n i.i.d. uniform samples from the probability simplex, one per row.

    Uses the exponential-spacings construction (normalized i.i.d. standard
    exponentials), which realizes the flat Dirichlet(1,...,1) law exactly.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m!r}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    rng = np.random.default_rng(seed)
    g = rng.exponential(size=(n, m))
    return g / g.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class SensitivityEstimate:
    """Estimated integral of one entropy over the simplex, with standard error."""

    value: float
    std_error: float
    n_samples: int
    m: int
    spec: str

    def __post_init__(self) -> None:
        bound = math.log(self.m) / math.factorial(self.m - 1)
        if not (0.0 <= self.value <= bound + 3.0 * self.std_error):
            raise ValueError(
                f"sensitivity {self.value!r} outside [0, ln(M)/(M-1)! + 3 SE] "
                f"for M={self.m}"
            )


@dataclass(frozen=True)
class ParamGrid:
    """Ordered parameter grid for one entropy family.

    Values must be strictly increasing and inside the family's validity
    domain (positive; for renyi also outside the band around 1; shannon is
    the single member k=1).
    """

    values: tuple[float, ...]
    family: str

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise ValueError("grid must contain at least one value")
        if any(not (v > 0.0 and math.isfinite(v)) for v in vals):
            raise ValueError("grid values must be positive finite reals")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("grid values must be strictly increasing")
        if self.family == "renyi" and any(
            abs(v - 1.0) <= _GAMMA_ONE_BAND for v in vals
        ):
            raise ValueError("renyi grid must exclude the band around gamma=1")
        if self.family == "shannon" and any(v != 1.0 for v in vals):
            raise ValueError("shannon grid admits only k=1 (ln M normalization)")
        object.__setattr__(self, "values", vals)

    @classmethod
    def log_spaced(cls, family: str, lo: float, hi: float, count: int) -> "ParamGrid":
        """Log-spaced grid; renyi points falling on gamma=1 are dropped."""
        if count < 1 or not (0.0 < lo < hi):
            raise ValueError("need count >= 1 and 0 < lo < hi")
        vals = np.logspace(math.log10(lo), math.log10(hi), count)
        if family == "renyi":
            vals = vals[np.abs(vals - 1.0) > _GAMMA_ONE_BAND]
        return cls(values=tuple(float(v) for v in vals), family=family)


@dataclass(frozen=True)
class PerceptivenessEstimate:
    """Range of sensitivity over a parameter grid (max - min, by construction)."""

    value: float
    argmax_theta: float
    argmin_theta: float
    per_theta: tuple[SensitivityEstimate, ...]


def spec_for(family: str, theta: float, m: int) -> EntropySpec:
    """Family member for one grid value; behavioral members are conditioned to m."""
    if family == "shannon":
        return Shannon(theta)
    if family == "renyi":
        return Renyi(theta)
    if family == "behavioral":
        return BehavioralConditioned(alpha=theta, m=m)
    raise ValueError(f"family must be one of {_FAMILIES}, got {family!r}")


def _check_normalized(spec: EntropySpec, m: int) -> None:
    if isinstance(spec, Behavioral):
        raise ValueError(
            "unconditioned behavioral entropy is not bounded by ln M; "
            "condition beta first (BehavioralConditioned)"
        )
    if isinstance(spec, BehavioralConditioned) and spec.m != m:
        raise ValueError(f"spec conditioned to m={spec.m}, requested m={m}")
    if isinstance(spec, Shannon) and spec.k != 1.0:
        raise ValueError("sensitivity requires the normalized Shannon member k=1")


def sensitivity(spec: EntropySpec, m: int, n: int, seed: int) -> SensitivityEstimate:
    """Monte Carlo estimate of the simplex integral of one entropy operator."""
    _check_normalized(spec, m)
    rows = sample_simplex(m, n, seed)
    h = entropy_rows(rows, spec)
    volume = 1.0 / math.factorial(m - 1)
    value = float(h.mean()) * volume
    if n > 1:
        std_error = float(h.std(ddof=1)) / math.sqrt(n) * volume
    else:
        std_error = 0.0
    return SensitivityEstimate(
        value=value, std_error=std_error, n_samples=n, m=m, spec=spec_label(spec)
    )


def perceptiveness(grid: ParamGrid, m: int, n: int, seed: int) -> PerceptivenessEstimate:
    """Sensitivity range over a family grid, sharing one sample set across members.

    Every member is evaluated with the same (m, n, seed), so the max - min
    difference uses common random numbers and per-theta entries coincide with
    standalone :func:`sensitivity` calls.
    """
    per = tuple(
        sensitivity(spec_for(grid.family, theta, m), m, n, seed)
        for theta in grid.values
    )
    values = np.array([e.value for e in per])
    i_max = int(values.argmax())
    i_min = int(values.argmin())
    return PerceptivenessEstimate(
        value=float(values[i_max] - values[i_min]),
        argmax_theta=grid.values[i_max],
        argmin_theta=grid.values[i_min],
        per_theta=per,
    )


def bernoulli_entropy_curves(
    specs: list[EntropySpec] | tuple[EntropySpec, ...],
    grid_points: int,
) -> list[tuple[float, str, float]]:
    """Entropy of (p, 1-p) on an even p-grid for each spec.

    Returns (p, spec_label, value) rows, grouped by spec in input order.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points!r}")
    p = np.linspace(0.0, 1.0, grid_points)
    rows = np.column_stack([p, 1.0 - p])
    table: list[tuple[float, str, float]] = []
    for spec in specs:
        label = spec_label(spec)
        h = entropy_rows(rows, spec)
        table.extend((float(pi), label, float(hi)) for pi, hi in zip(p, h))
    return table


def prelec_weighting_curves(
    specs: list[EntropySpec] | tuple[EntropySpec, ...],
    grid_points: int,
) -> list[tuple[float, str, float]]:
    """Perceived probability w(p) on an even p-grid for behavioral specs."""
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points!r}")
    p = np.linspace(0.0, 1.0, grid_points)
    table: list[tuple[float, str, float]] = []
    for spec in specs:
        if not isinstance(spec, (Behavioral, BehavioralConditioned)):
            raise ValueError(
                f"weighting curves need behavioral specs, got {spec_label(spec)}"
            )
        w = _prelec_weight_array(p, spec.params)
        label = spec_label(spec)
        table.extend((float(pi), label, float(wi)) for pi, wi in zip(p, w))
    return table
