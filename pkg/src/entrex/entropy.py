"""Generalized entropy operators on discrete distributions.

Three families are provided, all in nats (natural log):

* Shannon / BGS entropy        H(p) = -k * sum_i p_i ln p_i
* Renyi entropy                H(p) = ln(sum_i p_i^gamma) / (1 - gamma)
* Behavioral entropy           H(p) = -sum_i w(p_i) ln w(p_i)

where w is Prelec's probability weighting function

    w(p) = exp(-beta * (-ln p)^alpha),   alpha > 0, beta > 0, w(0) = 0.

``alpha`` controls the shape of the distortion (alpha < 1 over-weights
unlikely outcomes, alpha > 1 under-weights them) and ``beta`` places the
interior fixed point w(p*) = p*.  Choosing ``beta = condition_beta(alpha, M)``
pins the fixed point at 1/M, which makes the behavioral entropy attain its
maximum exactly at the uniform distribution over M outcomes and hence makes
it an admissible generalized entropy (continuity, maximality, expansibility).

Everything here is a pure function of its inputs; values are immutable after
construction and safe to evaluate concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import NDArray
from scipy.special import logsumexp

__all__ = [
    "ALL_POINTS_FIXED",
    "AdmissibilityReport",
    "Behavioral",
    "BehavioralConditioned",
    "Distribution",
    "EntropySpec",
    "GammaNearOneError",
    "NoInteriorFixedPointError",
    "PrelecParams",
    "Renyi",
    "RenyiInfinity",
    "Shannon",
    "WeightVector",
    "behavioral_entropy",
    "bernoulli_entropy",
    "check_admissibility",
    "condition_beta",
    "entropy",
    "entropy_rows",
    "prelec_fixed_point",
    "prelec_weight",
    "prelec_weights",
    "renyi_entropy",
    "shannon_entropy",
    "spec_label",
    "theta_of",
]

# Probabilities below this are treated as exact zeros before (-ln p)^alpha,
# which would otherwise overflow for large alpha at denormal p.
PROB_FLOOR = 1e-300

# Sum-to-one tolerance for Distribution validation.
SUM_TOL = 1e-12

# Exclusion band around gamma = 1 where the Renyi formula is rejected.
GAMMA_ONE_BAND = 1e-9

# Returned by prelec_fixed_point when alpha = beta = 1 (identity weighting).
ALL_POINTS_FIXED = "all points fixed"


class GammaNearOneError(ValueError):
    """Renyi order too close to 1; use the Shannon operator explicitly."""


class NoInteriorFixedPointError(ValueError):
    """Prelec weighting with alpha = 1, beta != 1 has no interior fixed point."""


@dataclass(frozen=True)
class Distribution:
    """Probability vector over M >= 1 outcomes.

    Entries must lie in [0, 1] and sum to 1 within 1e-12 (absolute).
    """

    probs: NDArray[np.float64]

    def __init__(self, probs) -> None:
        arr = np.asarray(probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("distribution must be a non-empty 1-D vector")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(float(arr.sum()) - 1.0) > SUM_TOL:
            raise ValueError(
                f"probabilities must sum to 1 within {SUM_TOL} "
                f"(got {float(arr.sum())!r})"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def m(self) -> int:
        return int(self.probs.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, Distribution) and np.array_equal(
            self.probs, other.probs
        )

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class PrelecParams:
    """Shape alpha > 0 and fixed-point control beta > 0 of the Prelec weighting."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite real, got {self.alpha!r}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a positive finite real, got {self.beta!r}")


@dataclass(frozen=True)
class WeightVector:
    """Prelec weights of a distribution; same length, entries in [0, 1], w(0) = 0."""

    weights: NDArray[np.float64]

    def __init__(self, weights) -> None:
        arr = np.asarray(weights, dtype=np.float64)
        if arr.ndim != 1 or np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("weights must be a 1-D vector with entries in [0, 1]")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)


@dataclass(frozen=True)
class Shannon:
    k: float = 1.0

    def __post_init__(self) -> None:
        if not (self.k > 0.0 and math.isfinite(self.k)):
            raise ValueError(f"k must be a positive finite real, got {self.k!r}")


@dataclass(frozen=True)
class Renyi:
    gamma: float

    def __post_init__(self) -> None:
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a positive finite real, got {self.gamma!r}")
        if abs(self.gamma - 1.0) <= GAMMA_ONE_BAND:
            raise GammaNearOneError(
                f"gamma={self.gamma!r} is within {GAMMA_ONE_BAND} of 1; "
                "use Shannon explicitly"
            )


@dataclass(frozen=True)
class RenyiInfinity:
    """Large-gamma limit of the Renyi family: H(p) = -ln max_i p_i."""


@dataclass(frozen=True)
class Behavioral:
    """Behavioral entropy with free (unconditioned) Prelec parameters."""

    params: PrelecParams


@dataclass(frozen=True)
class BehavioralConditioned:
    """Behavioral entropy with beta conditioned so the fixed point is 1/m."""

    alpha: float
    m: int
    params: PrelecParams = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a positive finite real, got {self.alpha!r}")
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 2):
            raise ValueError(f"conditioning m must be an integer >= 2, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(
            self, "params", PrelecParams(self.alpha, condition_beta(self.alpha, self.m))
        )


EntropySpec = Union[Shannon, Renyi, RenyiInfinity, Behavioral, BehavioralConditioned]


def condition_beta(alpha: float, m: float) -> float:
    """Beta that places the Prelec fixed point at 1/m: exp((1-alpha) ln ln m).

    ``m`` may be any real >= 2; the production path uses integer outcome
    counts, but the closed form is well defined for real arguments.
    """
    if not (alpha > 0.0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be a positive finite real, got {alpha!r}")
    if not (m >= 2.0):
        raise ValueError(f"m must be >= 2, got {m!r}")
    return math.exp((1.0 - alpha) * math.log(math.log(m)))


def prelec_weight(p: float, params: PrelecParams) -> float:
    """Prelec weight w(p) = exp(-beta * (-ln p)^alpha), with w(0)=0 and w(1)=1."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if p < PROB_FLOOR:
        return 0.0
    if p == 1.0:
        return 1.0
    return math.exp(-params.beta * (-math.log(p)) ** params.alpha)


def prelec_weights(dist: Distribution, params: PrelecParams) -> WeightVector:
    """Elementwise Prelec weights of a distribution."""
    return WeightVector(_prelec_weight_array(dist.probs, params))


def _prelec_weight_array(p: NDArray[np.float64], params: PrelecParams) -> NDArray[np.float64]:
    # Mask-free kernel: p = 1 gives (-ln p)^alpha = 0 hence w = 1 exactly;
    # the floor keeps (-ln p)^alpha finite, and sub-floor p is forced to w = 0.
    p = np.asarray(p, dtype=np.float64)
    with np.errstate(over="ignore"):
        w = np.exp(-params.beta * (-np.log(np.maximum(p, PROB_FLOOR))) ** params.alpha)
    w[p < PROB_FLOOR] = 0.0
    return w


def prelec_fixed_point(params: PrelecParams):
    """Interior fixed point p* of the Prelec weighting, exp(-(1/beta)^(1/(alpha-1))).

    For alpha = 1 the weighting is p^beta: with beta = 1 every point is fixed
    (returns ``ALL_POINTS_FIXED``), otherwise only 0 and 1 are fixed and
    ``NoInteriorFixedPointError`` is raised.
    """
    if params.alpha == 1.0:
        if params.beta == 1.0:
            return ALL_POINTS_FIXED
        raise NoInteriorFixedPointError(
            f"alpha=1, beta={params.beta!r}: weighting p**beta has no "
            "fixed point in (0, 1)"
        )
    return math.exp(-((1.0 / params.beta) ** (1.0 / (params.alpha - 1.0))))


def _eta(w: NDArray[np.float64]) -> NDArray[np.float64]:
    """-w ln w elementwise with the 0 ln 0 = 0 convention.

    The floor inside the log makes w = 0 contribute exactly 0 * finite = 0.
    """
    return -w * np.log(np.maximum(w, PROB_FLOOR))


def _validate_rows(rows: NDArray[np.float64]) -> NDArray[np.float64]:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    if rows.ndim != 2 or rows.shape[1] < 1:
        raise ValueError("expected an (n, M) array of distributions")
    return rows


def _shannon_rows(rows: NDArray[np.float64], k: float) -> NDArray[np.float64]:
    return k * _eta(rows).sum(axis=1)


def _renyi_rows(rows: NDArray[np.float64], gamma: float) -> NDArray[np.float64]:
    # logsumexp keeps p^gamma stable for extreme gamma (p=0 rows map to -inf).
    with np.errstate(divide="ignore"):
        logp = np.log(rows)
    return logsumexp(gamma * logp, axis=1) / (1.0 - gamma)


def _behavioral_rows(rows: NDArray[np.float64], params: PrelecParams) -> NDArray[np.float64]:
    return _eta(_prelec_weight_array(rows, params)).sum(axis=1)


def entropy_rows(rows, spec: EntropySpec) -> NDArray[np.float64]:
    """Entropy of each row of an (n, M) array of probability vectors.

    Rows are not validated (hot path); use :func:`entropy` for checked
    single-distribution evaluation.  Each row is brought to a canonical
    (sorted) order before summation, so results are exactly permutation
    invariant rather than merely up to float rounding.
    """
    rows = np.sort(_validate_rows(rows), axis=1)
    if isinstance(spec, Shannon):
        return _shannon_rows(rows, spec.k)
    if isinstance(spec, Renyi):
        return _renyi_rows(rows, spec.gamma)
    if isinstance(spec, RenyiInfinity):
        return -np.log(rows.max(axis=1))
    if isinstance(spec, Behavioral):
        return _behavioral_rows(rows, spec.params)
    if isinstance(spec, BehavioralConditioned):
        return _behavioral_rows(rows, spec.params)
    raise TypeError(f"unknown entropy spec: {spec!r}")


def entropy(dist: Distribution, spec: EntropySpec) -> float:
    """Entropy of a validated distribution under any family spec, in nats."""
    return float(entropy_rows(dist.probs, spec)[0])


def shannon_entropy(dist: Distribution, k: float = 1.0) -> float:
    """BGS entropy -k sum p ln p; maximal value k ln M at the uniform."""
    return entropy(dist, Shannon(k))


def renyi_entropy(dist: Distribution, gamma: float) -> float:
    """Renyi entropy ln(sum p^gamma)/(1-gamma); gamma must stay away from 1."""
    return entropy(dist, Renyi(gamma))


def behavioral_entropy(dist: Distribution, params: PrelecParams) -> float:
    """Behavioral entropy -sum w(p_i) ln w(p_i) with Prelec weights w.

    The weights are used as-is; no renormalization is performed even though
    they generally do not sum to 1.
    """
    return entropy(dist, Behavioral(params))


def bernoulli_entropy(values, spec: EntropySpec) -> NDArray[np.float64]:
    """Entropy of the per-value Bernoulli distribution (v, 1 - v), vectorized.

    Values at exactly 0 or 1 contribute zero entropy in every family.  This
    is the hot path of the exploration stack, so each family is evaluated
    with a specialized two-outcome kernel (same math as ``entropy_rows``, up
    to float rounding).
    """
    v = np.asarray(values, dtype=np.float64)
    u = 1.0 - v
    if isinstance(spec, Shannon):
        return spec.k * (_eta(v) + _eta(u))
    if isinstance(spec, (Behavioral, BehavioralConditioned)):
        params = spec.params
        return _eta(_prelec_weight_array(v, params)) + _eta(
            _prelec_weight_array(u, params)
        )
    if isinstance(spec, Renyi):
        g = spec.gamma
        with np.errstate(divide="ignore"):
            a = g * np.log(v)
            b = g * np.log(u)
        hi = np.maximum(a, b)
        lo = np.minimum(a, b)
        # two-term log-sum-exp; -inf at p=0 keeps H(0) = H(1) = 0 exactly
        lse = hi + np.log1p(np.exp(lo - hi))
        return lse / (1.0 - g) + 0.0
    if isinstance(spec, RenyiInfinity):
        return -np.log(np.maximum(v, u)) + 0.0
    raise TypeError(f"unknown entropy spec: {spec!r}")


def theta_of(spec: EntropySpec) -> float:
    """Scalar family parameter used in CSV output (inf for the Renyi limit)."""
    if isinstance(spec, Shannon):
        return spec.k
    if isinstance(spec, Renyi):
        return spec.gamma
    if isinstance(spec, RenyiInfinity):
        return math.inf
    if isinstance(spec, Behavioral):
        return spec.params.alpha
    if isinstance(spec, BehavioralConditioned):
        return spec.alpha
    raise TypeError(f"unknown entropy spec: {spec!r}")


def spec_label(spec: EntropySpec) -> str:
    """Stable human-readable identifier, e.g. ``behavioral(alpha=0.5;m=2)`` (comma-free for CSV)."""
    if isinstance(spec, Shannon):
        return f"shannon(k={spec.k:g})"
    if isinstance(spec, Renyi):
        return f"renyi(gamma={spec.gamma:g})"
    if isinstance(spec, RenyiInfinity):
        return "renyi_inf"
    if isinstance(spec, Behavioral):
        return f"behavioral(alpha={spec.params.alpha:g};beta={spec.params.beta:g})"
    if isinstance(spec, BehavioralConditioned):
        return f"behavioral(alpha={spec.alpha:g};m={spec.m})"
    raise TypeError(f"unknown entropy spec: {spec!r}")


@dataclass(frozen=True)
class AdmissibilityReport:
    """Axiom check results for one entropy spec over M outcomes.

    ``maximality_ok``: no sampled distribution beats the uniform by more than
    1e-9 nats, and the sample median lies strictly below the uniform value
    (rules out plateau/constant operators without penalizing samples that
    merely land near the uniform).
    ``expansibility_ok``: appending a zero outcome moves the entropy by less
    than 1e-12.
    ``continuity_ok``: shifting 1e-6 of mass between two coordinates moves
    the entropy by at most 1e-2 on every sampled distribution.
    """

    spec: str
    m: int
    n_samples: int
    seed: int
    maximality_ok: bool
    expansibility_ok: bool
    continuity_ok: bool
    max_maximality_excess: float
    max_expansibility_delta: float
    max_continuity_delta: float
    conditioned: bool

    @property
    def all_ok(self) -> bool:
        return self.maximality_ok and self.expansibility_ok and self.continuity_ok


_MAXIMALITY_TOL = 1e-9
_EXPANSIBILITY_TOL = 1e-12
_CONTINUITY_EPS = 1e-6
_CONTINUITY_TOL = 1e-2


def check_admissibility(
    spec: EntropySpec,
    m: int,
    n_samples: int = 10_000,
    seed: int = 0,
) -> AdmissibilityReport:
    """Sample-based check of the three generalized-entropy axioms.

    Never raises on a failed axiom; failures are reported with the worst
    observed violation.  A ``BehavioralConditioned`` spec must be conditioned
    to the same ``m`` it is tested against.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m!r}")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples!r}")
    if isinstance(spec, BehavioralConditioned) and spec.m != m:
        raise ValueError(
            f"spec is conditioned to m={spec.m} but tested against m={m}"
        )

    rng = np.random.default_rng(seed)
    g = rng.exponential(size=(n_samples, m))
    rows = g / g.sum(axis=1, keepdims=True)

    h = entropy_rows(rows, spec)
    h_uniform = float(entropy_rows(np.full((1, m), 1.0 / m), spec)[0])

    max_excess = float(h.max() - h_uniform)
    maximality_ok = (
        max_excess <= _MAXIMALITY_TOL
        and float(np.median(h)) < h_uniform - _MAXIMALITY_TOL
    )

    n_sub = min(n_samples, 1_000)
    sub = rows[:n_sub]
    extended = np.concatenate([sub, np.zeros((n_sub, 1))], axis=1)
    exp_delta = float(np.abs(entropy_rows(extended, spec) - h[:n_sub]).max())
    expansibility_ok = exp_delta < _EXPANSIBILITY_TOL

    shifted = sub.copy()
    hi = shifted.argmax(axis=1)
    lo = shifted.argmin(axis=1)
    idx = np.arange(n_sub)
    shifted[idx, hi] -= _CONTINUITY_EPS
    shifted[idx, lo] += _CONTINUITY_EPS
    cont_delta = float(np.abs(entropy_rows(shifted, spec) - h[:n_sub]).max())
    continuity_ok = cont_delta <= _CONTINUITY_TOL

    return AdmissibilityReport(
        spec=spec_label(spec),
        m=m,
        n_samples=n_samples,
        seed=seed,
        maximality_ok=maximality_ok,
        expansibility_ok=expansibility_ok,
        continuity_ok=continuity_ok,
        max_maximality_excess=max_excess,
        max_expansibility_delta=exp_delta,
        max_continuity_delta=cont_delta,
        conditioned=not isinstance(spec, Behavioral),
    )
