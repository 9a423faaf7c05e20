"""Monte-Carlo estimators: region masses, the source-to-target disagreement
coefficient, and reliable correctness under distribution shift.

Confidence intervals are two-sided 95% Hoeffding bounds over the
independent units actually averaged (sample points for plain masses,
training-sample draws for quantities averaged over refits).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import Dataset, Hypothesis, LinearHomogeneous, Threshold, _as_point
from .distributions import (
    DistributionSpec,
    _draw,
    cdf_1d,
    derive_rng,
    dimension,
    is_rotation_invariant,
    quantile_1d,
    sample,
)
from .losses import LossKind
from .reliability import safely_reliable_membership
from .version_space import (
    AngleArcVS,
    ConceptClass,
    IntervalVS,
    OffsetClass,
    VersionSpace,
    fit_version_space,
)

log = logging.getLogger(__name__)

CONFIDENCE = 0.95
ESTIMATE_CSV_HEADER = "quantity,class,loss,eta1,eta2,m,d,trials,n,mass,ci_low,ci_high,seed"


def hoeffding_halfwidth(n: int, confidence: float = CONFIDENCE) -> float:
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


@dataclass(frozen=True)
class RegionEstimate:
    mass: float
    ci_low: float
    ci_high: float
    n: int  # independent units behind the interval
    seed: int

    def __post_init__(self):
        if not (self.ci_low - 1e-12 <= self.mass <= self.ci_high + 1e-12):
            raise ValueError("point estimate must lie inside its interval")
        if self.ci_high - self.ci_low > 2.0 * hoeffding_halfwidth(self.n) + 1e-12:
            raise ValueError("interval wider than the Hoeffding bound allows")

    def overlaps(self, other: "RegionEstimate") -> bool:
        return self.ci_low <= other.ci_high and other.ci_low <= self.ci_high


def _estimate(mass: float, n: int, seed: int) -> RegionEstimate:
    hw = hoeffding_halfwidth(n)
    return RegionEstimate(
        mass=mass,
        ci_low=max(mass - hw, 0.0),
        ci_high=min(mass + hw, 1.0),
        n=n,
        seed=seed,
    )


def mc_mass(predicate, spec: DistributionSpec, n: int, seed: int) -> RegionEstimate:
    """Empirical frequency of a vectorized point predicate under spec."""
    if n < 1:
        raise ValueError("need at least one sample")
    X = sample(spec, seed, n)
    vals = np.asarray(predicate(X), dtype=bool)
    if vals.shape != (n,):
        raise ValueError("predicate must map (n, d) points to n booleans")
    return _estimate(float(np.mean(vals)), n, seed)


# ---------------------------------------------------------------------------
# safely-reliable mass
# ---------------------------------------------------------------------------


def _interior_hint(concept: ConceptClass, hstar: Hypothesis):
    if concept == "linear" and isinstance(hstar, LinearHomogeneous):
        return hstar.w
    return None


def sr_membership_mask(
    vs: VersionSpace,
    hstar: Hypothesis,
    X: np.ndarray,
    eta1: float,
    eta2: float,
    kind: LossKind,
    *,
    seed: int = 0,
) -> np.ndarray:
    """Vectorized safely-reliable membership where the geometry allows."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if kind in (LossKind.ST, LossKind.TL) and isinstance(vs, (IntervalVS, AngleArcVS)):
        need = eta1 + eta2 if kind is LossKind.ST else eta1
        codes = vs.membership_many(X)
        dist = vs.dis_distance_many(X)
        return (codes != 0) & (dist >= need)
    return np.array(
        [safely_reliable_membership(vs, hstar, x, eta1, eta2, kind, seed=seed) for x in X]
    )


def _sr_trial_mean(args) -> list[float]:
    concept, hstar, spec, m, eta1, eta2, kind, n_test, seed, lo, hi = args
    out = []
    for t in range(lo, hi):
        X = _draw(spec, derive_rng(seed, t, 0), m)
        S = Dataset(X, hstar.predict_many(X))
        vs = fit_version_space(S, concept, interior_hint=_interior_hint(concept, hstar))
        T = _draw(spec, derive_rng(seed, t, 1), n_test)
        mask = sr_membership_mask(vs, hstar, T, eta1, eta2, kind, seed=seed ^ t)
        out.append(float(np.mean(mask)))
    return out


def _map_trials(fn, args_base: tuple, trials: int, jobs: int) -> list[float]:
    if jobs <= 1:
        return fn(args_base + (0, trials))
    from concurrent.futures import ProcessPoolExecutor

    size = max(1, (trials + jobs - 1) // jobs)
    chunks = [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(fn, [args_base + c for c in chunks]))
    return [v for part in parts for v in part]


def sr_mass(
    concept: ConceptClass,
    hstar: Hypothesis,
    spec: DistributionSpec,
    m: int,
    eta1: float,
    eta2: float,
    kind: LossKind,
    trials: int,
    n_test: int,
    seed: int,
    jobs: int = 1,
) -> RegionEstimate:
    """Mean over fresh training draws of the safely-reliable test mass.

    Per-trial seeds are derived by counter, so the result is independent of
    the worker count."""
    if trials < 1 or n_test < 1:
        raise ValueError("trials and n_test must be positive")
    base = (concept, hstar, spec, m, eta1, eta2, kind, n_test, seed)
    means = _map_trials(_sr_trial_mean, base, trials, jobs)
    return _estimate(float(np.mean(means)), trials, seed)


# ---------------------------------------------------------------------------
# disagreement coefficient from source to target
# ---------------------------------------------------------------------------


def dis_ball_membership_rotinv(hstar: LinearHomogeneous, r: float, x) -> bool:
    """Is x flipped by some separator within source-disagreement r of the
    target, for rotationally invariant source distributions?

    There the disagreement mass of two homogeneous separators is their
    normal angle over pi, so the test reduces to whether the minimal
    rotation flipping x (|pi/2 - angle(w*, x)|) is at most pi * r.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError("r must lie in [0, 1]")
    x = _as_point(x, dim=hstar.dimension)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        raise ValueError("the zero vector is never flipped")
    c = float(hstar.w @ x) / nx
    theta = math.acos(min(max(c, -1.0), 1.0))
    return abs(math.pi / 2.0 - theta) <= math.pi * r


def default_r_grid(epsilon: float, size: int = 16) -> np.ndarray:
    if not 0.0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    return np.geomspace(epsilon, 0.5, size)


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    r_grid: np.ndarray
    masses: np.ndarray
    epsilon: float
    n: int
    seed: int
    method: str

    def __post_init__(self):
        grid = np.asarray(self.r_grid, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        if grid.shape != masses.shape or grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid and masses must be matching 1-d arrays")
        if grid.min() < self.epsilon - 1e-12:
            raise ValueError("grid radii must be at least epsilon")
        if grid.max() > 1.0 + 1e-12:
            raise ValueError("grid radii must not exceed 1")
        if abs(self.value - float(np.max(masses / grid))) > 1e-9:
            raise ValueError("value must be the grid supremum of mass/r")
        object.__setattr__(self, "r_grid", grid)
        object.__setattr__(self, "masses", masses)

    @property
    def grid_resolution(self) -> int:
        return int(self.r_grid.size)


def _theta_rotinv(hstar: LinearHomogeneous, Q, grid, n, seed) -> np.ndarray:
    XQ = sample(Q, seed, n)
    norms = np.linalg.norm(XQ, axis=1)
    good = norms > 0.0
    c = np.zeros(XQ.shape[0])
    c[good] = (XQ[good] @ hstar.w) / norms[good]
    theta = np.arccos(np.clip(c, -1.0, 1.0))
    rot = np.abs(math.pi / 2.0 - theta)
    masses = np.array([np.mean(good & (rot <= math.pi * r)) for r in grid])
    return masses


def _threshold_dis_interval(P, tstar: float, r: float) -> tuple[float, float]:
    """Extent of the disputed set of source-consistent-within-r thresholds.

    Quantiles saturate at the support edges: cut values beyond the source
    support are source-indistinguishable from the edge cut and the ball is
    taken as its clamped representatives (the convention under which the
    worked threshold examples hold)."""
    fc = cdf_1d(P, tstar)
    lo = quantile_1d(P, max(fc - r, 0.0))
    hi = quantile_1d(P, min(fc + r, 1.0))
    return lo, hi


def _cdf_at(Q, t: float) -> float:
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    return cdf_1d(Q, t)


def _theta_threshold(hstar: Threshold, P, Q, grid, n, seed) -> tuple[np.ndarray, str]:
    try:
        masses = []
        for r in grid:
            lo, hi = _threshold_dis_interval(P, hstar.t, float(r))
            masses.append(_cdf_at(Q, hi) - _cdf_at(Q, lo))
        return np.array(masses), "threshold-cdf"
    except ValueError:
        pass
    # no closed-form CDF: empirical interval from a reference sample
    ref = sample(P, seed ^ 0xA5A5, n)[:, 0]
    ref.sort()
    xq = sample(Q, seed, n)[:, 0]
    masses = []
    fc = float(np.searchsorted(ref, hstar.t, side="right")) / ref.size
    for r in grid:
        lo = float(np.quantile(ref, max(fc - float(r), 0.0)))
        hi = float(np.quantile(ref, min(fc + float(r), 1.0)))
        masses.append(float(np.mean((xq > lo) & (xq < hi))))
    return np.array(masses), "threshold-empirical"


def _theta_offset(concept: OffsetClass, hstar, P, Q, grid, n, seed) -> np.ndarray:
    """Offsets of a fixed boundary behave as thresholds on the residual."""
    base = concept.base
    ref = sample(P, seed ^ 0xA5A5, n)
    ref_u = np.sort(ref[:, -1] - base(ref[:, :-1]))
    xq = sample(Q, seed, n)
    xq_u = xq[:, -1] - base(xq[:, :-1])
    cut = hstar.offset
    fc = float(np.searchsorted(ref_u, cut, side="right")) / ref_u.size
    masses = []
    for r in grid:
        lo = float(np.quantile(ref_u, max(fc - float(r), 0.0)))
        hi = float(np.quantile(ref_u, min(fc + float(r), 1.0)))
        masses.append(float(np.mean((xq_u > lo) & (xq_u < hi))))
    return np.array(masses)


def theta_pq(
    concept: ConceptClass,
    hstar: Hypothesis,
    P: DistributionSpec,
    Q: DistributionSpec,
    epsilon: float,
    r_grid=None,
    n: int = 100_000,
    seed: int = 0,
) -> ThetaEstimate:
    """Supremum over the radius grid of (target mass of the disputed region
    of the source disagreement ball) / radius."""
    grid = default_r_grid(epsilon) if r_grid is None else np.asarray(r_grid, dtype=float)
    if grid.min() < epsilon - 1e-12:
        raise ValueError("grid radii must be at least epsilon")
    if grid.max() > 1.0:
        raise ValueError("grid radii must not exceed 1")
    if concept == "linear" and isinstance(hstar, LinearHomogeneous):
        if not is_rotation_invariant(P):
            raise ValueError(
                "the linear path needs a rotationally invariant source distribution"
            )
        masses = _theta_rotinv(hstar, Q, grid, n, seed)
        method = "rotinv"
    elif concept == "threshold" and isinstance(hstar, Threshold):
        masses, method = _theta_threshold(hstar, P, Q, grid, n, seed)
    elif isinstance(concept, OffsetClass):
        masses = _theta_offset(concept, hstar, P, Q, grid, n, seed)
        method = "residual-empirical"
    else:
        raise ValueError(f"no supported path for concept {concept!r} with this spec pair")
    value = float(np.max(masses / grid))
    return ThetaEstimate(
        value=value, r_grid=grid, masses=masses, epsilon=epsilon, n=n, seed=seed, method=method
    )


# ---------------------------------------------------------------------------
# reliable correctness under distribution shift
# ---------------------------------------------------------------------------


def epsilon_for_sample_size(m: int, vc_dim: int, delta: float = 0.05, c: float = 8.0) -> float:
    """Uniform-convergence scale epsilon with m = ceil((c/eps^2)(vc + ln(1/delta)))."""
    if m < 1:
        raise ValueError("m must be positive")
    return math.sqrt(c * (vc_dim + math.log(1.0 / delta)) / m)


def sample_size_for_epsilon(eps: float, vc_dim: int, delta: float = 0.05, c: float = 8.0) -> int:
    return math.ceil(c * (vc_dim + math.log(1.0 / delta)) / (eps * eps))


def _shift_trial_mean(args) -> list[float]:
    concept, hstar, P, Q, m, eta1, eta2, kind, n_test, seed, lo, hi = args
    out = []
    for t in range(lo, hi):
        X = _draw(P, derive_rng(seed, t, 0), m)
        S = Dataset(X, hstar.predict_many(X))
        vs = fit_version_space(S, concept, interior_hint=_interior_hint(concept, hstar))
        T = _draw(Q, derive_rng(seed, t, 1), n_test)
        if kind is None:
            out.append(float(np.mean(vs.membership_many(T) != 0)))
        else:
            mask = sr_membership_mask(vs, hstar, T, eta1, eta2, kind, seed=seed ^ t)
            out.append(float(np.mean(mask)))
    return out


def reliable_correctness(
    concept: ConceptClass,
    hstar: Hypothesis,
    P: DistributionSpec,
    Q: DistributionSpec,
    m: int,
    trials: int,
    n_test: int,
    eta1: float = 0.0,
    eta2: float = 0.0,
    kind: LossKind | None = None,
    seed: int = 0,
    labeled_test: Dataset | None = None,
    jobs: int = 1,
) -> RegionEstimate:
    """Probability that a target draw lands in the (safely-)reliable region
    learned from source data, averaged over training draws.

    With kind=None (and zero attack strengths) this is plain reliable
    correctness: the fraction of target draws in the agreement region.
    Passing a labeled target sample enforces the realizability premise.
    """
    if kind is None and (eta1 != 0.0 or eta2 != 0.0):
        raise ValueError("plain reliable correctness is defined at zero attack strength")
    if labeled_test is not None and len(labeled_test):
        if np.any(hstar.predict_many(labeled_test.X) != labeled_test.y):
            raise ValueError("target data is not realizable by the given target concept")
    base = (concept, hstar, P, Q, m, eta1, eta2, kind, n_test, seed)
    means = _map_trials(_shift_trial_mean, base, trials, jobs)
    return _estimate(float(np.mean(means)), trials, seed)


# ---------------------------------------------------------------------------
# CSV rows
# ---------------------------------------------------------------------------


def concept_name(concept: ConceptClass) -> str:
    if isinstance(concept, OffsetClass):
        return f"offset-{concept.base.kind}"
    return str(concept)


def estimate_csv_row(
    quantity: str,
    concept: ConceptClass,
    kind: LossKind | None,
    eta1: float,
    eta2: float,
    m: int,
    d: int,
    trials: int,
    n: int,
    est: RegionEstimate,
) -> str:
    loss = kind.value if kind is not None else "none"
    return (
        f"{quantity},{concept_name(concept)},{loss},{eta1!r},{eta2!r},{m},{d},"
        f"{trials},{n},{est.mass!r},{est.ci_low!r},{est.ci_high!r},{est.seed}"
    )
