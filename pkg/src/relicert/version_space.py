"""Exact consistent-hypothesis sets and their agreement geometry.

Three representations, one per concept class:

  IntervalVS  - thresholds, and offsets of a fixed boundary function, as a
                half-open interval (lo, hi] of feasible cut values;
  AngleArcVS  - 2-d homogeneous linear separators as an arc of feasible
                normal angles (the feasible set is a convex cone, hence a
                single arc);
  ConeVS      - general-d homogeneous linear separators as the polyhedral
                cone {w : <y_i x_i, w> >= 0}, queried through small LPs.

Membership in the agreement region is exact for intervals and arcs, and
LP-decided for cones.  Distances to the disagreement region are closed
form for intervals and arcs.  For cones the distance is the minimum of
|<w, z>| over unit normals w in the cone; that minimum sits on an extreme
ray (the ratio of a nonnegative linear functional to the norm is
quasiconcave along segments), so whenever the active-set enumeration is
tractable it is evaluated exactly over all candidate rays, and otherwise
by projected gradient descent over the sphere-cone slice, cross-checked
against a sampled bound with the optimality gap reported.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BaseBoundary,
    Dataset,
    Hypothesis,
    LinearHomogeneous,
    OffsetBoundary,
    Threshold,
    _as_point,
)
from .lp import max_inner_product_over_cone, max_margin_direction

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
STRICT_LP_TOL = 1e-9

# cone distance search defaults
PGD_RESTARTS = 32
PGD_MAX_ITER = 10_000
PGD_GRAD_TOL = 1e-8
PGD_DIR_SAMPLES = 10_000
PGD_RAY_SAMPLES = 256
PGD_GAP_REL = 1e-3
RAY_ENUM_CAP = 20_000  # enumerate all active sets when C(m, d-1) is below this


class RealizabilityError(ValueError):
    """The dataset admits no consistent hypothesis in the class."""


class DegenerateVersionSpaceError(ValueError):
    """The consistent set is not representable (e.g. two antipodal normals)."""


class ConeSearchError(RuntimeError):
    """Cone distance search failed its sampled cross-check."""


class Membership(enum.Enum):
    AGREE_PLUS = 1
    AGREE_MINUS = -1
    DISAGREE = 0


@dataclass(frozen=True, eq=False)
class OffsetClass:
    """Concept class of all offsets of one registered boundary function."""

    base: BaseBoundary


ConceptClass = str | OffsetClass


def concept_to_dict(concept: ConceptClass) -> dict:
    if isinstance(concept, OffsetClass):
        return {"kind": "offset", "base": concept.base.to_dict()}
    if concept in ("threshold", "linear"):
        return {"kind": concept}
    raise ValueError(f"unknown concept class {concept!r}")


def concept_from_dict(d: dict) -> ConceptClass:
    kind = d["kind"]
    if kind == "offset":
        return OffsetClass(BaseBoundary.from_dict(d["base"]))
    if kind in ("threshold", "linear"):
        return kind
    raise ValueError(f"unknown concept kind {kind!r}")


def _residuals(base: BaseBoundary, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return X[:, -1] - base(X[:, :-1])


# ---------------------------------------------------------------------------
# interval version spaces (thresholds; offset-boundary offsets)
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IntervalVS:
    """Feasible cut values (lo, hi]; DIS is the open interval (lo, hi).

    For the offset class, cuts act on the residual x_{d+1} - f(x_1..d);
    Euclidean distances to DIS are the residual distances divided by
    sqrt(1 + C^2) for Lipschitz constant C (exact when C = 0, otherwise a
    certified lower bound).
    """

    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = False
    base: BaseBoundary | None = None  # set for the offset class

    @property
    def dis_lo(self) -> float:
        return self.lo

    @property
    def dis_hi(self) -> float:
        return self.hi

    @property
    def _scale(self) -> float:
        if self.base is None:
            return 1.0
        return 1.0 / math.sqrt(1.0 + self.base.lipschitz**2)

    def coords(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.base is None:
            if X.shape[1] != 1:
                raise ValueError("threshold version spaces act on 1-d points")
            return X[:, 0]
        return _residuals(self.base, X)

    def membership_many(self, X: np.ndarray) -> np.ndarray:
        u = self.coords(X)
        out = np.zeros(u.shape[0], dtype=np.int8)
        minus = (u < self.lo) | ((u == self.lo) & self.lo_open)
        plus = u >= self.hi
        out[minus] = -1
        out[plus] = 1
        return out

    def dis_distance_many(self, X: np.ndarray) -> np.ndarray:
        u = self.coords(X)
        below = np.maximum(self.lo - u, 0.0)
        above = np.maximum(u - self.hi, 0.0)
        return np.maximum(below, above) * self._scale

    def boundary_margin(self, z) -> float:
        u = float(self.coords(np.atleast_2d(_as_point(z)))[0])
        return min(abs(u - self.lo), abs(u - self.hi))


# ---------------------------------------------------------------------------
# angular-arc version spaces (2-d homogeneous linear)
# ---------------------------------------------------------------------------


def _circ_gap(theta: np.ndarray, start: float, width: float) -> np.ndarray:
    """Angular distance from theta to the circular interval [start, start+width]."""
    delta = np.mod(theta - start, TWO_PI)
    inside = delta <= width
    gap = np.minimum(delta - width, TWO_PI - delta)
    return np.where(inside, 0.0, gap)


@dataclass(frozen=True, eq=False)
class AngleArcVS:
    """Feasible normal angles [phi_lo, phi_hi] (phi_hi - phi_lo <= 2*pi).

    The disagreement region consists of the two open cones of directions
    within the arc's width of its orthogonal directions.
    """

    phi_lo: float
    phi_hi: float
    lo_open: bool = False
    hi_open: bool = False

    @property
    def width(self) -> float:
        return self.phi_hi - self.phi_lo

    def membership_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != 2:
            raise ValueError("angle-arc version spaces act on 2-d points")
        theta = np.arctan2(X[:, 1], X[:, 0])
        rho = np.linalg.norm(X, axis=1)
        a, b = self.phi_lo, self.phi_hi
        # min/max of cos(phi - theta) over phi in [a, b]
        ca = np.cos(a - theta)
        cb = np.cos(b - theta)
        has_pi = np.mod(theta + math.pi - a, TWO_PI) <= self.width
        has_zero = np.mod(theta - a, TWO_PI) <= self.width
        cmin = np.where(has_pi, -1.0, np.minimum(ca, cb))
        cmax = np.where(has_zero, 1.0, np.maximum(ca, cb))
        out = np.zeros(X.shape[0], dtype=np.int8)
        out[cmin >= 0.0] = 1
        out[cmax < 0.0] = -1
        out[rho == 0.0] = 1  # the origin gets +1 from every hypothesis
        return out

    def dis_distance_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        member = self.membership_many(X)
        n = X.shape[0]
        if self.width <= 0.0:
            out = np.full(n, np.inf)
            out[member == 0] = 0.0
            return out
        theta = np.arctan2(X[:, 1], X[:, 0])
        rho = np.linalg.norm(X, axis=1)
        g1 = _circ_gap(theta, self.phi_lo + math.pi / 2.0, self.width)
        g2 = _circ_gap(theta, self.phi_lo - math.pi / 2.0, self.width)
        gap = np.minimum(g1, g2)
        dist = np.where(gap >= math.pi / 2.0, rho, rho * np.sin(gap))
        dist[member == 0] = 0.0
        return dist

    def endpoint_hypotheses(self) -> tuple[LinearHomogeneous, LinearHomogeneous]:
        return (
            LinearHomogeneous(np.array([math.cos(self.phi_lo), math.sin(self.phi_lo)])),
            LinearHomogeneous(np.array([math.cos(self.phi_hi), math.sin(self.phi_hi)])),
        )

    def boundary_margin(self, z) -> float:
        z = _as_point(z, dim=2)
        h1, h2 = self.endpoint_hypotheses()
        return float(
            min(abs(h1.margins(z[None, :])[0]), abs(h2.margins(z[None, :])[0]))
        )


# ---------------------------------------------------------------------------
# constraint-cone version spaces (general-d homogeneous linear)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Bank:
    """Feasible unit normals of a cone; exhaustive when they include every
    extreme ray, in which case linear-functional minima over the sphere
    slice are exact."""

    W: np.ndarray
    exhaustive: bool


@dataclass(frozen=True, eq=False)
class ConeVS:
    """Feasible normals {w : A w >= 0}, rows A = normalized signed samples.

    A candidate bank of feasible unit normals is built lazily once per
    fitted cone (deterministically); it witnesses achievable prediction
    signs cheaply and anchors the disagreement-distance search.
    """

    A: np.ndarray  # (m, d), unit rows
    strict: np.ndarray  # (m,) bool, rows from negative labels
    interior: np.ndarray  # (d,) strictly feasible direction (unit)
    dim: int

    def candidate_bank(self) -> _Bank:
        bank = self.__dict__.get("_bank")
        if bank is None:
            bank = _build_cone_bank(self)
            object.__setattr__(self, "_bank", bank)
        return bank

    def membership_many(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        bank = self.candidate_bank()
        vals = X @ bank.W.T  # inner products of achievable normals
        out = np.empty(X.shape[0], dtype=np.int8)
        for i, z in enumerate(X):
            plus = vals[i].max() > STRICT_LP_TOL
            minus = vals[i].min() < -STRICT_LP_TOL
            if not plus:
                plus = max_inner_product_over_cone(z, self.A) > STRICT_LP_TOL
            if plus and not minus:
                minus = max_inner_product_over_cone(-z, self.A) > STRICT_LP_TOL
            if plus and minus:
                out[i] = 0
            elif minus:
                out[i] = -1
            else:
                out[i] = 1
        return out


def _project_rows_into_cone(W: np.ndarray, A: np.ndarray, sweeps: int = 40):
    """Push each row of W into {w : A w >= 0} by repeated worst-violation
    hyperplane projections, renormalizing to the unit sphere."""
    if A.shape[0] == 0:
        nrm = np.linalg.norm(W, axis=1, keepdims=True)
        return W / np.maximum(nrm, 1e-300), np.ones(W.shape[0], dtype=bool)
    for _ in range(sweeps):
        V = W @ A.T
        worst = np.argmin(V, axis=1)
        vals = V[np.arange(W.shape[0]), worst]
        bad = vals < -1e-12
        if not np.any(bad):
            break
        W[bad] -= vals[bad, None] * A[worst[bad]]
        nrm = np.linalg.norm(W, axis=1, keepdims=True)
        W = W / np.maximum(nrm, 1e-300)
    V = W @ A.T
    ok = np.min(V, axis=1) >= -1e-9
    return W, ok


def _null_vectors(A: np.ndarray, picks: np.ndarray) -> np.ndarray:
    """Null vectors of the (d-1) x d submatrices A[picks] via signed cofactor
    determinants; rows of near-degenerate subsets come back near zero."""
    sub = A[picks]  # (N, d-1, d)
    d = A.shape[1]
    cols = []
    sign = 1.0
    for col in range(d):
        minor = np.delete(sub, col, axis=2)
        cols.append(sign * np.linalg.det(minor))
        sign = -sign
    V = np.stack(cols, axis=1)
    nrm = np.linalg.norm(V, axis=1)
    good = nrm > 1e-12
    return V[good] / nrm[good, None]


def _enumerated_rays(A: np.ndarray) -> np.ndarray | None:
    """All extreme-ray candidates of {w : A w >= 0}, or None when the
    enumeration is intractable or the cone is not pointed."""
    m, d = A.shape
    if d == 1:
        rays = np.array([[1.0], [-1.0]])
        feas = (rays @ A.T).min(axis=1) >= -1e-12 if m else np.array([True, True])
        return rays[feas] if np.any(feas) else None
    if m < d or math.comb(m, d - 1) > RAY_ENUM_CAP:
        return None
    if np.linalg.matrix_rank(A, tol=1e-10) < d:
        return None  # cone contains a line; minima need not sit on rays
    from itertools import combinations

    picks = np.fromiter(
        (i for combo in combinations(range(m), d - 1) for i in combo), dtype=np.int64
    ).reshape(-1, d - 1)
    rays = _null_vectors(A, picks)
    rays = np.vstack([rays, -rays])
    feas = (rays @ A.T).min(axis=1) >= -1e-12
    if not np.any(feas):
        return None
    return rays[feas]


def _build_cone_bank(vs: ConeVS) -> _Bank:
    A, w0, d = vs.A, vs.interior, vs.dim
    m = A.shape[0]
    rays = _enumerated_rays(A)
    if rays is not None:
        W = np.vstack([w0[None, :], rays])
        return _Bank(W=np.ascontiguousarray(W), exhaustive=True)
    # sampled fallback: ray-cast from the interior plus random active sets
    rng = np.random.Generator(np.random.Philox(key=0x5EED))
    cands = [w0[None, :]]
    n_dirs, n_rays = PGD_DIR_SAMPLES, PGD_RAY_SAMPLES
    U = rng.standard_normal((n_dirs, d))
    U /= np.maximum(np.linalg.norm(U, axis=1, keepdims=True), 1e-300)
    if m:
        AU = U @ A.T
        Aw0 = A @ w0
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = np.where(AU < -1e-300, Aw0[None, :] / (-AU), np.inf)
        t = np.minimum(steps.min(axis=1), 1e6)
    else:
        t = np.full(n_dirs, 1e6)
    B = w0[None, :] + t[:, None] * U
    B /= np.maximum(np.linalg.norm(B, axis=1, keepdims=True), 1e-300)
    cands.append(B)
    if m >= d - 1 and d >= 2:
        picks = np.argsort(rng.random((n_rays, m)), axis=1)[:, : d - 1]
        rays = _null_vectors(A, picks)
        rays = np.vstack([rays, -rays])
        feas = (rays @ A.T).min(axis=1) >= -1e-12
        if np.any(feas):
            cands.append(rays[feas])
    W = np.vstack(cands)
    if m:
        W = W[(W @ A.T).min(axis=1) >= -1e-9]
        if W.shape[0] == 0:
            W = w0[None, :]
    return _Bank(W=np.ascontiguousarray(W), exhaustive=False)


@dataclass(frozen=True)
class ConeDistanceInfo:
    value: float
    gap: float
    flagged: bool
    iterations: int
    best_w: np.ndarray
    exhaustive: bool


def cone_dis_distance_info(
    vs: ConeVS,
    z,
    agreed_sign: int,
    *,
    seed: int = 0,
    restarts: int = PGD_RESTARTS,
    max_iter: int = PGD_MAX_ITER,
    stall_limit: int = 12,
) -> ConeDistanceInfo:
    """min |<w, z>| over unit w in the cone, for z in the agreement region.

    Exact over the enumerated extreme rays when the bank is exhaustive.
    Otherwise projected gradient over the sphere-cone slice from `restarts`
    starts, cross-checked against the sampled candidate bank; a material
    disagreement between the two routes raises instead of returning a
    doubtful value.
    """
    z = _as_point(z, dim=vs.dim)
    v = float(agreed_sign) * z
    rng = np.random.Generator(np.random.Philox(key=seed))
    A, w0, d = vs.A, vs.interior, vs.dim

    bank = vs.candidate_bank().W
    exhaustive = vs.candidate_bank().exhaustive
    bvals = bank @ v
    jb = int(np.argmin(bvals))
    sampled_best, sampled_w = float(bvals[jb]), bank[jb]

    if exhaustive:
        return ConeDistanceInfo(
            value=max(sampled_best, 0.0),
            gap=0.0,
            flagged=False,
            iterations=0,
            best_w=sampled_w,
            exhaustive=True,
        )

    # restarts: the most promising bank candidates plus random bank rows,
    # all jittered except the incumbent, then pushed back into the cone
    order = np.argsort(bvals)
    k_best = min(max(restarts // 2, 1), bank.shape[0])
    idx = np.concatenate(
        [order[:k_best], rng.integers(0, bank.shape[0], size=max(restarts - k_best, 0))]
    )
    W = bank[idx].copy()
    jitter = 0.2 * rng.standard_normal(W.shape) * rng.random((W.shape[0], 1))
    jitter[0] = 0.0
    W += jitter
    W /= np.maximum(np.linalg.norm(W, axis=1, keepdims=True), 1e-300)
    W, ok = _project_rows_into_cone(W, A)
    W[~ok] = w0
    step = np.full(W.shape[0], 0.25)
    vals = W @ v
    iters = 0
    stall = 0
    global_best = float(np.min(vals))
    for it in range(max_iter):
        iters = it + 1
        tangent = v[None, :] - vals[:, None] * W
        gnorm = np.linalg.norm(tangent, axis=1)
        active = (step > 1e-12) & (gnorm > PGD_GRAD_TOL)
        if not np.any(active):
            break
        trial = W - step[:, None] * tangent
        trial /= np.maximum(np.linalg.norm(trial, axis=1, keepdims=True), 1e-300)
        trial, ok = _project_rows_into_cone(trial, A, sweeps=12)
        tvals = np.where(ok, trial @ v, np.inf)
        improved = active & (tvals < vals - 1e-15)
        W[improved] = trial[improved]
        vals[improved] = tvals[improved]
        step[improved] *= 1.3
        step[active & ~improved] *= 0.5
        new_best = float(np.min(vals))
        if new_best < global_best - 1e-13:
            global_best = new_best
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                break

    j = int(np.argmin(vals))
    pgd_best, pgd_w = float(vals[j]), W[j]
    value = min(pgd_best, sampled_best)
    best_w = pgd_w if pgd_best <= sampled_best else sampled_w
    gap = pgd_best - sampled_best
    flagged = gap > PGD_GAP_REL * max(abs(value), 1e-12)
    if flagged:
        raise ConeSearchError(
            f"cone distance search did not converge: descent value {pgd_best:.3e} "
            f"exceeds sampled bound {sampled_best:.3e} (gap {gap:.3e}) after "
            f"{iters} iterations"
        )
    return ConeDistanceInfo(
        value=max(value, 0.0),
        gap=gap,
        flagged=flagged,
        iterations=iters,
        best_w=best_w,
        exhaustive=False,
    )


def cone_dis_direction(vs: ConeVS, x, agreed_sign: int) -> tuple[float, np.ndarray]:
    """Estimate of the disagreement distance at x and a unit step direction
    toward the (approximately) nearest disputed point, from the cached
    candidate bank alone."""
    x = _as_point(x, dim=vs.dim)
    bank = vs.candidate_bank().W
    vals = bank @ (float(agreed_sign) * x)
    j = int(np.argmin(vals))
    w = bank[j]
    margin = float(w @ x)
    if abs(margin) < 1e-15:
        return 0.0, w.copy()
    direction = -math.copysign(1.0, margin) * w
    return abs(margin), direction


VersionSpace = IntervalVS | AngleArcVS | ConeVS


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _fit_interval(values: np.ndarray, labels: np.ndarray, base=None) -> IntervalVS:
    neg = values[labels < 0]
    pos = values[labels > 0]
    lo = float(np.max(neg)) if neg.size else -math.inf
    hi = float(np.min(pos)) if pos.size else math.inf
    if not lo < hi:
        raise RealizabilityError(
            f"no consistent cut: largest negative {lo} >= smallest positive {hi}"
        )
    return IntervalVS(lo=lo, hi=hi, base=base)


def _fit_arc(S: Dataset) -> AngleArcVS:
    if len(S) == 0:
        return AngleArcVS(phi_lo=-math.pi, phi_hi=math.pi)
    norms = np.linalg.norm(S.X, axis=1)
    if np.any((norms == 0.0) & (S.y < 0)):
        raise RealizabilityError("the origin always receives label +1")
    keep = norms > 0.0
    theta = np.arctan2(S.X[keep, 1], S.X[keep, 0])
    labels = S.y[keep]
    if theta.size == 0:
        return AngleArcVS(phi_lo=-math.pi, phi_hi=math.pi)
    strict = labels < 0
    # every constraint reads cos(phi - psi) >= 0 (or > 0 for strict rows),
    # i.e. phi must lie in the half-circle [psi - pi/2, psi + pi/2]
    psi = np.where(strict, theta + math.pi, theta)
    starts = np.mod(psi - math.pi / 2.0, TWO_PI)
    m = psi.size
    events = np.concatenate([starts, np.mod(starts + math.pi, TWO_PI)])
    deltas = np.concatenate([np.ones(m, dtype=np.int64), -np.ones(m, dtype=np.int64)])
    order = np.lexsort((-deltas, events))  # +1 before -1 at equal angles
    ev = np.concatenate([[0.0], events[order]])
    dv = np.concatenate([[0], deltas[order]])
    count = int(np.sum(np.mod(-starts, TWO_PI) < math.pi))  # coverage just above 0
    segments = []
    for k in range(ev.size):
        count += int(dv[k])
        seg_start = ev[k]
        seg_end = ev[k + 1] if k + 1 < ev.size else TWO_PI
        if count == m and seg_end > seg_start:
            segments.append((seg_start, seg_end))
    if not segments:
        return _fit_arc_degenerate(psi, strict)
    # stitch the wrap-around junction at angle 0 / 2*pi
    if (
        len(segments) >= 2
        and abs(segments[-1][1] - TWO_PI) < 1e-15
        and abs(segments[0][0]) < 1e-15
    ):
        last = segments.pop()
        first = segments.pop(0)
        segments.insert(0, (last[0] - TWO_PI, first[1]))
    if len(segments) > 1:
        raise DegenerateVersionSpaceError(
            "feasible normals form a disconnected set (antipodal boundary data)"
        )
    lo, hi = segments[0]
    width = min(hi - lo, TWO_PI)
    lo = math.remainder(lo, TWO_PI)

    # an endpoint binding a strict (negative-label) constraint is open
    def _open(phi: float) -> bool:
        c = np.cos(phi - psi[strict])
        return bool(c.size and np.min(np.abs(c)) < 1e-12)

    return AngleArcVS(phi_lo=lo, phi_hi=lo + width, lo_open=_open(lo), hi_open=_open(lo + width))


def _fit_arc_degenerate(psi: np.ndarray, strict: np.ndarray) -> AngleArcVS:
    """No positive-width arc: the feasible set is at most isolated angles."""
    cands = np.unique(np.mod(np.concatenate([psi - math.pi / 2.0, psi + math.pi / 2.0]), TWO_PI))
    feasible = []
    for phi in cands:
        c = np.cos(phi - psi)
        if np.all(c >= -1e-12) and not np.any(strict & (np.abs(c) < 1e-12)):
            feasible.append(phi)
    if not feasible:
        raise RealizabilityError("no consistent 2-d linear separator")
    if len(feasible) > 1:
        raise DegenerateVersionSpaceError(
            "feasible normals form a disconnected set (antipodal boundary data)"
        )
    phi = math.remainder(float(feasible[0]), TWO_PI)
    return AngleArcVS(phi_lo=phi, phi_hi=phi)


def _fit_cone(S: Dataset, interior_hint: np.ndarray | None = None) -> ConeVS:
    d = S.dimension
    empty = ConeVS(
        A=np.zeros((0, d)), strict=np.zeros(0, dtype=bool), interior=np.eye(d)[0], dim=d
    )
    if len(S) == 0:
        return empty
    raw = S.y[:, None] * S.X
    norms = np.linalg.norm(raw, axis=1)
    if np.any((norms == 0.0) & (S.y < 0)):
        raise RealizabilityError("the origin always receives label +1")
    keep = norms > 0.0
    if not np.any(keep):
        return empty
    A = raw[keep] / norms[keep, None]
    strict = S.y[keep] < 0
    if interior_hint is not None:
        w = np.asarray(interior_hint, dtype=float).reshape(-1)
        if w.shape[0] == d and np.linalg.norm(w) > 1e-12:
            w = w / np.linalg.norm(w)
            if float(np.min(A @ w)) > STRICT_LP_TOL:
                return ConeVS(A=A, strict=strict, interior=w, dim=d)
    w, s = max_margin_direction(A)
    if s <= STRICT_LP_TOL:
        if np.any(strict):
            raise RealizabilityError(
                f"no strictly consistent linear separator (best margin {s:.2e})"
            )
        # all labels +1 with only marginal separators; any nonzero direction
        # of the closed cone will do
        if np.linalg.norm(w) < 1e-12:
            raise RealizabilityError("feasible normals reduce to the zero vector")
    w = w / np.linalg.norm(w)
    return ConeVS(A=A, strict=strict, interior=w, dim=d)


def fit_version_space(
    S: Dataset,
    concept: ConceptClass,
    nu: float = 0.0,
    representation: str = "auto",
    interior_hint: np.ndarray | None = None,
) -> VersionSpace:
    """Exact representation of the hypotheses consistent with S.

    `nu` is an error-threshold pass-through; only nu = 0 (full consistency)
    is representable by these variants and anything else is rejected.
    `interior_hint` optionally supplies a known strictly-consistent normal
    for the cone representation, skipping its LP (validated, LP fallback).
    """
    if not 0.0 <= nu < 1.0:
        raise ValueError("nu must lie in [0, 1)")
    if nu > 0.0:
        raise ValueError(
            "error-tolerant version spaces (nu > 0) are not representable "
            "by the interval/arc/cone variants"
        )
    if isinstance(concept, OffsetClass):
        if len(S) == 0:
            return IntervalVS(lo=-math.inf, hi=math.inf, base=concept.base)
        return _fit_interval(_residuals(concept.base, S.X), S.y, base=concept.base)
    if concept == "threshold":
        if S.dimension != 1:
            raise ValueError("threshold concepts act on 1-d data")
        if len(S) == 0:
            return IntervalVS(lo=-math.inf, hi=math.inf)
        return _fit_interval(S.X[:, 0], S.y)
    if concept == "linear":
        if representation == "arc" or (representation == "auto" and S.dimension == 2):
            if S.dimension != 2:
                raise ValueError("the arc representation needs 2-d data")
            return _fit_arc(S)
        if representation in ("auto", "cone"):
            return _fit_cone(S, interior_hint=interior_hint)
        raise ValueError(f"unknown representation {representation!r}")
    raise ValueError(f"unknown concept class {concept!r}")


def erm(S: Dataset, concept: ConceptClass, representation: str = "auto") -> Hypothesis:
    """A canonical zero-error hypothesis: interval/arc midpoints, or the
    max-margin LP direction for constraint cones."""
    vs = fit_version_space(S, concept, representation=representation)
    if isinstance(vs, IntervalVS):
        if math.isinf(vs.lo) and math.isinf(vs.hi):
            t = 0.0
        elif math.isinf(vs.lo):
            t = vs.hi - 1.0
        elif math.isinf(vs.hi):
            t = vs.lo + 1.0
        else:
            t = 0.5 * (vs.lo + vs.hi)
        if vs.base is not None:
            return OffsetBoundary(vs.base, t)
        return Threshold(t)
    if isinstance(vs, AngleArcVS):
        phi = 0.5 * (vs.phi_lo + vs.phi_hi)
        return LinearHomogeneous(np.array([math.cos(phi), math.sin(phi)]))
    return LinearHomogeneous(vs.interior)


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

_CODE_TO_MEMBERSHIP = {1: Membership.AGREE_PLUS, -1: Membership.AGREE_MINUS, 0: Membership.DISAGREE}


def agree_membership(vs: VersionSpace, z) -> Membership:
    """Unanimity of the consistent hypotheses at z."""
    z = _as_point(z)
    code = int(vs.membership_many(z[None, :])[0])
    return _CODE_TO_MEMBERSHIP[code]


def dis_distance(vs: VersionSpace, z, *, seed: int = 0) -> float:
    """Euclidean distance from z to the disagreement region (0 inside it)."""
    z = _as_point(z)
    if isinstance(vs, (IntervalVS, AngleArcVS)):
        return float(vs.dis_distance_many(z[None, :])[0])
    code = int(vs.membership_many(z[None, :])[0])
    if code == 0:
        return 0.0
    return cone_dis_distance_info(vs, z, code, seed=seed).value


# ---------------------------------------------------------------------------
# margin-exclusion bound for linear separators
# ---------------------------------------------------------------------------


def margin_exclusion_delta(delta1: float, c: float, dnorm: float) -> float:
    """Margin below which points with norms in [c, dnorm] must be disputed.

    delta1 is an admissible rotation angle (see margin_exclusion_delta1_bound);
    any admissible rotation of the target normal stays consistent with the
    sample, and within this margin some such rotation flips the point.
    """
    if not 0.0 < delta1 < math.pi / 2.0:
        raise ValueError("delta1 must lie in (0, pi/2)")
    if not 0.0 < c < dnorm:
        raise ValueError("need 0 < c < dnorm")
    t = math.tan(delta1)
    return c * c * t / math.sqrt((dnorm + t * t) ** 2 + c * c * t * t)


def margin_exclusion_delta1_bound(S: Dataset, hstar: LinearHomogeneous) -> float:
    """Largest admissible rotation angle: min_i |<w*, x_i>| / ||x_i||."""
    if len(S) == 0:
        raise ValueError("the admissibility bound needs a nonempty sample")
    margins = np.abs(hstar.margins(S.X))
    norms = np.linalg.norm(S.X, axis=1)
    if np.any(norms == 0.0) or np.any(margins == 0.0):
        raise ValueError("sample points must be off the target decision boundary")
    return float(np.min(margins / norms))
