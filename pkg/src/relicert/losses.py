"""The three 0/1 robust losses, at fixed perturbations and as ball suprema.

Loss kinds:
  CA - adversary constrained to keep the true label of the perturbed point,
  TL - learner must match the perturbed point's true label,
  ST - learner must match the original point's true label (stability).

Ball suprema are exact for threshold and homogeneous linear hypotheses; ties
where the closed attack ball only grazes the closure of a disagreement
region resolve to 1 (closed-ball convention, measure zero under every
supported distribution).
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FiniteMap,
    Hypothesis,
    LinearHomogeneous,
    MetricBall,
    OffsetBoundary,
    PerturbationModel,
    Threshold,
    _as_point,
    predict,
)

log = logging.getLogger(__name__)

DEFAULT_BALL_SAMPLES = 1024


class LossKind(enum.Enum):
    CA = "ca"
    TL = "tl"
    ST = "st"


@dataclass(frozen=True)
class RobustLossResult:
    value: int
    method: str  # exact | enumerated | sampled-lower-bound
    samples: int | None = None


def _check_pair(h: Hypothesis, hstar: Hypothesis) -> None:
    if type(h) is not type(hstar):
        raise ValueError("h and hstar must come from the same concept class")


def fixed_loss(kind: LossKind, h: Hypothesis, hstar: Hypothesis, x, z) -> int:
    """Indicator loss at one fixed perturbation z of the point x."""
    _check_pair(h, hstar)
    x = _as_point(x)
    z = _as_point(z, dim=x.shape[0])
    if kind is LossKind.TL:
        return int(predict(h, z) != predict(hstar, z))
    if kind is LossKind.ST:
        return int(predict(h, z) != predict(hstar, x))
    return int(predict(h, z) != predict(hstar, z) and predict(hstar, z) == predict(hstar, x))


# ---------------------------------------------------------------------------
# exact ball geometry for affine-margin rules (threshold, homogeneous linear)
# ---------------------------------------------------------------------------


def _affine_form(h: Hypothesis) -> tuple[np.ndarray, float] | None:
    """Unit normal a and offset b with margin(x) = a.x + b, |margin| = boundary distance."""
    if isinstance(h, Threshold):
        return np.array([1.0]), -h.t
    if isinstance(h, LinearHomogeneous):
        return h.w, 0.0
    return None


def _dist_two_halfspaces(x, u, p, v, q) -> float:
    """Distance from x to {z : u.z + p >= 0, v.z + q >= 0}; u, v unit vectors.

    Returns inf when the intersection is empty.
    """
    fa = float(u @ x + p)
    fb = float(v @ x + q)
    if fa >= 0.0 and fb >= 0.0:
        return 0.0
    uv = float(u @ v)
    det = 1.0 - uv * uv
    if det < 1e-14:
        if uv > 0.0:  # parallel, same direction: binding constraint wins
            return max(0.0, -fa, -fb)
        # anti-parallel slab {-p <= u.z <= q}; empty when p + q < 0
        if p + q < -1e-14:
            return math.inf
        return max(0.0, -fa, -fb)
    best = math.inf
    if fa < 0.0 and fb - fa * uv >= -1e-14:
        best = -fa
    if fb < 0.0 and fa - fb * uv >= -1e-14:
        best = min(best, -fb)
    if math.isinf(best):
        c1 = (fa - uv * fb) / det
        c2 = (fb - uv * fa) / det
        best = math.sqrt(max(fa * c1 + fb * c2, 0.0))
    return best


def _exact_ball_sup(kind: LossKind, h, hstar, x: np.ndarray, eta: float) -> int:
    ah, bh = _affine_form(h)
    astar, bstar = _affine_form(hstar)
    if x.shape[0] != ah.shape[0] or x.shape[0] != astar.shape[0]:
        raise ValueError("dimension mismatch between point and hypotheses")
    gh = float(ah @ x + bh)
    gstar = float(astar @ x + bstar)

    if kind is LossKind.ST:
        ystar = 1 if gstar >= 0.0 else -1
        if ystar > 0:
            return int(gh - eta < 0.0)
        return int(gh + eta >= 0.0)

    identical = np.allclose(ah, astar, atol=1e-12) and abs(bh - bstar) <= 1e-12
    if identical:
        return 0

    if kind is LossKind.TL:
        d1 = _dist_two_halfspaces(x, ah, bh, -astar, -bstar)
        d2 = _dist_two_halfspaces(x, -ah, -bh, astar, bstar)
        return int(min(d1, d2) <= eta)

    # CA: perturbation must keep hstar's label at x while h gets it wrong
    ystar = 1 if gstar >= 0.0 else -1
    if ystar > 0:
        d = _dist_two_halfspaces(x, astar, bstar, -ah, -bh)
    else:
        d = _dist_two_halfspaces(x, -astar, -bstar, ah, bh)
    return int(d <= eta)


def _sample_ball(rng: np.random.Generator, x: np.ndarray, eta: float, n: int) -> np.ndarray:
    d = x.shape[0]
    g = rng.standard_normal((n, d))
    g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), 1e-300)
    radii = eta * rng.random(n) ** (1.0 / d)
    return x[None, :] + g * radii[:, None]


def robust_loss_sup(
    kind: LossKind,
    h: Hypothesis,
    hstar: Hypothesis,
    x,
    model: PerturbationModel,
    *,
    n_samples: int = DEFAULT_BALL_SAMPLES,
    seed: int = 0,
) -> RobustLossResult:
    """Supremum of the loss over the perturbation set of x.

    Exact for threshold / homogeneous linear hypotheses under a metric ball,
    exact enumeration for finite perturbation maps, and otherwise a sampled
    lower bound over `n_samples` uniform ball draws (count reported).
    """
    _check_pair(h, hstar)
    x = _as_point(x)

    if isinstance(model, FiniteMap):
        zs = model.perturbations(x)
        val = max(fixed_loss(kind, h, hstar, x, z) for z in zs)
        return RobustLossResult(value=val, method="enumerated")

    if isinstance(model, MetricBall):
        if _affine_form(h) is not None:
            val = _exact_ball_sup(kind, h, hstar, x, model.radius)
            return RobustLossResult(value=val, method="exact")
        if not isinstance(h, OffsetBoundary):
            raise ValueError(f"unsupported hypothesis type {type(h).__name__}")
        rng = np.random.Generator(np.random.Philox(key=seed))
        zs = _sample_ball(rng, x, model.radius, n_samples)
        zs = np.vstack([x[None, :], zs])  # the identity perturbation always counts
        val = int(max(fixed_loss(kind, h, hstar, x, z) for z in zs))
        log.debug("sampled robust loss: kind=%s n=%d value=%d", kind.value, n_samples, val)
        return RobustLossResult(value=val, method="sampled-lower-bound", samples=n_samples)

    raise ValueError(f"unsupported perturbation model {type(model).__name__}")
