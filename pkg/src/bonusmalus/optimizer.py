"""Exact minimization of ordered-weighted aggregates of quadratic losses.

With one confidence-scaled quadratic loss per expert, the aggregate
``OWA(c_1 L_1(P), ..., c_n L_n(P); w)`` is piecewise quadratic in the
premium P: the ordering of the scaled losses only changes where two of
them intersect.  Enumerating those breaking points, fixing the ordering
on each interval by a midpoint evaluation, and minimizing the resulting
quadratic over the closed interval yields the exact global optimum with
O(n^2) candidate intervals.

A brute-force grid evaluator is provided as an independent oracle for
tests and audits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnboundedProblem
from .models import QuadraticLoss
from .owa import WeightVector, LengthMismatch, ordering, owa_evaluate

# Scale-aware spacing below which two candidate premiums are considered equal.
_DEDUP_TOL = 1e-9
# Relative tolerance for "equal loss value" when breaking ties by premium.
_TIE_RTOL = 1e-9
# Leading coefficients below this are treated as linear (no interior vertex).
_CURVATURE_EPS = 1e-12

_CHUNK = 8192


@dataclass(frozen=True)
class SearchDomain:
    """Closed premium interval [lower, upper] searched by the optimizer."""

    upper: float
    lower: float = 0.0

    def __post_init__(self) -> None:
        if not (self.upper >= self.lower >= 0.0):
            raise ValueError(f"need 0 <= lower <= upper, got [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ScaledLossSet:
    """One quadratic loss per expert plus confidences summing to one."""

    losses: tuple[QuadraticLoss, ...]
    confidences: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.losses) != len(self.confidences):
            raise ValueError("losses and confidences must have equal length")
        if len(self.losses) == 0:
            raise ValueError("need at least one expert")
        if any(c <= 0.0 for c in self.confidences):
            raise ValueError("confidences must be positive")
        total = sum(self.confidences)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"confidences must sum to 1 (got {total})")

    def __len__(self) -> int:
        return len(self.losses)

    def scaled_values(self, premium: float) -> list[float]:
        """The confidence-scaled losses c_i * L_i(premium)."""
        return [c * loss.value_at(premium) for loss, c in zip(self.losses, self.confidences)]


@dataclass(frozen=True)
class Breakpoints:
    """Strictly increasing premiums delimiting constant-order intervals."""

    points: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class PremiumSolution:
    """An optimal premium with its aggregated loss and diagnostic context.

    ``interval_index`` is the 0-based index of the breakpoint interval that
    produced the optimum (None for grid-search results), and ``permutation``
    lists expert indices in non-increasing scaled-loss order there.
    """

    premium: float
    loss_value: float
    interval_index: int | None
    permutation: tuple[int, ...]


def _arrays(loss_set: ScaledLossSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = np.asarray(loss_set.confidences, dtype=float)
    means = np.asarray([loss.mean for loss in loss_set.losses], dtype=float)
    seconds = np.asarray([loss.second_moment for loss in loss_set.losses], dtype=float)
    return c, means, seconds


def _pair_crossings(loss_set: ScaledLossSet) -> np.ndarray:
    """All positive premiums where two scaled losses intersect, sorted."""
    n = len(loss_set)
    if n < 2:
        return np.empty(0)
    c, means, seconds = _arrays(loss_set)
    i, j = np.triu_indices(n, 1)
    # c_i L_i(P) - c_j L_j(P) = a P^2 + b P + d
    a = c[i] - c[j]
    b = -2.0 * (c[i] * means[i] - c[j] * means[j])
    d = c[i] * seconds[i] - c[j] * seconds[j]

    scale = np.maximum(c[i], c[j])
    is_linear = np.abs(a) <= 1e-12 * scale
    roots: list[np.ndarray] = []

    lin_b = b[is_linear]
    lin_d = d[is_linear]
    solvable = np.abs(lin_b) > 1e-12 * scale[is_linear]
    roots.append(-lin_d[solvable] / lin_b[solvable])

    qa, qb, qd = a[~is_linear], b[~is_linear], d[~is_linear]
    disc = qb * qb - 4.0 * qa * qd
    real = disc >= 0.0
    qa, qb, qd, disc = qa[real], qb[real], qd[real], disc[real]
    sq = np.sqrt(disc)
    q = -0.5 * (qb + np.copysign(sq, np.where(qb == 0.0, 1.0, qb)))
    roots.append(q / qa)
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(q != 0.0, qd / q, np.nan)
    roots.append(second[np.isfinite(second)])

    merged = np.concatenate(roots) if roots else np.empty(0)
    merged = merged[np.isfinite(merged) & (merged > 0.0)]
    merged.sort()
    return merged


def default_domain(loss_set: ScaledLossSet) -> SearchDomain:
    """[0, U] with U = max expert mean + 1, stretched to the last crossing + 1.

    For nonnegative weights the optimum lies between the smallest and the
    largest expert mean, so the bound is safe; extending past the final
    intersection keeps a full-width terminal interval available.
    """
    _, means, _ = _arrays(loss_set)
    upper = float(means.max()) + 1.0
    crossings = _pair_crossings(loss_set)
    if crossings.size:
        upper = max(upper, float(crossings[-1]) + 1.0)
    return SearchDomain(upper=upper)


def breaking_points(loss_set: ScaledLossSet, domain: SearchDomain) -> Breakpoints:
    """Pairwise intersection premiums inside the domain, with its endpoints.

    Near-duplicate roots are merged at a spacing of 1e-9 * max(1, value);
    identical scaled losses contribute no point.  The sequence always starts
    at the domain's lower bound and ends at its upper bound, so consecutive
    pairs tile the whole search interval.
    """
    lo, hi = domain.lower, domain.upper
    if hi - lo <= _DEDUP_TOL * max(1.0, hi):
        return Breakpoints((lo,))
    crossings = _pair_crossings(loss_set)
    inside = crossings[(crossings > lo) & (crossings < hi)]
    points = [lo]
    for value in inside:
        if value - points[-1] > _DEDUP_TOL * max(1.0, value):
            points.append(float(value))
    if hi - points[-1] > _DEDUP_TOL * max(1.0, hi):
        points.append(hi)
    else:
        points[-1] = hi
    return Breakpoints(tuple(points))


def _select_tied(premiums: np.ndarray, values: np.ndarray) -> int:
    """Index of the smallest premium among (relative-tolerance) minimal values."""
    vmin = float(values.min())
    tol = _TIE_RTOL * max(1.0, abs(vmin))
    tied = np.flatnonzero(values <= vmin + tol)
    return int(tied[np.argmin(premiums[tied])])


def minimize_owa(
    loss_set: ScaledLossSet,
    weights: WeightVector,
    domain: SearchDomain | None = None,
) -> PremiumSolution:
    """Globally minimize the ordered-weighted aggregate of the scaled losses.

    With ``domain=None`` a default domain is derived for nonnegative
    weights; negative weights (the range preset) can make the aggregate
    unbounded below on [0, inf), so they require an explicit finite domain.

    Each breakpoint interval is handled by sorting the scaled losses at its
    midpoint (stable in the expert index), assembling the aggregated
    quadratic for that ordering, and taking its vertex when the curvature
    is positive and the vertex interior, otherwise the better endpoint.
    Ties in the aggregated loss (relative 1e-9) are broken toward the
    smallest premium.
    """
    n = len(loss_set)
    if len(weights) != n:
        raise LengthMismatch(f"{n} losses vs {len(weights)} weights")
    if domain is None:
        if not weights.nonnegative:
            raise UnboundedProblem(
                "negative ordered weights require an explicit finite search domain"
            )
        domain = default_domain(loss_set)

    points = breaking_points(loss_set, domain).points
    w = np.asarray(weights.weights)
    c, means, seconds = _arrays(loss_set)
    c_mean = c * means
    c_second = c * seconds

    if len(points) == 1:
        premium = points[0]
        return PremiumSolution(
            premium=premium,
            loss_value=owa_evaluate(loss_set.scaled_values(premium), weights),
            interval_index=0,
            permutation=ordering(loss_set.scaled_values(premium)),
        )

    lows = np.asarray(points[:-1])
    highs = np.asarray(points[1:])
    m = lows.size
    best_premium = np.empty(m)
    best_value = np.empty(m)

    for start in range(0, m, _CHUNK):
        sl = slice(start, min(start + _CHUNK, m))
        lo = lows[sl]
        hi = highs[sl]
        mid = 0.5 * (lo + hi)
        # Scaled losses at the midpoints: (chunk, n).
        vals = np.square(mid)[:, None] * c - 2.0 * np.outer(mid, c_mean) + c_second
        order = np.argsort(-vals, axis=1, kind="stable")
        curv = c[order] @ w
        half_slope = c_mean[order] @ w  # aggregate is curv*P^2 - 2*half_slope*P + const
        const = c_second[order] @ w

        convex = curv > _CURVATURE_EPS
        with np.errstate(divide="ignore", invalid="ignore"):
            vertex = np.where(convex, half_slope / np.where(convex, curv, 1.0), lo)
        vertex = np.clip(vertex, lo, hi)
        candidates = np.stack([lo, vertex, hi], axis=1)
        values = (
            curv[:, None] * np.square(candidates)
            - 2.0 * half_slope[:, None] * candidates
            + const[:, None]
        )
        vmin = values.min(axis=1, keepdims=True)
        tol = _TIE_RTOL * np.maximum(1.0, np.abs(vmin))
        masked = np.where(values <= vmin + tol, candidates, np.inf)
        pick = masked.argmin(axis=1)
        rows = np.arange(lo.size)
        best_premium[sl] = candidates[rows, pick]
        best_value[sl] = values[rows, pick]

    winner = _select_tied(best_premium, best_value)
    premium = float(best_premium[winner])
    scaled = loss_set.scaled_values(0.5 * (points[winner] + points[winner + 1]))
    return PremiumSolution(
        premium=premium,
        loss_value=owa_evaluate(loss_set.scaled_values(premium), weights),
        interval_index=winner,
        permutation=ordering(scaled),
    )


def sum_closed_form(loss_set: ScaledLossSet) -> float:
    """Optimal premium for all-ones weights: the confidence-weighted mean."""
    return float(sum(c * loss.mean for loss, c in zip(loss_set.losses, loss_set.confidences)))


def grid_oracle(
    loss_set: ScaledLossSet,
    weights: WeightVector,
    domain: SearchDomain | None,
    step: float,
) -> PremiumSolution:
    """Brute-force minimization over an equally spaced premium grid.

    Independent of the breakpoint path: every grid point is evaluated with
    :func:`owa_evaluate` semantics and the best (first, hence smallest)
    premium is returned.  Intended for tests and audit runs.
    """
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    n = len(loss_set)
    if len(weights) != n:
        raise LengthMismatch(f"{n} losses vs {len(weights)} weights")
    if domain is None:
        if not weights.nonnegative:
            raise UnboundedProblem(
                "negative ordered weights require an explicit finite search domain"
            )
        domain = default_domain(loss_set)

    grid = np.arange(domain.lower, domain.upper + 0.5 * step, step)
    if grid.size == 0 or grid[-1] < domain.upper - 1e-12 * max(1.0, domain.upper):
        grid = np.append(grid, domain.upper)
    grid[-1] = min(grid[-1], domain.upper)

    w = np.asarray(weights.weights)
    c, means, seconds = _arrays(loss_set)
    c_mean = c * means
    c_second = c * seconds

    best_value = np.inf
    best_premium = domain.lower
    for start in range(0, grid.size, _CHUNK):
        chunk = grid[start : start + _CHUNK]
        vals = np.square(chunk)[:, None] * c - 2.0 * np.outer(chunk, c_mean) + c_second
        agg = -np.sort(-vals, axis=1) @ w
        idx = int(np.argmin(agg))
        if agg[idx] < best_value:
            best_value = float(agg[idx])
            best_premium = float(chunk[idx])

    return PremiumSolution(
        premium=best_premium,
        loss_value=best_value,
        interval_index=None,
        permutation=ordering(loss_set.scaled_values(best_premium)),
    )
