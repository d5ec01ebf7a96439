"""Conjugate claim-count models and their quadratic expected-loss functions.

Two risk/prior families are supported:

* Poisson claim counts with a Gamma(alpha, beta) prior on the rate
  (beta is a rate parameter, so the prior mean is alpha/beta).
* Geometric claim counts (failures before the first success, support
  {0, 1, 2, ...}) with a Beta(alpha, beta) prior on the success
  probability, so the risk premium is (1 - theta)/theta.

Under the net premium principle, both the collective loss (moments taken
under the prior) and the Bayes loss (moments under the posterior) are
quadratics ``P**2 - 2*mean*P + second_moment`` whose minimizer is the
corresponding mean.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import InsufficientPriorMoments


class Family(enum.Enum):
    """Risk/prior conjugate pair."""

    POISSON_GAMMA = "poisson-gamma"
    GEOMETRIC_BETA = "geometric-beta"


class MomentMode(enum.Enum):
    """Reading of the constant term of a Poisson-Gamma quadratic loss.

    PREDICTIVE_AT_MEAN uses m*(m + 1) where m is the (prior or posterior)
    mean of the rate: the second moment of a Poisson count whose rate is
    pinned at m.  PRIOR_SECOND_MOMENT uses the exact second moment of the
    rate, alpha*(alpha + 1)/beta**2.  The geometric-beta family has a
    single exact constant, so both modes coincide there.

    The choice moves the breakpoints of the aggregated loss (and hence
    which expert is active at the optimum) but never the vertex of a
    single expert's quadratic.
    """

    PREDICTIVE_AT_MEAN = "predictive-at-mean"
    PRIOR_SECOND_MOMENT = "prior-second-moment"


@dataclass(frozen=True)
class PriorSpec:
    """An expert's prior belief about the risk parameter."""

    family: Family
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0.0) or not (self.beta > 0.0):
            raise ValueError(
                f"prior parameters must be positive, got alpha={self.alpha}, beta={self.beta}"
            )


@dataclass(frozen=True)
class ClaimHistory:
    """Observed experience: t periods with k total claims over them."""

    periods: int
    total_claims: int

    def __post_init__(self) -> None:
        if self.periods < 0 or self.total_claims < 0:
            raise ValueError("periods and total_claims must be nonnegative")
        if self.periods == 0 and self.total_claims > 0:
            raise ValueError("cannot have claims without observed periods")

    @classmethod
    def from_claims(cls, claims: Iterable[int]) -> "ClaimHistory":
        """Reduce a per-period claim vector to its sufficient statistic (t, k)."""
        counts = list(claims)
        return cls(periods=len(counts), total_claims=int(sum(counts)))

    @classmethod
    def none(cls) -> "ClaimHistory":
        return cls(0, 0)


@dataclass(frozen=True)
class QuadraticLoss:
    """The quadratic ``P**2 - 2*mean*P + second_moment``.

    ``mean`` is the expected risk premium and ``second_moment`` the constant
    term; the unconstrained minimizer is exactly ``mean`` and the minimal
    value is ``second_moment - mean**2 >= 0``.
    """

    mean: float
    second_moment: float

    def __post_init__(self) -> None:
        if self.mean < 0.0:
            raise ValueError(f"mean must be nonnegative, got {self.mean}")
        # Allow for rounding in affine-transformed moments.
        if self.second_moment < self.mean**2 - 1e-12 * max(1.0, self.mean**2):
            raise ValueError(
                f"second_moment {self.second_moment} below mean**2 {self.mean**2}"
            )

    def value_at(self, premium: float) -> float:
        """Evaluate the loss at a premium."""
        return premium * premium - 2.0 * self.mean * premium + self.second_moment

    def affine(self, a: float, b: float) -> "QuadraticLoss":
        """Loss of the risk-premium variable rescaled to ``a*Z + b`` (a, b >= 0)."""
        if a < 0.0 or b < 0.0:
            raise ValueError("affine coefficients must be nonnegative")
        mean = a * self.mean + b
        second = a * a * self.second_moment + 2.0 * a * b * self.mean + b * b
        return QuadraticLoss(mean, second)


@dataclass(frozen=True)
class Expert:
    """A labelled prior opinion with a confidence weight in (0, 1]."""

    label: str
    prior: PriorSpec
    confidence: float

    def __post_init__(self) -> None:
        if not (0.0 < self.confidence <= 1.0):
            raise ValueError(f"confidence must be in (0, 1], got {self.confidence}")


def posterior(prior: PriorSpec, history: ClaimHistory) -> PriorSpec:
    """Conjugate update of a prior on (t periods, k total claims).

    Poisson-Gamma maps (alpha, beta) to (alpha + k, beta + t); the
    geometric-beta pair maps to (alpha + t, beta + k).
    """
    t, k = history.periods, history.total_claims
    if t == 0:
        return prior
    if prior.family is Family.POISSON_GAMMA:
        return PriorSpec(prior.family, prior.alpha + k, prior.beta + t)
    return PriorSpec(prior.family, prior.alpha + t, prior.beta + k)


def collective_loss(prior: PriorSpec, mode: MomentMode) -> QuadraticLoss:
    """Quadratic expected loss under the prior.

    Raises
    ------
    InsufficientPriorMoments
        For a geometric-beta prior with alpha <= 2, where the second
        moment of (1 - theta)/theta does not exist.
    """
    if prior.family is Family.POISSON_GAMMA:
        mean = prior.alpha / prior.beta
        if mode is MomentMode.PREDICTIVE_AT_MEAN:
            second = mean * (mean + 1.0)
        else:
            second = prior.alpha * (prior.alpha + 1.0) / (prior.beta * prior.beta)
        return QuadraticLoss(mean, second)
    if prior.alpha <= 2.0:
        raise InsufficientPriorMoments(
            f"geometric-beta prior needs alpha > 2 for its second moment, got alpha={prior.alpha}"
        )
    a, b = prior.alpha, prior.beta
    mean = b / (a - 1.0)
    second = b * (b + 1.0) / ((a - 1.0) * (a - 2.0))
    return QuadraticLoss(mean, second)


def bayes_loss(prior: PriorSpec, history: ClaimHistory, mode: MomentMode) -> QuadraticLoss:
    """Quadratic expected loss under the posterior after ``history``.

    Identical to ``collective_loss(posterior(prior, history), mode)``; for a
    geometric-beta prior this needs alpha + t > 2.
    """
    return collective_loss(posterior(prior, history), mode)


def loss_at(loss: QuadraticLoss, premium: float) -> float:
    """Functional form of :meth:`QuadraticLoss.value_at`."""
    return loss.value_at(premium)


def affine_transform(loss: QuadraticLoss, a: float, b: float) -> QuadraticLoss:
    """Functional form of :meth:`QuadraticLoss.affine`."""
    return loss.affine(a, b)
