"""Premiums for expert panels: ordered-weighted aggregates and classical ratios.

A panel holds one conjugate prior per expert (all from the same family)
plus confidences summing to one.  The collective premium minimizes the
aggregated prior losses, the Bayes premium the aggregated posterior
losses, and the bonus-malus percentage is 100 times their ratio, so a
claim-free history earns a discount below the 100 base line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCollective
from .models import (
    ClaimHistory,
    Expert,
    Family,
    MomentMode,
    PriorSpec,
    QuadraticLoss,
    bayes_loss,
    collective_loss,
)
from .optimizer import (
    PremiumSolution,
    ScaledLossSet,
    SearchDomain,
    default_domain,
    grid_oracle,
    minimize_owa,
)
from .owa import WeightVector, preset_weights


@dataclass(frozen=True)
class ExpertPanel:
    """Experts with a shared model family and a moment-mode choice."""

    experts: tuple[Expert, ...]
    moment_mode: MomentMode = MomentMode.PREDICTIVE_AT_MEAN

    def __post_init__(self) -> None:
        if len(self.experts) == 0:
            raise ValueError("panel needs at least one expert")
        families = {expert.prior.family for expert in self.experts}
        if len(families) > 1:
            raise ValueError("all experts in a panel must share one model family")
        total = sum(expert.confidence for expert in self.experts)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"confidences must sum to 1 (got {total})")

    def __len__(self) -> int:
        return len(self.experts)

    @property
    def family(self) -> Family:
        return self.experts[0].prior.family

    @property
    def confidences(self) -> tuple[float, ...]:
        return tuple(expert.confidence for expert in self.experts)


def collective_loss_set(panel: ExpertPanel) -> ScaledLossSet:
    """Confidence-scaled prior losses, one per expert."""
    return ScaledLossSet(
        losses=tuple(collective_loss(e.prior, panel.moment_mode) for e in panel.experts),
        confidences=panel.confidences,
    )


def bayes_loss_set(panel: ExpertPanel, history: ClaimHistory) -> ScaledLossSet:
    """Confidence-scaled posterior losses after ``history``."""
    return ScaledLossSet(
        losses=tuple(
            bayes_loss(e.prior, history, panel.moment_mode) for e in panel.experts
        ),
        confidences=panel.confidences,
    )


def owa_collective_premium(
    panel: ExpertPanel,
    weights: WeightVector,
    domain: SearchDomain | None = None,
) -> PremiumSolution:
    """Premium minimizing the ordered-weighted aggregate of prior losses."""
    return minimize_owa(collective_loss_set(panel), weights, domain)


def owa_bayes_premium(
    panel: ExpertPanel,
    history: ClaimHistory,
    weights: WeightVector,
    domain: SearchDomain | None = None,
) -> PremiumSolution:
    """Premium minimizing the ordered-weighted aggregate of posterior losses."""
    return minimize_owa(bayes_loss_set(panel, history), weights, domain)


def bonus_malus(
    panel: ExpertPanel,
    history: ClaimHistory,
    weights: WeightVector,
    domain: SearchDomain | None = None,
) -> float:
    """100 * Bayes premium / collective premium for the given history."""
    base = owa_collective_premium(panel, weights, domain).premium
    if base <= 1e-12:
        raise DegenerateCollective(f"collective premium {base} is numerically zero")
    updated = owa_bayes_premium(panel, history, weights, domain).premium
    return 100.0 * updated / base


def lemaire_premium(expert: Expert, history: ClaimHistory) -> float:
    """Classical single-expert percentage: 100 * posterior mean / prior mean.

    Uses the closed-form means, so no second moment (and no moment-mode
    choice) is involved.
    """
    prior = expert.prior
    t, k = history.periods, history.total_claims
    if prior.family is Family.POISSON_GAMMA:
        base = prior.alpha / prior.beta
        updated = (prior.alpha + k) / (prior.beta + t)
    else:
        base = prior.beta / (prior.alpha - 1.0)
        updated = (prior.beta + k) / (prior.alpha + t - 1.0)
    return 100.0 * updated / base


@dataclass(frozen=True)
class BonusMalusTable:
    """Bonus-malus percentages on a (periods t, total claims k) grid.

    Row 0 is the base row: a single 100 cell (no periods observed means no
    claims are possible).  Rows 1..T hold one cell per claim count 0..K.
    """

    family: Family
    weights: WeightVector
    moment_mode: MomentMode
    rows: tuple[tuple[float, ...], ...]

    @property
    def periods(self) -> int:
        return len(self.rows) - 1

    @property
    def max_claims(self) -> int:
        return len(self.rows[-1]) - 1 if len(self.rows) > 1 else 0

    def cell(self, t: int, k: int) -> float:
        return self.rows[t][k]

    def to_csv(self, precision: int = 4) -> str:
        """Grid as CSV with header ``t\\k,0,...,K``; short rows are padded."""
        width = self.max_claims + 1
        lines = ["t\\k," + ",".join(str(k) for k in range(width))]
        for t, row in enumerate(self.rows):
            cells = [f"{value:.{precision}f}" for value in row]
            cells += [""] * (width - len(cells))
            lines.append(f"{t}," + ",".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self, precision: int = 4) -> str:
        """Grid as an aligned plain-text block mirroring the CSV layout."""
        width = self.max_claims + 1
        col = max(precision + 6, 10)
        header = "t\\k".ljust(5) + "".join(str(k).rjust(col) for k in range(width))
        lines = [
            f"bonus-malus table  family={self.family.value}  "
            f"weights={self.weights.preset_name or list(self.weights.weights)}  "
            f"mode={self.moment_mode.value}",
            header,
        ]
        for t, row in enumerate(self.rows):
            cells = "".join(f"{value:.{precision}f}".rjust(col) for value in row)
            lines.append(str(t).ljust(5) + cells)
        return "\n".join(lines) + "\n"


def bonus_malus_table(
    panel: ExpertPanel,
    weights: WeightVector,
    periods: int,
    max_claims: int,
    domain: SearchDomain | None = None,
) -> BonusMalusTable:
    """Bonus-malus grid for t = 0..periods and k = 0..max_claims.

    The collective premium is computed once and reused for every cell.
    """
    if periods < 0 or max_claims < 0:
        raise ValueError("periods and max_claims must be nonnegative")
    base = owa_collective_premium(panel, weights, domain).premium
    if base <= 1e-12:
        raise DegenerateCollective(f"collective premium {base} is numerically zero")
    rows: list[tuple[float, ...]] = [(100.0,)]
    for t in range(1, periods + 1):
        row = []
        for k in range(max_claims + 1):
            history = ClaimHistory(periods=t, total_claims=k)
            updated = owa_bayes_premium(panel, history, weights, domain).premium
            row.append(100.0 * updated / base)
        rows.append(tuple(row))
    return BonusMalusTable(
        family=panel.family,
        weights=weights,
        moment_mode=panel.moment_mode,
        rows=tuple(rows),
    )


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class PropertyAudit:
    checks: tuple[PropertyCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


def _nonadditivity_witness() -> tuple[float, float, float]:
    """Two fixed Poisson-Gamma risks whose max-aggregate premiums do not add.

    Risk one has expert priors Gamma(2, 10) and Gamma(2, 20); risk two has
    Gamma(3, 10) and Gamma(7, 20); their sum (shared rate denominators)
    has Gamma(5, 10) and Gamma(9, 20).
    """
    weights = preset_weights("max", 2)
    premiums = []
    for specs in (((2, 10), (2, 20)), ((3, 10), (7, 20)), ((5, 10), (9, 20))):
        experts = tuple(
            Expert(f"expert-{i + 1}", PriorSpec(Family.POISSON_GAMMA, a, b), 0.5)
            for i, (a, b) in enumerate(specs)
        )
        panel = ExpertPanel(experts, MomentMode.PREDICTIVE_AT_MEAN)
        premiums.append(owa_collective_premium(panel, weights).premium)
    return premiums[0], premiums[1], premiums[2]


def audit_properties(
    panel: ExpertPanel,
    weights: WeightVector,
    trials: int = 100,
    seed: int = 0,
    domain: SearchDomain | None = None,
) -> PropertyAudit:
    """Randomized checks of the classical premium-principle properties.

    Requires nonnegative weights.  Checks, in order: the optimum lies in
    the hull of the expert means (risk loading / maximal loss); rescaling
    every loss to a*Z + b moves the optimum to a*P + b (linear
    invariance, random a, b in [0, 3], tolerance 1e-6); a panel of
    constant risks C is charged exactly C; and the fixed two-risk witness
    demonstrating that the max-aggregate premium is not additive.
    """
    if not weights.nonnegative:
        raise ValueError("property audit requires nonnegative weights")
    rng = np.random.default_rng(seed)
    checks: list[PropertyCheck] = []

    loss_set = collective_loss_set(panel)
    base = minimize_owa(loss_set, weights, domain)
    means = [loss.mean for loss in loss_set.losses]
    low, high = min(means), max(means)
    hull_ok = low - 1e-9 <= base.premium <= high + 1e-9
    checks.append(
        PropertyCheck(
            "hull-containment",
            hull_ok,
            f"premium {base.premium:.6f} vs mean hull [{low:.6f}, {high:.6f}]",
        )
    )

    worst = 0.0
    for _ in range(trials):
        a = float(rng.uniform(0.0, 3.0))
        b = float(rng.uniform(0.0, 3.0))
        moved = ScaledLossSet(
            losses=tuple(loss.affine(a, b) for loss in loss_set.losses),
            confidences=loss_set.confidences,
        )
        transformed = minimize_owa(moved, weights)
        worst = max(worst, abs(transformed.premium - (a * base.premium + b)))
    checks.append(
        PropertyCheck(
            "linear-invariance",
            worst <= 1e-6,
            f"max |P(aZ+b) - (a*P+b)| = {worst:.3e} over {trials} trials",
        )
    )

    worst = 0.0
    for _ in range(trials):
        level = float(rng.uniform(0.0, 5.0))
        constant = ScaledLossSet(
            losses=tuple(
                QuadraticLoss(level, level * level) for _ in panel.experts
            ),
            confidences=panel.confidences,
        )
        found = minimize_owa(constant, weights)
        worst = max(worst, abs(found.premium - level))
    checks.append(
        PropertyCheck(
            "constant-risk",
            worst <= 1e-12 * max(1.0, 5.0),
            f"max |P(C) - C| = {worst:.3e} over {trials} trials",
        )
    )

    first, second, combined = _nonadditivity_witness()
    witness_ok = (
        abs(first - 0.2) <= 1e-9
        and abs(second - 0.35) <= 1e-9
        and abs(combined - 0.5) <= 1e-9
        and abs(combined - (first + second)) > 1e-6
    )
    checks.append(
        PropertyCheck(
            "additivity-counterexample",
            witness_ok,
            f"P(X+Y) = {combined:.4f} differs from P(X) + P(Y) = {first + second:.4f}",
        )
    )

    return PropertyAudit(tuple(checks))


def grid_agreement(
    panel: ExpertPanel,
    weights: WeightVector,
    step: float = 1e-4,
    domain: SearchDomain | None = None,
) -> tuple[float, float]:
    """(premium gap, loss gap) between the exact optimizer and the grid oracle."""
    loss_set = collective_loss_set(panel)
    if domain is None:
        domain = default_domain(loss_set)
    exact = minimize_owa(loss_set, weights, domain)
    brute = grid_oracle(loss_set, weights, domain, step)
    return abs(exact.premium - brute.premium), exact.loss_value - brute.loss_value
