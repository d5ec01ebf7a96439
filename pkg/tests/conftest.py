import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reference_tables import BETA_EXPERTS, GAMMA_EXPERTS, PORTFOLIO_1, PORTFOLIO_2

from bonusmalus import (
    Expert,
    ExpertPanel,
    Family,
    MomentMode,
    PortfolioHistogram,
    PriorSpec,
    QuadraticLoss,
    ScaledLossSet,
)


@pytest.fixture
def example1_set() -> ScaledLossSet:
    """Three experts with losses P^2-2P+2, P^2-4P+6, P^2-6P+12, equal weight."""
    losses = (QuadraticLoss(1.0, 2.0), QuadraticLoss(2.0, 6.0), QuadraticLoss(3.0, 12.0))
    return ScaledLossSet(losses, (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0))


def make_panel(params, family, mode=MomentMode.PREDICTIVE_AT_MEAN) -> ExpertPanel:
    experts = tuple(
        Expert(f"expert-{i + 1}", PriorSpec(family, a, b), 1.0 / len(params))
        for i, (a, b) in enumerate(params)
    )
    return ExpertPanel(experts, mode)


@pytest.fixture
def gamma_panel() -> ExpertPanel:
    return make_panel(GAMMA_EXPERTS, Family.POISSON_GAMMA)


@pytest.fixture
def gamma_panel_prior_moment() -> ExpertPanel:
    return make_panel(GAMMA_EXPERTS, Family.POISSON_GAMMA, MomentMode.PRIOR_SECOND_MOMENT)


@pytest.fixture
def beta_panel() -> ExpertPanel:
    return make_panel(BETA_EXPERTS, Family.GEOMETRIC_BETA)


@pytest.fixture
def portfolio_1() -> PortfolioHistogram:
    return PortfolioHistogram(buckets=PORTFOLIO_1, open_top=True)


@pytest.fixture
def portfolio_2() -> PortfolioHistogram:
    return PortfolioHistogram(buckets=PORTFOLIO_2, open_top=True)


def random_loss_set(rng, n=None) -> ScaledLossSet:
    """A random panel: means in (0, 5), excess second moments in [0, 5]."""
    if n is None:
        n = int(rng.integers(2, 7))
    means = rng.uniform(0.01, 5.0, size=n)
    seconds = means**2 + rng.uniform(0.0, 5.0, size=n)
    conf = rng.uniform(0.05, 1.0, size=n)
    conf = conf / conf.sum()
    losses = tuple(QuadraticLoss(float(m), float(s)) for m, s in zip(means, seconds))
    return ScaledLossSet(losses, tuple(float(x) for x in conf))


def nonnegative_presets(n: int) -> list[str]:
    """Every nonnegative named pattern, instantiated for n experts."""
    presets = ["sum", "max", "min", "median", "kcentrum:2", "antikcentrum:2"]
    presets.append("trimmed:1:1" if n >= 3 else "trimmed:1:0")
    presets.append("hurwicz:0.5")
    return presets
