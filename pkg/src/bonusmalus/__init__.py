"""Bonus-malus premiums from multiple expert priors aggregated with OWA operators."""

from .errors import (
    ConfigError,
    DegenerateCollective,
    InsufficientPriorMoments,
    InvalidPresetParameter,
    LengthMismatch,
    PremiumModelError,
    UnboundedProblem,
    WeightsNotConvexCase,
)
from .estimation import (
    FitResult,
    PortfolioHistogram,
    fit_prior,
    marginal_log_likelihood,
    moment_init,
    read_portfolio_csv,
)
from .formulations import (
    ModelDescription,
    build_convex_model,
    build_owap_model,
    certificate_values,
    check_certificate,
)
from .models import (
    ClaimHistory,
    Expert,
    Family,
    MomentMode,
    PriorSpec,
    QuadraticLoss,
    affine_transform,
    bayes_loss,
    collective_loss,
    loss_at,
    posterior,
)
from .optimizer import (
    Breakpoints,
    PremiumSolution,
    ScaledLossSet,
    SearchDomain,
    breaking_points,
    default_domain,
    grid_oracle,
    minimize_owa,
    sum_closed_form,
)
from .owa import WeightVector, ordering, owa_evaluate, preset_weights
from .premiums import (
    BonusMalusTable,
    ExpertPanel,
    PropertyAudit,
    audit_properties,
    bayes_loss_set,
    bonus_malus,
    bonus_malus_table,
    collective_loss_set,
    lemaire_premium,
    owa_bayes_premium,
    owa_collective_premium,
)

__version__ = "0.1.0"

__all__ = [
    "BonusMalusTable",
    "Breakpoints",
    "ClaimHistory",
    "ConfigError",
    "DegenerateCollective",
    "Expert",
    "ExpertPanel",
    "Family",
    "FitResult",
    "InsufficientPriorMoments",
    "InvalidPresetParameter",
    "LengthMismatch",
    "ModelDescription",
    "MomentMode",
    "PortfolioHistogram",
    "PremiumModelError",
    "PremiumSolution",
    "PriorSpec",
    "PropertyAudit",
    "QuadraticLoss",
    "ScaledLossSet",
    "SearchDomain",
    "UnboundedProblem",
    "WeightVector",
    "WeightsNotConvexCase",
    "affine_transform",
    "audit_properties",
    "bayes_loss",
    "bayes_loss_set",
    "bonus_malus",
    "bonus_malus_table",
    "breaking_points",
    "build_convex_model",
    "build_owap_model",
    "certificate_values",
    "check_certificate",
    "collective_loss",
    "collective_loss_set",
    "default_domain",
    "fit_prior",
    "grid_oracle",
    "lemaire_premium",
    "loss_at",
    "marginal_log_likelihood",
    "minimize_owa",
    "moment_init",
    "ordering",
    "owa_bayes_premium",
    "owa_collective_premium",
    "owa_evaluate",
    "posterior",
    "preset_weights",
    "read_portfolio_csv",
    "sum_closed_form",
]
