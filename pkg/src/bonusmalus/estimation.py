"""Maximum-likelihood fitting of prior parameters from claim-count histograms.

Mixing a Poisson count over a Gamma(alpha, beta) rate gives a negative
binomial marginal; mixing a geometric count over a Beta(alpha, beta)
success probability gives a beta-geometric marginal.  Both log-pmfs are
evaluated through log-gamma functions, and the parameters are fitted by a
derivative-free simplex search over (log alpha, log beta) with a
moments-based start plus four perturbed restarts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.special import betaln, gammaln

from .models import Family, PriorSpec

_MAX_ITER = 10_000
_XATOL = 1e-8  # simplex diameter
_FATOL = 1e-10  # objective improvement
# Multiplicative (alpha, beta) perturbations for the restart starts.
_RESTARTS = ((2.0, 1.0), (0.5, 1.0), (1.0, 2.0), (1.0, 0.5))


@dataclass(frozen=True)
class PortfolioHistogram:
    """Policy counts per observed claim count.

    ``buckets`` maps strictly increasing claim counts to policy counts;
    with ``open_top`` the final bucket means "this many claims or more".
    """

    buckets: tuple[tuple[int, int], ...]
    open_top: bool = False

    def __post_init__(self) -> None:
        if len(self.buckets) == 0:
            raise ValueError("histogram needs at least one bucket")
        counts = [k for k, _ in self.buckets]
        if any(k < 0 for k in counts) or any(p < 0 for _, p in self.buckets):
            raise ValueError("claim and policy counts must be nonnegative")
        if any(b <= a for a, b in zip(counts, counts[1:])):
            raise ValueError("claim counts must be strictly increasing")
        if self.total_policies <= 0:
            raise ValueError("histogram must cover at least one policy")

    @property
    def total_policies(self) -> int:
        return sum(p for _, p in self.buckets)

    @property
    def total_claims(self) -> int:
        """Total claims with the open-top bucket taken at its nominal count."""
        return sum(k * p for k, p in self.buckets)

    @property
    def sample_mean(self) -> float:
        return self.total_claims / self.total_policies

    @property
    def sample_variance(self) -> float:
        mean = self.sample_mean
        total = sum(p * (k - mean) ** 2 for k, p in self.buckets)
        return total / self.total_policies


@dataclass(frozen=True)
class FitResult:
    prior: PriorSpec
    log_likelihood: float
    iterations: int
    converged: bool


def log_pmf(prior: PriorSpec, counts: np.ndarray) -> np.ndarray:
    """Log marginal (prior-predictive) pmf at integer claim counts.

    Poisson-Gamma: Gamma(a + k) / (Gamma(a) k!) * (b/(1+b))**a * (1/(1+b))**k.
    Geometric-Beta: B(a + 1, b + k) / B(a, b).
    """
    counts = np.asarray(counts, dtype=float)
    a, b = prior.alpha, prior.beta
    if prior.family is Family.POISSON_GAMMA:
        return (
            gammaln(a + counts)
            - gammaln(a)
            - gammaln(counts + 1.0)
            + a * np.log(b / (1.0 + b))
            - counts * np.log1p(b)
        )
    return betaln(a + 1.0, b + counts) - betaln(a, b)


def marginal_log_likelihood(
    hist: PortfolioHistogram,
    prior: PriorSpec,
    censored_top: bool = False,
) -> float:
    """Histogram log-likelihood under the prior-predictive distribution.

    With ``censored_top`` (and an open-top histogram) the final bucket
    contributes log P(X >= k_top) instead of log pmf(k_top).
    """
    counts = np.asarray([k for k, _ in hist.buckets], dtype=float)
    policies = np.asarray([p for _, p in hist.buckets], dtype=float)
    terms = log_pmf(prior, counts)
    if censored_top and hist.open_top:
        top = int(counts[-1])
        below = np.exp(log_pmf(prior, np.arange(top))).sum()
        tail = np.log1p(-min(below, 1.0 - 1e-300))
        terms = terms.copy()
        terms[-1] = tail
    return float(np.dot(policies, terms))


def moment_init(hist: PortfolioHistogram, family: Family) -> PriorSpec:
    """Moments-based starting point for the simplex search.

    Poisson-Gamma matches mean m and variance v via beta = m/(v - m) when
    overdispersed, falling back to (1, 1/m); geometric-beta pins the mean
    with alpha = 3, beta = 2m.  Degenerate all-zero histograms fall back
    to unit-scale parameters.
    """
    mean = hist.sample_mean
    if family is Family.POISSON_GAMMA:
        if mean <= 0.0:
            return PriorSpec(family, 1.0, 1.0)
        variance = hist.sample_variance
        if variance > mean:
            beta = mean / (variance - mean)
            return PriorSpec(family, mean * beta, beta)
        return PriorSpec(family, 1.0, 1.0 / mean)
    if mean <= 0.0:
        return PriorSpec(family, 3.0, 1.0)
    return PriorSpec(family, 3.0, 2.0 * mean)


def fit_prior(
    hist: PortfolioHistogram,
    family: Family,
    censored_top: bool = False,
) -> FitResult:
    """Maximize the marginal log-likelihood over (log alpha, log beta).

    Runs a Nelder-Mead simplex from the moments start and four perturbed
    copies, keeping the best optimum.  Convergence requires the objective
    improvement below 1e-10 and the simplex diameter below 1e-8 within
    10000 iterations; otherwise the best point so far is returned with
    ``converged=False``.
    """
    positive = [k for k, p in hist.buckets if p > 0]
    if len(positive) < 2:
        raise ValueError("need at least two distinct claim counts with positive mass")

    counts = np.asarray([k for k, _ in hist.buckets], dtype=float)
    policies = np.asarray([p for _, p in hist.buckets], dtype=float)
    top = int(counts[-1])
    use_tail = censored_top and hist.open_top

    def negative_log_likelihood(x: np.ndarray) -> float:
        alpha, beta = np.exp(x)
        if not np.isfinite(alpha) or not np.isfinite(beta):
            return np.inf
        prior = PriorSpec(family, float(alpha), float(beta))
        terms = log_pmf(prior, counts)
        if use_tail:
            below = np.exp(log_pmf(prior, np.arange(top))).sum()
            terms = terms.copy()
            terms[-1] = np.log1p(-min(below, 1.0 - 1e-300))
        return -float(np.dot(policies, terms))

    start = moment_init(hist, family)
    starts = [(start.alpha, start.beta)]
    starts += [(start.alpha * fa, start.beta * fb) for fa, fb in _RESTARTS]

    best = None
    iterations = 0
    for alpha0, beta0 in starts:
        result = minimize(
            negative_log_likelihood,
            x0=np.log([alpha0, beta0]),
            method="Nelder-Mead",
            options={
                "maxiter": _MAX_ITER,
                "xatol": _XATOL,
                "fatol": _FATOL,
            },
        )
        iterations += int(result.nit)
        if best is None or result.fun < best.fun:
            best = result

    alpha, beta = np.exp(best.x)
    return FitResult(
        prior=PriorSpec(family, float(alpha), float(beta)),
        log_likelihood=-float(best.fun),
        iterations=iterations,
        converged=bool(best.success),
    )


def read_portfolio_csv(path: str | Path) -> PortfolioHistogram:
    """Read a ``claims,policies`` CSV; a trailing ``<k>+`` row marks an open top."""
    rows: list[tuple[int, int]] = []
    open_top = False
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty portfolio file") from None
        if [cell.strip().lower() for cell in header] != ["claims", "policies"]:
            raise ValueError(f"{path}: expected header 'claims,policies', got {header}")
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if open_top:
                raise ValueError(f"{path}:{line}: open-top bucket must be the last row")
            if len(row) != 2:
                raise ValueError(f"{path}:{line}: expected two columns, got {row}")
            claims_text = row[0].strip()
            if claims_text.endswith("+"):
                open_top = True
                claims_text = claims_text[:-1]
            rows.append((int(claims_text), int(row[1])))
    if not rows:
        raise ValueError(f"{path}: no histogram rows")
    return PortfolioHistogram(buckets=tuple(rows), open_top=open_top)
