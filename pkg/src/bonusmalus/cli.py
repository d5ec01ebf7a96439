"""Command-line interface.

Subcommands: ``table`` (bonus-malus grid), ``premium`` (one history),
``fit`` (prior parameters from a portfolio CSV), ``audit`` (grid-oracle
agreement plus the premium-principle property checks), and
``export-model`` (optimization model files).

Exit codes: 0 success, 1 validation error, 2 numerical or model error,
3 audit failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from .config import (
    MOMENT_MODE_TOKENS,
    RunConfig,
    load_config,
    moment_mode_from_token,
)
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
from .estimation import fit_prior, marginal_log_likelihood, read_portfolio_csv
from .formulations import (
    build_convex_model,
    build_owap_model,
    certificate_values,
    check_certificate,
)
from .models import ClaimHistory, Family, MomentMode, PriorSpec
from .optimizer import default_domain, grid_oracle, minimize_owa
from .premiums import (
    audit_properties,
    bayes_loss_set,
    bonus_malus_table,
    collective_loss_set,
    owa_bayes_premium,
    owa_collective_premium,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_MODEL = 2
EXIT_AUDIT = 3

_VALIDATION_ERRORS = (ConfigError, InvalidPresetParameter, LengthMismatch, ValueError)
_MODEL_ERRORS = (
    InsufficientPriorMoments,
    UnboundedProblem,
    DegenerateCollective,
    WeightsNotConvexCase,
    PremiumModelError,
)

_FAMILY_CHOICES = {
    "poisson-gamma": Family.POISSON_GAMMA,
    "geometric-beta": Family.GEOMETRIC_BETA,
}


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _load(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    if getattr(args, "moment_mode", None):
        mode = moment_mode_from_token(args.moment_mode)
        config = RunConfig(
            family=config.family,
            moment_mode=mode,
            experts=config.experts,
            weights_spec=config.weights_spec,
            table_periods=config.table_periods,
            table_claims=config.table_claims,
            p_max=config.p_max,
            output_format=config.output_format,
            precision=config.precision,
        )
    if getattr(args, "precision", None) is not None:
        config = RunConfig(
            family=config.family,
            moment_mode=config.moment_mode,
            experts=config.experts,
            weights_spec=config.weights_spec,
            table_periods=config.table_periods,
            table_claims=config.table_claims,
            p_max=config.p_max,
            output_format=config.output_format,
            precision=args.precision,
        )
    return config


def _cmd_table(args: argparse.Namespace) -> int:
    config = _load(args)
    panel = config.panel
    weights = config.weights
    if args.threads > 1:
        # Cells are independent given the shared collective premium; a pool
        # changes wall time only, never the output bytes.
        base = owa_collective_premium(panel, weights, config.domain).premium
        histories = [
            ClaimHistory(t, k)
            for t in range(1, config.table_periods + 1)
            for k in range(config.table_claims + 1)
        ]
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            cells = list(
                pool.map(
                    lambda h: 100.0
                    * owa_bayes_premium(panel, h, weights, config.domain).premium
                    / base,
                    histories,
                )
            )
        width = config.table_claims + 1
        rows = [(100.0,)] + [
            tuple(cells[t * width : (t + 1) * width])
            for t in range(config.table_periods)
        ]
        from .premiums import BonusMalusTable

        table = BonusMalusTable(panel.family, weights, panel.moment_mode, tuple(rows))
    else:
        table = bonus_malus_table(
            panel, weights, config.table_periods, config.table_claims, config.domain
        )
    rendered = (
        table.to_csv(config.precision)
        if config.output_format == "csv"
        else table.to_text(config.precision)
    )
    _emit(rendered, args.out)
    return EXIT_OK


def _cmd_premium(args: argparse.Namespace) -> int:
    config = _load(args)
    panel = config.panel
    weights = config.weights
    history = ClaimHistory(periods=args.periods, total_claims=args.claims)
    collective = owa_collective_premium(panel, weights, config.domain)
    bayes = owa_bayes_premium(panel, history, weights, config.domain)
    if collective.premium <= 1e-12:
        raise DegenerateCollective("collective premium is numerically zero")
    ratio = 100.0 * bayes.premium / collective.premium
    p = config.precision
    labels = [expert.label for expert in panel.experts]
    lines = [
        f"history            : t={history.periods} k={history.total_claims}",
        f"collective premium : {collective.premium:.{p}f}",
        f"bayes premium      : {bayes.premium:.{p}f}",
        f"bonus-malus        : {ratio:.{p}f}",
        "ordering collective: " + " >= ".join(labels[i] for i in collective.permutation),
        "ordering bayes     : " + " >= ".join(labels[i] for i in bayes.permutation),
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    hist = read_portfolio_csv(args.portfolio)
    family = _FAMILY_CHOICES[args.family]
    result = fit_prior(hist, family, censored_top=args.censored_top)
    lines = [
        f"family         : {family.value}",
        f"policies       : {hist.total_policies}",
        f"sample mean    : {hist.sample_mean:.6f}",
        f"alpha          : {result.prior.alpha:.6f}",
        f"beta           : {result.prior.beta:.6f}",
        f"log-likelihood : {result.log_likelihood:.6f}",
        f"iterations     : {result.iterations}",
        f"converged      : {'yes' if result.converged else 'no'}",
    ]
    if (args.reference_alpha is None) != (args.reference_beta is None):
        raise ConfigError("--reference-alpha and --reference-beta must be given together")
    if args.reference_alpha is not None:
        reference = PriorSpec(family, args.reference_alpha, args.reference_beta)
        ref_ll = marginal_log_likelihood(hist, reference, censored_top=args.censored_top)
        dominated = result.log_likelihood >= ref_ll - 1e-6
        lines += [
            f"reference      : alpha={reference.alpha:.6f} beta={reference.beta:.6f}",
            f"reference ll   : {ref_ll:.6f}",
            f"dominance      : {'yes' if dominated else 'no'}",
        ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_audit(args: argparse.Namespace) -> int:
    config = _load(args)
    panel = config.panel
    weights = config.weights
    lines = []
    failed = False

    domain = config.domain
    if domain is None and not weights.nonnegative:
        raise UnboundedProblem(
            "negative ordered weights: set domain.p_max in the config for audits"
        )
    histories = [ClaimHistory(0, 0), ClaimHistory(1, 0), ClaimHistory(2, 3)]
    for history in histories:
        losses = bayes_loss_set(panel, history)
        scope = domain if domain is not None else default_domain(losses)
        exact = minimize_owa(losses, weights, scope)
        brute = grid_oracle(losses, weights, scope, args.grid_step)
        premium_gap = abs(exact.premium - brute.premium)
        value_gap = exact.loss_value - brute.loss_value
        ok = premium_gap <= args.grid_step + 1e-12 and value_gap <= 1e-6
        failed |= not ok
        lines.append(
            f"[{'ok' if ok else 'FAIL'}] grid agreement t={history.periods} "
            f"k={history.total_claims}: premium gap {premium_gap:.2e}, "
            f"loss gap {value_gap:.2e}"
        )

    audit = audit_properties(panel, weights, trials=args.trials, seed=0, domain=domain)
    for check in audit.checks:
        failed |= not check.passed
        lines.append(f"[{'ok' if check.passed else 'FAIL'}] {check.name}: {check.detail}")

    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_AUDIT if failed else EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    config = _load(args)
    panel = config.panel
    weights = config.weights
    history = ClaimHistory(periods=args.periods, total_claims=args.claims)
    if history.periods > 0:
        loss_set = bayes_loss_set(panel, history)
    else:
        loss_set = collective_loss_set(panel)
    domain = config.domain if config.domain is not None else default_domain(loss_set)

    lines = []
    model = build_owap_model(loss_set, weights, domain)
    lp_path, txt_path = model.write(f"{args.out}.owap")
    lines.append(f"wrote {lp_path}")
    lines.append(f"wrote {txt_path}")

    solution = minimize_owa(loss_set, weights, domain)
    report = check_certificate(model, certificate_values(loss_set, solution))
    gap = abs(report.objective_value - solution.loss_value)
    certified = report.feasible and gap <= 1e-6
    lines.append(
        f"[{'ok' if certified else 'FAIL'}] certificate: premium {solution.premium:.6f}, "
        f"max violation {report.max_violation:.2e}, objective gap {gap:.2e}"
    )

    if weights.nonnegative and weights.nonincreasing:
        convex = build_convex_model(loss_set, weights)
        lp_path, txt_path = convex.write(f"{args.out}.convex")
        lines.append(f"wrote {lp_path}")
        lines.append(f"wrote {txt_path}")
    else:
        lines.append(
            "note: continuous reformulation skipped (weights are not non-increasing nonnegative)"
        )

    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if certified else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bonusmalus",
        description=(
            "Bonus-malus premiums from multiple expert priors aggregated with "
            "ordered weighted averages."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="run config path or bundled paper/<name>")
        p.add_argument(
            "--moment-mode",
            choices=sorted(MOMENT_MODE_TOKENS),
            help="override the config's moment mode",
        )
        p.add_argument("--precision", type=int, help="override the output precision")
        p.add_argument("--out", help="write output to this file instead of stdout")

    table = sub.add_parser("table", help="write a bonus-malus table")
    add_config_options(table)
    table.add_argument("--threads", type=int, default=1, help="parallel table cells")
    table.set_defaults(handler=_cmd_table)

    premium = sub.add_parser("premium", help="premiums for one claim history")
    add_config_options(premium)
    premium.add_argument("-t", "--periods", type=int, default=0, help="observed periods")
    premium.add_argument("-k", "--claims", type=int, default=0, help="total claims over the periods")
    premium.set_defaults(handler=_cmd_premium)

    fit = sub.add_parser("fit", help="fit prior parameters to a portfolio CSV")
    fit.add_argument("portfolio", help="CSV with header claims,policies; trailing '<k>+' row allowed")
    fit.add_argument("--family", required=True, choices=sorted(_FAMILY_CHOICES))
    fit.add_argument("--censored-top", action="store_true", help="treat the open bucket as a tail probability")
    fit.add_argument("--reference-alpha", type=float, help="compare against this alpha")
    fit.add_argument("--reference-beta", type=float, help="compare against this beta")
    fit.add_argument("--out", help="write output to this file instead of stdout")
    fit.set_defaults(handler=_cmd_fit)

    audit = sub.add_parser("audit", help="grid-oracle agreement and property checks")
    add_config_options(audit)
    audit.add_argument("--grid-step", type=float, default=1e-4, help="oracle grid spacing")
    audit.add_argument("--trials", type=int, default=100, help="randomized property trials")
    audit.set_defaults(handler=_cmd_audit)

    export = sub.add_parser("export-model", help="write optimization model files")
    add_config_options(export)
    export.add_argument("-t", "--periods", type=int, default=0, help="observed periods")
    export.add_argument("-k", "--claims", type=int, default=0, help="total claims over the periods")
    export.set_defaults(handler=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    # Validation errors first: the config/preset errors subclass both
    # ValueError and the model-error base.
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except _MODEL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
