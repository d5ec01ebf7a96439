"""Solver-agnostic export of the premium optimization models.

Two formulations are emitted for external cross-validation.  The mixed
integer model introduces epigraph variables y_i >= c_i L_i(P), sorted
copies z_1 >= ... >= z_n linked by big-M assignment binaries w_i_j, and
minimizes the weighted sum of the sorted values.  When the weights are
non-increasing and nonnegative the binaries can be dropped: the sorting
becomes an assignment problem whose dual yields a continuous model with
variables v_j, u_i and constraints v_j + u_i >= w_i * y_j.

Exports are files only; no solver is invoked.  A feasibility certificate
can be produced by substituting a finite-search solution into the mixed
integer model.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import WeightsNotConvexCase
from .optimizer import PremiumSolution, ScaledLossSet, SearchDomain
from .owa import WeightVector, ordering

_BIG_M_SLACK = 1.1


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "continuous" | "binary"
    lower: float | None
    upper: float | None


@dataclass(frozen=True)
class Constraint:
    """``linear + quadratic  <sense>  rhs`` with sparse coefficient terms."""

    name: str
    linear: tuple[tuple[float, str], ...]
    quadratic: tuple[tuple[float, str, str], ...]
    sense: str  # "<=", ">=", "=="
    rhs: float
    kind: str  # "linear" | "convex-quadratic"


@dataclass(frozen=True)
class ModelDescription:
    name: str
    variables: tuple[Variable, ...]
    objective: tuple[tuple[float, str], ...]  # minimized
    constraints: tuple[Constraint, ...]
    big_m: float | None
    expert_count: int

    def variable(self, name: str) -> Variable:
        for var in self.variables:
            if var.name == name:
                return var
        raise KeyError(name)

    def lp_format(self) -> str:
        """CPLEX-LP style text; quadratic rows are carried as comments.

        The structured-text twin from :meth:`text_format` is authoritative,
        since plain LP dialects cannot express the quadratic rows.
        """
        lines = [f"\\ {self.name}: ordered-weighted premium model", "Minimize"]
        lines.append(" obj: " + _lp_expr(self.objective))
        lines.append("Subject To")
        deferred = []
        for ctr in self.constraints:
            if ctr.kind == "linear":
                lines.append(f" {ctr.name}: {_lp_expr(ctr.linear)} {_lp_sense(ctr.sense)} {ctr.rhs:.12g}")
            else:
                deferred.append(ctr)
        for ctr in deferred:
            rendered = _lp_expr(ctr.linear + tuple((coef, f"{u} * {v}") for coef, u, v in ctr.quadratic))
            lines.append(f"\\ quadratic {ctr.name}: {rendered} {_lp_sense(ctr.sense)} {ctr.rhs:.12g}")
        lines.append("Bounds")
        for var in self.variables:
            if var.kind == "binary":
                continue
            low = "-inf" if var.lower is None else f"{var.lower:.12g}"
            high = "+inf" if var.upper is None else f"{var.upper:.12g}"
            lines.append(f" {low} <= {var.name} <= {high}")
        binaries = [var.name for var in self.variables if var.kind == "binary"]
        if binaries:
            lines.append("Binary")
            lines.append(" " + " ".join(binaries))
        lines.append("End")
        return "\n".join(lines) + "\n"

    def text_format(self) -> str:
        """Full structured listing, quadratic terms included exactly."""
        lines = [
            f"model {self.name}",
            f"experts {self.expert_count}",
            f"big_m {'none' if self.big_m is None else f'{self.big_m!r}'}",
            "variables",
        ]
        for var in self.variables:
            low = "-inf" if var.lower is None else repr(var.lower)
            high = "+inf" if var.upper is None else repr(var.upper)
            lines.append(f"  {var.name} {var.kind} [{low}, {high}]")
        lines.append("minimize")
        lines.append("  " + _text_expr(self.objective, ()))
        lines.append("constraints")
        for ctr in self.constraints:
            rendered = _text_expr(ctr.linear, ctr.quadratic)
            lines.append(f"  {ctr.name} ({ctr.kind}): {rendered} {ctr.sense} {ctr.rhs!r}")
        lines.append("end")
        return "\n".join(lines) + "\n"

    def write(self, base: str | Path) -> tuple[Path, Path]:
        """Write ``<base>.lp`` and ``<base>.model.txt``; returns both paths."""
        base = Path(base)
        base.parent.mkdir(parents=True, exist_ok=True)
        lp_path = base.with_name(base.name + ".lp")
        txt_path = base.with_name(base.name + ".model.txt")
        lp_path.write_text(self.lp_format())
        txt_path.write_text(self.text_format())
        return lp_path, txt_path


def _lp_sense(sense: str) -> str:
    return {"<=": "<=", ">=": ">=", "==": "="}[sense]


def _lp_expr(terms: tuple[tuple[float, str], ...]) -> str:
    if not terms:
        return "0"
    parts = []
    for index, (coef, name) in enumerate(terms):
        sign = "-" if coef < 0 else ("+" if index else "")
        parts.append(f"{sign} {abs(coef):.12g} {name}".strip())
    return " ".join(parts)


def _text_expr(
    linear: tuple[tuple[float, str], ...],
    quadratic: tuple[tuple[float, str, str], ...],
) -> str:
    parts = [f"{coef!r}*{u}*{v}" for coef, u, v in quadratic]
    parts += [f"{coef!r}*{name}" for coef, name in linear]
    return " + ".join(parts) if parts else "0"


def big_m_value(loss_set: ScaledLossSet, domain: SearchDomain) -> float:
    """A constant dominating every scaled loss over the domain.

    Each c_i L_i is convex in the premium, so its maximum over a closed
    interval is at an endpoint; a 10% slack is added on top.
    """
    peak = 0.0
    for endpoint in (domain.lower, domain.upper):
        peak = max(peak, max(loss_set.scaled_values(endpoint)))
    return _BIG_M_SLACK * peak


def _epigraph_constraints(loss_set: ScaledLossSet, names: list[str]) -> list[Constraint]:
    constraints = []
    for index, (loss, conf) in enumerate(zip(loss_set.losses, loss_set.confidences)):
        constraints.append(
            Constraint(
                name=f"loss_epigraph_{index + 1}",
                linear=((-2.0 * conf * loss.mean, "P"), (-1.0, names[index])),
                quadratic=((conf, "P", "P"),),
                sense="<=",
                rhs=-conf * loss.second_moment,
                kind="convex-quadratic",
            )
        )
    return constraints


def build_owap_model(
    loss_set: ScaledLossSet,
    weights: WeightVector,
    domain: SearchDomain | None = None,
) -> ModelDescription:
    """Mixed integer second-order-cone model for arbitrary ordered weights.

    Variables: continuous y_i (loss epigraphs), z_j (sorted copies), P, and
    n^2 assignment binaries w_i_j; constraints: n quadratic epigraphs, n^2
    big-M links y_i <= z_j + M(1 - w_i_j), n - 1 ordering rows
    z_j >= z_{j+1}, and n assignment rows sum_i w_i_j = 1.
    """
    from .optimizer import default_domain

    n = len(loss_set)
    if len(weights) != n:
        raise ValueError(f"{n} losses vs {len(weights)} weights")
    if domain is None:
        domain = default_domain(loss_set)
    big_m = big_m_value(loss_set, domain)

    y = [f"y_{i + 1}" for i in range(n)]
    z = [f"z_{j + 1}" for j in range(n)]
    variables = [Variable("P", "continuous", domain.lower, domain.upper)]
    variables += [Variable(name, "continuous", 0.0, None) for name in y]
    variables += [Variable(name, "continuous", 0.0, None) for name in z]
    variables += [
        Variable(f"w_{i + 1}_{j + 1}", "binary", 0.0, 1.0)
        for i in range(n)
        for j in range(n)
    ]

    constraints = _epigraph_constraints(loss_set, y)
    for i in range(n):
        for j in range(n):
            constraints.append(
                Constraint(
                    name=f"link_{i + 1}_{j + 1}",
                    linear=((1.0, y[i]), (-1.0, z[j]), (big_m, f"w_{i + 1}_{j + 1}")),
                    quadratic=(),
                    sense="<=",
                    rhs=big_m,
                    kind="linear",
                )
            )
    for j in range(n - 1):
        constraints.append(
            Constraint(
                name=f"order_{j + 1}",
                linear=((1.0, z[j]), (-1.0, z[j + 1])),
                quadratic=(),
                sense=">=",
                rhs=0.0,
                kind="linear",
            )
        )
    for j in range(n):
        constraints.append(
            Constraint(
                name=f"assign_{j + 1}",
                linear=tuple((1.0, f"w_{i + 1}_{j + 1}") for i in range(n)),
                quadratic=(),
                sense="==",
                rhs=1.0,
                kind="linear",
            )
        )

    objective = tuple((float(weights.weights[j]), z[j]) for j in range(n))
    return ModelDescription(
        name="owap",
        variables=tuple(variables),
        objective=objective,
        constraints=tuple(constraints),
        big_m=big_m,
        expert_count=n,
    )


def build_convex_model(loss_set: ScaledLossSet, weights: WeightVector) -> ModelDescription:
    """Continuous reformulation for non-increasing, nonnegative weights.

    Variables: y_j loss epigraphs, free dual variables v_j and u_i, and P;
    objective sum v_j + sum u_i; linking rows v_j + u_i >= w_i * y_j.
    """
    n = len(loss_set)
    if len(weights) != n:
        raise ValueError(f"{n} losses vs {len(weights)} weights")
    if not weights.nonnegative or not weights.nonincreasing:
        raise WeightsNotConvexCase(
            "continuous reformulation needs nonnegative, non-increasing weights"
        )

    y = [f"y_{j + 1}" for j in range(n)]
    v = [f"v_{j + 1}" for j in range(n)]
    u = [f"u_{i + 1}" for i in range(n)]
    variables = [Variable("P", "continuous", 0.0, None)]
    variables += [Variable(name, "continuous", 0.0, None) for name in y]
    variables += [Variable(name, "continuous", None, None) for name in v + u]

    constraints = _epigraph_constraints(loss_set, y)
    for i in range(n):
        for j in range(n):
            constraints.append(
                Constraint(
                    name=f"dual_assign_{i + 1}_{j + 1}",
                    linear=((1.0, v[j]), (1.0, u[i]), (-float(weights.weights[i]), y[j])),
                    quadratic=(),
                    sense=">=",
                    rhs=0.0,
                    kind="linear",
                )
            )

    objective = tuple((1.0, name) for name in v + u)
    return ModelDescription(
        name="owap-convex",
        variables=tuple(variables),
        objective=objective,
        constraints=tuple(constraints),
        big_m=None,
        expert_count=n,
    )


def certificate_values(
    loss_set: ScaledLossSet, solution: PremiumSolution
) -> dict[str, float]:
    """Variable assignment induced by a finite-search solution.

    y_i are the scaled losses at the optimal premium, z_j their
    non-increasing sort, and the assignment binaries follow the sorting
    permutation.
    """
    n = len(loss_set)
    premium = solution.premium
    scaled = loss_set.scaled_values(premium)
    perm = ordering(scaled)
    values: dict[str, float] = {"P": premium}
    for i in range(n):
        values[f"y_{i + 1}"] = scaled[i]
    for j, expert in enumerate(perm):
        values[f"z_{j + 1}"] = scaled[expert]
        for i in range(n):
            values[f"w_{i + 1}_{j + 1}"] = 1.0 if i == expert else 0.0
    return values


@dataclass(frozen=True)
class CertificateReport:
    feasible: bool
    max_violation: float
    objective_value: float
    violations: tuple[str, ...]


def check_certificate(
    model: ModelDescription,
    values: dict[str, float],
    tol: float = 1e-6,
) -> CertificateReport:
    """Verify a variable assignment against every constraint and bound."""
    violations: list[str] = []
    worst = 0.0

    def note(amount: float, text: str) -> None:
        nonlocal worst
        worst = max(worst, amount)
        if amount > tol:
            violations.append(f"{text} (violation {amount:.3e})")

    for var in model.variables:
        value = values[var.name]
        if var.lower is not None:
            note(var.lower - value, f"{var.name} below lower bound")
        if var.upper is not None:
            note(value - var.upper, f"{var.name} above upper bound")
        if var.kind == "binary":
            note(abs(value - round(value)), f"{var.name} not integral")

    for ctr in model.constraints:
        total = sum(coef * values[name] for coef, name in ctr.linear)
        total += sum(coef * values[u] * values[v] for coef, u, v in ctr.quadratic)
        if ctr.sense == "<=":
            note(total - ctr.rhs, f"{ctr.name} exceeds rhs")
        elif ctr.sense == ">=":
            note(ctr.rhs - total, f"{ctr.name} below rhs")
        else:
            note(abs(total - ctr.rhs), f"{ctr.name} not tight")

    objective = sum(coef * values[name] for coef, name in model.objective)
    return CertificateReport(
        feasible=not violations,
        max_violation=worst,
        objective_value=float(objective),
        violations=tuple(violations),
    )
