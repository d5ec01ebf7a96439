"""Run configuration files: schema, loading, and panel construction.

A run configuration is a single JSON document::

    {
      "family": "poisson-gamma" | "geometric-beta",
      "moment_mode": "paper-prop1" | "prior-second-moment",   // optional
      "experts": [{"label": ..., "alpha": ..., "beta": ..., "confidence": ...}, ...],
      "weights": "<preset token>" | [w1, ..., wn],
      "table": {"periods": T, "claims": K},                   // optional
      "domain": {"p_max": ...},                               // optional
      "output": {"format": "csv" | "text", "precision": 4}    // optional
    }

Config paths are resolved against the filesystem first; names of the form
``paper/<scenario>`` fall back to the scenario files bundled with the
package (``bonusmalus table --config paper/table8_sum``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .models import Expert, Family, MomentMode, PriorSpec
from .optimizer import SearchDomain
from .owa import WeightVector, preset_weights
from .premiums import ExpertPanel

#: Wire tokens for the moment-mode flag and config field.
MOMENT_MODE_TOKENS = {
    "paper-prop1": MomentMode.PREDICTIVE_AT_MEAN,
    "prior-second-moment": MomentMode.PRIOR_SECOND_MOMENT,
}

_FAMILY_TOKENS = {
    "poisson-gamma": Family.POISSON_GAMMA,
    "geometric-beta": Family.GEOMETRIC_BETA,
}

_OUTPUT_FORMATS = ("csv", "text")


@dataclass(frozen=True)
class RunConfig:
    family: Family
    moment_mode: MomentMode
    experts: tuple[Expert, ...]
    weights_spec: str | tuple[float, ...]
    table_periods: int
    table_claims: int
    p_max: float | None
    output_format: str
    precision: int

    @property
    def panel(self) -> ExpertPanel:
        try:
            return ExpertPanel(self.experts, self.moment_mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def weights(self) -> WeightVector:
        n = len(self.experts)
        if isinstance(self.weights_spec, str):
            return preset_weights(self.weights_spec, n)
        if len(self.weights_spec) != n:
            raise ConfigError(
                f"explicit weights have length {len(self.weights_spec)}, panel has {n} experts"
            )
        return WeightVector(self.weights_spec)

    @property
    def domain(self) -> SearchDomain | None:
        return None if self.p_max is None else SearchDomain(upper=self.p_max)


def moment_mode_from_token(token: str) -> MomentMode:
    try:
        return MOMENT_MODE_TOKENS[token.strip().lower()]
    except KeyError:
        raise ConfigError(
            f"unknown moment mode {token!r}; expected one of {sorted(MOMENT_MODE_TOKENS)}"
        ) from None


def resolve_config_path(spec: str) -> Path:
    """Resolve a --config value to a readable file.

    Filesystem paths win; otherwise ``paper/<name>`` (with or without the
    .json suffix) is looked up among the bundled scenario files.
    """
    path = Path(spec)
    if path.is_file():
        return path
    name = spec.replace("\\", "/")
    if name.startswith("paper/"):
        stem = name[len("paper/") :]
        if not stem.endswith(".json"):
            stem += ".json"
        bundled = resources.files("bonusmalus").joinpath("paper", stem)
        if bundled.is_file():
            return Path(str(bundled))
    raise ConfigError(f"config {spec!r} not found (no such file or bundled scenario)")


def load_config(spec: str) -> RunConfig:
    """Load and validate a run configuration."""
    path = resolve_config_path(spec)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")

    def fail(message: str) -> ConfigError:
        return ConfigError(f"{path}: {message}")

    family_token = raw.get("family")
    if family_token not in _FAMILY_TOKENS:
        raise fail(f"family must be one of {sorted(_FAMILY_TOKENS)}, got {family_token!r}")
    family = _FAMILY_TOKENS[family_token]

    mode = moment_mode_from_token(str(raw.get("moment_mode", "paper-prop1")))

    experts_raw = raw.get("experts")
    if not isinstance(experts_raw, list) or not experts_raw:
        raise fail("experts must be a non-empty list")
    experts = []
    for index, entry in enumerate(experts_raw):
        if not isinstance(entry, dict):
            raise fail(f"experts[{index}] must be an object")
        try:
            prior = PriorSpec(family, float(entry["alpha"]), float(entry["beta"]))
            experts.append(
                Expert(
                    label=str(entry.get("label", f"expert-{index + 1}")),
                    prior=prior,
                    confidence=float(entry["confidence"]),
                )
            )
        except KeyError as exc:
            raise fail(f"experts[{index}] missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            raise fail(f"experts[{index}]: {exc}") from None

    weights_raw = raw.get("weights", "sum")
    weights_spec: str | tuple[float, ...]
    if isinstance(weights_raw, str):
        weights_spec = weights_raw
    elif isinstance(weights_raw, list):
        try:
            weights_spec = tuple(float(w) for w in weights_raw)
        except (TypeError, ValueError) as exc:
            raise fail(f"weights: {exc}") from None
    else:
        raise fail("weights must be a preset token or a list of numbers")

    table_raw = raw.get("table", {})
    if not isinstance(table_raw, dict):
        raise fail("table must be an object")
    periods = int(table_raw.get("periods", 4))
    claims = int(table_raw.get("claims", 4))
    if periods < 0 or claims < 0:
        raise fail("table periods and claims must be nonnegative")

    domain_raw = raw.get("domain", {})
    if not isinstance(domain_raw, dict):
        raise fail("domain must be an object")
    p_max = domain_raw.get("p_max")
    if p_max is not None:
        p_max = float(p_max)
        if p_max <= 0:
            raise fail("domain.p_max must be positive")

    output_raw = raw.get("output", {})
    if not isinstance(output_raw, dict):
        raise fail("output must be an object")
    output_format = str(output_raw.get("format", "csv")).lower()
    if output_format not in _OUTPUT_FORMATS:
        raise fail(f"output.format must be one of {_OUTPUT_FORMATS}")
    precision = int(output_raw.get("precision", 4))
    if precision < 0:
        raise fail("output.precision must be nonnegative")

    config = RunConfig(
        family=family,
        moment_mode=mode,
        experts=tuple(experts),
        weights_spec=weights_spec,
        table_periods=periods,
        table_claims=claims,
        p_max=p_max,
        output_format=output_format,
        precision=precision,
    )
    config.panel  # validate confidences and family homogeneity eagerly
    config.weights  # validate preset token / explicit length eagerly
    return config
