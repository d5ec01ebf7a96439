"""Ordered weighted averaging: weight vectors, named presets, evaluation.

An ordered weighted average sorts the values in non-increasing order and
takes the dot product with a weight vector, so the first weight always
applies to the largest value.  Classical statistics arise from special
weight patterns (see :func:`preset_weights`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidPresetParameter, LengthMismatch

#: Preset tokens accepted by :func:`preset_weights` and run configurations.
PRESET_TOKENS = (
    "sum",
    "max",
    "min",
    "median",
    "kcentrum:<k>",
    "antikcentrum:<k>",
    "trimmed:<k1>:<k2>",
    "range",
    "hurwicz:<h>",
)


@dataclass(frozen=True)
class WeightVector:
    """Ordered weights, largest-value position first."""

    weights: tuple[float, ...]
    preset_name: str | None = None

    def __post_init__(self) -> None:
        if len(self.weights) == 0:
            raise ValueError("weight vector cannot be empty")
        if any(w > 1.0 + 1e-12 for w in self.weights):
            raise ValueError("ordered weights must not exceed 1")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def nonnegative(self) -> bool:
        return all(w >= 0.0 for w in self.weights)

    @property
    def nonincreasing(self) -> bool:
        return all(a >= b for a, b in zip(self.weights, self.weights[1:]))


def preset_weights(preset: str, n: int) -> WeightVector:
    """Build a named weight pattern of length ``n``.

    Tokens: ``sum``, ``max``, ``min``, ``median``, ``kcentrum:k`` (sum of the
    k largest), ``antikcentrum:k`` (sum of the k smallest), ``trimmed:k1:k2``
    (drop the k1 largest and k2 smallest), ``range`` (max minus min) and
    ``hurwicz:h`` ((1-h) on the largest, h on the smallest).

    For ``median`` with even ``n`` the unit weight sits at position
    ceil((n+1)/2) of the non-increasing sort, i.e. the lower of the two
    middle values.
    """
    if n < 1:
        raise InvalidPresetParameter(f"need at least one weight, got n={n}")
    name, _, args = preset.strip().lower().partition(":")
    try:
        if name == "sum" and not args:
            w = [1.0] * n
        elif name == "max" and not args:
            w = [0.0] * n
            w[0] = 1.0
        elif name == "min" and not args:
            w = [0.0] * n
            w[-1] = 1.0
        elif name == "median" and not args:
            w = [0.0] * n
            w[(n + 1 + 1) // 2 - 1] = 1.0  # ceil((n+1)/2), 1-indexed
        elif name == "kcentrum":
            k = int(args)
            if not 1 <= k <= n:
                raise InvalidPresetParameter(f"kcentrum needs 1 <= k <= n, got k={k}, n={n}")
            w = [1.0] * k + [0.0] * (n - k)
        elif name == "antikcentrum":
            k = int(args)
            if not 1 <= k <= n:
                raise InvalidPresetParameter(f"antikcentrum needs 1 <= k <= n, got k={k}, n={n}")
            w = [0.0] * (n - k) + [1.0] * k
        elif name == "trimmed":
            k1_text, _, k2_text = args.partition(":")
            k1, k2 = int(k1_text), int(k2_text)
            if k1 < 0 or k2 < 0 or k1 + k2 >= n:
                raise InvalidPresetParameter(
                    f"trimmed needs k1, k2 >= 0 and k1 + k2 < n, got ({k1}, {k2}), n={n}"
                )
            w = [0.0] * k1 + [1.0] * (n - k1 - k2) + [0.0] * k2
        elif name == "range" and not args:
            w = [0.0] * n
            w[0] = 1.0
            w[-1] = w[-1] - 1.0  # n == 1 collapses to (0,): max == min
        elif name == "hurwicz":
            h = float(args)
            if not 0.0 <= h <= 1.0:
                raise InvalidPresetParameter(f"hurwicz needs 0 <= h <= 1, got h={h}")
            w = [0.0] * n
            w[0] = 1.0 - h
            w[-1] += h  # n == 1 collapses to (1,)
        else:
            raise InvalidPresetParameter(f"unknown preset {preset!r}")
    except ValueError as exc:  # int()/float() parse failures
        raise InvalidPresetParameter(f"malformed preset {preset!r}: {exc}") from None
    return WeightVector(tuple(w), preset_name=preset.strip().lower())


def ordering(values: Sequence[float]) -> tuple[int, ...]:
    """Indices sorting ``values`` non-increasingly, ties by original index."""
    return tuple(sorted(range(len(values)), key=lambda i: (-values[i], i)))


def owa_evaluate(values: Sequence[float], weights: WeightVector) -> float:
    """Ordered weighted average of ``values``.

    Values are sorted non-increasingly (stable in the original index) and
    dotted with the weights.
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape != (len(weights),):
        raise LengthMismatch(
            f"{vals.shape[0] if vals.ndim == 1 else vals.shape} values vs {len(weights)} weights"
        )
    order = ordering(vals.tolist())
    return float(np.dot(vals[list(order)], np.asarray(weights.weights)))
