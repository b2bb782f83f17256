"""Sample and probability-weighted moments, and the targets they are matched to.

Conventions, fixed across the package:

* order 1 -- arithmetic mean
* order 2 -- unbiased variance, divisor ``n - 1``
* order 3 -- standardised skewness ``(1/n) sum((x-mu)^3) / sigma^3``
* order 4 -- excess kurtosis  ``(1/n) sum((x-mu)^4) / sigma^4 - 3``
* order >= 5 -- raw central moment ``(1/n) sum((x-mu)^k)``

The probability-weighted analogues replace counts with the total weight
``sum(p)`` and centre on a supplied target mean (and target variance for the
standardised orders), because during selection the reference distribution is
the target, not the weighted sample itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import (
    DegenerateWeight,
    DuplicateCriterion,
    InsufficientData,
    InvalidCriterion,
    LengthMismatch,
    MissingPrerequisiteTarget,
    OutOfRangeProbability,
    ZeroVariance,
)

__all__ = [
    "TargetCriterion",
    "TargetSet",
    "sample_moment",
    "expected_size",
    "expected_moment",
]


@dataclass(frozen=True)
class TargetCriterion:
    """One target: feature name, moment order, target value."""

    feature: str
    order: int
    value: float

    def __post_init__(self):
        if not isinstance(self.order, int) or self.order < 1:
            raise InvalidCriterion(f"order must be a positive integer, got {self.order!r}")
        value = float(self.value)
        if not np.isfinite(value):
            raise InvalidCriterion(f"target for ({self.feature!r}, {self.order}) is not finite")
        if self.order == 2 and value < 0.0:
            raise InvalidCriterion(f"variance target for {self.feature!r} is negative")
        object.__setattr__(self, "value", value)


@dataclass(frozen=True)
class TargetSet:
    """Collection of criteria with prerequisite checks.

    Any order >= 2 requires an order-1 target for the same feature, and the
    standardised orders 3 and 4 additionally require order 2, since those
    statistics are centred and scaled by the lower-order targets.
    """

    criteria: tuple[TargetCriterion, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        criteria = tuple(self.criteria)
        object.__setattr__(self, "criteria", criteria)
        index: dict[tuple[str, int], float] = {}
        for c in criteria:
            key = (c.feature, c.order)
            if key in index:
                raise DuplicateCriterion(f"duplicate target for {key}")
            index[key] = c.value
        for c in criteria:
            if c.order >= 2 and (c.feature, 1) not in index:
                raise MissingPrerequisiteTarget(
                    f"({c.feature!r}, {c.order}) needs an order-1 target"
                )
            if c.order in (3, 4) and (c.feature, 2) not in index:
                raise MissingPrerequisiteTarget(
                    f"({c.feature!r}, {c.order}) needs an order-2 target"
                )
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.criteria)

    def __iter__(self) -> Iterator[TargetCriterion]:
        return iter(self.criteria)

    def has(self, feature: str, order: int) -> bool:
        return (feature, order) in self._index

    def value_of(self, feature: str, order: int) -> float:
        try:
            return self._index[(feature, order)]
        except KeyError:
            raise MissingPrerequisiteTarget(f"no target for ({feature!r}, {order})") from None

    def features(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for c in self.criteria:
            seen.setdefault(c.feature, None)
        return tuple(seen)

    @staticmethod
    def from_json(text: str | bytes) -> "TargetSet":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidCriterion(f"targets JSON does not parse: {exc}") from None
        if not isinstance(raw, list):
            raise InvalidCriterion("targets JSON must be an array of criterion objects")
        criteria = []
        for item in raw:
            if not isinstance(item, dict) or not {"feature", "order", "value"} <= set(item):
                raise InvalidCriterion(f"criterion {item!r} needs feature/order/value")
            order = item["order"]
            if isinstance(order, float) and order.is_integer():
                order = int(order)
            criteria.append(TargetCriterion(str(item["feature"]), order, float(item["value"])))
        return TargetSet(tuple(criteria))

    def to_json(self) -> str:
        rows = [
            {"feature": c.feature, "order": c.order, "value": float(c.value)}
            for c in self.criteria
        ]
        return json.dumps(rows, indent=2, sort_keys=True)


def sample_moment(
    values,
    order: int,
    center: float | None = None,
    scale_var: float | None = None,
) -> float:
    """Moment of ``values`` under the package conventions.

    ``center`` overrides the mean used for centring (orders >= 2) and
    ``scale_var`` overrides the variance used for standardisation (orders 3
    and 4); both default to the sample's own statistics.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n < 1:
        raise InsufficientData("no values")
    if order == 1:
        return float(np.mean(x))
    if center is None:
        center = float(np.mean(x))
    d = x - center
    if order == 2:
        if n < 2:
            raise InsufficientData("variance needs at least 2 values")
        return float(np.sum(d * d) / (n - 1))
    if order in (3, 4):
        sv = _resolve_scale_var(x, scale_var)
        if order == 3:
            return float(np.sum(d**3) / n / sv**1.5)
        return float(np.sum(d**4) / n / sv**2 - 3.0)
    return float(np.sum(d**order) / n)


def _resolve_scale_var(x: np.ndarray, scale_var: float | None) -> float:
    if scale_var is None:
        if x.size < 2:
            raise InsufficientData("standardised moments need at least 2 values")
        mu = float(np.mean(x))
        scale_var = float(np.sum((x - mu) ** 2) / (x.size - 1))
    sv = float(scale_var)
    if sv <= 0.0:
        raise ZeroVariance(f"variance scale {sv} is not positive")
    return sv


def expected_size(p) -> float:
    """Expected selected count ``sum(p)`` of independent inclusion probabilities."""
    q = np.asarray(p, dtype=float).ravel()
    if q.size and (q.min() < 0.0 or q.max() > 1.0):
        bad = q[(q < 0.0) | (q > 1.0)][0]
        raise OutOfRangeProbability(f"probability {bad} outside [0, 1]")
    return float(np.sum(q))


def expected_moment(
    values,
    p,
    order: int,
    target_mean: float | None = None,
    target_var: float | None = None,
) -> float:
    """Probability-weighted moment of ``values`` under inclusion weights ``p``.

    Mirrors :func:`sample_moment` with ``sum(p)`` in place of the count, but
    centres on ``target_mean`` (orders >= 2) and standardises by
    ``target_var`` (orders 3 and 4), which must be supplied.
    """
    x = np.asarray(values, dtype=float).ravel()
    q = np.asarray(p, dtype=float).ravel()
    if x.size != q.size:
        raise LengthMismatch(f"{x.size} values but {q.size} probabilities")
    total = expected_size(q)
    if order == 1:
        if total <= 0.0:
            raise DegenerateWeight("expected size is zero")
        return float(np.dot(q, x) / total)
    if target_mean is None:
        raise InsufficientData(f"order-{order} weighted moment requires target_mean")
    d = x - float(target_mean)
    if order == 2:
        if total <= 1.0:
            raise DegenerateWeight("weighted variance needs expected size above 1")
        return float(np.dot(q, d * d) / (total - 1.0))
    if total <= 0.0:
        raise DegenerateWeight("expected size is zero")
    if order in (3, 4):
        if target_var is None:
            raise InsufficientData(f"order-{order} weighted moment requires target_var")
        sv = float(target_var)
        if sv <= 0.0:
            raise ZeroVariance(f"variance scale {sv} is not positive")
        if order == 3:
            return float(np.dot(q, d**3) / total / sv**1.5)
        return float(np.dot(q, d**4) / total / sv**2 - 3.0)
    return float(np.dot(q, d**order) / total)
