"""Single-comment decision model for an honest user.

A user who receives a comment can read it, read it and report it if it is
malicious, or discard it. Discarding is worth exactly zero; the other two
options are priced from the per-comment cost constants in ``ModelParams``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# Returned by threshold_unit_value when no unit value makes reporting pay.
NEVER = math.inf


class Strategy(Enum):
    READ_ONLY = "read_only"
    READ_AND_REPORT = "report"
    DISCARD = "discard"


@dataclass(frozen=True)
class ModelParams:
    """Per-comment cost and reward constants.

    c_r: cost of reading one comment.
    p: probability that a comment is malicious.
    c_p: expected mental cost of reading a malicious comment.
    c_w: cost of writing and submitting one report.
    r: credits granted for a processed valid report.
    """

    c_r: float
    p: float
    c_p: float
    c_w: float
    r: float

    def __post_init__(self) -> None:
        problems = self.violations()
        if problems:
            raise ValueError("invalid ModelParams: " + "; ".join(problems))
        for name in ("c_r", "p", "c_p", "c_w", "r"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def violations(self) -> list[str]:
        problems = []
        for name in ("c_r", "c_p", "c_w", "r"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                problems.append(f"{name} must be a real number")
            elif not math.isfinite(value) or value < 0:
                problems.append(f"{name} must be finite and >= 0 (got {value!r})")
        if not isinstance(self.p, (int, float)) or isinstance(self.p, bool):
            problems.append("p must be a real number")
        elif not 0 <= self.p <= 1:
            problems.append(f"p must lie in [0, 1] (got {self.p!r})")
        return problems

    def with_reward(self, r: float) -> ModelParams:
        return ModelParams(self.c_r, self.p, self.c_p, self.c_w, r)


@dataclass(frozen=True)
class UtilityTriple:
    u1: float
    u2: float
    u3: float = 0.0


def utility_read_only(params: ModelParams) -> float:
    return -(params.c_r + params.p * params.c_p)


def utility_report(params: ModelParams, unit_value: float) -> float:
    """Expected utility of reading a comment and reporting it if malicious.

    The mental cost of a malicious comment is paid whether or not it is
    reported; only the report earns ``r * unit_value``.
    """
    return -params.c_r + params.p * (params.r * unit_value - params.c_p - params.c_w)


def utilities(params: ModelParams, unit_value: float) -> UtilityTriple:
    return UtilityTriple(utility_read_only(params), utility_report(params, unit_value), 0.0)


def choose_strategy(params: ModelParams, unit_value: float) -> Strategy:
    """Rational choice: report only if it strictly beats discarding.

    Reading without reporting never beats discarding, and a zero-utility tie
    goes to ``DISCARD``.
    """
    if utility_report(params, unit_value) > 0.0:
        return Strategy.READ_AND_REPORT
    return Strategy.DISCARD


def threshold_unit_value(params: ModelParams) -> float:
    """Smallest unit value above which reporting is strictly profitable.

    Returns ``NEVER`` (positive infinity) when ``p`` or ``r`` is zero, since
    no report revenue can ever accrue.
    """
    if params.p == 0 or params.r == 0:
        return NEVER
    return params.c_r / (params.p * params.r) + (params.c_p + params.c_w) / params.r
