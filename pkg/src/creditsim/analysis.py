"""Closed-form predictions and parameter sweeps.

These are the oracle side of the simulator: thresholds, break-even values,
the inflation collapse point and the submodular unit-value profile. Sweeps
run each grid cell through both the closed forms and, optionally, the
simulator, and flag whether the two agree.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Sequence

from . import serialize
from .decision import ModelParams, Strategy, choose_strategy, threshold_unit_value
from .economy import Capped, FixedUnit, Inflationary, RevenueModel, Submodular, model_from_dict
from .engine import ConfigError, RunResult, SimConfig, run

SWEEP_HEADER = ["c_r", "p", "c_p", "c_w", "r", "model", "model_params",
                "u_star", "n_star", "collapse_tick", "agree"]
PARAM_AXES = ("c_r", "p", "c_p", "c_w", "r")


def predicted_collapse_credits(params: ModelParams, kappa: float) -> float:
    """Total credits N* at which inflation makes reporting unprofitable.

    Reporting is rational exactly while N < N*. Returns 0.0 when reporting is
    never rational and ``math.inf`` when it never stops being rational.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0 (got {kappa!r})")
    u_star = threshold_unit_value(params)
    if math.isinf(u_star):
        return 0.0
    if u_star == 0:
        return math.inf
    return kappa / u_star


def break_even_probability(c_r: float, c_p: float, c_w: float, r: float, u: float) -> float | None:
    """Malicious probability above which reporting pays at unit value ``u``.

    None when no p in (0, 1] works. A zero reading cost returns 0.0, the
    infimum: any positive p then suffices.
    """
    margin = r * u - c_p - c_w
    if margin <= 0:
        return None
    p_star = c_r / margin
    return p_star if p_star <= 1 else None


@dataclass(frozen=True)
class LimitProfile:
    alpha: float
    beta: float
    points: list[tuple[int, float]]
    n_max: float

    @property
    def u_at_max(self) -> float:
        return (self.alpha * math.log(self.n_max) + self.beta) / self.n_max


def submodular_limit_profile(alpha: float, beta: float, n_points: Sequence[int]) -> LimitProfile:
    """Average revenue per report ``(alpha ln n + beta) / n`` at each point.

    ``n_max = exp(1 - beta / alpha)`` maximizes the continuous relaxation.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0 (got {alpha!r})")
    if not n_points:
        raise ValueError("n_points must be nonempty")
    model = Submodular(alpha, beta)
    points = []
    for n in n_points:
        if n < 1:
            raise ValueError(f"n must be >= 1 (got {n})")
        points.append((int(n), model.average(int(n))))
    return LimitProfile(alpha, beta, points, math.exp(1.0 - beta / alpha))


def log_spaced(max_n: int, count: int) -> list[int]:
    """Up to ``count`` distinct integers from 1 to ``max_n``, log-spaced."""
    if max_n < 1 or count < 1:
        raise ValueError("max_n and count must be >= 1")
    if count == 1:
        return [max_n]
    step = math.log(max_n) / (count - 1)
    return sorted({min(max_n, round(math.exp(i * step))) for i in range(count)} | {max_n})


def render_sentinel(value: float) -> str:
    if math.isinf(value):
        return "never"
    return serialize.csv_real(value)


def render_n_star(value: float) -> str:
    if math.isinf(value):
        return "always"
    if value == 0:
        return "never"
    return serialize.csv_real(value)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    """Per-axis value lists plus the shared simulation settings.

    ``template`` holds every SimConfig field other than ``params`` and
    ``revenue``; it is ignored when ``simulate`` is False.
    """

    axes: dict[str, list[float]]
    models: list[RevenueModel]
    template: dict[str, Any]
    simulate: bool = True

    def cells(self) -> list[tuple[dict[str, float], RevenueModel]]:
        values = [self.axes[name] for name in PARAM_AXES]
        return [(dict(zip(PARAM_AXES, combo[:-1])), combo[-1])
                for combo in itertools.product(*values, self.models)]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SweepSpec:
        if not isinstance(data, dict):
            raise ConfigError(["sweep config must be a JSON object"])
        problems = [f"unknown field {k!r}" for k in sorted(set(data) - {"axes", "models", "template", "simulate"})]
        axes = data.get("axes")
        if not isinstance(axes, dict):
            problems.append("axes must be an object mapping c_r, p, c_p, c_w, r to lists")
            axes = {}
        problems += [f"unknown axis {k!r}" for k in sorted(set(axes) - set(PARAM_AXES))]
        for name in PARAM_AXES:
            values = axes.get(name)
            if not isinstance(values, list):
                problems.append(f"axis {name!r} must be a list of reals")
            elif any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
                problems.append(f"axis {name!r} must contain only reals")
        models = []
        raw_models = data.get("models")
        if not isinstance(raw_models, list):
            problems.append("models must be a list of revenue model objects")
        else:
            for i, raw in enumerate(raw_models):
                try:
                    models.append(model_from_dict(raw))
                except (ValueError, TypeError) as exc:
                    problems.append(f"models[{i}]: {exc}")
        template = data.get("template", {})
        if not isinstance(template, dict):
            problems.append("template must be an object")
        elif {"params", "revenue"} & set(template):
            problems.append("template must not contain params or revenue")
        simulate = data.get("simulate", True)
        if not isinstance(simulate, bool):
            problems.append("simulate must be true or false")
        if problems:
            raise ConfigError(problems)
        return cls({k: list(axes[k]) for k in PARAM_AXES}, models, dict(template), simulate)


@dataclass(frozen=True)
class SweepRow:
    params: dict[str, float]
    model: RevenueModel
    u_star: str = ""
    n_star: str = ""
    collapse_tick: str = ""
    agree: str = ""

    def as_list(self) -> list[str]:
        return [*(serialize.csv_real(float(self.params[k])) for k in PARAM_AXES),
                self.model.kind, self.model.describe(),
                self.u_star, self.n_star, self.collapse_tick, self.agree]


def agreement(result: RunResult) -> bool | None:
    """Does the simulation match the closed-form prediction?

    Returns None when no exact prediction applies (noisy users).
    """
    cfg = result.config
    if cfg.epsilon_noise > 0:
        return None
    params = cfg.decision_params()
    model = cfg.revenue
    records = result.records
    if isinstance(model, Inflationary):
        n_star = predicted_collapse_credits(params, model.kappa)
        return all((rec.participation == 1.0) == (rec.snapshot_total < n_star)
                   and rec.participation in (0.0, 1.0) for rec in records)
    if isinstance(model, FixedUnit):
        reporting = choose_strategy(params, model.u0) is Strategy.READ_AND_REPORT
        return all(rec.participation == (1.0 if reporting else 0.0) for rec in records)
    # Per-user regimes: users start identical, so the first tick is exact.
    if isinstance(model, Capped):
        start = model.u0 if cfg.initial_grant < model.cap else 0.0
    else:
        start = model.next_report_revenue(0) / cfg.params.r if cfg.params.r > 0 else 0.0
    reporting = choose_strategy(params, start) is Strategy.READ_AND_REPORT
    return records[0].participation == (1.0 if reporting else 0.0)


def _evaluate_cell(cell: tuple[dict[str, float], RevenueModel, dict[str, Any], bool]) -> SweepRow:
    values, model, template, simulate = cell
    try:
        params = ModelParams(**values)
    except (ValueError, TypeError) as exc:
        return SweepRow(values, model, agree=f"error: {exc}")
    u_star = threshold_unit_value(params)
    n_star = render_n_star(predicted_collapse_credits(params, model.kappa)) if isinstance(model, Inflationary) else ""
    row = SweepRow(values, model, render_sentinel(u_star), n_star)
    if not simulate:
        return row
    try:
        config = SimConfig(params=params, revenue=model, **template)
    except (ConfigError, TypeError) as exc:
        return replace(row, agree="error: " + " / ".join(getattr(exc, "problems", [str(exc)])))
    result = run(config)
    flag = agreement(result)
    return replace(row,
                   collapse_tick="none" if result.collapse_tick is None else str(result.collapse_tick),
                   agree="na" if flag is None else ("yes" if flag else "no"))


def sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate every grid cell; rows come back in grid order regardless of ``workers``."""
    jobs = [(values, model, spec.template, spec.simulate) for values, model in spec.cells()]
    if workers <= 1 or len(jobs) <= 1:
        return [_evaluate_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_cell, jobs))


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(row.as_list())
    return buf.getvalue()
