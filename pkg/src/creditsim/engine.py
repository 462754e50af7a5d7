"""Discrete-time world loop for a population of honest users.

Each tick: new users arrive, every user snapshots its unit value, then each
user handles ``m`` comments in ascending id order. Choices use expected
utilities; costs, rewards and credits use sampled outcomes.

All randomness comes from one ``random.Random`` (MT19937) seeded with the
config seed. Draw order per comment is fixed: the noise draw (only when
``epsilon_noise > 0``), the noisy strategy pick, the malicious draw, then the
admin processing draw (only when ``admin_validity_prob < 1``).
"""

from __future__ import annotations

import io
import math
import random
from dataclasses import dataclass
from typing import Any, Iterable

from . import serialize
from .decision import ModelParams, Strategy, choose_strategy
from .economy import Capped, CreditLedger, FixedUnit, Inflationary, LedgerError, RevenueModel, model_from_dict

CSV_HEADER = (
    "tick,active_honest,reporters,participation,reports_rewarded,"
    "unit_value,total_distributed,mean_utility"
)
SEED_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Raised with every violated bound of a configuration."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    revenue: RevenueModel
    initial_honest_users: int
    horizon: int
    seed: int = 0
    comments_per_user_per_tick: int = 1
    new_users_per_tick: float = 0.0
    initial_grant: float = 0.0
    admin_validity_prob: float = 1.0
    epsilon_noise: float = 0.0
    collapse_epsilon: float = 0.01
    collapse_window: int = 10

    def __post_init__(self) -> None:
        problems = self.violations()
        if problems:
            raise ConfigError(problems)

    def violations(self) -> list[str]:
        problems = []

        def integer(name, low):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                problems.append(f"{name} must be an integer")
            elif value < low:
                problems.append(f"{name} must be >= {low} (got {value})")

        def real(name, low, high, *, open_low=False, open_high=False):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                problems.append(f"{name} must be a finite real")
                return
            if value < low or (open_low and value == low) or value > high or (open_high and value == high):
                lo = "(" if open_low else "["
                hi = ")" if open_high else "]"
                problems.append(f"{name} must lie in {lo}{low}, {high}{hi} (got {value})")

        if not isinstance(self.params, ModelParams):
            problems.append("params must be ModelParams")
        if not hasattr(self.revenue, "kind"):
            problems.append("revenue must be a revenue model")
        integer("initial_honest_users", 1)
        integer("comments_per_user_per_tick", 1)
        integer("horizon", 1)
        integer("collapse_window", 1)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed <= SEED_MAX:
            problems.append("seed must be an unsigned 64-bit integer")
        real("new_users_per_tick", 0, math.inf)
        real("initial_grant", 0, math.inf)
        real("admin_validity_prob", 0, 1)
        real("epsilon_noise", 0, 1)
        real("collapse_epsilon", 0, 1, open_low=True, open_high=True)
        if isinstance(self.revenue, Capped) and isinstance(self.initial_grant, (int, float)):
            if self.initial_grant > self.revenue.cap:
                problems.append(f"initial_grant {self.initial_grant} exceeds cap {self.revenue.cap}")
        return problems

    def decision_params(self) -> ModelParams:
        # A report is only paid with probability q, which in expectation is r * q credits.
        if self.admin_validity_prob == 1:
            return self.params
        return self.params.with_reward(self.params.r * self.admin_validity_prob)

    def to_dict(self) -> dict[str, Any]:
        p = self.params
        return {
            "params": {"c_r": p.c_r, "p": p.p, "c_p": p.c_p, "c_w": p.c_w, "r": p.r},
            "revenue": self.revenue.to_dict(),
            "initial_honest_users": self.initial_honest_users,
            "comments_per_user_per_tick": self.comments_per_user_per_tick,
            "new_users_per_tick": float(self.new_users_per_tick),
            "initial_grant": float(self.initial_grant),
            "admin_validity_prob": float(self.admin_validity_prob),
            "epsilon_noise": float(self.epsilon_noise),
            "horizon": self.horizon,
            "seed": self.seed,
            "collapse_epsilon": float(self.collapse_epsilon),
            "collapse_window": self.collapse_window,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SimConfig:
        """Build a config from its JSON form, rejecting unknown fields."""
        if not isinstance(data, dict):
            raise ConfigError(["config must be a JSON object"])
        known = {"params", "revenue", "initial_honest_users", "comments_per_user_per_tick",
                 "new_users_per_tick", "initial_grant", "admin_validity_prob", "epsilon_noise",
                 "horizon", "seed", "collapse_epsilon", "collapse_window"}
        problems = [f"unknown field {name!r}" for name in sorted(set(data) - known)]
        problems += [f"missing field {name!r}" for name in
                     ("params", "revenue", "initial_honest_users", "horizon") if name not in data]
        params = revenue = None
        if "params" in data:
            raw = data["params"]
            if not isinstance(raw, dict):
                problems.append("params must be an object")
            else:
                names = ("c_r", "p", "c_p", "c_w", "r")
                problems += [f"unknown field 'params.{k}'" for k in sorted(set(raw) - set(names))]
                problems += [f"missing field 'params.{k}'" for k in names if k not in raw]
                if all(k in raw for k in names):
                    try:
                        params = ModelParams(**{k: raw[k] for k in names})
                    except (ValueError, TypeError) as exc:
                        problems.append(f"params: {exc}")
        if "revenue" in data:
            try:
                revenue = model_from_dict(data["revenue"])
            except (ValueError, TypeError) as exc:
                problems.append(f"revenue: {exc}")
        if problems:
            raise ConfigError(problems)
        kwargs = {k: v for k, v in data.items() if k not in ("params", "revenue")}
        return cls(params=params, revenue=revenue, **kwargs)


@dataclass(frozen=True)
class TickRecord:
    """Observables for one tick.

    ``unit_value_snapshot`` and ``snapshot_total`` are the values users saw
    when deciding; ``total_distributed`` is N after the tick's grants.
    Under per-user regimes the unit value is the mean over users.
    """

    tick: int
    active_honest: int
    reporters: int
    reports_rewarded: int
    participation: float
    unit_value_snapshot: float
    total_distributed: float
    mean_agent_utility: float
    snapshot_total: float

    def csv_row(self) -> str:
        return ",".join([
            str(self.tick),
            str(self.active_honest),
            str(self.reporters),
            serialize.csv_real(self.participation),
            str(self.reports_rewarded),
            serialize.csv_real(self.unit_value_snapshot),
            serialize.csv_real(self.total_distributed),
            serialize.csv_real(self.mean_agent_utility),
        ])


@dataclass
class WorldState:
    config: SimConfig
    ledger: CreditLedger
    rng: random.Random
    tick: int = 0
    arrival_carry: float = 0.0
    comments_seen: int = 0
    utility_sum: float = 0.0
    utility_sq_sum: float = 0.0

    def fingerprint(self) -> tuple:
        return (self.tick, self.arrival_carry, self.ledger.to_json(), self.rng.getstate())


@dataclass
class RunResult:
    config: SimConfig
    records: list[TickRecord]
    collapse_tick: int | None
    final_ledger: CreditLedger
    # Per-comment realized utility moments over the whole run.
    comments_seen: int = 0
    utility_sum: float = 0.0
    utility_sq_sum: float = 0.0

    def to_csv(self) -> str:
        return write_csv(self.records)

    def summary(self) -> dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "collapse_tick": self.collapse_tick,
            "final_total_distributed": self.final_ledger.total_distributed,
            "final_participation": self.records[-1].participation,
        }

    def summary_json(self) -> str:
        return serialize.dumps(self.summary())

    def mean_comment_utility(self) -> tuple[float, float]:
        """Mean realized utility per comment and its standard error."""
        n = self.comments_seen
        if n == 0:
            return 0.0, math.nan
        mean = self.utility_sum / n
        if n < 2:
            return mean, math.nan
        var = max(self.utility_sq_sum - n * mean * mean, 0.0) / (n - 1)
        return mean, math.sqrt(var / n)


def write_csv(records: Iterable[TickRecord]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for rec in records:
        buf.write(rec.csv_row() + "\n")
    return buf.getvalue()


def init_world(config: SimConfig) -> WorldState:
    ledger = CreditLedger(config.revenue, config.initial_grant)
    for _ in range(config.initial_honest_users):
        ledger.register_user()
    return WorldState(config, ledger, random.Random(config.seed))


def tick(state: WorldState) -> TickRecord:
    """Advance ``state`` by one tick in place and return its record."""
    cfg = state.config
    ledger = state.ledger
    rng = state.rng
    params = cfg.params
    decide_params = cfg.decision_params()
    p, q, eps = params.p, cfg.admin_validity_prob, cfg.epsilon_noise
    m = cfg.comments_per_user_per_tick

    state.arrival_carry += cfg.new_users_per_tick
    arrivals = math.floor(state.arrival_carry)
    state.arrival_carry -= arrivals
    for _ in range(arrivals):
        ledger.register_user()

    accounts = list(ledger.accounts.values())
    snapshot_total = ledger.total_distributed
    if isinstance(cfg.revenue, (FixedUnit, Inflationary)):
        # Every user sees the same unit value.
        unit = ledger.unit_value(accounts[0])
        shown_mean = unit
        rational = [choose_strategy(decide_params, unit)] * len(accounts)
    else:
        shown_mean = math.fsum(ledger.unit_value(a) for a in accounts) / len(accounts)
        rational = [choose_strategy(decide_params, ledger.decision_unit_value(a, params.r)) for a in accounts]

    reporters = 0
    rewarded = 0
    tick_utility = 0.0
    for acct, choice in zip(accounts, rational):
        reported_any = False
        agent_utility = 0.0
        for _ in range(m):
            strategy = choice
            if eps > 0 and rng.random() < eps:
                strategy = Strategy.READ_ONLY if rng.random() < 0.5 else Strategy.READ_AND_REPORT
            utility = 0.0
            if strategy is not Strategy.DISCARD:
                utility -= params.c_r
                malicious = rng.random() < p
                if malicious:
                    utility -= params.c_p
                if strategy is Strategy.READ_AND_REPORT:
                    reported_any = True
                    if malicious:
                        utility -= params.c_w
                        if q >= 1 or rng.random() < q:
                            grant = ledger.grant_for_report(acct.agent_id, params.r)
                            utility += grant.revenue
                            rewarded += 1
            agent_utility += utility
            state.utility_sum += utility
            state.utility_sq_sum += utility * utility
        state.comments_seen += m
        tick_utility += agent_utility
        if reported_any:
            reporters += 1

    ledger.check_conservation()
    active = len(accounts)
    record = TickRecord(
        tick=state.tick,
        active_honest=active,
        reporters=reporters,
        reports_rewarded=rewarded,
        participation=reporters / active,
        unit_value_snapshot=shown_mean,
        total_distributed=ledger.total_distributed,
        mean_agent_utility=tick_utility / active,
        snapshot_total=snapshot_total,
    )
    state.tick += 1
    return record


def find_collapse(participation: list[float], epsilon: float, window: int) -> int | None:
    """First index starting ``window`` consecutive values below ``epsilon``."""
    run = 0
    for i, value in enumerate(participation):
        run = run + 1 if value < epsilon else 0
        if run == window:
            return i - window + 1
    return None


def run(config: SimConfig) -> RunResult:
    state = init_world(config)
    records = [tick(state) for _ in range(config.horizon)]
    collapse = find_collapse([r.participation for r in records], config.collapse_epsilon, config.collapse_window)
    return RunResult(config, records, collapse, state.ledger,
                     state.comments_seen, state.utility_sum, state.utility_sq_sum)


__all__ = [
    "CSV_HEADER", "ConfigError", "LedgerError", "RunResult", "SimConfig", "TickRecord",
    "WorldState", "find_collapse", "init_world", "run", "tick", "write_csv",
]
