"""Credit ledger and the unit-value regimes that make credits lose worth.

Credits are never refunded, spent or transferred, so the platform-wide total
``N`` only grows. Balances are tracked exactly, as integer multiples of the
smallest double (2**-1074), so ``N`` always equals the sum of the balances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Union

from . import serialize

INFLATION_FLOOR = 1.0
SUBMODULAR_MODES = ("marginal", "average")
QUANTUM_BITS = 1074


def to_units(x: float) -> int:
    """Exact integer count of 2**-1074 quanta in a finite double."""
    num, den = float(x).as_integer_ratio()
    return num * ((1 << QUANTUM_BITS) // den)


def from_units(units: int) -> float:
    # int / int true division is correctly rounded even for huge operands.
    return units / (1 << QUANTUM_BITS)


class LedgerError(RuntimeError):
    """A ledger invariant was found broken."""


def _check_real(problems: list[str], name: str, value: Any, *, positive=False, nonneg=False) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{name} must be a real number")
    elif not math.isfinite(value):
        problems.append(f"{name} must be finite")
    elif positive and value <= 0:
        problems.append(f"{name} must be > 0 (got {value!r})")
    elif nonneg and value < 0:
        problems.append(f"{name} must be >= 0 (got {value!r})")


class _Model:
    kind = ""
    _fields: tuple[str, ...] = ()

    def _validate(self, problems: list[str]) -> None:
        raise NotImplementedError

    def __post_init__(self) -> None:
        problems: list[str] = []
        self._validate(problems)
        if problems:
            raise ValueError(f"invalid {self.kind}: " + "; ".join(problems))
        for name in self._fields:
            value = getattr(self, name)
            if isinstance(value, int):
                object.__setattr__(self, name, float(value))

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **{name: getattr(self, name) for name in self._fields}}

    def describe(self) -> str:
        return ";".join(f"{name}={serialize.csv_real(getattr(self, name))}"
                        for name in self._fields if name != "mode")


@dataclass(frozen=True)
class FixedUnit(_Model):
    """Constant unit value; the control regime."""

    u0: float
    kind = "FixedUnit"
    _fields = ("u0",)

    def _validate(self, problems):
        _check_real(problems, "u0", self.u0, nonneg=True)


@dataclass(frozen=True)
class Inflationary(_Model):
    """Platform-wide unit value ``kappa / N``."""

    kappa: float
    kind = "Inflationary"
    _fields = ("kappa",)

    def _validate(self, problems):
        _check_real(problems, "kappa", self.kappa, positive=True)

    def unit_value_at(self, total: float) -> float:
        return self.kappa / max(total, INFLATION_FLOOR)


@dataclass(frozen=True)
class Submodular(_Model):
    """Per-user cumulative revenue ``R(n) = alpha * ln(n) + beta`` for n >= 1.

    ``mode`` selects what a user books for their next report: the marginal
    ``R(n+1) - R(n)`` or the running average ``R(n) / n``.
    """

    alpha: float
    beta: float
    mode: str = "marginal"
    kind = "Submodular"
    _fields = ("alpha", "beta", "mode")

    def _validate(self, problems):
        _check_real(problems, "alpha", self.alpha, positive=True)
        _check_real(problems, "beta", self.beta)
        if self.mode not in SUBMODULAR_MODES:
            problems.append(f"mode must be one of {SUBMODULAR_MODES} (got {self.mode!r})")

    def cumulative(self, n: int) -> float:
        if n < 0:
            raise ValueError(f"report count must be >= 0 (got {n})")
        if n == 0:
            return 0.0
        return self.alpha * math.log(n) + self.beta

    def marginal(self, n: int) -> float:
        if n < 1:
            raise ValueError(f"marginal revenue is defined for n >= 1 (got {n})")
        # log1p(1/n) == ln(n+1) - ln(n) without cancellation at large n
        return self.alpha * math.log1p(1.0 / n)

    def average(self, n: int) -> float:
        if n < 1:
            raise ValueError(f"average revenue is defined for n >= 1 (got {n})")
        return (self.alpha * math.log(n) + self.beta) / n

    def next_report_revenue(self, n: int) -> float:
        """Revenue booked by report number n + 1, clamped at zero."""
        if n == 0:
            return max(self.beta, 0.0)
        value = self.marginal(n) if self.mode == "marginal" else self.average(n)
        return max(value, 0.0)

    def to_dict(self):
        out = super().to_dict()
        if self.mode == "marginal":
            del out["mode"]
        return out


@dataclass(frozen=True)
class Capped(_Model):
    """Fixed unit value until an account's balance reaches ``cap``."""

    cap: float
    u0: float
    kind = "Capped"
    _fields = ("cap", "u0")

    def _validate(self, problems):
        _check_real(problems, "cap", self.cap, positive=True)
        _check_real(problems, "u0", self.u0, nonneg=True)


RevenueModel = Union[FixedUnit, Inflationary, Submodular, Capped]
MODEL_TYPES = {cls.kind: cls for cls in (FixedUnit, Inflationary, Submodular, Capped)}


def model_from_dict(data: dict[str, Any]) -> RevenueModel:
    if not isinstance(data, dict):
        raise ValueError("revenue model must be a JSON object")
    kind = data.get("kind")
    cls = MODEL_TYPES.get(kind)
    if cls is None:
        raise ValueError(f"unknown revenue model kind {kind!r}; expected one of {sorted(MODEL_TYPES)}")
    allowed = set(cls._fields)
    unknown = sorted(set(data) - allowed - {"kind"})
    if unknown:
        raise ValueError(f"unknown field(s) for {kind}: {', '.join(unknown)}")
    required = [name for name in cls._fields if name != "mode"]
    missing = [name for name in required if name not in data]
    if missing:
        raise ValueError(f"missing field(s) for {kind}: {', '.join(missing)}")
    return cls(**{k: v for k, v in data.items() if k != "kind"})


def marginal_revenue(model: RevenueModel, n: int) -> float:
    if not isinstance(model, Submodular):
        raise TypeError(f"marginal revenue is defined for Submodular, not {model.kind}")
    return model.marginal(n)


@dataclass
class AgentAccount:
    agent_id: int
    units: int = 0
    valid_reports: int = 0
    paid_reports: int = 0
    cumulative_revenue: float = 0.0

    @property
    def balance(self) -> float:
        return from_units(self.units)

    def to_dict(self) -> dict[str, Any]:
        return {
            "agent_id": self.agent_id,
            "balance": self.balance,
            "valid_reports": self.valid_reports,
            "paid_reports": self.paid_reports,
            "cumulative_revenue": float(self.cumulative_revenue),
        }


class Grant(NamedTuple):
    credits: float
    revenue: float


@dataclass
class CreditLedger:
    """All accounts plus the platform-wide distributed total ``N``.

    Mutations must be applied serially. ``unit_value`` only ever looks at
    aggregates and the one account it is asked about; users never compete.
    """

    model: RevenueModel
    initial_grant: float = 0.0
    accounts: dict[int, AgentAccount] = field(default_factory=dict, init=False)
    _total: int = field(default=0, init=False, repr=False)
    _next_id: int = field(default=0, init=False, repr=False)

    def __post_init__(self) -> None:
        problems: list[str] = []
        _check_real(problems, "initial_grant", self.initial_grant, nonneg=True)
        if not problems and isinstance(self.model, Capped) and self.initial_grant > self.model.cap:
            problems.append(f"initial_grant {self.initial_grant!r} exceeds cap {self.model.cap!r}")
        if problems:
            raise ValueError("invalid ledger: " + "; ".join(problems))
        self.initial_grant = float(self.initial_grant)

    @property
    def total_distributed(self) -> float:
        return from_units(self._total)

    def __len__(self) -> int:
        return len(self.accounts)

    def account(self, agent_id: int) -> AgentAccount:
        try:
            return self.accounts[agent_id]
        except KeyError:
            raise KeyError(f"no account with id {agent_id!r}") from None

    def register_user(self) -> AgentAccount:
        """Open an account holding the initial grant; the grant counts toward N."""
        grant = to_units(self.initial_grant)
        acct = AgentAccount(self._next_id, units=grant)
        self.accounts[acct.agent_id] = acct
        self._next_id += 1
        self._total += grant
        return acct

    def unit_value(self, account: AgentAccount) -> float:
        model = self.model
        if isinstance(model, FixedUnit):
            return model.u0
        if isinstance(model, Inflationary):
            return model.unit_value_at(self.total_distributed)
        if isinstance(model, Submodular):
            n = account.valid_reports
            return max(model.beta, 0.0) if n == 0 else max(model.average(n), 0.0)
        if isinstance(model, Capped):
            return model.u0 if account.units < to_units(model.cap) else 0.0
        raise TypeError(f"unknown revenue model {model!r}")

    def decision_unit_value(self, account: AgentAccount, r: float) -> float:
        """Unit value a user plugs into the report utility ``p * r * u``.

        Under Submodular the revenue of the next report is fixed by ``R(n)``
        rather than by the credit count, so it is expressed per credit.
        """
        if isinstance(self.model, Submodular):
            return self.model.next_report_revenue(account.valid_reports) / r if r > 0 else 0.0
        return self.unit_value(account)

    def grant_for_report(self, agent_id: int, r: float) -> Grant:
        """Reward one processed valid report from ``agent_id`` with up to ``r`` credits."""
        acct = self.account(agent_id)
        model = self.model
        amount = to_units(r)
        if isinstance(model, Submodular):
            revenue = model.next_report_revenue(acct.valid_reports)
        else:
            unit = self.unit_value(acct)
            if isinstance(model, Capped):
                amount = max(min(amount, to_units(model.cap) - acct.units), 0)
            revenue = max(from_units(amount) * unit, 0.0)
        acct.units += amount
        acct.valid_reports += 1
        if amount > 0:
            acct.paid_reports += 1
        acct.cumulative_revenue += revenue
        self._total += amount
        return Grant(from_units(amount), revenue)

    def check_conservation(self) -> None:
        total = sum(a.units for a in self.accounts.values())
        if total != self._total:
            raise LedgerError(f"conservation broken: N={self.total_distributed!r}, "
                              f"sum of balances={from_units(total)!r}")
        if isinstance(self.model, Capped):
            over = [a.agent_id for a in self.accounts.values() if a.units > to_units(self.model.cap)]
            if over:
                raise LedgerError(f"accounts above cap: {over}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "initial_grant": self.initial_grant,
            "total_distributed": self.total_distributed,
            "next_id": self._next_id,
            "accounts": [a.to_dict() for a in self.accounts.values()],
        }

    def to_json(self) -> str:
        return serialize.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CreditLedger:
        ledger = cls(model_from_dict(data["model"]), data["initial_grant"])
        for entry in data["accounts"]:
            acct = AgentAccount(
                int(entry["agent_id"]),
                units=to_units(entry["balance"]),
                valid_reports=int(entry["valid_reports"]),
                paid_reports=int(entry["paid_reports"]),
                cumulative_revenue=float(entry["cumulative_revenue"]),
            )
            ledger.accounts[acct.agent_id] = acct
            ledger._total += acct.units
        ledger._next_id = int(data["next_id"])
        stated = float(data["total_distributed"])
        if not math.isclose(stated, ledger.total_distributed, rel_tol=1e-12, abs_tol=1e-12):
            raise LedgerError(f"stated N={stated!r} disagrees with sum of balances {ledger.total_distributed!r}")
        ledger.check_conservation()
        return ledger

    @classmethod
    def from_json(cls, text: str) -> CreditLedger:
        return cls.from_dict(json.loads(text))
