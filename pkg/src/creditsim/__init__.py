"""Agent-based model of credit-rewarded comment reporting."""

from .decision import (
    NEVER,
    ModelParams,
    Strategy,
    UtilityTriple,
    choose_strategy,
    threshold_unit_value,
    utilities,
    utility_read_only,
    utility_report,
)
from .economy import (
    AgentAccount,
    Capped,
    CreditLedger,
    FixedUnit,
    Inflationary,
    LedgerError,
    Submodular,
    marginal_revenue,
)
from .engine import ConfigError, RunResult, SimConfig, TickRecord, init_world, run, tick
from .analysis import (
    break_even_probability,
    predicted_collapse_credits,
    submodular_limit_profile,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AgentAccount",
    "Capped",
    "ConfigError",
    "CreditLedger",
    "FixedUnit",
    "Inflationary",
    "LedgerError",
    "ModelParams",
    "NEVER",
    "RunResult",
    "SimConfig",
    "Strategy",
    "Submodular",
    "TickRecord",
    "UtilityTriple",
    "break_even_probability",
    "choose_strategy",
    "init_world",
    "marginal_revenue",
    "predicted_collapse_credits",
    "run",
    "submodular_limit_profile",
    "sweep",
    "threshold_unit_value",
    "tick",
    "utilities",
    "utility_read_only",
    "utility_report",
]
