"""Load-balancing decision laboratory.

Simulates the parallel time of iterative applications under a workload and
imbalance model, evaluates rebalancing decision rules in closed loop, and
computes provably optimal rebalancing schedules to score them against.
"""
from ._backend import BACKEND, backend_name
from .bench import (
    DEFAULT_CRITERIA,
    EXTENDED_CRITERIA,
    BenchmarkDef,
    CompareRow,
    SweepPoint,
    SweepResult,
    catalog,
    compare,
    get_benchmark,
    report_to_csv,
    report_to_json,
    sweep,
    sweep_to_csv,
    sweep_to_json,
)
from .criteria import (
    Criterion,
    CriterionContext,
    CriterionSpecError,
    Marquez,
    Menon,
    Periodic,
    Procassini,
    Proposed,
    Zhai,
    make_criterion,
    menon_tau,
    parse_criterion,
    rho_tau,
    run_criterion,
)
from .expr import Expr, ExprSyntaxError, evaluate, parse_expr, render
from .model import (
    ModelConfigError,
    Scenario,
    ScenarioError,
    SimTrace,
    WorkloadModel,
    average_load,
    imbalance,
    max_load,
    simulate,
)
from .optimal import SearchStats, brute_force, search_nth_best, search_optimal

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "backend_name",
    "BenchmarkDef",
    "CompareRow",
    "Criterion",
    "CriterionContext",
    "CriterionSpecError",
    "DEFAULT_CRITERIA",
    "EXTENDED_CRITERIA",
    "Expr",
    "ExprSyntaxError",
    "Marquez",
    "Menon",
    "ModelConfigError",
    "Periodic",
    "Procassini",
    "Proposed",
    "Scenario",
    "ScenarioError",
    "SearchStats",
    "SimTrace",
    "SweepPoint",
    "SweepResult",
    "WorkloadModel",
    "Zhai",
    "average_load",
    "brute_force",
    "catalog",
    "compare",
    "evaluate",
    "get_benchmark",
    "imbalance",
    "make_criterion",
    "max_load",
    "menon_tau",
    "parse_criterion",
    "parse_expr",
    "render",
    "report_to_csv",
    "report_to_json",
    "rho_tau",
    "run_criterion",
    "search_nth_best",
    "search_optimal",
    "simulate",
    "sweep",
    "sweep_to_csv",
    "sweep_to_json",
    "__version__",
]
