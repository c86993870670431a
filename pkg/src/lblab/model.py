"""Discrete workload/imbalance model of an iterative parallel application.

An application runs ``gamma`` iterations on ``P`` processing elements.  The
balanced per-PE load at iteration ``t`` is ``mu(t)``; between rebalances the
percent imbalance ``I`` grows by ``iota(x)`` per iteration, where ``x`` is
the offset since the last rebalance.  The slowest PE costs
``m(t) = (1 + I(t)) * mu(t)`` and each rebalance costs ``C`` time units,
paid at the iteration where it is applied (which restarts ``I`` at zero).

The imbalance accumulator itself is unclamped; the observable value is
saturated into ``[0, P - 1]`` wherever it is read.  Keeping the raw
accumulator is what lets periodically self-correcting increment patterns
return to zero instead of drifting.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Union

import numpy as np

from . import expr as _expr
from ._backend import kernels
from ._io import fmt_real

__all__ = [
    "ModelConfigError",
    "ScenarioError",
    "WorkloadModel",
    "Scenario",
    "SimState",
    "SimTrace",
    "average_load",
    "imbalance",
    "max_load",
    "simulate",
]

OMEGA_SCOPES = ("total", "per_pe")

TRACE_COLUMNS = ("t", "decision", "mu", "m", "u", "I", "U_cum", "T_acc")


class ModelConfigError(ValueError):
    """The model parameters are unusable (bad expression, nonpositive load, ...)."""


class ScenarioError(ValueError):
    """A rebalancing scenario violates its constraints."""


@dataclass(frozen=True)
class WorkloadModel:
    """Immutable description of one simulated application.

    ``omega`` is the workload increment per iteration and ``iota`` the
    imbalance increment per iteration since the last rebalance, both as
    expression strings over ``t`` (see :mod:`lblab.expr`).  With
    ``omega_scope="per_pe"`` the workload increment applies to the per-PE
    load directly; with ``"total"`` it is divided across the ``P`` PEs.
    """

    P: int
    gamma: int
    W0: float
    C: float
    omega: str = "0"
    iota: str = "0"
    omega_scope: str = "per_pe"

    def __post_init__(self) -> None:
        if not isinstance(self.P, int) or self.P < 1:
            raise ModelConfigError(f"P must be a positive integer, got {self.P!r}")
        if not isinstance(self.gamma, int) or self.gamma < 1:
            raise ModelConfigError(f"gamma must be a positive integer, got {self.gamma!r}")
        if not self.W0 > 0:
            raise ModelConfigError(f"W0 must be positive, got {self.W0!r}")
        if self.C < 0:
            raise ModelConfigError(f"C must be nonnegative, got {self.C!r}")
        if self.omega_scope not in OMEGA_SCOPES:
            raise ModelConfigError(
                f"omega_scope must be one of {OMEGA_SCOPES}, got {self.omega_scope!r}"
            )
        object.__setattr__(self, "W0", float(self.W0))
        object.__setattr__(self, "C", float(self.C))
        for field_name in ("omega", "iota"):
            try:
                _expr.parse_expr(getattr(self, field_name))
            except _expr.ExprSyntaxError as e:
                raise ModelConfigError(f"bad {field_name} expression: {e}") from e


@functools.lru_cache(maxsize=128)
def _tables(model: WorkloadModel) -> tuple[np.ndarray, np.ndarray, float]:
    """Tabulated ``mu``, ``iota`` and the clamp bound for one model.

    ``mu[t]`` for ``t in [0, gamma)``; ``iota[x]`` for offsets
    ``x in [1, gamma)`` with index 0 unused.  Raises if any balanced load
    comes out nonpositive.
    """
    omega = _expr.parse_expr(model.omega)
    iota = _expr.parse_expr(model.iota)
    gamma = model.gamma
    mu = np.empty(gamma, dtype=np.float64)
    per_pe = model.omega_scope == "per_pe"
    base = model.W0 / model.P
    acc = 0.0
    mu[0] = base
    try:
        for t in range(1, gamma):
            acc += _expr.evaluate(omega, t)
            mu[t] = base + acc if per_pe else (model.W0 + acc) / model.P
        iota_tab = np.zeros(gamma, dtype=np.float64)
        for x in range(1, gamma):
            iota_tab[x] = _expr.evaluate(iota, x)
    except (ZeroDivisionError, OverflowError, ValueError) as e:
        raise ModelConfigError(f"expression not evaluable over the run: {e}") from e
    if not (np.all(mu > 0.0) and np.all(np.isfinite(mu))):
        bad = int(np.argmax(~((mu > 0.0) & np.isfinite(mu))))
        raise ModelConfigError(
            f"balanced load must stay positive and finite; mu({bad}) = {mu[bad]!r}"
        )
    if not np.all(np.isfinite(iota_tab)):
        bad = int(np.argmax(~np.isfinite(iota_tab)))
        raise ModelConfigError(
            f"imbalance increment must stay finite; iota({bad}) = {iota_tab[bad]!r}"
        )
    mu.flags.writeable = False
    iota_tab.flags.writeable = False
    return mu, iota_tab, float(model.P - 1)


@dataclass(frozen=True)
class Scenario:
    """A rebalancing schedule: the strictly increasing iterations where a
    rebalance is applied.  Iteration 0 starts balanced and never appears."""

    lb_iterations: tuple[int, ...] = ()
    total_time: float | None = None

    def __post_init__(self) -> None:
        lb = tuple(int(i) for i in self.lb_iterations)
        object.__setattr__(self, "lb_iterations", lb)
        if any(i < 1 for i in lb):
            raise ScenarioError(f"rebalance iterations must be >= 1, got {lb}")
        if any(a >= b for a, b in zip(lb, lb[1:])):
            raise ScenarioError(f"rebalance iterations must be strictly increasing, got {lb}")

    def __len__(self) -> int:
        return len(self.lb_iterations)


ScenarioLike = Union[Scenario, Iterable[int]]


@dataclass(frozen=True)
class SimState:
    """Snapshot of the simulation at one iteration."""

    t: int
    last_lb: int
    I: float
    W: float
    T_acc: float


@dataclass(frozen=True)
class SimTrace:
    """Column-oriented per-iteration record of one simulation.

    ``U_cum`` is the running sum of ``u`` since the last rebalance
    (inclusive of the current row; it resets to zero on rebalance rows) and
    ``T_acc`` the running total time including rebalance costs.
    """

    P: int
    decisions: np.ndarray  # bool, True where a rebalance was applied
    mu: np.ndarray
    m: np.ndarray
    u: np.ndarray
    I: np.ndarray
    U_cum: np.ndarray
    T_acc: np.ndarray

    @property
    def gamma(self) -> int:
        return len(self.mu)

    @property
    def total(self) -> float:
        return float(self.T_acc[-1])

    @property
    def lb_iterations(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.decisions)[0])

    def rows(self) -> Iterator[tuple]:
        """Yield ``(t, decision, mu, m, u, I, U_cum, T_acc)`` per iteration."""
        for t in range(self.gamma):
            yield (
                t,
                "lb" if self.decisions[t] else "none",
                float(self.mu[t]),
                float(self.m[t]),
                float(self.u[t]),
                float(self.I[t]),
                float(self.U_cum[t]),
                float(self.T_acc[t]),
            )

    def state_at(self, t: int) -> SimState:
        if not 0 <= t < self.gamma:
            raise IndexError(f"iteration {t} outside [0, {self.gamma})")
        marks = np.nonzero(self.decisions[: t + 1])[0]
        last_lb = int(marks[-1]) if len(marks) else 0
        return SimState(
            t=t,
            last_lb=last_lb,
            I=float(self.I[t]),
            W=float(self.mu[t]) * self.P,
            T_acc=float(self.T_acc[t]),
        )

    def to_csv(self, path_or_file: Union[str, "IO[str]"]) -> None:
        """Write the trace with a fixed header and 17-significant-digit reals."""
        if hasattr(path_or_file, "write"):
            self._write_csv(path_or_file)
        else:
            with open(path_or_file, "w", encoding="utf-8", newline="\n") as fp:
                self._write_csv(fp)

    def _write_csv(self, fp: "IO[str]") -> None:
        fp.write(",".join(TRACE_COLUMNS) + "\n")
        for t, decision, *reals in self.rows():
            fp.write(f"{t},{decision}," + ",".join(fmt_real(x) for x in reals) + "\n")


def average_load(model: WorkloadModel, t: int) -> float:
    """Balanced per-PE load ``mu(t)``."""
    mu, _, _ = _tables(model)
    if not 0 <= t < model.gamma:
        raise ValueError(f"iteration {t} outside [0, {model.gamma})")
    return float(mu[t])


def imbalance(model: WorkloadModel, t: int, last_lb: int = 0) -> float:
    """Percent imbalance ``I(t)`` given the most recent rebalance iteration.

    Accumulates the raw increments from ``last_lb`` and saturates the result
    into ``[0, P - 1]``; ``I(last_lb)`` is exactly 0.
    """
    if not 0 <= last_lb <= t < model.gamma:
        raise ValueError(
            f"need 0 <= last_lb <= t < gamma, got last_lb={last_lb}, t={t}, gamma={model.gamma}"
        )
    _, iota_tab, imax = _tables(model)
    raw = 0.0
    for x in range(1, t - last_lb + 1):
        raw += float(iota_tab[x])
    if raw < 0.0:
        return 0.0
    if raw > imax:
        return imax
    return raw


def max_load(model: WorkloadModel, t: int, last_lb: int = 0) -> float:
    """Load of the slowest PE: ``m(t) = (1 + I(t)) * mu(t)``."""
    return (1.0 + imbalance(model, t, last_lb)) * average_load(model, t)


def _as_lb_tuple(scenario: ScenarioLike) -> tuple[int, ...]:
    if isinstance(scenario, Scenario):
        return scenario.lb_iterations
    return Scenario(tuple(scenario)).lb_iterations


def _mask_for(model: WorkloadModel, scenario: ScenarioLike) -> tuple[tuple[int, ...], np.ndarray]:
    lb = _as_lb_tuple(scenario)
    if lb and lb[-1] > model.gamma - 1:
        raise ScenarioError(
            f"rebalance iteration {lb[-1]} outside [1, {model.gamma - 1}]"
        )
    mask = np.zeros(model.gamma, dtype=np.uint8)
    if lb:
        mask[list(lb)] = 1
    return lb, mask


def simulate(model: WorkloadModel, scenario: ScenarioLike) -> tuple[float, SimTrace]:
    """Walk all iterations applying the given rebalancing scenario.

    The rebalance cost is added before the iteration it is applied to, and
    that iteration runs balanced.  Returns the total parallel time and the
    full trace; pure and deterministic.
    """
    mu, iota_tab, imax = _tables(model)
    _, mask = _mask_for(model, scenario)
    total, m, u, iobs, ucum, tacc = kernels.scenario_trace(mu, iota_tab, imax, model.C, mask)
    trace = SimTrace(
        P=model.P,
        decisions=mask.astype(bool),
        mu=mu,
        m=m,
        u=u,
        I=iobs,
        U_cum=ucum,
        T_acc=tacc,
    )
    return float(total), trace


def _scenario_total(model: WorkloadModel, mask: np.ndarray) -> float:
    """Trace-free total for internal callers that bring their own mask."""
    mu, iota_tab, imax = _tables(model)
    return float(kernels.scenario_total(mu, iota_tab, imax, model.C, mask))
