"""Rebalancing decision rules.

Every rule answers one question before iteration ``t`` runs: should the
application rebalance now?  A rule only sees completed iterations (rows up
to ``t - 1``, never a lookahead) and starts answering once enough history
exists; during warm-up it returns False.

Six rules are provided:

* ``periodic``   - rebalance every ``T`` iterations, unconditionally.
* ``marquez``    - rebalance when the observed imbalance leaves the comfort
  zone: ``I(t-1) > xi``.
* ``procassini`` - rebalance when the projected balanced iteration plus the
  rebalance cost beats the current iteration time scaled by ``rho``:
  ``mu(t-1) + C < rho * m(t-1)``.
* ``menon``      - rebalance when the accumulated excess time since the last
  rebalance reaches the rebalance cost: ``sum(u) >= C``.
* ``zhai``       - rebalance when the median-filtered iteration time has
  drifted from the post-rebalance baseline by ``C`` in aggregate.
* ``proposed``   - rebalance when the *projected* saving of rebalancing now,
  ``k * u(t-1) - sum(u)`` over the ``k`` completed rows since the last
  rebalance, reaches ``C``.  Unlike ``menon`` this discounts imbalance that
  has already corrected itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from . import _kernels_py as _codes
from ._backend import kernels
from .model import Scenario, SimTrace, WorkloadModel, _tables

__all__ = [
    "Criterion",
    "CriterionContext",
    "CriterionSpecError",
    "Periodic",
    "Marquez",
    "Procassini",
    "Menon",
    "Zhai",
    "Proposed",
    "decide",
    "run_criterion",
    "parse_criterion",
    "make_criterion",
    "sweepable_param",
    "rho_tau",
    "menon_tau",
    "CRITERION_FAMILIES",
]


class CriterionSpecError(ValueError):
    """A criterion spec string or parameter set is invalid."""


@dataclass(frozen=True)
class CriterionContext:
    """What a decision rule may look at before iteration ``t``.

    The row arrays are views covering exactly ``[last_lb, t - 1]``.
    """

    mu: np.ndarray
    m: np.ndarray
    u: np.ndarray
    I: np.ndarray
    last_lb: int
    t: int
    C: float

    @classmethod
    def from_trace(cls, trace: SimTrace, t: int, C: float) -> "CriterionContext":
        """Context for deciding at ``t`` over an existing trace."""
        if not 1 <= t <= trace.gamma:
            raise ValueError(f"decision point {t} outside [1, {trace.gamma}]")
        marks = np.nonzero(trace.decisions[:t])[0]
        last_lb = int(marks[-1]) if len(marks) else 0
        sl = slice(last_lb, t)
        return cls(
            mu=trace.mu[sl],
            m=trace.m[sl],
            u=trace.u[sl],
            I=trace.I[sl],
            last_lb=last_lb,
            t=t,
            C=C,
        )


@dataclass(frozen=True)
class Criterion:
    """Base class; concrete rules define ``kind``, ``decide`` and their params."""

    kind: ClassVar[str] = ""
    _kernel_kind: ClassVar[int] = -1

    def decide(self, ctx: CriterionContext) -> bool:
        raise NotImplementedError

    def params_text(self) -> str:
        return ""

    def spec(self) -> str:
        """Canonical textual encoding, e.g. ``procassini:rho=19.43``."""
        params = self.params_text()
        return f"{self.kind}:{params}" if params else self.kind

    def _kernel_params(self) -> tuple[float, int]:
        return 0.0, 0


@dataclass(frozen=True)
class Periodic(Criterion):
    """Rebalance at every iteration divisible by ``T``."""

    T: int
    kind: ClassVar[str] = "periodic"
    _kernel_kind: ClassVar[int] = _codes.KIND_PERIODIC

    def __post_init__(self) -> None:
        if not isinstance(self.T, int) or self.T < 1:
            raise CriterionSpecError(f"periodic period must be a positive integer, got {self.T!r}")

    def decide(self, ctx: CriterionContext) -> bool:
        return ctx.t % self.T == 0

    def params_text(self) -> str:
        return f"T={self.T}"

    def _kernel_params(self) -> tuple[float, int]:
        return 0.0, self.T


@dataclass(frozen=True)
class Marquez(Criterion):
    """Rebalance when the observed imbalance exceeds the tolerance ``xi``."""

    xi: float
    kind: ClassVar[str] = "marquez"
    _kernel_kind: ClassVar[int] = _codes.KIND_MARQUEZ

    def __post_init__(self) -> None:
        if not math.isfinite(self.xi):
            raise CriterionSpecError(f"marquez tolerance must be finite, got {self.xi!r}")
        object.__setattr__(self, "xi", float(self.xi))

    def decide(self, ctx: CriterionContext) -> bool:
        return float(ctx.I[-1]) > self.xi

    def params_text(self) -> str:
        return f"xi={self.xi!r}"

    def _kernel_params(self) -> tuple[float, int]:
        return self.xi, 0


@dataclass(frozen=True)
class Procassini(Criterion):
    """Rebalance when a balanced iteration plus the rebalance cost is cheaper
    than ``rho`` times the current iteration."""

    rho: float
    kind: ClassVar[str] = "procassini"
    _kernel_kind: ClassVar[int] = _codes.KIND_PROCASSINI

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise CriterionSpecError(f"procassini factor must be positive, got {self.rho!r}")
        object.__setattr__(self, "rho", float(self.rho))

    def decide(self, ctx: CriterionContext) -> bool:
        return float(ctx.mu[-1]) + ctx.C < self.rho * float(ctx.m[-1])

    def params_text(self) -> str:
        return f"rho={self.rho!r}"

    def _kernel_params(self) -> tuple[float, int]:
        return self.rho, 0


@dataclass(frozen=True)
class Menon(Criterion):
    """Rebalance when the excess time accumulated since the last rebalance
    reaches the rebalance cost."""

    kind: ClassVar[str] = "menon"
    _kernel_kind: ClassVar[int] = _codes.KIND_MENON

    def decide(self, ctx: CriterionContext) -> bool:
        return sum(ctx.u.tolist(), 0.0) >= ctx.C


@dataclass(frozen=True)
class Zhai(Criterion):
    """Rebalance when the median iteration time has drifted from the
    post-rebalance baseline by ``C`` in aggregate.

    The baseline is the mean of ``m`` over the first ``phase_len`` rows
    since the last rebalance; the median window holds the last three rows
    and never crosses a rebalance.  Needs ``max(3, phase_len)`` rows.
    """

    phase_len: int = 3
    kind: ClassVar[str] = "zhai"
    _kernel_kind: ClassVar[int] = _codes.KIND_ZHAI

    def __post_init__(self) -> None:
        if not isinstance(self.phase_len, int) or self.phase_len < 1:
            raise CriterionSpecError(
                f"zhai phase length must be a positive integer, got {self.phase_len!r}"
            )

    def decide(self, ctx: CriterionContext) -> bool:
        rows = ctx.m.tolist()
        n = len(rows)
        if n < 3 or n < self.phase_len:
            return False
        phase = 0.0
        for v in rows[: self.phase_len]:
            phase += v
        t_avg = phase / float(self.phase_len)
        d = 0.0
        for i in range(2, n):
            a, b, c = rows[i - 2], rows[i - 1], rows[i]
            lo = a if a < b else b
            hi = b if a < b else a
            med = lo if c < lo else (c if c < hi else hi)
            d += med - t_avg
        return d >= ctx.C

    def params_text(self) -> str:
        return f"phase={self.phase_len}"

    def _kernel_params(self) -> tuple[float, int]:
        return 0.0, self.phase_len


@dataclass(frozen=True)
class Proposed(Criterion):
    """Rebalance when the projected saving of rebalancing now reaches ``C``.

    Over the ``k`` completed rows since the last rebalance the rule compares
    ``k * u(t-1)`` (what those rows would have cost had the imbalance always
    been at its current level) against the excess actually paid; imbalance
    that corrected itself on its own contributes nothing.
    """

    kind: ClassVar[str] = "proposed"
    _kernel_kind: ClassVar[int] = _codes.KIND_PROPOSED

    def decide(self, ctx: CriterionContext) -> bool:
        k = float(ctx.t - 1 - ctx.last_lb)
        return k * float(ctx.u[-1]) - sum(ctx.u.tolist(), 0.0) >= ctx.C


def decide(criterion: Criterion, ctx: CriterionContext) -> bool:
    """Should the application rebalance at ``ctx.t``?"""
    return criterion.decide(ctx)


def run_criterion(model: WorkloadModel, criterion: Criterion) -> tuple[Scenario, SimTrace]:
    """Closed-loop simulation driven by one decision rule.

    Re-simulating the returned scenario with :func:`lblab.model.simulate`
    yields the identical total.
    """
    mu, iota_tab, imax = _tables(model)
    fparam, iparam = criterion._kernel_params()
    lb_iters, total, m, u, iobs, ucum, tacc = kernels.criterion_run(
        mu, iota_tab, imax, model.C, criterion._kernel_kind, fparam, iparam
    )
    decisions = np.zeros(model.gamma, dtype=bool)
    if lb_iters:
        decisions[list(lb_iters)] = True
    trace = SimTrace(
        P=model.P,
        decisions=decisions,
        mu=mu,
        m=m,
        u=u,
        I=iobs,
        U_cum=ucum,
        T_acc=tacc,
    )
    return Scenario(tuple(lb_iters), total_time=float(total)), trace


def rho_tau(mu_tau: float, u_tau: float, C: float) -> float:
    """The Procassini factor that fires exactly at the target interval:
    ``(mu + C) / (mu + u)`` evaluated at that interval."""
    denom = mu_tau + u_tau
    if not denom > 0:
        raise ValueError(f"mu_tau + u_tau must be positive, got {denom!r}")
    return (mu_tau + C) / denom


def menon_tau(C: float, alpha: float) -> float:
    """Continuous-time rebalance interval ``sqrt(2 C / alpha)`` for excess
    time growing linearly at rate ``alpha`` per iteration."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    if C < 0:
        raise ValueError(f"C must be nonnegative, got {C!r}")
    return math.sqrt(2.0 * C / alpha)


# family name -> (class, sweepable parameter name, parameter is integral)
CRITERION_FAMILIES: dict[str, tuple[type, str | None, bool]] = {
    "periodic": (Periodic, "T", True),
    "marquez": (Marquez, "xi", False),
    "procassini": (Procassini, "rho", False),
    "menon": (Menon, None, False),
    "zhai": (Zhai, "phase", True),
    "proposed": (Proposed, None, False),
}

_PARAM_FIELDS = {
    ("periodic", "t"): "T",
    ("marquez", "xi"): "xi",
    ("procassini", "rho"): "rho",
    ("zhai", "phase"): "phase_len",
}


def sweepable_param(family: str) -> tuple[str, bool]:
    """The sweepable parameter of a criterion family and whether it is integral."""
    fam = family.lower()
    if fam not in CRITERION_FAMILIES:
        raise CriterionSpecError(f"unknown criterion family {family!r}")
    _, param, is_int = CRITERION_FAMILIES[fam]
    if param is None:
        raise CriterionSpecError(f"criterion {fam!r} has no sweepable parameter")
    return param, is_int


def make_criterion(family: str, param_value: float | int | None = None) -> Criterion:
    """Build a criterion from a family name and its (single) parameter."""
    fam = family.lower()
    if fam not in CRITERION_FAMILIES:
        raise CriterionSpecError(f"unknown criterion family {family!r}")
    cls, param, is_int = CRITERION_FAMILIES[fam]
    if param is None:
        if param_value is not None:
            raise CriterionSpecError(f"criterion {fam!r} takes no parameter")
        return cls()
    if param_value is None:
        if fam == "zhai":
            return cls()  # documented default phase length
        raise CriterionSpecError(f"criterion {fam!r} requires parameter {param!r}")
    field = _PARAM_FIELDS[(fam, param.lower())]
    if is_int:
        as_int = int(round(float(param_value)))
        return cls(**{field: as_int})
    return cls(**{field: float(param_value)})


def parse_criterion(text: str) -> Criterion:
    """Parse a spec string like ``procassini:rho=19.43`` or ``menon``.

    Family and parameter names are case-insensitive; parameters are decimal
    literals.
    """
    body = text.strip()
    if not body:
        raise CriterionSpecError("empty criterion spec")
    name, sep, rest = body.partition(":")
    fam = name.strip().lower()
    if fam not in CRITERION_FAMILIES:
        raise CriterionSpecError(f"unknown criterion family {name.strip()!r}")
    cls, param, is_int = CRITERION_FAMILIES[fam]
    if not sep:
        return make_criterion(fam)
    key, eq, value = rest.partition("=")
    key = key.strip().lower()
    value = value.strip()
    if not eq or not key or not value:
        raise CriterionSpecError(f"bad criterion parameter syntax in {text!r}")
    if param is None or key != param.lower():
        raise CriterionSpecError(f"criterion {fam!r} does not take parameter {key!r}")
    field = _PARAM_FIELDS[(fam, key)]
    try:
        if is_int:
            parsed: float | int = int(value)
        else:
            parsed = float(value)
    except ValueError:
        raise CriterionSpecError(f"bad {key!r} value {value!r} in {text!r}") from None
    return cls(**{field: parsed})
