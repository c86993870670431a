"""Command line interface.

Four subcommands cover the laboratory workflows:

* ``simulate`` - run one rebalancing scenario and export its trace;
* ``optimal``  - search for the cheapest schedule(s), optionally checked
  against exhaustive enumeration;
* ``compare``  - score decision rules against the optimal schedule;
* ``sweep``    - map one rule parameter over a grid.

The model comes from ``--bench`` (catalog id), ``--inline`` (JSON object),
or ``--config`` (a config file as produced by ``--dump-config``), with
``--cost`` and ``--omega-scope`` as final overrides.  Outputs are written
into the ``--out`` directory under fixed names; reruns produce
byte-identical files.

Exit codes: 0 success, 1 runtime failure (including a ``--verify-brute``
mismatch), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from ._backend import backend_name
from ._io import dump_json, fmt_real
from .bench import (
    DEFAULT_CRITERIA,
    catalog,
    compare,
    get_benchmark,
    report_to_csv,
    report_to_json,
    sweep,
    sweep_to_csv,
    sweep_to_json,
)
from .criteria import Criterion, CriterionSpecError, parse_criterion, sweepable_param
from .model import (
    OMEGA_SCOPES,
    ModelConfigError,
    Scenario,
    ScenarioError,
    WorkloadModel,
    simulate,
)
from .optimal import brute_force, search_nth_best

_MODEL_FIELDS = ("P", "gamma", "W0", "C", "omega", "iota", "omega_scope")


class _UsageError(Exception):
    """Bad command line input; reported via the parser with exit code 2."""


def model_to_dict(model: WorkloadModel) -> dict:
    return {name: getattr(model, name) for name in _MODEL_FIELDS}


def _model_from_dict(data: dict, origin: str) -> WorkloadModel:
    if not isinstance(data, dict):
        raise _UsageError(f"{origin} must be a JSON object")
    unknown = set(data) - set(_MODEL_FIELDS)
    if unknown:
        raise _UsageError(f"{origin} has unknown model fields: {sorted(unknown)}")
    missing = {"P", "gamma", "W0", "C"} - set(data)
    if missing:
        raise _UsageError(f"{origin} is missing model fields: {sorted(missing)}")
    try:
        return WorkloadModel(**data)
    except ModelConfigError as e:
        raise _UsageError(f"{origin}: {e}") from e


def _parse_scenario_text(text: str) -> tuple[int, ...]:
    body = text.strip()
    if not body:
        return ()
    parts = body.replace(";", ",").split(",")
    try:
        return tuple(int(p.strip()) for p in parts if p.strip())
    except ValueError:
        raise _UsageError(f"scenario must be a list of integers, got {text!r}") from None


def _add_model_args(p: argparse.ArgumentParser, allow_all: bool = False) -> None:
    src = p.add_argument_group("model source")
    bench_help = "catalog benchmark id" + (" or 'all'" if allow_all else "")
    src.add_argument("--bench", metavar="ID", help=bench_help)
    src.add_argument("--inline", metavar="JSON", help="model as a JSON object")
    src.add_argument("--config", metavar="FILE", help="config file from --dump-config")
    over = p.add_argument_group("model overrides")
    over.add_argument("--cost", type=float, metavar="C", help="override the rebalance cost")
    over.add_argument("--omega-scope", choices=OMEGA_SCOPES, help="override the workload scope")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    p.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective config as JSON and exit without running",
    )
    p.add_argument(
        "--seed-free",
        action="store_true",
        help="reserved for a future stochastic mode; rejected for now",
    )


def _criteria_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--criterion",
        action="append",
        metavar="SPEC",
        default=None,
        help="decision rule spec, repeatable (e.g. procassini:rho=19.43)",
    )
    p.add_argument(
        "--criteria",
        metavar="SPECS",
        help="comma-separated decision rule specs",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lblab",
        description="Load-balancing decision laboratory",
    )
    parser.add_argument(
        "--backend",
        action="store_true",
        help="print the active kernel backend and exit",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p_sim = sub.add_parser("simulate", help="run one rebalancing scenario")
    _add_model_args(p_sim)
    p_sim.add_argument(
        "--scenario",
        metavar="ITERS",
        default="",
        help="rebalance iterations, comma or semicolon separated (default: none)",
    )

    p_opt = sub.add_parser("optimal", help="search for the cheapest schedule(s)")
    _add_model_args(p_opt)
    p_opt.add_argument("--nth", type=int, default=None, metavar="N", help="best N schedules")
    p_opt.add_argument(
        "--verify-brute",
        action="store_true",
        help="check the result against exhaustive enumeration",
    )
    p_opt.add_argument(
        "--gamma-cap",
        type=int,
        default=None,
        metavar="G",
        help="largest iteration count --verify-brute will enumerate (default: 20)",
    )

    p_cmp = sub.add_parser("compare", help="score decision rules against the optimum")
    _add_model_args(p_cmp, allow_all=True)
    _criteria_args(p_cmp)

    p_swp = sub.add_parser("sweep", help="map one rule parameter over a grid")
    _add_model_args(p_swp)
    p_swp.add_argument("--criterion", metavar="FAMILY", help="rule family to sweep")
    p_swp.add_argument("--param", metavar="NAME", help="parameter name (validated, optional)")
    p_swp.add_argument("--from", dest="lo", type=float, default=None, metavar="LO")
    p_swp.add_argument("--to", dest="hi", type=float, default=None, metavar="HI")
    p_swp.add_argument("--steps", type=int, default=None, metavar="N")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise _UsageError(f"cannot read config {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise _UsageError(f"config {path!r} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise _UsageError(f"config {path!r} must be a JSON object")
    return data


def _resolve_model(args: argparse.Namespace, config: dict) -> tuple[WorkloadModel, str]:
    """The model to run plus the benchmark label for report rows."""
    sources = [s for s in ("bench", "inline") if getattr(args, s, None)]
    if len(sources) > 1:
        raise _UsageError("--bench and --inline are mutually exclusive")

    def from_catalog(bench_id: str) -> tuple[WorkloadModel, str]:
        try:
            b = get_benchmark(bench_id)
        except KeyError as e:
            raise _UsageError(str(e.args[0])) from e
        return b.model, b.id

    if args.inline is not None:
        try:
            data = json.loads(args.inline)
        except json.JSONDecodeError as e:
            raise _UsageError(f"--inline is not valid JSON: {e}") from e
        model = _model_from_dict(data, "--inline")
        label = "inline"
    elif args.bench:
        model, label = from_catalog(args.bench)
    elif config.get("model") is not None:
        # the dumped model dict is the resolved model; "bench" is its label
        model = _model_from_dict(config["model"], "config model")
        label = str(config.get("bench") or "inline")
    elif config.get("bench"):
        model, label = from_catalog(str(config["bench"]))
    else:
        raise _UsageError("no model given; use --bench, --inline, or --config")

    overrides = {}
    cost = args.cost if args.cost is not None else config.get("cost")
    if cost is not None:
        overrides["C"] = float(cost)
    scope = args.omega_scope or config.get("omega_scope")
    if scope is not None:
        overrides["omega_scope"] = scope
    if overrides:
        try:
            model = replace(model, **overrides)
        except ModelConfigError as e:
            raise _UsageError(str(e)) from e
    return model, label


def _resolve_criteria(args: argparse.Namespace, config: dict) -> tuple[Criterion, ...]:
    specs: list[str] = []
    if getattr(args, "criteria", None):
        specs.extend(s for s in args.criteria.split(",") if s.strip())
    if getattr(args, "criterion", None):
        specs.extend(args.criterion)
    if not specs and config.get("criteria"):
        specs = list(config["criteria"])
    if not specs:
        return DEFAULT_CRITERIA
    try:
        return tuple(parse_criterion(s) for s in specs)
    except CriterionSpecError as e:
        raise _UsageError(str(e)) from e


def _sweep_settings(args: argparse.Namespace, config: dict) -> tuple[str, float, float, int]:
    cfg = config.get("sweep") or {}
    family = args.criterion or cfg.get("criterion")
    lo = args.lo if args.lo is not None else cfg.get("from")
    hi = args.hi if args.hi is not None else cfg.get("to")
    steps = args.steps if args.steps is not None else cfg.get("steps")
    missing = [
        name
        for name, value in (("--criterion", family), ("--from", lo), ("--to", hi), ("--steps", steps))
        if value is None
    ]
    if missing:
        raise _UsageError(f"sweep needs {', '.join(missing)} (flags or config)")
    return str(family), float(lo), float(hi), int(steps)


def _effective_config(args: argparse.Namespace, model: WorkloadModel, label: str, config: dict) -> dict:
    doc: dict = {"bench": label if label != "inline" else None, "model": model_to_dict(model)}
    if args.command == "simulate":
        if args.scenario:
            doc["scenario"] = list(_parse_scenario_text(args.scenario))
        else:
            doc["scenario"] = [int(i) for i in config.get("scenario", [])]
    if args.command == "optimal":
        doc["nth"] = args.nth if args.nth is not None else int(config.get("nth", 1))
        doc["gamma_cap"] = (
            args.gamma_cap if args.gamma_cap is not None else int(config.get("gamma_cap", 20))
        )
    if args.command == "compare":
        doc["criteria"] = [c.spec() for c in _resolve_criteria(args, config)]
    if args.command == "sweep":
        family, lo, hi, steps = _sweep_settings(args, config)
        doc["sweep"] = {
            "criterion": family,
            "param": args.param or sweepable_param(family)[0],
            "from": lo,
            "to": hi,
            "steps": steps,
        }
    return doc


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args: argparse.Namespace, config: dict) -> int:
    model, _label = _resolve_model(args, config)
    text = args.scenario or ""
    if not text and config.get("scenario"):
        scenario_iters = tuple(int(i) for i in config["scenario"])
    else:
        scenario_iters = _parse_scenario_text(text)
    try:
        scenario = Scenario(scenario_iters)
        total, trace = simulate(model, scenario)
    except (ScenarioError, ModelConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = _out_dir(args)
    with open(out / "trace.csv", "w", encoding="utf-8", newline="\n") as fh:
        trace.to_csv(fh)
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        dump_json(
            {
                "model": model_to_dict(model),
                "scenario": list(scenario.lb_iterations),
                "num_lb": len(scenario),
                "total_time": total,
            },
            fh,
        )
    print(f"total_time={fmt_real(total)} num_lb={len(scenario)}")
    return 0


def _cmd_optimal(args: argparse.Namespace, config: dict) -> int:
    model, _label = _resolve_model(args, config)
    n = args.nth if args.nth is not None else int(config.get("nth", 1))
    if n < 1:
        raise _UsageError(f"--nth must be >= 1, got {n}")
    try:
        scenarios, stats = search_nth_best(model, n)
    except ModelConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    verify: str | None = None
    if args.verify_brute:
        cap = args.gamma_cap if args.gamma_cap is not None else int(config.get("gamma_cap", 20))
        try:
            reference = brute_force(model, gamma_cap=cap, limit=n)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        same = [(s.lb_iterations, s.total_time) for s in scenarios] == [
            (s.lb_iterations, s.total_time) for s in reference
        ]
        verify = "match" if same else "mismatch"
    out = _out_dir(args)
    with open(out / "optimal.json", "w", encoding="utf-8", newline="\n") as fh:
        dump_json(
            {
                "model": model_to_dict(model),
                "nth": n,
                "scenarios": [
                    {
                        "rank": k + 1,
                        "total_time": s.total_time,
                        "num_lb": len(s),
                        "lb_iterations": list(s.lb_iterations),
                    }
                    for k, s in enumerate(scenarios)
                ],
                "stats": {
                    "nodes_created": stats.nodes_created,
                    "nodes_expanded": stats.nodes_expanded,
                    "queue_peak": stats.queue_peak,
                    "goals_popped": stats.goals_popped,
                },
                "verify": verify,
            },
            fh,
        )
    for k, s in enumerate(scenarios):
        assert s.total_time is not None
        iters = ";".join(str(i) for i in s.lb_iterations)
        print(f"rank={k + 1} total_time={fmt_real(s.total_time)} num_lb={len(s)} lb=[{iters}]")
    if verify is not None:
        print("MATCH" if verify == "match" else "MISMATCH")
        if verify == "mismatch":
            return 1
    return 0


def _cmd_compare(args: argparse.Namespace, config: dict) -> int:
    criteria = _resolve_criteria(args, config)
    if args.bench == "all":
        if args.inline:
            raise _UsageError("--bench and --inline are mutually exclusive")
        jobs = [(b.model, b.id) for b in catalog()]
    else:
        jobs = [_resolve_model(args, config)]
    rows = []
    try:
        for model, label in jobs:
            rows.extend(compare(model, criteria, benchmark_id=label))
    except ModelConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = _out_dir(args)
    with open(out / "report.csv", "w", encoding="utf-8", newline="\n") as fh:
        report_to_csv(rows, fh)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        report_to_json(rows, fh)
    for r in rows:
        print(
            f"{r.benchmark_id} {r.criterion_id}"
            + (f"[{r.params}]" if r.params else "")
            + f" total={fmt_real(r.total_time)} relative={fmt_real(r.relative)} num_lb={r.num_lb}"
        )
    return 0


def _cmd_sweep(args: argparse.Namespace, config: dict) -> int:
    model, _label = _resolve_model(args, config)
    family, lo, hi, steps = _sweep_settings(args, config)
    try:
        param, _ = sweepable_param(family)
    except CriterionSpecError as e:
        raise _UsageError(str(e)) from e
    if args.param and args.param.lower() != param.lower():
        raise _UsageError(f"criterion {family!r} sweeps {param!r}, not {args.param!r}")
    try:
        result = sweep(model, family, lo, hi, steps)
    except (ValueError, ModelConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = _out_dir(args)
    with open(out / "sweep.csv", "w", encoding="utf-8", newline="\n") as fh:
        sweep_to_csv(result, fh)
    with open(out / "sweep.json", "w", encoding="utf-8", newline="\n") as fh:
        sweep_to_json(result, fh)
    best = result.best
    print(
        f"best {result.param}={fmt_real(best.value)} "
        f"total_time={fmt_real(best.total_time)} num_lb={best.num_lb}"
    )
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "optimal": _cmd_optimal,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        print(backend_name())
        return 0
    if not args.command:
        parser.print_help()
        return 2
    try:
        if args.seed_free:
            raise _UsageError("--seed-free is reserved and not yet available")
        config = _load_config(args.config) if getattr(args, "config", None) else {}
        if args.dump_config:
            model, label = _resolve_model(args, config)
            dump_json(_effective_config(args, model, label, config), sys.stdout)
            return 0
        return _COMMANDS[args.command](args, config)
    except _UsageError as e:
        parser.error(str(e))
        return 2  # unreachable; parser.error exits with 2
    except CriterionSpecError as e:
        parser.error(str(e))
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
