"""Acceptance gate: one test per acceptance criterion.

Each test is labeled AC<n>; the terminal summary prints one PASS/FAIL line
per criterion (see conftest).  Wall-clock limits are asserted directly.
"""
import math
import time

import numpy as np
import pytest

from lblab import (
    WorkloadModel,
    brute_force,
    catalog,
    compare,
    search_nth_best,
    search_optimal,
    sweep,
)
from lblab.bench import DEFAULT_CRITERIA
from lblab.criteria import Menon, Procassini, Proposed, menon_tau, rho_tau, run_criterion
from lblab.optimal import EXPANSION_BOUND

STATIC_CONSTANT_ALPHA = 0.1 * 52.0  # per-iteration excess growth, time units


def as_pairs(scenarios):
    return [(s.lb_iterations, s.total_time) for s in scenarios]


@pytest.fixture(scope="session")
def catalog_rows():
    """Full comparison of the default rules on every catalog benchmark."""
    return {b.id: compare(b.model, DEFAULT_CRITERIA, benchmark_id=b.id) for b in catalog()}


def test_ac1_search_equals_enumeration():
    """Exact oracle equivalence on every truncated catalog benchmark."""
    started = time.perf_counter()
    for bench in catalog():
        for gamma in (8, 10, 12, 14):
            model = bench.variant(gamma=gamma)
            best, _ = search_optimal(model)
            oracle = brute_force(model, limit=5)
            assert (best.lb_iterations, best.total_time) == (
                oracle[0].lb_iterations, oracle[0].total_time,
            ), f"{bench.id} gamma={gamma}: optimal differs"
            top5, _ = search_nth_best(model, 5)
            assert as_pairs(top5) == as_pairs(oracle), (
                f"{bench.id} gamma={gamma}: top-5 differs"
            )
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"oracle equivalence took {elapsed:.1f}s (limit 10s)"


def test_ac2_expansion_bound_at_full_length():
    """Pruning keeps the search quadratic on every full-length benchmark."""
    bound = EXPANSION_BOUND(600)
    assert bound == 180_900
    for bench in catalog():
        started = time.perf_counter()
        _, stats = search_optimal(bench.model)
        elapsed = time.perf_counter() - started
        assert stats.nodes_expanded <= bound, (
            f"{bench.id}: expanded {stats.nodes_expanded} > {bound}"
        )
        assert elapsed < 5.0, f"{bench.id}: search took {elapsed:.1f}s (limit 5s)"


def test_ac3_menon_interval_matches_continuous_optimum():
    """The excess-sum rule fires at a constant interval one past the
    continuous-time crossing on constant-increment imbalance."""
    model = next(b for b in catalog() if b.id == "static-constant").model
    scen, _ = run_criterion(model, Menon())
    gaps = {int(g) for g in np.diff(scen.lb_iterations)}
    assert len(scen.lb_iterations) > 1
    assert gaps == {scen.lb_iterations[0]}, "inter-rebalance interval drifts"
    interval = scen.lb_iterations[0]
    tau = menon_tau(model.C, STATIC_CONSTANT_ALPHA)
    assert math.isclose(tau, 44.72, abs_tol=0.005)
    assert interval == 46
    assert abs(interval - math.ceil(tau)) <= 1


def test_ac4_rules_coincide_on_linear_growth():
    """On linear excess growth the three interval rules agree."""
    model = next(b for b in catalog() if b.id == "static-constant").model
    menon, _ = run_criterion(model, Menon())
    proposed, _ = run_criterion(model, Proposed())
    assert menon.lb_iterations and proposed.lb_iterations
    assert abs(proposed.lb_iterations[0] - menon.lb_iterations[0]) <= 1
    menon_gap = int(np.diff(menon.lb_iterations)[0])
    proposed_gap = int(np.diff(proposed.lb_iterations)[0])
    assert abs(proposed_gap - menon_gap) <= 1

    tau = menon_tau(model.C, STATIC_CONSTANT_ALPHA)
    rho = rho_tau(52.0, STATIC_CONSTANT_ALPHA * tau, model.C)
    ratio, _ = run_criterion(model, Procassini(rho))
    assert ratio.lb_iterations == menon.lb_iterations, (
        "the tuned threshold-ratio rule must fire exactly with the excess-sum rule"
    )


def test_ac5_self_correcting_imbalance_detected():
    """On a triangular excess that returns to zero on its own, the
    cumulative rule still pays for a rebalance; the projected-saving rule
    correctly declines."""
    model = WorkloadModel(
        P=64, gamma=110, W0=52.0 * 64, C=8000.0, iota="0.1 - 0.002*t"
    )
    menon, trace = run_criterion(model, Menon())
    proposed, _ = run_criterion(model, Proposed())
    assert len(menon.lb_iterations) >= 1
    assert proposed.lb_iterations == ()
    assert menon.lb_iterations == (87,)  # crossing sits near the tail
    assert proposed.total_time < menon.total_time


def test_ac6_no_rule_beats_the_optimal_schedule(catalog_rows):
    """Relative time is exactly >= 1 for every benchmark x rule pair."""
    checked = 0
    for bench_id, rows in catalog_rows.items():
        assert rows[0].criterion_id == "optimal"
        assert rows[0].relative == 1.0
        for row in rows[1:]:
            assert row.relative >= 1.0, (
                f"{bench_id}/{row.criterion_id}: relative {row.relative!r} < 1"
            )
            checked += 1
    assert checked == 8 * 6


def test_ac7_qualitative_orderings(catalog_rows):
    """The headline behavioral contrasts between the two excess rules."""
    linear = {r.criterion_id: r for r in catalog_rows["static-linear"]}
    assert linear["menon"].relative > linear["proposed"].relative
    assert linear["menon"].relative >= 1.05

    autocorrect = {r.criterion_id: r for r in catalog_rows["static-autocorrect"]}
    assert autocorrect["proposed"].num_lb < autocorrect["menon"].num_lb

    irregular = {r.criterion_id: r for r in catalog_rows["irregular-constant"]}
    assert abs(irregular["menon"].relative - irregular["proposed"].relative) <= 0.10


def test_ac8_threshold_ratio_sweep_brackets_the_tuned_value():
    """A dense sweep of the threshold-ratio parameter has its argmin in
    [17, 21] on the constant-increment benchmark."""
    model = next(b for b in catalog() if b.id == "static-constant").model
    started = time.perf_counter()
    result = sweep(model, "procassini", 0.5, 50.0, 5000)
    elapsed = time.perf_counter() - started
    assert len(result.points) == 5000
    best = result.best
    assert 17.0 <= best.value <= 21.0, f"argmin at rho={best.value!r}"
    assert elapsed < 60.0, f"sweep took {elapsed:.1f}s (limit 60s)"


def test_ac9_wall_clock_comparisons_out_of_scope():
    pytest.skip(
        "out of scope: wall-clock results from hardware parallel runs are not "
        "reproducible here; criteria 1-8 stand in for them"
    )
