"""Provably optimal rebalancing schedules.

Finding the schedule that minimizes total parallel time is a shortest-path
problem: a state is (next iteration, last rebalance point), the two outgoing
edges are "run the next iteration as is" and "rebalance first", and edge
weights are the iteration times of the workload model.  :func:`search_optimal`
runs a best-first search over that graph with an admissible remaining-time
bound (the sum of perfectly balanced iteration times, which no schedule can
beat), so the first completed schedule it pops is optimal.
:func:`search_nth_best` generalizes to the ``n`` cheapest schedules.

Three prunings keep the search polynomial in the iteration count without
giving up optimality:

* per iteration, only the ``n`` cheapest queued rebalance nodes are kept
  (a rebalance erases history, so costlier arrivals can never catch up);
* once ``n`` rebalance nodes at an iteration have been expanded, no more
  are generated there;
* every other state is expanded at most ``n`` times.

Completed schedules are drained while they tie the n-th total and the
result is ordered by (total time, rebalance tuple), which makes the output
deterministic and directly comparable with :func:`brute_force`, the
exhaustive check over all ``2**(gamma-1)`` schedules.

Every accumulation here performs the same floating-point operations in the
same order as the simulator, so searched totals are bit-identical to
re-simulated ones.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import kernels
from .model import Scenario, WorkloadModel, _tables

__all__ = [
    "SearchNode",
    "SearchStats",
    "Frontier",
    "search_optimal",
    "search_nth_best",
    "brute_force",
    "EXPANSION_BOUND",
]


def EXPANSION_BOUND(gamma: int) -> int:
    """Worst-case expansions of the single-best search: one per reachable
    (iteration, last rebalance) state plus one per completed schedule."""
    return gamma * (gamma + 1) // 2 + gamma


@dataclass(slots=True)
class SearchNode:
    """One decision point: about to run iteration ``next_iter``, rebalancing
    first iff ``is_lb``.  ``g`` is the exact time already spent on iterations
    before ``next_iter``; ``imb`` is the raw imbalance accumulator at the
    decision point; ``f`` adds the admissible remaining-time bound; ``lbt``
    is the rebalance tuple of the path so far (shared with the parent when
    this step does not rebalance)."""

    next_iter: int
    is_lb: bool
    last_lb: int
    g: float
    f: float
    imb: float
    lbt: tuple[int, ...]
    alive: bool = True


@dataclass(frozen=True)
class SearchStats:
    """Work accounting for one search run."""

    nodes_created: int
    nodes_expanded: int
    queue_peak: int
    goals_popped: int


class Frontier:
    """Priority queue of search nodes with displacement support.

    Entries are ordered by (f, next_iter, is_lb, rebalance tuple, insertion
    order): ties on the bound prefer shallower nodes, within a depth nodes
    that already paid their rebalance cost, and within those the
    lexicographically smallest rebalance tuple.  The tuple tie-break is what
    lets exact-tie pruning keep the same schedules an exhaustive enumeration
    ranks first.  Displaced nodes are tombstoned in place and skipped on
    pop.  Per iteration, at most ``keep`` rebalance nodes are queued at
    once; a candidate only displaces a (cost, tuple)-greater one.
    """

    def __init__(self, keep: int) -> None:
        self.keep = keep
        self._heap: list[tuple[float, int, int, tuple[int, ...], int, SearchNode]] = []
        self._seq = 0
        self._lb_queued: dict[int, list[SearchNode]] = {}
        self.live = 0
        self.peak = 0
        self.created = 0

    def push(self, node: SearchNode) -> None:
        heapq.heappush(
            self._heap, (node.f, node.next_iter, int(node.is_lb), node.lbt, self._seq, node)
        )
        self._seq += 1
        self.created += 1
        self.live += 1
        if self.live > self.peak:
            self.peak = self.live

    def replace_or_insert(self, node: SearchNode) -> None:
        """Queue a rebalance node, honoring the per-iteration budget."""
        queued = self._lb_queued.setdefault(node.next_iter, [])
        if len(queued) >= self.keep:
            worst = max(queued, key=lambda q: (q.g, q.lbt))
            if not (node.g, node.lbt) < (worst.g, worst.lbt):
                return
            worst.alive = False
            queued.remove(worst)
            self.live -= 1
        queued.append(node)
        self.push(node)

    def pop(self) -> tuple[float, SearchNode] | None:
        """Cheapest live node, or None when exhausted."""
        while self._heap:
            f, _, _, _, _, node = heapq.heappop(self._heap)
            if not node.alive:
                continue
            self.live -= 1
            if node.is_lb and node.next_iter > 0:
                self._lb_queued[node.next_iter].remove(node)
            return f, node
        return None


@lru_cache(maxsize=64)
def _search_tables(model: WorkloadModel) -> tuple[list, list, float, list]:
    """Model tables as plain lists plus the suffix bound ``h``.

    ``h[i]`` is the sum of balanced iteration times over ``[i, gamma)``,
    accumulated back to front; no schedule can finish the remaining
    iterations faster.
    """
    mu_arr, iota_arr, imax = _tables(model)
    mu = mu_arr.tolist()
    iota = iota_arr.tolist()
    h = [0.0] * (model.gamma + 1)
    for i in range(model.gamma - 1, -1, -1):
        h[i] = mu[i] + h[i + 1]
    return mu, iota, imax, h


def _run_search(model: WorkloadModel, n: int) -> tuple[list[SearchNode], SearchStats]:
    mu, iota, imax, h = _search_tables(model)
    gamma = model.gamma
    C = model.C

    frontier = Frontier(keep=n)
    root = SearchNode(0, True, 0, 0.0, h[0], 0.0, ())
    frontier.push(root)

    goals: list[SearchNode] = []
    state_pops: dict[tuple[int, bool, int], int] = {}
    expanded = 0
    goal_pops = 0
    bound: float | None = None

    while True:
        popped = frontier.pop()
        if popped is None:
            break
        f, node = popped
        if bound is not None and f > bound:
            break
        i = node.next_iter
        if i == gamma:
            goals.append(node)
            goal_pops += 1
            if bound is None and len(goals) >= n:
                bound = node.g
            continue
        state = (i, node.is_lb, node.last_lb)
        pops = state_pops.get(state, 0)
        if pops >= n:
            continue
        state_pops[state] = pops + 1
        expanded += 1

        # cost of iteration i under this node's decision
        if node.is_lb and i > 0:
            g1 = (node.g + C) + mu[i]
            last = i
            imb = 0.0
        else:
            iobs = node.imb
            if iobs < 0.0:
                iobs = 0.0
            elif iobs > imax:
                iobs = imax
            g1 = node.g + (1.0 + iobs) * mu[i]
            last = node.last_lb
            imb = node.imb

        j = i + 1
        if j == gamma:
            frontier.push(SearchNode(j, False, last, g1, g1 + h[j], imb, node.lbt))
            continue
        imb_next = imb + iota[j - last]
        frontier.push(SearchNode(j, False, last, g1, g1 + h[j], imb_next, node.lbt))
        if state_pops.get((j, True, j), 0) < n:
            lb_child = SearchNode(j, True, j, g1, (g1 + C) + h[j], 0.0, node.lbt + (j,))
            frontier.replace_or_insert(lb_child)

    goals.sort(key=lambda node: (node.g, node.lbt))
    del goals[n:]
    stats = SearchStats(
        nodes_created=frontier.created,
        nodes_expanded=expanded,
        queue_peak=frontier.peak,
        goals_popped=goal_pops,
    )
    return goals, stats


def _as_scenario(node: SearchNode) -> Scenario:
    return Scenario(node.lbt, total_time=node.g)


def search_optimal(model: WorkloadModel) -> tuple[Scenario, SearchStats]:
    """The schedule with the smallest total parallel time.

    Exact ties are broken toward the lexicographically smallest rebalance
    tuple, matching :func:`brute_force` order.
    """
    goals, stats = _run_search(model, 1)
    return _as_scenario(goals[0]), stats


def search_nth_best(model: WorkloadModel, n: int) -> tuple[tuple[Scenario, ...], SearchStats]:
    """The ``n`` cheapest schedules in (total time, rebalance tuple) order.

    Returns fewer when fewer than ``n`` schedules exist.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    goals, stats = _run_search(model, n)
    return tuple(_as_scenario(g) for g in goals), stats


def brute_force(
    model: WorkloadModel, gamma_cap: int = 20, limit: int | None = None
) -> list[Scenario]:
    """Every schedule, cheapest first, by exhaustive enumeration.

    Scenarios are ordered by (total time, rebalance tuple).  Refuses models
    beyond ``gamma_cap`` iterations; the scenario count doubles per
    iteration.  ``limit`` truncates the returned list without weakening the
    ordering guarantee.
    """
    if model.gamma > gamma_cap:
        raise ValueError(
            f"exhaustive enumeration of gamma={model.gamma} needs 2**{model.gamma - 1} "
            f"simulations; raise gamma_cap above {gamma_cap} to allow it"
        )
    mu, iota, imax = _tables(model)
    totals = kernels.subset_totals(mu, iota, imax, model.C)
    order = np.argsort(totals, kind="stable")

    def as_tuple(mask: int) -> tuple[int, ...]:
        return tuple(b + 1 for b in range(model.gamma - 1) if (mask >> b) & 1)

    count = len(order) if limit is None else min(limit, len(order))
    out: list[Scenario] = []
    pos = 0
    while pos < len(order) and len(out) < count:
        # resolve runs of exactly equal totals by rebalance tuple
        end = pos + 1
        t0 = totals[order[pos]]
        while end < len(order) and totals[order[end]] == t0:
            end += 1
        run = [int(order[k]) for k in range(pos, end)]
        if len(run) > 1:
            run.sort(key=as_tuple)
        for mask in run:
            out.append(Scenario(as_tuple(mask), total_time=float(totals[mask])))
            if len(out) == count:
                break
        pos = end
    return out
