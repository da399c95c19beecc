"""Ratio-minimization drivers shared by all improvement algorithms.

Both drivers repeatedly solve the parametric problem

    minimize  cut(S) - delta * g(S)   over the admissible sets S

through a pluggable subproblem solver, where g is the denominator of the
ratio being minimized. The greedy driver re-solves at the current ratio and
terminates when the ratio stops improving, which is exact; the bisection
driver binary-searches delta to a relative tolerance.

On integer-weighted graphs delta is carried as an exact rational so that
subproblem capacities can be scaled to integers and termination tests are
exact; otherwise floats are used.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Protocol

import numpy as np

from .graph import NodeSet, WeightedGraph, cut

__all__ = [
    "SeedRejectedError",
    "RatioObjective",
    "TraceStep",
    "ImproveResult",
    "SubproblemOutcome",
    "dinkelbach",
    "bisection",
    "exact_eps",
]

class SeedRejectedError(ValueError):
    """The seed set violates a precondition of the requested algorithm."""


@dataclass(frozen=True)
class RatioObjective:
    """Denominator specification for the ratio cut(S) / g(S).

    kind "volume" uses g(S) = vol(S) with the search restricted to subsets of
    the reference set. kind "relative-volume" uses
    g(S) = vol(S n R) - kappa * vol(S n R-complement) over all sets.
    """

    kind: str  # "volume" | "relative-volume"
    reference: NodeSet
    kappa: Fraction | float | None = None

    def __post_init__(self):
        if self.kind not in ("volume", "relative-volume"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "relative-volume" and self.kappa is None:
            raise ValueError("relative-volume objective requires kappa")

    def denominator(self, graph: WeightedGraph, members: np.ndarray):
        """g(S) for a sorted id array; exact (int/Fraction) on integer graphs."""
        if len(members) == 0:
            return 0
        if self.kind == "volume":
            return graph.volume_exact(members)
        ref = self.reference
        inref = np.isin(members, ref.members, assume_unique=True)
        vol_in = graph.volume_exact(members[inref])
        vol_out = graph.volume_exact(members[~inref])
        return vol_in - self.kappa * vol_out


@dataclass(frozen=True)
class TraceStep:
    delta: float
    cut: float
    denominator: float
    arcs_touched: int


@dataclass
class ImproveResult:
    """Output set of one improvement run plus its iteration trace.

    arcs_touched sums the distinct arcs materialized across subproblem
    solves; max_arcs_per_solve and max_nodes_per_solve carry the largest
    single-solve footprint, which is what locality bounds constrain.
    """

    set: NodeSet
    objective: float
    trace: list[TraceStep]
    mode: str
    flipped: bool
    algorithm: str = ""
    iterations: int = 0
    arcs_touched: int = 0
    objective_exact: Fraction | None = None
    objective_kind: str = "conductance"
    max_arcs_per_solve: int = 0
    max_nodes_per_solve: int = 0
    frontier: object = None
    solve_frontiers: list | None = None

    def to_json_dict(self, graph: WeightedGraph) -> dict:
        from .graph import conductance  # local import to avoid cycle at module load

        profile = conductance(graph, self.set)
        return {
            "algorithm": self.algorithm,
            "set": [graph.to_label(v) for v in self.set],
            "cut": profile.cut,
            "vol": profile.volume,
            "conductance": profile.conductance,
            "objective": self.objective,
            "objective_kind": self.objective_kind,
            "iterations": self.iterations,
            "arcs_touched": self.arcs_touched,
            "flipped": self.flipped,
            "trace": [
                {
                    "delta": step.delta,
                    "cut": step.cut,
                    "denominator": step.denominator,
                    "arcs_touched": step.arcs_touched,
                }
                for step in self.trace
            ],
        }


@dataclass
class SubproblemOutcome:
    """One parametric min-cut solve: the minimizing set plus instrumentation."""

    members: np.ndarray
    arcs_touched: int
    nodes_materialized: int
    blocking_flow_rounds: int = 0
    flow_value: float | Fraction = 0
    extra: object = None


class Subsolver(Protocol):
    def solve(self, delta) -> SubproblemOutcome: ...


def _ratio(c, g):
    """cut/g as Fraction for exact inputs, float otherwise."""
    if isinstance(g, (int, Fraction)) and isinstance(c, int):
        return Fraction(c) / Fraction(g)
    return c / g


def _connected_pieces(graph: WeightedGraph, members: np.ndarray) -> list[np.ndarray]:
    member_set = set(int(v) for v in members)
    seen = set()
    pieces = []
    for start in members:
        start = int(start)
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            nbrs, _ = graph.neighbors(u)
            for v in nbrs:
                v = int(v)
                if v in member_set and v not in seen:
                    seen.add(v)
                    comp.append(v)
                    queue.append(v)
        pieces.append(np.array(sorted(comp), dtype=np.int64))
    return pieces


def _reduce_to_best_component(graph, objective, members):
    """Return the smallest connected piece achieving the best ratio.

    Cut and denominator are additive over connected pieces, so some piece is
    at least as good as the union; dropping non-positive-denominator pieces
    never hurts.
    """
    pieces = _connected_pieces(graph, members)
    best = None
    for piece in pieces:
        g = objective.denominator(graph, piece)
        if g <= 0:
            continue
        ratio = _ratio(cut(graph, piece), g)
        vol = graph.volume_exact(piece)
        key = (ratio, vol, len(piece))
        if best is None or key < best[0]:
            best = (key, piece)
    if best is None:
        return members
    return best[1]


def _finalize(graph, objective, members, delta, trace, mode, iterations, arcs_total,
              max_arcs, max_nodes):
    members = _reduce_to_best_component(graph, objective, members)
    g = objective.denominator(graph, members)
    final = _ratio(cut(graph, members), g) if g > 0 else delta
    exact = final if isinstance(final, Fraction) else None
    return ImproveResult(
        set=graph.node_set(members),
        objective=float(final),
        trace=trace,
        mode=mode,
        flipped=False,
        iterations=iterations,
        arcs_touched=arcs_total,
        objective_exact=exact,
        max_arcs_per_solve=max_arcs,
        max_nodes_per_solve=max_nodes,
    )


def _check_seed(graph, objective):
    ref = objective.reference
    if len(ref) == 0:
        raise SeedRejectedError("empty seed set")
    g_ref = objective.denominator(graph, ref.members)
    if g_ref <= 0:
        raise SeedRejectedError(f"seed has non-positive denominator g(R)={g_ref}")
    return g_ref


def dinkelbach(graph: WeightedGraph, objective: RatioObjective, subsolver: Subsolver,
               max_iterations: int = 100_000) -> ImproveResult:
    """Greedy exact driver: re-solve at the current ratio until no improvement.

    The accepted iterates have strictly decreasing ratio, cut, and
    denominator; on integer-weighted graphs the iteration count is bounded by
    cut(R) and the final ratio is the exact optimum.
    """
    g_ref = _check_seed(graph, objective)
    ref = objective.reference
    cut_ref = cut(graph, ref)
    if cut_ref == 0:
        step = TraceStep(0.0, 0.0, float(g_ref), 0)
        return ImproveResult(ref, 0.0, [step], "dinkelbach", False, iterations=0,
                             objective_exact=Fraction(0) if graph.integer_weighted else None)

    delta = _ratio(cut_ref, g_ref)
    best = ref.members
    trace = [TraceStep(float(delta), float(cut_ref), float(g_ref), 0)]
    iterations = 0
    arcs_total = 0
    max_arcs = 0
    max_nodes = 0
    while iterations < max_iterations:
        outcome = subsolver.solve(delta)
        iterations += 1
        arcs_total += outcome.arcs_touched
        max_arcs = max(max_arcs, outcome.arcs_touched)
        max_nodes = max(max_nodes, outcome.nodes_materialized)
        members = outcome.members
        g = objective.denominator(graph, members) if len(members) else 0
        if g > 0:
            c = cut(graph, members)
            ratio = _ratio(c, g)
            if ratio < delta:
                delta = ratio
                best = members
                trace.append(TraceStep(float(delta), float(c), float(g), outcome.arcs_touched))
                continue
        break
    else:
        raise RuntimeError("ratio iteration failed to converge within max_iterations")

    return _finalize(graph, objective, best, delta, trace, "dinkelbach", iterations,
                     arcs_total, max_arcs, max_nodes)


def bisection(graph: WeightedGraph, objective: RatioObjective, subsolver: Subsolver,
              eps) -> ImproveResult:
    """Binary search on delta to relative accuracy eps in (0, 1].

    The upper end starts at the seed's ratio. Whenever a solve returns a set
    with positive denominator, its ratio tightens the upper end; otherwise
    the midpoint raises the lower end. A final solve at the upper end is
    compared against the best stored set.
    """
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    g_ref = _check_seed(graph, objective)
    ref = objective.reference
    cut_ref = cut(graph, ref)
    if cut_ref == 0:
        step = TraceStep(0.0, 0.0, float(g_ref), 0)
        return ImproveResult(ref, 0.0, [step], "bisection", False, iterations=0,
                             objective_exact=Fraction(0) if graph.integer_weighted else None)

    exact = graph.integer_weighted
    if exact and not isinstance(eps, Fraction):
        eps = Fraction(eps)
    delta_max = _ratio(cut_ref, g_ref)
    delta_min = Fraction(0) if exact else 0.0
    best_members = ref.members
    best_ratio = delta_max
    trace: list[TraceStep] = []
    iterations = 0
    arcs_total = 0
    max_arcs = 0
    max_nodes = 0
    while delta_max - delta_min > eps * delta_min:
        delta = (delta_max + delta_min) / 2
        outcome = subsolver.solve(delta)
        iterations += 1
        arcs_total += outcome.arcs_touched
        max_arcs = max(max_arcs, outcome.arcs_touched)
        max_nodes = max(max_nodes, outcome.nodes_materialized)
        members = outcome.members
        g = objective.denominator(graph, members) if len(members) else 0
        c = cut(graph, members) if len(members) else 0
        trace.append(TraceStep(float(delta), float(c), float(g), outcome.arcs_touched))
        if g > 0:
            delta_max = _ratio(c, g)
            best_members = members
            best_ratio = delta_max
        else:
            delta_min = delta

    outcome = subsolver.solve(delta_max)
    iterations += 1
    arcs_total += outcome.arcs_touched
    max_arcs = max(max_arcs, outcome.arcs_touched)
    max_nodes = max(max_nodes, outcome.nodes_materialized)
    members = outcome.members
    g = objective.denominator(graph, members) if len(members) else 0
    if g > 0:
        ratio = _ratio(cut(graph, members), g)
        if ratio < best_ratio:
            best_members, best_ratio = members, ratio

    return _finalize(graph, objective, best_members, best_ratio, trace, "bisection",
                     iterations, arcs_total, max_arcs, max_nodes)


def exact_eps(objective: RatioObjective, graph: WeightedGraph) -> Fraction:
    """Bisection tolerance guaranteeing the exact optimum on integer weights.

    Uses the minimum spacing between achievable ratios, halved as a guard.
    For relative-volume objectives the spacing argument needs kappa times the
    complement volume to be an integer offset of vol(R); otherwise exactness
    is not guaranteed and an error is raised.
    """
    if not graph.integer_weighted:
        raise ValueError("exactness not guaranteed: graph has non-integer weights")
    ref = objective.reference
    vol_r = int(ref.volume)
    if objective.kind == "volume":
        return Fraction(1, 2 * vol_r * vol_r)
    vol_rbar = int(graph.total_volume_exact) - vol_r
    kappa = objective.kappa
    if not isinstance(kappa, Fraction):
        kappa = Fraction(kappa)
    if (kappa * vol_rbar).denominator != 1:
        raise ValueError(
            "exactness not guaranteed: kappa * vol(complement of R) is not an integer"
        )
    return Fraction(1, 2 * vol_r * vol_r * vol_rbar)
