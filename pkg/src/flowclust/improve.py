"""Cluster improvement via parametric min-cut solves on augmented networks.

Three algorithms share one driver-plus-subsolver structure:

* ``mqi`` searches inside the seed set; its network keeps only the seed's
  induced subgraph, with all outside edges rewired into the sink.
* ``flow_improve`` searches the whole graph; its network is explicit, with
  the source attached to the seed and the sink to everything else.
* ``local_flow_improve`` also searches the whole graph but materializes its
  network lazily: nodes outside the seed enter only when their sink arcs
  saturate, so work is bounded by the seed volume rather than graph size.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .flow import FlowNetwork, FlowStats
from .fracprog import (
    ImproveResult,
    RatioObjective,
    SeedRejectedError,
    SubproblemOutcome,
    bisection,
    dinkelbach,
    exact_eps,
)
from .graph import NodeSet, WeightedGraph

__all__ = [
    "LocalFrontier",
    "mqi_subproblem",
    "fi_subproblem",
    "lfi_subproblem",
    "mqi",
    "flow_improve",
    "local_flow_improve",
    "theta_of",
]


@dataclass
class LocalFrontier:
    """State of one lazily grown network solve.

    bottleneck: nodes outside the seed whose sink arcs saturated (the set B).
    boundary: currently materialized neighbors of seed-union-bottleneck.
    node_slots: graph id -> network slot for every materialized node.
    saturated_rounds: the per-round batches absorbed into the bottleneck.
    """

    bottleneck: list[int]
    boundary: list[int]
    node_slots: dict[int, int]
    saturated_rounds: list[list[int]]


def theta_of(graph: WeightedGraph, reference: NodeSet):
    """vol(R)/vol(complement of R), exact on integer-weighted graphs."""
    vol_r = reference.volume
    vol_rbar = graph.total_volume_exact - vol_r
    if vol_rbar <= 0:
        raise SeedRejectedError("seed covers the whole graph volume")
    if graph.integer_weighted:
        return Fraction(int(vol_r), int(vol_rbar))
    return vol_r / vol_rbar


def _as_exact(value):
    return value if isinstance(value, Fraction) else Fraction(value)


def _capacity_multipliers(exact: bool, delta, sigma=None):
    """Per-degree source, per-weight edge, and per-degree sink multipliers.

    In exact mode the three multipliers are integers scaling the whole
    network by denominator(delta) * denominator(sigma), which leaves the
    min-cut set unchanged while making saturation tests exact.
    """
    if exact:
        d = _as_exact(delta)
        if sigma is None:
            return d.numerator, d.denominator, None
        s = _as_exact(sigma)
        return d.numerator * s.denominator, d.denominator * s.denominator, d.numerator * s.numerator
    delta = float(delta)
    if sigma is None:
        return delta, 1.0, None
    return delta, 1.0, delta * float(sigma)


def _exact_weight(graph, w):
    return int(round(w)) if graph.integer_weighted else float(w)


def _unscaled(value, edge_mult):
    """Flow value in original weight units (capacities were scaled by edge_mult)."""
    if isinstance(value, int) and isinstance(edge_mult, int):
        return Fraction(value, edge_mult)
    return value / edge_mult


class MQISolver:
    """Parametric solver over subsets of the seed.

    The network holds the seed's induced subgraph; every edge leaving the
    seed is rewired into the sink (multi-edges merged), and the source is
    attached to each seed node with capacity delta times its degree. The
    constant source-to-sink penalty from collapsing the outside is dropped.
    """

    def __init__(self, graph: WeightedGraph, reference: NodeSet):
        if len(reference) == 0:
            raise SeedRejectedError("empty seed set")
        self.graph = graph
        self.members = reference.members
        index = {int(v): i for i, v in enumerate(self.members)}
        self.exact = graph.integer_weighted
        self.degrees = [graph.degree_exact(int(v)) for v in self.members]
        self.internal = []  # (slot_u, slot_v, weight)
        zero = 0 if self.exact else 0.0
        self.to_sink = [zero] * len(self.members)
        for i, u in enumerate(self.members):
            nbrs, wts = graph.neighbors(int(u))
            for v, w in zip(nbrs, wts):
                j = index.get(int(v))
                if j is None:
                    self.to_sink[i] += _exact_weight(graph, w)
                elif i < j:
                    self.internal.append((i, j, _exact_weight(graph, w)))

    def solve(self, delta) -> SubproblemOutcome:
        src_mult, edge_mult, _ = _capacity_multipliers(self.exact, delta)
        k = len(self.members)
        s, t = k, k + 1
        net = FlowNetwork(k + 2, s, t, exact=self.exact)
        for i in range(k):
            net.add_arc(s, i, src_mult * self.degrees[i], undirected=False)
        for i, j, w in self.internal:
            net.add_arc(i, j, edge_mult * w)
        for i in range(k):
            if self.to_sink[i] > 0:
                net.add_arc(i, t, edge_mult * self.to_sink[i], undirected=False)
        stats = net.max_flow()
        side = [i for i in net.min_cut_source_side() if i < k]
        members = self.members[np.array(side, dtype=np.int64)] if side else np.empty(0, dtype=np.int64)
        return SubproblemOutcome(
            members=np.sort(members),
            arcs_touched=stats.arcs_touched,
            nodes_materialized=k + 2,
            blocking_flow_rounds=stats.blocking_flow_rounds,
            flow_value=_unscaled(stats.value, edge_mult),
        )


class ExplicitSolver:
    """Whole-graph parametric solver used by flow_improve.

    Builds the full augmented network each solve: source arcs to the seed,
    sink arcs from every other node weighted by kappa, and all graph edges.
    A blocking-flow round budget may be set to bound work on instances where
    the flow must spread across the entire graph.
    """

    def __init__(self, graph: WeightedGraph, reference: NodeSet, kappa, round_limit=None):
        self.graph = graph
        self.reference = reference
        self.kappa = kappa
        self.exact = graph.integer_weighted
        self.round_limit = round_limit
        self.in_ref = np.zeros(graph.node_count, dtype=bool)
        self.in_ref[reference.members] = True

    def solve(self, delta) -> SubproblemOutcome:
        graph = self.graph
        n = graph.node_count
        src_mult, edge_mult, sink_mult = _capacity_multipliers(self.exact, delta, self.kappa)
        s, t = n, n + 1
        net = FlowNetwork(n + 2, s, t, exact=self.exact)
        in_ref = self.in_ref
        for u in range(n):
            d = graph.degree_exact(u)
            if in_ref[u]:
                net.add_arc(s, u, src_mult * d, undirected=False)
            elif d > 0:
                net.add_arc(u, t, sink_mult * d, undirected=False)
        indptr, indices, weights = graph.indptr, graph.indices, graph.weights
        for u in range(n):
            for k in range(indptr[u], indptr[u + 1]):
                v = int(indices[k])
                if u < v:
                    net.add_arc(u, v, edge_mult * _exact_weight(graph, weights[k]))
        stats = net.max_flow(round_limit=self.round_limit)
        side = [u for u in net.min_cut_source_side() if u < n]
        return SubproblemOutcome(
            members=np.array(sorted(side), dtype=np.int64),
            arcs_touched=stats.arcs_touched,
            nodes_materialized=n + 2,
            blocking_flow_rounds=stats.blocking_flow_rounds,
            flow_value=_unscaled(stats.value, edge_mult),
        )


class LocalSolver:
    """Strongly local parametric solver used by local_flow_improve.

    Runs blocking flows on a lazily grown network. The network always covers
    the seed, the bottleneck set, and their joint boundary; a boundary node
    whose sink arc saturates joins the bottleneck, bringing its remaining
    edges (and new boundary nodes) into the network. Flow is preserved
    across growth rounds, and the result equals the explicit whole-graph
    construction. Termination: a zero blocking flow with no newly saturated
    boundary arcs certifies the min cut, because every missing path to the
    sink would have to cross an unsaturated boundary sink arc.
    """

    def __init__(self, graph: WeightedGraph, reference: NodeSet, sigma):
        self.graph = graph
        self.reference = reference
        self.sigma = sigma
        self.exact = graph.integer_weighted
        self.ref_sorted = [int(v) for v in reference.members]
        self.last_frontier: LocalFrontier | None = None
        self.solve_frontiers: list[LocalFrontier] = []

    def solve(self, delta) -> SubproblemOutcome:
        graph = self.graph
        src_mult, edge_mult, sink_mult = _capacity_multipliers(self.exact, delta, self.sigma)
        net = FlowNetwork(2, 0, 1, exact=self.exact)
        t = 1
        slot: dict[int, int] = {}
        sink_arc: dict[int, int] = {}
        boundary: set[int] = set()
        edge_seen: set[tuple[int, int]] = set()

        def materialize_boundary(v: int) -> int:
            sv = net.add_node()
            slot[v] = sv
            boundary.add(v)
            sink_arc[v] = net.add_arc(sv, t, sink_mult * graph.degree_exact(v), undirected=False)
            return sv

        for r in self.ref_sorted:
            slot[r] = net.add_node()
        for r in self.ref_sorted:
            net.add_arc(net.source, slot[r], src_mult * graph.degree_exact(r), undirected=False)
        for r in self.ref_sorted:
            nbrs, wts = graph.neighbors(r)
            for v, w in zip(nbrs, wts):
                v = int(v)
                key = (r, v) if r < v else (v, r)
                if key in edge_seen:
                    continue
                if v not in slot:
                    materialize_boundary(v)
                net.add_arc(slot[r], slot[v], edge_mult * _exact_weight(graph, w))
                edge_seen.add(key)

        bottleneck: list[int] = []
        rounds_log: list[list[int]] = []
        while True:
            inc = net.blocking_flow()
            if inc <= 0:
                break
            newly = [v for v in boundary if net.is_saturated(sink_arc[v])]
            if not newly:
                continue
            newly.sort()
            rounds_log.append(newly)
            for v in newly:
                boundary.discard(v)
                bottleneck.append(v)
            for v in newly:
                nbrs, wts = graph.neighbors(v)
                for u, w in zip(nbrs, wts):
                    u = int(u)
                    key = (v, u) if v < u else (u, v)
                    if key in edge_seen:
                        continue
                    if u not in slot:
                        materialize_boundary(u)
                    net.add_arc(slot[v], slot[u], edge_mult * _exact_weight(graph, w))
                    edge_seen.add(key)

        stats = net.stats()
        side_slots = set(net.min_cut_source_side())
        members = sorted(v for v, sv in slot.items() if sv in side_slots)
        frontier = LocalFrontier(
            bottleneck=sorted(bottleneck),
            boundary=sorted(boundary),
            node_slots=dict(slot),
            saturated_rounds=rounds_log,
        )
        self.last_frontier = frontier
        self.solve_frontiers.append(frontier)
        return SubproblemOutcome(
            members=np.array(members, dtype=np.int64),
            arcs_touched=stats.arcs_touched,
            nodes_materialized=len(slot) + 2,
            blocking_flow_rounds=stats.blocking_flow_rounds,
            flow_value=_unscaled(stats.value, edge_mult),
            extra=frontier,
        )


# -- one-shot subproblem entry points ------------------------------------


def mqi_subproblem(graph: WeightedGraph, reference: NodeSet, delta) -> NodeSet:
    """Minimize cut(S) - delta * vol(S) over subsets of the reference."""
    outcome = MQISolver(graph, reference).solve(delta)
    return graph.node_set(outcome.members)


def fi_subproblem(graph: WeightedGraph, reference: NodeSet, delta, theta=None) -> NodeSet:
    """Minimize cut(S) - delta * rvol(S; R, theta) over all sets, explicitly."""
    if theta is None:
        theta = theta_of(graph, reference)
    outcome = ExplicitSolver(graph, reference, theta).solve(delta)
    return graph.node_set(outcome.members)


def lfi_subproblem(graph: WeightedGraph, reference: NodeSet, delta, sigma):
    """Minimize cut(S) - delta * rvol(S; R, sigma), materializing lazily.

    Returns the minimizing set, the final frontier state, and flow stats.
    The set matches the explicit whole-graph construction exactly.
    """
    solver = LocalSolver(graph, reference, sigma)
    outcome = solver.solve(delta)
    frontier = outcome.extra
    stats = FlowStats(outcome.flow_value, outcome.arcs_touched, outcome.blocking_flow_rounds)
    return graph.node_set(outcome.members), frontier, stats


# -- full algorithms -------------------------------------------------------


def _check_seed_volume(graph, reference, allow_large_seed):
    if len(reference) == 0:
        raise SeedRejectedError("empty seed set")
    if reference.volume > graph.total_volume_exact - reference.volume and not allow_large_seed:
        raise SeedRejectedError(
            "seed volume exceeds half the graph volume; pass allow_large_seed to override"
        )


def _run_driver(graph, objective, solver, mode, eps):
    if mode == "dinkelbach":
        return dinkelbach(graph, objective, solver)
    if mode == "bisection":
        if eps is None:
            try:
                eps = exact_eps(objective, graph)
            except ValueError:
                eps = 1e-6
        return bisection(graph, objective, solver, eps)
    raise ValueError(f"unknown mode {mode!r}; expected 'dinkelbach' or 'bisection'")


def _flip_if_large(graph, result: ImproveResult) -> ImproveResult:
    if result.set.volume > graph.total_volume_exact - result.set.volume:
        result.set = graph.complement(result.set)
        result.flipped = True
    return result


def mqi(graph: WeightedGraph, reference: NodeSet, mode: str = "dinkelbach",
        eps=None, allow_large_seed: bool = False) -> ImproveResult:
    """Best cut-to-volume subset of the seed; equals conductance when the
    seed is at most half the graph volume."""
    _check_seed_volume(graph, reference, allow_large_seed)
    graph.warn_if_disconnected()
    objective = RatioObjective("volume", reference)
    solver = MQISolver(graph, reference)
    result = _run_driver(graph, objective, solver, mode, eps)
    result.algorithm = "mqi"
    # With a larger-than-half seed the ratio is no longer a conductance.
    if reference.volume > graph.total_volume_exact - reference.volume:
        result.objective_kind = "ncut_prime"
    return result


def flow_improve(graph: WeightedGraph, reference: NodeSet, mode: str = "dinkelbach",
                 eps=None, allow_large_seed: bool = False) -> ImproveResult:
    """Minimize the seed-relative conductance over all sets (whole-graph
    networks; not strongly local). Output larger than half the volume is
    flipped to its complement and flagged."""
    _check_seed_volume(graph, reference, allow_large_seed)
    graph.warn_if_disconnected()
    theta = theta_of(graph, reference)
    objective = RatioObjective("relative-volume", reference, kappa=theta)
    solver = ExplicitSolver(graph, reference, theta)
    result = _run_driver(graph, objective, solver, mode, eps)
    result.algorithm = "fi"
    result.objective_kind = "relative_conductance"
    return _flip_if_large(graph, result)


def local_flow_improve(graph: WeightedGraph, reference: NodeSet, delta_param=1.0,
                       mode: str = "dinkelbach", eps=None,
                       allow_large_seed: bool = False) -> ImproveResult:
    """Interpolates between flow_improve (delta_param 0) and mqi (large
    delta_param), with work bounded by the seed volume for delta_param > 0."""
    if delta_param < 0:
        raise SeedRejectedError("delta_param must be non-negative")
    _check_seed_volume(graph, reference, allow_large_seed)
    graph.warn_if_disconnected()
    theta = theta_of(graph, reference)
    if graph.integer_weighted:
        sigma = theta + _as_exact(delta_param)
    else:
        sigma = float(theta) + float(delta_param)
    objective = RatioObjective("relative-volume", reference, kappa=sigma)
    solver = LocalSolver(graph, reference, sigma)
    result = _run_driver(graph, objective, solver, mode, eps)
    result.algorithm = "lfi"
    result.objective_kind = "relative_conductance"
    result.frontier = solver.last_frontier
    result.solve_frontiers = solver.solve_frontiers
    return _flip_if_large(graph, result)
