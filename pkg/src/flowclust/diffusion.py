"""Seed-set generation: approximate seeded PageRank and sweep-cut rounding.

The PageRank approximation is the standard degree-normalized push: residual
mass at a node is converted to score (fraction alpha) and spread to the
neighbors (fraction 1 - alpha, split by edge weight) whenever the residual
exceeds rho times the node degree. Work and output support are proportional
to the mass pushed, independent of the graph size.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import CutProfile, NodeSet, WeightedGraph

__all__ = ["SparseScoreVector", "seeded_pagerank", "sweep_cut"]


@dataclass
class SparseScoreVector:
    """Node scores with the parameters they were computed under."""

    scores: dict[int, float]
    alpha: float
    rho: float
    residual: dict[int, float] = field(default_factory=dict)

    def support(self) -> list[int]:
        return sorted(self.scores)

    def __getitem__(self, node: int) -> float:
        return self.scores.get(int(node), 0.0)

    def __len__(self) -> int:
        return len(self.scores)


def seeded_pagerank(graph: WeightedGraph, seeds: NodeSet, alpha: float, rho: float) -> SparseScoreVector:
    """Push-based approximate PageRank seeded uniformly on `seeds`.

    At exit every node satisfies residual(v) < rho * degree(v), so total
    unconverted mass is at most rho * vol(G). Zero-degree seeds convert
    their mass directly to score.
    """
    if not (0 < alpha < 1):
        raise ValueError("alpha must lie in (0, 1)")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if len(seeds) == 0:
        raise ValueError("empty seed set")

    scores: dict[int, float] = {}
    residual: dict[int, float] = {}
    share = 1.0 / len(seeds)
    queue = deque()
    queued = set()
    for v in seeds:
        residual[v] = share
        queue.append(v)
        queued.add(v)

    degrees = graph.degrees
    while queue:
        u = queue.popleft()
        queued.discard(u)
        r_u = residual.get(u, 0.0)
        d_u = float(degrees[u])
        if d_u <= 0.0:
            # Nowhere to spread; absorb the whole residual as score.
            if r_u > 0.0:
                scores[u] = scores.get(u, 0.0) + r_u
                residual[u] = 0.0
            continue
        if r_u < rho * d_u:
            continue
        scores[u] = scores.get(u, 0.0) + alpha * r_u
        residual[u] = 0.0
        spread = (1.0 - alpha) * r_u / d_u
        nbrs, wts = graph.neighbors(u)
        for v, w in zip(nbrs, wts):
            v = int(v)
            r_v = residual.get(v, 0.0) + spread * float(w)
            residual[v] = r_v
            if v not in queued and r_v >= rho * float(degrees[v]) and degrees[v] > 0:
                queue.append(v)
                queued.add(v)

    return SparseScoreVector(scores=scores, alpha=alpha, rho=rho, residual=residual)


def sweep_cut(graph: WeightedGraph, scores) -> tuple[NodeSet, CutProfile]:
    """Minimum-conductance prefix of nodes ordered by score over degree.

    Ties (and the ordering itself) are broken by node id for determinism.
    Prefixes with zero volume or covering the whole graph are skipped; the
    conductance of large prefixes is scored through the complement volume.
    """
    if isinstance(scores, SparseScoreVector):
        items = scores.scores
    else:
        items = {int(k): float(v) for k, v in dict(scores).items()}
    support = [v for v in items if items[v] > 0.0]
    if not support:
        raise ValueError("empty score support")

    degrees = graph.degrees

    def order_key(v):
        d = float(degrees[v])
        normalized = items[v] / d if d > 0 else float("inf")
        return (-normalized, v)

    ordered = sorted(support, key=order_key)

    in_prefix = np.zeros(graph.node_count, dtype=bool)
    total_volume = graph.total_volume
    cut_value = 0.0
    volume = 0.0
    best = None  # (conductance, prefix length)
    for idx, v in enumerate(ordered):
        nbrs, wts = graph.neighbors(v)
        inside = in_prefix[nbrs]
        cut_value += float(wts[~inside].sum()) - float(wts[inside].sum())
        volume += float(degrees[v])
        in_prefix[v] = True
        vol_bar = total_volume - volume
        if volume <= 0 or vol_bar <= 0:
            continue
        phi = cut_value / min(volume, vol_bar)
        if best is None or phi < best[0]:
            best = (phi, idx + 1)

    if best is None:
        raise ValueError("no valid sweep prefix (support volume is zero or total)")

    members = sorted(ordered[: best[1]])
    node_set = graph.node_set(members)
    from .graph import conductance

    return node_set, conductance(graph, node_set)
