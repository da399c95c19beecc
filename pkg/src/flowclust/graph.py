"""Undirected weighted graph storage, edge-list I/O, and cut quality metrics.

The graph is kept in compressed adjacency (CSR) form and is immutable after
construction, so it can be shared freely between concurrent solver runs.
All metric functions are read-only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

__all__ = [
    "GraphFormatError",
    "WeightedGraph",
    "NodeSet",
    "CutProfile",
    "load_edge_list",
    "load_node_set",
    "cut",
    "conductance",
    "rvol",
    "aux_metrics",
    "boundary",
    "metrics_json",
]

# Sanity guard for node ids read from text files; anything larger is garbage.
_MAX_NODE_ID = 2**62


class GraphFormatError(ValueError):
    """Raised for malformed edge-list or node-set input."""


@dataclass(frozen=True)
class CutProfile:
    """Cut statistics of a node set: cut weight, volumes, and conductance."""

    cut: float
    volume: float
    complement_volume: float
    size: int
    conductance: float


class NodeSet:
    """Sorted set of node ids with its volume cached.

    Instances are created through :meth:`WeightedGraph.node_set` so the volume
    is always consistent with the owning graph's degrees.
    """

    __slots__ = ("members", "volume", "_lookup")

    def __init__(self, members: np.ndarray, volume):
        self.members = members
        self.volume = volume
        self._lookup = None

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(int(v) for v in self.members)

    def __contains__(self, node) -> bool:
        if self._lookup is None:
            self._lookup = frozenset(int(v) for v in self.members)
        return int(node) in self._lookup

    def __eq__(self, other) -> bool:
        if isinstance(other, NodeSet):
            return len(self.members) == len(other.members) and bool(
                np.array_equal(self.members, other.members)
            )
        return NotImplemented

    def __hash__(self):
        return hash(self.members.tobytes())

    def __repr__(self) -> str:
        shown = ", ".join(str(int(v)) for v in self.members[:8])
        if len(self.members) > 8:
            shown += ", ..."
        return f"NodeSet([{shown}], size={len(self.members)}, volume={self.volume})"


class WeightedGraph:
    """Immutable undirected graph with non-negative edge weights.

    Attributes:
        node_count: number of nodes, ids are dense in [0, node_count).
        indptr, indices, weights: CSR adjacency (both edge directions stored).
        degrees: weighted degree per node (includes folded self-loop weight).
        total_volume: sum of all degrees.
        integer_weighted: True when every edge weight (and folded self-loop)
            is integral; exact rational arithmetic is used downstream.
        labels: original node labels for re-export (index = dense id).
    """

    __slots__ = (
        "node_count",
        "indptr",
        "indices",
        "weights",
        "degrees",
        "total_volume",
        "integer_weighted",
        "labels",
        "self_loops_dropped",
        "_label_to_id",
        "_connected",
        "_warned_disconnected",
    )

    def __init__(self, indptr, indices, weights, degrees, labels=None, self_loops_dropped=0):
        self.node_count = len(indptr) - 1
        self.indptr = indptr
        self.indices = indices
        self.weights = weights
        self.degrees = degrees
        self.total_volume = float(degrees.sum())
        self.integer_weighted = bool(
            np.all(weights == np.rint(weights)) and np.all(degrees == np.rint(degrees))
        )
        self.labels = labels
        self.self_loops_dropped = self_loops_dropped
        self._label_to_id = None
        self._connected = None
        self._warned_disconnected = False

    # -- construction ---------------------------------------------------

    @classmethod
    def from_edges(cls, u, v, w, labels=None, fold_self_loops=False) -> "WeightedGraph":
        """Build a graph from parallel arrays of undirected edges.

        Duplicate edges (either orientation) are merged by summing weights.
        Self-loops are dropped, or folded into the degree when requested.
        """
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if len(u) == 0:
            raise GraphFormatError("empty graph: no edges")
        if np.any(w < 0):
            raise GraphFormatError("negative edge weight")

        n = int(max(u.max(), v.max())) + 1
        loop_mask = u == v
        dropped = int(loop_mask.sum())
        self_weight = np.zeros(n, dtype=np.float64)
        if dropped:
            if fold_self_loops:
                np.add.at(self_weight, u[loop_mask], w[loop_mask])
            u, v, w = u[~loop_mask], v[~loop_mask], w[~loop_mask]
        if len(u) == 0 and not self_weight.any():
            raise GraphFormatError("empty graph: all edges were self-loops")

        # Symmetrize, then merge duplicates by summing weights.
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        wgt = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, wgt = src[order], dst[order], wgt[order]
        if len(src):
            new_edge = np.empty(len(src), dtype=bool)
            new_edge[0] = True
            new_edge[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            group = np.cumsum(new_edge) - 1
            merged_w = np.bincount(group, weights=wgt)
            src, dst = src[new_edge], dst[new_edge]
            wgt = merged_w

        indptr = np.zeros(n + 1, dtype=np.int64)
        counts = np.bincount(src, minlength=n)
        indptr[1:] = np.cumsum(counts)
        degrees = np.zeros(n, dtype=np.float64)
        if len(src):
            np.add.at(degrees, src, wgt)
        degrees += self_weight
        return cls(indptr, dst, wgt, degrees, labels=labels, self_loops_dropped=dropped)

    # -- adjacency ------------------------------------------------------

    def neighbors(self, node: int):
        """Return (neighbor ids, weights) views for one node."""
        lo, hi = self.indptr[node], self.indptr[node + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def degree(self, node: int) -> float:
        return float(self.degrees[node])

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def is_connected(self) -> bool:
        if self._connected is None:
            seen = np.zeros(self.node_count, dtype=bool)
            stack = [0]
            seen[0] = True
            while stack:
                x = stack.pop()
                for y in self.indices[self.indptr[x] : self.indptr[x + 1]]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(int(y))
            self._connected = bool(seen.all())
        return self._connected

    def warn_if_disconnected(self) -> None:
        if not self._warned_disconnected and not self.is_connected():
            self._warned_disconnected = True
            warnings.warn(
                "graph is not connected; results apply to the components reached "
                "from the seed",
                stacklevel=3,
            )

    # -- exact degree access --------------------------------------------

    def degree_exact(self, node: int):
        """Degree as an int for integer-weighted graphs, else a float."""
        d = self.degrees[node]
        return int(d) if self.integer_weighted else float(d)

    def volume_exact(self, nodes) -> float | int:
        total = float(self.degrees[np.asarray(nodes, dtype=np.int64)].sum()) if len(nodes) else 0.0
        return int(round(total)) if self.integer_weighted else float(total)

    @property
    def total_volume_exact(self):
        return int(round(self.total_volume)) if self.integer_weighted else self.total_volume

    # -- node sets -------------------------------------------------------

    def node_set(self, nodes: Iterable[int]) -> NodeSet:
        members = np.unique(np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes, dtype=np.int64))
        if len(members) and (members[0] < 0 or members[-1] >= self.node_count):
            raise ValueError(f"node id out of range [0, {self.node_count})")
        return NodeSet(members, self.volume_exact(members))

    def complement(self, node_set: NodeSet) -> NodeSet:
        mask = np.ones(self.node_count, dtype=bool)
        mask[node_set.members] = False
        return self.node_set(np.nonzero(mask)[0])

    def full_set(self) -> NodeSet:
        return self.node_set(np.arange(self.node_count))

    # -- label mapping ----------------------------------------------------

    def to_label(self, node: int) -> int:
        return int(self.labels[node]) if self.labels is not None else int(node)

    def from_label(self, label: int) -> int:
        if self.labels is None:
            node = int(label)
            if not 0 <= node < self.node_count:
                raise KeyError(f"unknown node id {label}")
            return node
        if self._label_to_id is None:
            self._label_to_id = {int(l): i for i, l in enumerate(self.labels)}
        try:
            return self._label_to_id[int(label)]
        except KeyError:
            raise KeyError(f"unknown node label {label}") from None


def _parse_id(token: str, lineno: int) -> int:
    try:
        value = int(token)
    except ValueError:
        raise GraphFormatError(f"line {lineno}: bad node id {token!r}") from None
    if value < 0:
        raise GraphFormatError(f"line {lineno}: negative node id {value}")
    if value > _MAX_NODE_ID:
        raise GraphFormatError(f"line {lineno}: node id {value} overflows")
    return value


def load_edge_list(stream: IO[str] | Iterable[str], fold_self_loops: bool = False) -> WeightedGraph:
    """Parse an edge list of lines "u v [w]" into a graph.

    '#' starts a comment, ids are non-negative integers, and the weight
    defaults to 1.0. Duplicate undirected edges have their weights summed and
    self-loops are dropped with a warning (or folded into the degree when
    `fold_self_loops` is set). Non-dense ids are compacted; the original ids
    are kept as labels for re-export.
    """
    us, vs, ws = [], [], []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected 'u v [w]', got {line!r}")
        u = _parse_id(parts[0], lineno)
        v = _parse_id(parts[1], lineno)
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad weight {parts[2]!r}") from None
            if not np.isfinite(w) or w < 0:
                raise GraphFormatError(f"line {lineno}: negative or non-finite weight {w}")
        else:
            w = 1.0
        us.append(u)
        vs.append(v)
        ws.append(w)

    if not us:
        raise GraphFormatError("empty graph: no edges in input")

    raw_ids = np.concatenate([np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)])
    labels = np.unique(raw_ids)
    dense = len(labels) == labels[-1] + 1 and labels[0] == 0
    if dense:
        u_arr = np.asarray(us, dtype=np.int64)
        v_arr = np.asarray(vs, dtype=np.int64)
        label_arr = None
    else:
        u_arr = np.searchsorted(labels, np.asarray(us, dtype=np.int64))
        v_arr = np.searchsorted(labels, np.asarray(vs, dtype=np.int64))
        label_arr = labels

    graph = WeightedGraph.from_edges(u_arr, v_arr, np.asarray(ws), labels=label_arr,
                                     fold_self_loops=fold_self_loops)
    if graph.self_loops_dropped and not fold_self_loops:
        warnings.warn(f"dropped {graph.self_loops_dropped} self-loop(s)", stacklevel=2)
    return graph


def load_node_set(stream: IO[str] | Iterable[str], graph: WeightedGraph) -> NodeSet:
    """Parse a node-set file (one id per line, '#' comments) against a graph."""
    nodes = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for token in line.split():
            label = _parse_id(token, lineno)
            try:
                nodes.append(graph.from_label(label))
            except KeyError:
                raise GraphFormatError(f"line {lineno}: node {label} not in graph") from None
    if not nodes:
        raise GraphFormatError("empty node set")
    return graph.node_set(nodes)


def _member_mask(graph: WeightedGraph, node_set) -> np.ndarray:
    members = node_set.members if isinstance(node_set, NodeSet) else np.asarray(list(node_set), dtype=np.int64)
    mask = np.zeros(graph.node_count, dtype=bool)
    mask[members] = True
    return mask


def _as_node_set(graph: WeightedGraph, node_set) -> NodeSet:
    return node_set if isinstance(node_set, NodeSet) else graph.node_set(node_set)


def cut(graph: WeightedGraph, node_set) -> float | int:
    """Total weight of edges with exactly one endpoint in the set."""
    node_set = _as_node_set(graph, node_set)
    mask = _member_mask(graph, node_set)
    total = 0.0
    for u in node_set.members:
        lo, hi = graph.indptr[u], graph.indptr[u + 1]
        crossing = ~mask[graph.indices[lo:hi]]
        if crossing.any():
            total += float(graph.weights[lo:hi][crossing].sum())
    return int(round(total)) if graph.integer_weighted else total


def conductance(graph: WeightedGraph, node_set) -> CutProfile:
    """Cut and conductance profile of a set; errors on the empty or full set."""
    node_set = _as_node_set(graph, node_set)
    vol = node_set.volume
    vol_bar = graph.total_volume_exact - vol
    if len(node_set) == 0 or len(node_set) == graph.node_count or vol <= 0 or vol_bar <= 0:
        raise ValueError("undefined conductance: set must be nonempty and proper with positive volumes")
    c = cut(graph, node_set)
    return CutProfile(
        cut=c,
        volume=vol,
        complement_volume=vol_bar,
        size=len(node_set),
        conductance=c / min(vol, vol_bar),
    )


def rvol(graph: WeightedGraph, node_set, reference, kappa) -> float:
    """Relative volume vol(S n R) - kappa * vol(S n complement(R))."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    node_set = _as_node_set(graph, node_set)
    ref_mask = _member_mask(graph, reference if isinstance(reference, NodeSet) else _as_node_set(graph, reference))
    inside = node_set.members[ref_mask[node_set.members]]
    outside = node_set.members[~ref_mask[node_set.members]]
    return graph.volume_exact(inside) - kappa * graph.volume_exact(outside)


def aux_metrics(graph: WeightedGraph, node_set) -> dict:
    """Normalized cut, cut-to-volume ratio, expansion, sparsity, and ratio cut."""
    node_set = _as_node_set(graph, node_set)
    size = len(node_set)
    if size == 0 or size == graph.node_count:
        raise ValueError("metrics undefined for the empty or full set")
    c = cut(graph, node_set)
    vol = node_set.volume
    vol_bar = graph.total_volume_exact - vol
    n = graph.node_count
    return {
        "ncut": c / vol + c / vol_bar,
        "ncut_prime": c / vol,
        "expansion": c / min(size, n - size),
        "sparsity": c / (size * (n - size)),
        "ratio_cut": c / size,
    }


def boundary(graph: WeightedGraph, node_set) -> NodeSet:
    """Nodes outside the set adjacent to at least one member."""
    node_set = _as_node_set(graph, node_set)
    mask = _member_mask(graph, node_set)
    found = set()
    for u in node_set.members:
        lo, hi = graph.indptr[u], graph.indptr[u + 1]
        for v in graph.indices[lo:hi]:
            if not mask[v]:
                found.add(int(v))
    return graph.node_set(sorted(found))


def metrics_json(graph: WeightedGraph, node_set) -> dict:
    """The metrics record emitted by the CLI for one set."""
    node_set = _as_node_set(graph, node_set)
    profile = conductance(graph, node_set)
    extra = aux_metrics(graph, node_set)
    return {
        "cut": profile.cut,
        "vol": profile.volume,
        "vol_bar": profile.complement_volume,
        "size": profile.size,
        "conductance": profile.conductance,
        "ncut": extra["ncut"],
        "expansion": extra["expansion"],
        "sparsity": extra["sparsity"],
        "ratio_cut": extra["ratio_cut"],
    }
