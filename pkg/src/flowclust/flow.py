"""Exact s-t max flow via Dinic's algorithm (repeated blocking flows).

The network stores each edge as a pair of mutually-referencing half-arcs.
An undirected graph edge of capacity c gives both halves residual c, which
is the one-arc-two-residuals convention (-c <= f <= c). Directed arcs (used
for source and sink attachments) give the reverse half residual 0.

Arcs may be added between blocking-flow rounds; existing flow is preserved,
which is what the lazily grown local networks rely on.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

__all__ = ["FlowError", "FlowBudgetExceeded", "FlowStats", "FlowNetwork"]

FLOAT_SATURATION_RTOL = 1e-12


class FlowError(RuntimeError):
    """Invalid flow-network usage (bad construction or ordering of calls)."""


class FlowBudgetExceeded(FlowError):
    """max_flow ran out of its blocking-flow round budget; stats are partial."""

    def __init__(self, stats: "FlowStats"):
        super().__init__(f"blocking-flow budget exhausted after {stats.blocking_flow_rounds} rounds")
        self.stats = stats


@dataclass
class FlowStats:
    value: float | int
    arcs_touched: int
    blocking_flow_rounds: int


class FlowNetwork:
    """Mutable flow state for one solver run; not thread-safe."""

    def __init__(self, node_count: int, source: int, sink: int, exact: bool = True):
        if source == sink:
            raise FlowError("source equals sink")
        if not (0 <= source < node_count and 0 <= sink < node_count):
            raise FlowError("source/sink outside node range")
        self.source = source
        self.sink = sink
        self.exact = exact
        self._adj: list[list[int]] = [[] for _ in range(node_count)]
        self._head: list[int] = []
        self._cap0: list = []
        self._res: list = []
        self._tol: list = []
        self.value = 0 if exact else 0.0
        self.blocking_flow_rounds = 0
        self._maxed = False

    # -- construction ----------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._adj)

    def add_node(self) -> int:
        self._adj.append([])
        self._maxed = False
        return len(self._adj) - 1

    def add_arc(self, u: int, v: int, cap, undirected: bool = True) -> int:
        """Add an arc pair u<->v; returns the forward half-arc id."""
        if cap < 0:
            raise FlowError("negative capacity")
        a = len(self._head)
        back = cap if undirected else (0 if self.exact else 0.0)
        tol = 0 if self.exact else FLOAT_SATURATION_RTOL * float(max(cap, back))
        self._head.append(v)
        self._cap0.append(cap)
        self._res.append(cap)
        self._tol.append(tol)
        self._head.append(u)
        self._cap0.append(back)
        self._res.append(back)
        self._tol.append(tol)
        self._adj[u].append(a)
        self._adj[v].append(a + 1)
        self._maxed = False
        return a

    def residual(self, arc: int):
        return self._res[arc]

    def pushed(self, arc: int):
        """Net flow along a half-arc (negative means against its direction)."""
        return self._cap0[arc] - self._res[arc]

    def is_saturated(self, arc: int) -> bool:
        return self._res[arc] <= self._tol[arc]

    @property
    def arcs_touched(self) -> int:
        return len(self._head) // 2

    def stats(self) -> FlowStats:
        return FlowStats(self.value, self.arcs_touched, self.blocking_flow_rounds)

    # -- Dinic -------------------------------------------------------------

    def _bfs_levels(self):
        n = len(self._adj)
        level = [-1] * n
        level[self.source] = 0
        queue = deque([self.source])
        head, res, tol, adj = self._head, self._res, self._tol, self._adj
        while queue:
            u = queue.popleft()
            lu = level[u]
            for a in adj[u]:
                v = head[a]
                if level[v] < 0 and res[a] > tol[a]:
                    level[v] = lu + 1
                    queue.append(v)
        return level

    def blocking_flow(self):
        """Run one Dinic phase: BFS levels, then saturate all shortest paths.

        Returns the flow increment; zero means no residual s-t path remains,
        at which point the current flow is maximum for the current arcs.
        """
        level = self._bfs_levels()
        if level[self.sink] < 0:
            self._maxed = True
            return 0 if self.exact else 0.0
        self.blocking_flow_rounds += 1

        s, t = self.source, self.sink
        head, res, tol, adj = self._head, self._res, self._tol, self._adj
        ptr = [0] * len(adj)
        total = 0 if self.exact else 0.0
        path: list[int] = []
        u = s
        while True:
            if u == t:
                aug = min(res[a] for a in path)
                for a in path:
                    res[a] -= aug
                    res[a ^ 1] += aug
                total += aug
                for i, a in enumerate(path):
                    if res[a] <= tol[a]:
                        del path[i:]
                        u = s if i == 0 else head[path[i - 1]]
                        break
                continue
            advanced = False
            arcs = adj[u]
            lu = level[u]
            while ptr[u] < len(arcs):
                a = arcs[ptr[u]]
                v = head[a]
                if res[a] > tol[a] and level[v] == lu + 1:
                    path.append(a)
                    u = v
                    advanced = True
                    break
                ptr[u] += 1
            if not advanced:
                if u == s:
                    break
                level[u] = -1
                a = path.pop()
                u = head[a ^ 1]
                ptr[u] += 1
        self.value += total
        if total > 0:
            self._maxed = False
        return total

    def max_flow(self, round_limit: int | None = None) -> FlowStats:
        """Repeat blocking flows until no augmenting path remains.

        `round_limit` caps the number of blocking-flow rounds; exceeding it
        raises FlowBudgetExceeded carrying the partial stats. This exists so
        callers can demonstrate or bound work on adversarial instances.
        """
        rounds = 0
        while True:
            if round_limit is not None and rounds >= round_limit:
                raise FlowBudgetExceeded(self.stats())
            inc = self.blocking_flow()
            if inc <= (0 if self.exact else 0.0):
                break
            rounds += 1
        self._maxed = True
        return self.stats()

    # -- cut extraction ----------------------------------------------------

    def min_cut_source_side(self) -> list[int]:
        """Nodes reachable from the source in the residual graph.

        Only valid once the flow is maximum; this is the minimal source-side
        minimum cut.
        """
        if not self._maxed:
            raise FlowError("min cut requested before the flow is maximum")
        head, res, tol, adj = self._head, self._res, self._tol, self._adj
        seen = [False] * len(adj)
        seen[self.source] = True
        queue = deque([self.source])
        while queue:
            u = queue.popleft()
            for a in adj[u]:
                v = head[a]
                if not seen[v] and res[a] > tol[a]:
                    seen[v] = True
                    queue.append(v)
        if seen[self.sink]:
            raise FlowError("sink reachable in residual; flow is not maximum")
        return [u for u, ok in enumerate(seen) if ok]

    # -- diagnostics ---------------------------------------------------------

    def check_invariants(self) -> None:
        """Assert conservation and capacity bounds; test/debug use only."""
        n = len(self._adj)
        net = [0 if self.exact else 0.0] * n
        for a in range(0, len(self._head), 2):
            if self._res[a] < -self._tol[a] or self._res[a ^ 1] < -self._tol[a]:
                raise AssertionError(f"negative residual on arc {a}")
            total = self._cap0[a] + self._cap0[a ^ 1]
            if self.exact:
                if self._res[a] + self._res[a ^ 1] != total:
                    raise AssertionError(f"residual pair mismatch on arc {a}")
            u, v = self._head[a ^ 1], self._head[a]
            f = self.pushed(a)
            net[u] += f
            net[v] -= f
        for u in range(n):
            if u in (self.source, self.sink):
                continue
            bad = net[u] != 0 if self.exact else abs(net[u]) > 1e-6 * (1 + abs(self.value))
            if bad:
                raise AssertionError(f"conservation violated at node {u}: {net[u]}")

    def dump_dot(self) -> str:
        """Residual graph as DOT-like text for test inspection."""
        lines = [f"digraph residual {{  // s={self.source} t={self.sink}"]
        for a in range(0, len(self._head), 2):
            u, v = self._head[a ^ 1], self._head[a]
            lines.append(
                f"  {u} -> {v} [flow={self.pushed(a)} cap={self._cap0[a]}"
                f" res={self._res[a]} res_back={self._res[a ^ 1]}];"
            )
        lines.append("}")
        return "\n".join(lines)
