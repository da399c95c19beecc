"""Local flow-based node coordinates from sampled improvement runs.

Columns of a sparse binary matrix record which nodes each improved sample
set contains; the leading left singular vectors of that matrix give the
per-node coordinates. A spectral analog (seeded PageRank columns on a log
scale) is available for comparison plots.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import NodeSet, WeightedGraph

__all__ = ["EmbeddingParams", "EmbeddingResult", "flow_coordinates", "truncated_svd", "hop_expand"]


@dataclass(frozen=True)
class EmbeddingParams:
    """Sampling and decomposition sizes for the coordinate pipeline."""

    samples: int  # number of sampled subsets
    subset_size: int  # nodes drawn from the reference per sample
    hops: int  # BFS expansion distance around each draw
    dims: int  # coordinates kept


@dataclass
class EmbeddingResult:
    coordinates: np.ndarray  # node_count x dims
    singular_values: np.ndarray
    columns: list[NodeSet]  # improved set behind each kept column
    skipped: int  # samples dropped due to improver failure


def hop_expand(graph: WeightedGraph, nodes, hops: int) -> list[int]:
    """All vertices within BFS hop distance `hops` of the given nodes."""
    dist = {int(v): 0 for v in nodes}
    queue = deque(dist)
    while queue:
        u = queue.popleft()
        if dist[u] >= hops:
            continue
        nbrs, _ = graph.neighbors(u)
        for v in nbrs:
            v = int(v)
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return sorted(dist)


def truncated_svd(matrix, dims: int):
    """Leading left singular vectors and values of a (sparse) matrix.

    Falls back to a dense decomposition when the requested rank is too close
    to the matrix size for the iterative solver. Signs are fixed so the
    largest-magnitude entry of each vector is positive.
    """
    matrix = sp.csc_matrix(matrix)
    n, m = matrix.shape
    if dims < 1 or dims > min(n, m):
        raise ValueError(f"dims must lie in [1, {min(n, m)}]")
    if dims >= min(n, m) - 1 or min(n, m) <= 3:
        dense = matrix.toarray()
        u, s, _ = np.linalg.svd(dense, full_matrices=False)
        u, s = u[:, :dims], s[:dims]
    else:
        # Fixed Lanczos start vector keeps repeated runs bit-identical.
        v0 = np.ones(min(n, m)) / np.sqrt(min(n, m))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            u, s, _ = spla.svds(matrix.astype(np.float64), k=dims, v0=v0)
        order = np.argsort(s)[::-1]
        u, s = u[:, order], s[order]
    for j in range(u.shape[1]):
        pivot = np.argmax(np.abs(u[:, j]))
        if u[pivot, j] < 0:
            u[:, j] = -u[:, j]
    return u, s


def flow_coordinates(graph: WeightedGraph, reference: NodeSet, improver,
                     params: EmbeddingParams, rng_seed: int = 0,
                     spectral_analog=None) -> EmbeddingResult:
    """Per-node coordinates from `params.samples` improver runs.

    Each sample draws `subset_size` reference nodes without replacement,
    expands them by `hops` BFS levels, and runs `improver(graph, node_set)`.
    The indicator of each output set becomes one matrix column; failing
    samples are skipped with a warning. Deterministic for a fixed rng_seed.

    When `spectral_analog` is given it must be a callable
    (graph, node_set) -> score dict; columns then hold log10 scores floored
    at -10 instead of binary indicators.
    """
    if params.subset_size > len(reference):
        raise ValueError("subset_size exceeds the reference size")
    if params.samples < params.dims or params.dims < 1:
        raise ValueError("need samples >= dims >= 1")

    rng = np.random.default_rng(rng_seed)
    ref_members = reference.members
    n = graph.node_count
    data, rows, cols = [], [], []
    kept_sets: list[NodeSet] = []
    skipped = 0
    col = 0
    for _ in range(params.samples):
        draw = rng.choice(ref_members, size=params.subset_size, replace=False)
        sample = graph.node_set(hop_expand(graph, draw, params.hops))
        try:
            if spectral_analog is not None:
                scores = spectral_analog(graph, sample)
                items = scores.scores if hasattr(scores, "scores") else dict(scores)
                for v, value in items.items():
                    rows.append(int(v))
                    cols.append(col)
                    data.append(max(np.log10(value) if value > 0 else -10.0, -10.0))
                kept_sets.append(graph.node_set(sorted(items)))
            else:
                improved = improver(graph, sample)
                members = improved.members if isinstance(improved, NodeSet) else np.asarray(improved)
                for v in members:
                    rows.append(int(v))
                    cols.append(col)
                    data.append(1.0)
                kept_sets.append(graph.node_set(members))
        except Exception as exc:  # noqa: BLE001 - improver is caller-supplied
            warnings.warn(f"sample skipped: improver failed ({exc})", stacklevel=2)
            skipped += 1
            continue
        col += 1

    if col < params.dims:
        raise ValueError(f"only {col} usable samples for {params.dims} dimensions")
    matrix = sp.csc_matrix((data, (rows, cols)), shape=(n, col))
    u, s = truncated_svd(matrix, params.dims)
    return EmbeddingResult(coordinates=u, singular_values=s, columns=kept_sets, skipped=skipped)


def rank_order(coordinates: np.ndarray) -> np.ndarray:
    """Replace each coordinate column by the rank of the node in sorted order."""
    ranked = np.empty_like(coordinates)
    for j in range(coordinates.shape[1]):
        order = np.argsort(coordinates[:, j], kind="stable")
        ranked[order, j] = np.arange(len(order), dtype=coordinates.dtype)
    return ranked
