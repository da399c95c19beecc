"""Raster image to weighted similarity graph conversion.

Each pixel becomes a node; pixel pairs whose squared spatial distance is at
most `radius2` are joined by an edge weighted with a Gaussian kernel over
spatial and color distance. The gate is on the squared distance (the
alternative convention gates on the plain distance; callers wanting that
should pass radius2 = r**2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph

__all__ = ["PixelGraphMap", "image_to_graph"]


@dataclass(frozen=True)
class PixelGraphMap:
    """Bijection between pixel coordinates and node ids (row-major)."""

    rows: int
    cols: int
    radius2: float
    sigma_d2: float
    sigma_i2: float

    def node_of(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexError(f"pixel ({row}, {col}) outside {self.rows}x{self.cols}")
        return row * self.cols + col

    def pixel_of(self, node: int) -> tuple[int, int]:
        if not 0 <= node < self.rows * self.cols:
            raise IndexError(f"node {node} outside image graph")
        return divmod(node, self.cols)


def image_to_graph(pixels: np.ndarray, radius2: float, sigma_d2: float,
                   sigma_i2: float) -> tuple[WeightedGraph, PixelGraphMap]:
    """Build the similarity graph of an image with values in [0, 1].

    Args:
        pixels: rows x cols (grayscale) or rows x cols x channels array.
        radius2: squared-distance gate; pairs farther apart get no edge.
        sigma_d2: spatial variance of the kernel.
        sigma_i2: color variance of the kernel.

    Returns:
        The weighted graph and the pixel <-> node map.
    """
    if radius2 <= 0 or sigma_d2 <= 0 or sigma_i2 <= 0:
        raise ValueError("radius2 and both variances must be positive")
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim == 2:
        pixels = pixels[:, :, None]
    if pixels.ndim != 3:
        raise ValueError("pixels must be rows x cols [x channels]")
    rows, cols, _ = pixels.shape
    pmap = PixelGraphMap(rows, cols, float(radius2), float(sigma_d2), float(sigma_i2))
    if rows * cols == 1:
        warnings.warn("degenerate 1-pixel image gives a single-node graph", stacklevel=2)
        indptr = np.zeros(2, dtype=np.int64)
        empty = np.empty(0, dtype=np.int64)
        graph = WeightedGraph(indptr, empty, np.empty(0), np.zeros(1))
        return graph, pmap

    reach = int(np.floor(np.sqrt(radius2)))
    node_ids = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    us, vs, ws = [], [], []
    # Half-plane of offsets so each pixel pair is generated once.
    for dr in range(0, reach + 1):
        for dc in range(-reach, reach + 1):
            if dr == 0 and dc <= 0:
                continue
            dist2 = dr * dr + dc * dc
            if dist2 > radius2:
                continue
            r_lo, r_hi = max(0, -dr), rows - max(0, dr)
            c_lo, c_hi = max(0, -dc), cols - max(0, dc)
            if r_lo >= r_hi or c_lo >= c_hi:
                continue
            a = node_ids[r_lo:r_hi, c_lo:c_hi]
            b = node_ids[r_lo + dr : r_hi + dr, c_lo + dc : c_hi + dc]
            ca = pixels[r_lo:r_hi, c_lo:c_hi, :]
            cb = pixels[r_lo + dr : r_hi + dr, c_lo + dc : c_hi + dc, :]
            color2 = ((ca - cb) ** 2).sum(axis=2)
            weight = np.exp(-dist2 / sigma_d2 - color2 / sigma_i2)
            us.append(a.ravel())
            vs.append(b.ravel())
            ws.append(weight.ravel())

    if not us:
        raise ValueError("radius2 gate admits no pixel pairs")
    u = np.concatenate(us)
    v = np.concatenate(vs)
    w = np.concatenate(ws)
    graph = WeightedGraph.from_edges(u, v, w)
    if graph.node_count < rows * cols:
        # Trailing isolated pixels would shrink the id space; pad explicitly.
        raise AssertionError("pixel graph lost nodes; gate too small for image")
    return graph, pmap
