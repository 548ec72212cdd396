"""Graph-based region segmentation over multi-channel pixel grids.

Greedy merging on the 8-connected grid graph with euclidean channel
distance as edge weight. Two regions merge when the connecting edge is
no heavier than each region's internal difference plus k/|region|; a
second pass merges regions below min_size. Edges are processed in
stable ascending weight order, so the result is deterministic and, since
only channel differences enter the weights, invariant to relabelling of
the input values.
"""

from __future__ import annotations

import numpy as np

from ..core import FlowField, LabelMap


class _UnionFind:
    def __init__(self, n: int, k: float):
        self.parent = np.arange(n, dtype=np.intp)
        self.size = np.ones(n, dtype=np.intp)
        # merge threshold: internal difference + k / |component|
        self.threshold = np.full(n, k, dtype=float)

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> int:
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return a


def _grid_edges(h: int, w: int, channels: np.ndarray):
    """Edge lists (a, b, weight) of the 8-connected grid graph."""
    idx = np.arange(h * w, dtype=np.intp).reshape(h, w)
    flat = channels.reshape(h * w, -1)
    srcs, dsts = [], []
    # right, down, down-right, down-left cover all 8-neighbour pairs once
    for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
        x0, x1 = max(0, -dx), w - max(0, dx)
        srcs.append(idx[0 : h - dy, x0:x1].ravel())
        dsts.append(idx[dy:h, x0 + dx : x1 + dx].ravel())
    a = np.concatenate(srcs)
    b = np.concatenate(dsts)
    w_edge = np.sqrt(np.sum((flat[a] - flat[b]) ** 2, axis=1))
    return a, b, w_edge


def felzenszwalb_segment(field: np.ndarray, k: float, min_size: int) -> LabelMap:
    """Segment a (H, W) or (H, W, C) grid into connected regions.

    k sets the merging scale (threshold function k/|C|); regions smaller
    than min_size are merged into an adjacent region afterwards.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    field = np.asarray(field, dtype=float)
    if field.size == 0:
        raise ValueError("cannot segment an empty field")
    if field.ndim == 2:
        field = field[..., None]
    h, w = field.shape[:2]

    a, b, weights = _grid_edges(h, w, field)
    order = np.argsort(weights, kind="stable")
    a, b, weights = a[order], b[order], weights[order]

    uf = _UnionFind(h * w, k)
    for i in range(len(weights)):
        ra, rb = uf.find(a[i]), uf.find(b[i])
        if ra == rb:
            continue
        wi = weights[i]
        if wi <= uf.threshold[ra] and wi <= uf.threshold[rb]:
            r = uf.union(ra, rb)
            uf.threshold[r] = wi + k / uf.size[r]

    for i in range(len(weights)):
        ra, rb = uf.find(a[i]), uf.find(b[i])
        if ra != rb and (uf.size[ra] < min_size or uf.size[rb] < min_size):
            uf.union(ra, rb)

    roots = np.fromiter((uf.find(i) for i in range(h * w)), dtype=np.intp, count=h * w)
    _, labels = np.unique(roots, return_inverse=True)
    return labels.reshape(h, w).astype(np.uint16)


def motion_segment(flow: FlowField, k: float, min_size: int) -> LabelMap:
    """Group pixels that move together: segmentation of the (dx, dy) grid."""
    return felzenszwalb_segment(np.stack((flow.dx, flow.dy), axis=-1), k, min_size)
