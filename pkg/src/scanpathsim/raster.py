"""Grid resizing primitives shared by the cue and filter pipelines.

Nearest-neighbour uses centre-aligned sampling, area resizing uses exact
fractional box overlap (so constant fields stay constant and total mass
is preserved up to the scale factor), and bilinear uses the half-pixel
centre convention. All three reduce to the identity when the output
shape equals the input shape.
"""

from __future__ import annotations

import numpy as np


def scaled_shape(shape: tuple[int, int], r_scale: float) -> tuple[int, int]:
    """Output (height, width) for a resolution scale factor."""
    if not 0 < r_scale <= 1:
        raise ValueError("r_scale must be in (0, 1]")
    h, w = shape
    return (max(1, int(round(h * r_scale))), max(1, int(round(w * r_scale))))


def _nearest_indices(n_out: int, n_in: int) -> np.ndarray:
    idx = np.floor((np.arange(n_out) + 0.5) * (n_in / n_out)).astype(np.intp)
    return np.clip(idx, 0, n_in - 1)


def resize_nearest(arr: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    if arr.shape[:2] == tuple(out_shape):
        return arr.copy()
    iy = _nearest_indices(out_shape[0], arr.shape[0])
    ix = _nearest_indices(out_shape[1], arr.shape[1])
    return arr[np.ix_(iy, ix)]


def _overlap_weights(n_out: int, n_in: int) -> np.ndarray:
    """Row-stochastic (n_out, n_in) matrix of fractional cell overlaps."""
    w = np.zeros((n_out, n_in))
    step = n_in / n_out
    for j in range(n_out):
        lo, hi = j * step, (j + 1) * step
        i0, i1 = int(np.floor(lo)), int(np.ceil(hi))
        for i in range(i0, min(i1, n_in)):
            w[j, i] = min(hi, i + 1) - max(lo, i)
    return w / w.sum(axis=1, keepdims=True)


def resize_area(arr: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Exact box-average downsampling (also valid, if blurry, upsampling)."""
    if arr.shape[:2] == tuple(out_shape):
        return arr.astype(float, copy=True)
    wy = _overlap_weights(out_shape[0], arr.shape[0])
    wx = _overlap_weights(out_shape[1], arr.shape[1])
    return wy @ arr.astype(float) @ wx.T


def resize_bilinear(arr: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    if arr.shape[:2] == tuple(out_shape):
        return arr.astype(float, copy=True)
    h_in, w_in = arr.shape[:2]
    h_out, w_out = out_shape
    src_y = np.clip((np.arange(h_out) + 0.5) * (h_in / h_out) - 0.5, 0, h_in - 1)
    src_x = np.clip((np.arange(w_out) + 0.5) * (w_in / w_out) - 0.5, 0, w_in - 1)
    y0 = np.floor(src_y).astype(np.intp)
    x0 = np.floor(src_x).astype(np.intp)
    y1 = np.minimum(y0 + 1, h_in - 1)
    x1 = np.minimum(x0 + 1, w_in - 1)
    fy = (src_y - y0)[:, None]
    fx = (src_x - x0)[None, :]
    a = arr.astype(float)
    top = a[np.ix_(y0, x0)] * (1 - fx) + a[np.ix_(y0, x1)] * fx
    bot = a[np.ix_(y1, x0)] * (1 - fx) + a[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy
