"""Foveated object prompts: the high-confidence mask around the gaze point.

Three sources are supported. The oracle returns the ground-truth object
mask under the gaze (or the connected background component when gaze is
on background). The low-level source returns the connected piece of the
appearance segment under the gaze. The file source looks up stored
masks by frame and nearest stored prompt point.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..core import LabelMap


class PromptError(Exception):
    pass


def _gaze_index(labels: LabelMap, x_px: float, y_px: float) -> tuple[int, int]:
    h, w = labels.shape
    ix = min(max(int(x_px), 0), w - 1)
    iy = min(max(int(y_px), 0), h - 1)
    return iy, ix


def _connected_component(mask: np.ndarray, iy: int, ix: int) -> np.ndarray:
    lab, _ = ndimage.label(mask)  # 4-connectivity
    return lab == lab[iy, ix]


def oracle_prompt_mask(gt_labels: LabelMap, x_px: float, y_px: float) -> np.ndarray:
    """Ground-truth mask of the object containing the gaze point.

    On background, returns the connected background component containing
    the gaze instead of the full background.
    """
    iy, ix = _gaze_index(gt_labels, x_px, y_px)
    target = gt_labels[iy, ix]
    if target == 0:
        return _connected_component(gt_labels == 0, iy, ix)
    return gt_labels == target


def lowlevel_prompt_mask(appearance: LabelMap, x_px: float, y_px: float) -> np.ndarray:
    """Connected region of the appearance segment under the gaze point."""
    iy, ix = _gaze_index(appearance, x_px, y_px)
    return _connected_component(appearance == appearance[iy, ix], iy, ix)


class FilePromptSource:
    """Prompt masks stored on disk, indexed by (frame, prompt point)."""

    def __init__(self, masks: dict[int, list[tuple[float, float, np.ndarray]]]):
        self._masks = masks

    def lookup(self, frame: int, x_px: float, y_px: float) -> np.ndarray:
        entries = self._masks.get(frame)
        if not entries:
            raise PromptError(f"no stored prompt mask for frame {frame}")
        d2 = [(x - x_px) ** 2 + (y - y_px) ** 2 for x, y, _ in entries]
        return entries[int(np.argmin(d2))][2]
