"""Axis-aligned rectangle arithmetic, IoU, and non-maximum suppression.

Coordinates are normalized page coordinates in [0, 1] so the same boxes
serve any render size; pixel conversion happens only at the pipeline edge.
All functions here are pure and safe to call from any number of threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from . import _kernels


class ElementClass(IntEnum):
    """The five abstract layout element classes a webpage decomposes into."""

    LOGO = 0
    BUTTON = 1
    INPUT = 2
    LABEL = 3
    BLOCK = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ElementClass":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown element class {label!r}") from None


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in normalized [0, 1] page coordinates.

    Finite coordinates are clamped into [0, 1] at construction; inverted or
    non-finite rectangles are rejected.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"rect coordinates must be finite, got {vals}")
        for name, v in zip(("x_min", "y_min", "x_max", "y_max"), vals):
            object.__setattr__(self, name, min(max(float(v), 0.0), 1.0))
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted rect: {vals}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


@dataclass(frozen=True)
class DetectionBox:
    """One candidate layout element: rectangle, class, and confidence."""

    rect: Rect
    class_id: ElementClass
    score: float

    def __post_init__(self):
        object.__setattr__(self, "class_id", ElementClass(self.class_id))
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class NmsConfig:
    """Suppression thresholds; the detector's exported graph does not fix them."""

    iou_threshold: float = 0.5
    score_threshold: float = 0.3
    class_aware: bool = True

    def __post_init__(self):
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must lie in (0, 1], got {self.iou_threshold}")
        if not 0.0 <= self.score_threshold < 1.0:
            raise ValueError(f"score_threshold must lie in [0, 1), got {self.score_threshold}")


def iou(a: Rect, b: Rect) -> float:
    """Intersection over union of two rects; 0 when the union has no area."""
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def nms(boxes: list[DetectionBox], cfg: NmsConfig | None = None) -> list[DetectionBox]:
    """Greedy non-maximum suppression.

    Boxes are visited in descending score order (ties broken by input index);
    a box is kept iff its score exceeds ``score_threshold`` and its IoU with
    every already-kept box (of the same class when ``class_aware``) stays at
    or below ``iou_threshold``. Output is score-descending.
    """
    if cfg is None:
        cfg = NmsConfig()
    if not boxes:
        return []
    rects = np.array([b.rect.as_tuple() for b in boxes], dtype=np.float64)
    scores = np.array([b.score for b in boxes], dtype=np.float64)
    classes = np.array([int(b.class_id) for b in boxes], dtype=np.int64)
    keep = _kernels.nms_keep(
        rects, scores, classes, cfg.iou_threshold, cfg.score_threshold, cfg.class_aware
    )
    return [boxes[int(i)] for i in keep]
