"""Two-part layout detector: feature extractor and box head behind a pluggable
backend, plus decoding, logo selection, and a deterministic synthetic backend.

The detector contract mirrors a set-prediction model split in two: stage one
maps a rendered page to per-slot object-level features (batch, slots, hidden);
stage two turns those features into rectangle/class slots. The synthetic
backend communicates between its two halves only through the feature tensor,
so the split composes exactly like the real thing.
"""

from __future__ import annotations

import abc
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import SceneTooLargeError, ShapeMismatchError
from .geometry import DetectionBox, ElementClass, NmsConfig, Rect, nms

N_SLOTS = 100
HIDDEN = 256
NO_OBJECT_CODE = 5


class CanvasSize(NamedTuple):
    width: int
    height: int


#: Input canvas the pipeline resizes pages to before detection. The smaller
#: canvas trades accuracy for speed and is exposed for throughput studies.
DEFAULT_CANVAS = CanvasSize(432, 768)
SMALL_CANVAS = CanvasSize(224, 386)


@dataclass(frozen=True)
class FeatureTensor:
    """Object-level features of shape (batch, slots, hidden), float32."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.array, dtype=np.float32)
        if arr.ndim != 3:
            raise ShapeMismatchError(f"features must be (B, N, H), got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def batch(self) -> int:
        return self.array.shape[0]

    @property
    def n_slots(self) -> int:
        return self.array.shape[1]

    @property
    def hidden(self) -> int:
        return self.array.shape[2]

    def flattened(self) -> np.ndarray:
        """(B, N*H) view for classification heads that reuse the features."""
        return self.array.reshape(self.batch, self.n_slots * self.hidden)


@dataclass(frozen=True)
class RawDetections:
    """Fixed-slot detector output: (B, N, 5) rect+class slots and a parallel
    per-slot confidence channel in [0, 1].

    The class code occupies the fifth element; ``NO_OBJECT_CODE`` marks empty
    slots so score thresholds keep their meaning.
    """

    slots: np.ndarray
    confidence: np.ndarray

    def __post_init__(self):
        slots = np.ascontiguousarray(self.slots, dtype=np.float32)
        conf = np.ascontiguousarray(self.confidence, dtype=np.float32)
        if slots.ndim != 3 or slots.shape[2] != 5:
            raise ShapeMismatchError(f"slots must be (B, N, 5), got shape {slots.shape}")
        if conf.shape != slots.shape[:2]:
            raise ShapeMismatchError(
                f"confidence shape {conf.shape} does not match slots {slots.shape[:2]}"
            )
        if np.any((conf < 0.0) | (conf > 1.0)):
            raise ValueError("confidence values must lie in [0, 1]")
        slots.setflags(write=False)
        conf.setflags(write=False)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "confidence", conf)

    @property
    def batch(self) -> int:
        return self.slots.shape[0]

    @property
    def n_slots(self) -> int:
        return self.slots.shape[1]


class DetectorBackend(abc.ABC):
    """Stage-one feature extraction plus stage-two box prediction.

    Implementations must be safe for concurrent read-only inference calls;
    ``detect_objects`` consumes features produced by the same backend.
    """

    canvas: CanvasSize = DEFAULT_CANVAS
    n_slots: int = N_SLOTS
    hidden: int = HIDDEN

    @abc.abstractmethod
    def extract_features(self, image: np.ndarray) -> FeatureTensor:
        """Map one rendered page (canvas.height, canvas.width, 3) to features."""

    @abc.abstractmethod
    def detect_objects(self, features: FeatureTensor) -> RawDetections:
        """Turn object-level features into rectangle/class slots."""


def decode_detections(
    raw: RawDetections, cfg: NmsConfig | None = None
) -> list[list[DetectionBox]]:
    """Drop no-object slots, clamp rects into [0, 1], then suppress.

    Returns one score-descending box list per batch item; each list holds
    between 0 and N boxes.
    """
    out: list[list[DetectionBox]] = []
    for b in range(raw.batch):
        boxes: list[DetectionBox] = []
        for s in range(raw.n_slots):
            code = int(round(float(raw.slots[b, s, 4])))
            if code == NO_OBJECT_CODE:
                continue
            if not 0 <= code <= 4:
                raise ShapeMismatchError(f"slot {s} carries unknown class code {code}")
            x0, y0, x1, y1 = (float(v) for v in raw.slots[b, s, :4])
            rect = Rect(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))
            score = min(max(float(raw.confidence[b, s]), 0.0), 1.0)
            boxes.append(DetectionBox(rect, ElementClass(code), score))
        out.append(nms(boxes, cfg))
    return out


def select_logo(boxes: list[DetectionBox]) -> DetectionBox | None:
    """The logo-class box with the highest confidence, ties by earliest index."""
    best: DetectionBox | None = None
    for box in boxes:
        if box.class_id is not ElementClass.LOGO:
            continue
        if best is None or box.score > best.score:
            best = box
    return best


@dataclass(frozen=True)
class SceneElement:
    class_id: ElementClass
    rect: Rect
    score: float = 0.9

    def __post_init__(self):
        object.__setattr__(self, "class_id", ElementClass(self.class_id))
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"element score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class SceneSpec:
    """Planted page description driving the synthetic backend and fixtures."""

    elements: tuple[SceneElement, ...]
    crp: bool = False
    brand: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def to_json_dict(self) -> dict:
        return {
            "elements": [
                {
                    "class": el.class_id.label,
                    "rect": list(el.rect.as_tuple()),
                    "score": el.score,
                }
                for el in self.elements
            ],
            "crp": self.crp,
            "brand": self.brand,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SceneSpec":
        elements = tuple(
            SceneElement(
                ElementClass.from_label(e["class"]),
                Rect(*e["rect"]),
                float(e.get("score", 0.9)),
            )
            for e in obj.get("elements", [])
        )
        return cls(elements=elements, crp=bool(obj.get("crp", False)), brand=obj.get("brand"))


def load_scene(path) -> SceneSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return SceneSpec.from_json_dict(json.load(fh))


def save_scene(scene: SceneSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene.to_json_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


# Synthetic feature layout: channels 0..10 carry the exact payload the box
# head decodes, channel 11 carries the page-level credential signal under
# noise, and everything above is seeded background noise. The layout is a
# fixed family constant so heads trained on one corpus transfer to any seed.
CH_CLASS_BASE = 0  # 0..4 one-hot element class
CH_OBJECT = 5  # 1.0 when the slot holds a planted element
CH_RECT = 6  # 6..9 rect corners
CH_SCORE = 10  # planted confidence
CH_CRP = 11  # 1.0 on every slot of a credential-required page, noise-blurred
CH_NOISE = 12  # 12.. pure background noise


class SyntheticBackend(DetectorBackend):
    """Deterministic stand-in for the trained detector.

    Plants the scene's elements into per-slot feature vectors; the box head
    reads those channels back, so the two stages genuinely communicate only
    through the feature tensor. With zero jitter the decoded boxes equal the
    planted elements exactly. ``rect_jitter`` and ``score_jitter`` perturb
    the planted payload; ``noise_scale`` blurs the credential signal and the
    background channels. Together they are the degradation knobs behind the
    adversarial fixture variants.
    """

    def __init__(
        self,
        scene: SceneSpec,
        seed: int,
        *,
        rect_jitter: float = 0.0,
        score_jitter: float = 0.0,
        noise_scale: float = 0.02,
        n_slots: int = N_SLOTS,
        hidden: int = HIDDEN,
        canvas: CanvasSize = DEFAULT_CANVAS,
    ):
        if len(scene.elements) > n_slots:
            raise SceneTooLargeError(
                f"scene plants {len(scene.elements)} elements, detector capacity is {n_slots}"
            )
        if hidden < CH_NOISE + 1:
            raise ValueError(f"hidden size must be at least {CH_NOISE + 1}")
        self.scene = scene
        self.seed = int(seed)
        self.rect_jitter = float(rect_jitter)
        self.score_jitter = float(score_jitter)
        self.noise_scale = float(noise_scale)
        self.n_slots = int(n_slots)
        self.hidden = int(hidden)
        self.canvas = CanvasSize(*canvas)

    def extract_features(self, image: np.ndarray) -> FeatureTensor:
        image = np.asarray(image)
        expected = (self.canvas.height, self.canvas.width, 3)
        if image.shape != expected:
            raise ShapeMismatchError(
                f"backend expects an image of shape {expected}, got {image.shape}"
            )
        rng = np.random.default_rng(self.seed)
        feats = np.zeros((1, self.n_slots, self.hidden))
        feats[0, :, CH_NOISE:] = rng.normal(
            0.0, self.noise_scale, size=(self.n_slots, self.hidden - CH_NOISE)
        )
        slot_order = rng.permutation(self.n_slots)
        for el, slot in zip(self.scene.elements, slot_order):
            rect = np.array(el.rect.as_tuple())
            if self.rect_jitter > 0.0:
                rect = rect + rng.normal(0.0, self.rect_jitter, size=4)
            score = el.score
            if self.score_jitter > 0.0:
                score = float(np.clip(score + rng.normal(0.0, self.score_jitter), 0.0, 1.0))
            feats[0, slot, CH_CLASS_BASE + int(el.class_id)] = 1.0
            feats[0, slot, CH_OBJECT] = 1.0
            feats[0, slot, CH_RECT : CH_RECT + 4] = rect
            feats[0, slot, CH_SCORE] = score
        feats[0, :, CH_CRP] = (1.0 if self.scene.crp else 0.0) + rng.normal(
            0.0, self.noise_scale, size=self.n_slots
        )
        return FeatureTensor(feats.astype(np.float32))

    def detect_objects(self, features: FeatureTensor) -> RawDetections:
        if features.hidden != self.hidden or features.n_slots != self.n_slots:
            raise ShapeMismatchError(
                f"features are {features.n_slots}x{features.hidden}, backend wants "
                f"{self.n_slots}x{self.hidden}"
            )
        arr = features.array
        slots = np.zeros((features.batch, self.n_slots, 5), dtype=np.float32)
        conf = np.zeros((features.batch, self.n_slots), dtype=np.float32)
        slots[:, :, 4] = NO_OBJECT_CODE
        for b in range(features.batch):
            for s in range(self.n_slots):
                if arr[b, s, CH_OBJECT] <= 0.5:
                    continue
                cls = int(np.argmax(arr[b, s, CH_CLASS_BASE : CH_CLASS_BASE + 5]))
                slots[b, s, :4] = np.clip(arr[b, s, CH_RECT : CH_RECT + 4], 0.0, 1.0)
                slots[b, s, 4] = cls
                conf[b, s] = min(max(float(arr[b, s, CH_SCORE]), 0.0), 1.0)
        return RawDetections(slots, conf)


def synthetic_backend(seed: int, scene: SceneSpec, **kwargs) -> SyntheticBackend:
    return SyntheticBackend(scene, seed, **kwargs)
