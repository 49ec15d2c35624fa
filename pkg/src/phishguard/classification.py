"""Downstream heads: credential-required-page classification over reused
object-level features, and brand classification of the selected logo crop.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass

import numpy as np

from .detection import FeatureTensor
from .errors import EmptyCropError, ShapeMismatchError
from .geometry import DetectionBox, ElementClass, Rect
from .tensors import MlpSpec, WeightStore, infer_mlp_spec, mlp_forward, softmax

# Class 0 is non-crp, class 1 is crp; argmax ties resolve to the lower index.
CRP_CLASS_INDEX = 1

OTHER_BRAND = "other"

#: Confidence below which a brand prediction degrades to "other"; a
#: conservative default that trades brand hits for a lower false-positive
#: rate.
DEFAULT_BRAND_CONFIDENCE = 0.5


@dataclass(frozen=True)
class CrpModel:
    """A perceptron head over flattened (slots x hidden) features, two logits."""

    spec: MlpSpec
    weights: WeightStore

    def __post_init__(self):
        if self.spec.out_dim != 2:
            raise ShapeMismatchError(
                f"crp head must emit 2 logits, spec emits {self.spec.out_dim}"
            )

    @classmethod
    def from_store(cls, store: WeightStore) -> "CrpModel":
        return cls(infer_mlp_spec(store), store)


@dataclass(frozen=True)
class CrpPrediction:
    label: str  # "crp" | "non-crp"
    score: float  # probability of the crp class

    @property
    def is_crp(self) -> bool:
        return self.label == "crp"


def classify_crp(model: CrpModel, features: FeatureTensor) -> list[CrpPrediction]:
    """Flatten, forward, softmax; one prediction per batch item.

    The argmax tie-break is deterministic: equal probabilities classify as
    non-crp (the lower class index).
    """
    flat = features.flattened()
    if flat.shape[1] != model.spec.in_dim:
        raise ShapeMismatchError(
            f"features flatten to dim {flat.shape[1]}, head wants {model.spec.in_dim}"
        )
    probs = softmax(mlp_forward(model.spec, model.weights, flat))
    out = []
    for row in probs:
        crp_p = float(row[CRP_CLASS_INDEX])
        label = "crp" if crp_p > float(row[1 - CRP_CLASS_INDEX]) else "non-crp"
        out.append(CrpPrediction(label, crp_p))
    return out


class BrandModel(abc.ABC):
    """Maps a logo crop to a distribution over the brand vocabulary + other."""

    def __init__(self, vocabulary: tuple[str, ...]):
        self.vocabulary = tuple(vocabulary)

    @property
    def classes(self) -> tuple[str, ...]:
        return self.vocabulary + (OTHER_BRAND,)

    @abc.abstractmethod
    def classify(self, crop: np.ndarray) -> np.ndarray:
        """Probability vector over ``classes``; must sum to 1 within 1e-6."""


class SceneBrandModel(BrandModel):
    """Desk-scale brand backend keyed to the planted scene brand.

    Returns a one-hot distribution on the scene's brand when it belongs to
    the vocabulary, otherwise on "other". The crop only has to be non-empty.
    """

    def __init__(self, vocabulary: tuple[str, ...], scene_brand: str | None):
        super().__init__(vocabulary)
        self.scene_brand = scene_brand

    def classify(self, crop: np.ndarray) -> np.ndarray:
        crop = np.asarray(crop)
        if crop.size == 0:
            raise EmptyCropError("brand backend received an empty crop")
        dist = np.zeros(len(self.classes), dtype=np.float64)
        if self.scene_brand is not None and self.scene_brand in self.vocabulary:
            dist[self.vocabulary.index(self.scene_brand)] = 1.0
        else:
            dist[-1] = 1.0
        return dist


@dataclass(frozen=True)
class BrandPrediction:
    brand: str
    confidence: float


def pixel_crop_bounds(rect: Rect, width: int, height: int) -> tuple[int, int, int, int]:
    """Normalized rect -> inclusive-exclusive pixel bounds, clamped to frame."""
    x0 = max(0, math.floor(rect.x_min * width))
    y0 = max(0, math.floor(rect.y_min * height))
    x1 = min(width, math.ceil(rect.x_max * width))
    y1 = min(height, math.ceil(rect.y_max * height))
    return x0, y0, x1, y1


def classify_brand(
    model: BrandModel,
    image: np.ndarray,
    logo_box: DetectionBox,
    confidence_threshold: float = DEFAULT_BRAND_CONFIDENCE,
) -> BrandPrediction:
    """Crop the analyzed frame to the logo box and classify the crop.

    Predictions below ``confidence_threshold`` degrade to "other"; the
    reported confidence stays the distribution maximum either way.
    """
    if logo_box.class_id is not ElementClass.LOGO:
        raise ValueError(f"expected a logo box, got class {logo_box.class_id.label}")
    image = np.asarray(image)
    if image.ndim != 3:
        raise ShapeMismatchError(f"image must be (H, W, 3), got shape {image.shape}")
    h, w = image.shape[:2]
    x0, y0, x1, y1 = pixel_crop_bounds(logo_box.rect, w, h)
    if x1 <= x0 or y1 <= y0:
        raise EmptyCropError(
            f"logo box {logo_box.rect.as_tuple()} degenerates to an empty crop "
            f"on a {w}x{h} frame"
        )
    dist = np.asarray(model.classify(image[y0:y1, x0:x1]), dtype=np.float64)
    if dist.shape != (len(model.classes),):
        raise ShapeMismatchError(
            f"brand backend returned {dist.shape}, expected ({len(model.classes)},)"
        )
    if abs(float(dist.sum()) - 1.0) > 1e-6:
        raise ValueError(f"brand distribution sums to {dist.sum()}, not 1")
    idx = int(np.argmax(dist))
    confidence = float(dist[idx])
    brand = model.classes[idx]
    if brand != OTHER_BRAND and confidence < confidence_threshold:
        brand = OTHER_BRAND
    return BrandPrediction(brand, confidence)


class ReferenceList:
    """Protected brands and their legitimate domains.

    File format: one ``brand<TAB>domain[,domain...]`` per line, UTF-8,
    ``#`` comments and blank lines ignored.
    """

    def __init__(self, brands: dict[str, tuple[str, ...]]):
        self._brands = {b: tuple(d.lower() for d in doms) for b, doms in brands.items()}

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return tuple(self._brands)

    def domains_for(self, brand: str) -> tuple[str, ...]:
        return self._brands.get(brand, ())

    def __len__(self) -> int:
        return len(self._brands)

    def __contains__(self, brand: str) -> bool:
        return brand in self._brands

    def is_legitimate(self, brand: str, host: str) -> bool:
        """True when ``host`` equals or is a subdomain of a legitimate domain."""
        host = host.lower().rstrip(".")
        for domain in self.domains_for(brand):
            if host == domain or host.endswith("." + domain):
                return True
        return False

    @classmethod
    def from_lines(cls, lines) -> "ReferenceList":
        brands: dict[str, tuple[str, ...]] = {}
        for lineno, line in enumerate(lines, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"reference list line {lineno}: expected brand<TAB>domains")
            brand, _, domains = line.partition("\t")
            brand = brand.strip()
            doms = tuple(d.strip().lower() for d in domains.split(",") if d.strip())
            if not brand or not doms:
                raise ValueError(f"reference list line {lineno}: empty brand or domains")
            brands[brand] = doms
        return cls(brands)


def load_reference_list(path) -> ReferenceList:
    with open(path, "r", encoding="utf-8") as fh:
        return ReferenceList.from_lines(fh)


def save_reference_list(ref: ReferenceList, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for brand in ref.vocabulary:
            fh.write(f"{brand}\t{','.join(ref.domains_for(brand))}\n")
