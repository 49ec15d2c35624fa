"""End-to-end orchestration: blacklist pre-filter, ROI crop/resize, detection,
brand and credential-page chaining, verdict rules, and the frame governor.

Verdict rule order (total and deterministic):

  1. blacklist hit                  -> phishing / blacklist-hit
  2. no logo detected               -> benign   / no-logo
  3. brand outside the reference    -> benign   / unknown-brand
  4. page does not require creds    -> benign   / non-crp
  5. page domain legitimate         -> benign   / domain-legitimate
     domain foreign                 -> phishing / impersonation
     URL unavailable                -> inconclusive / missing-url

A phishing decision therefore always carries either a blacklist entry or the
full (known brand, credential page, foreign domain) evidence chain.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator
from urllib.parse import urlparse

import numpy as np

from . import _kernels
from .classification import (
    BrandModel,
    BrandPrediction,
    CrpModel,
    ReferenceList,
    classify_brand,
    classify_crp,
)
from .detection import (
    DEFAULT_CANVAS,
    CanvasSize,
    DetectorBackend,
    decode_detections,
    select_logo,
)
from .errors import EmptyRoiError, MalformedUrlError, ShapeMismatchError
from .geometry import DetectionBox, NmsConfig


@dataclass
class Frame:
    """One captured screen frame; timestamps are monotonic seconds."""

    pixels: np.ndarray
    width: int
    height: int
    timestamp: float
    page_url: str | None = None

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"frame size must be positive, got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise ShapeMismatchError(
                f"pixel raster is {self.pixels.shape}, frame declares "
                f"({self.height}, {self.width}, 3)"
            )

    @classmethod
    def from_array(cls, pixels: np.ndarray, timestamp: float = 0.0, page_url=None) -> "Frame":
        pixels = np.asarray(pixels)
        return cls(pixels, pixels.shape[1], pixels.shape[0], timestamp, page_url)


@dataclass(frozen=True)
class PixelRect:
    x: int
    y: int
    width: int
    height: int


@dataclass(frozen=True)
class RegionOfInterest:
    """Web-content rectangle in frame pixels plus the page scroll offset."""

    rect: PixelRect
    scroll_offset: tuple[int, int] = (0, 0)


def crop_roi(
    frame: Frame, roi: RegionOfInterest, canvas: CanvasSize = DEFAULT_CANVAS
) -> np.ndarray:
    """Crop the ROI (shifted by scroll offset, clamped to the frame) and
    bilinear-resize it to exactly the canvas size. Returns uint8 (H, W, 3)."""
    dx, dy = roi.scroll_offset
    x0 = min(max(roi.rect.x + dx, 0), frame.width)
    y0 = min(max(roi.rect.y + dy, 0), frame.height)
    x1 = min(max(roi.rect.x + dx + roi.rect.width, 0), frame.width)
    y1 = min(max(roi.rect.y + dy + roi.rect.height, 0), frame.height)
    if x1 <= x0 or y1 <= y0:
        raise EmptyRoiError(
            f"roi {roi.rect} with scroll {roi.scroll_offset} falls outside the "
            f"{frame.width}x{frame.height} frame"
        )
    crop = frame.pixels[y0:y1, x0:x1, :]
    if crop.shape[0] == canvas.height and crop.shape[1] == canvas.width:
        return crop.copy()
    resized = _kernels.resize_bilinear(
        crop.astype(np.float64), canvas.height, canvas.width
    )
    np.rint(resized, out=resized)
    np.clip(resized, 0.0, 255.0, out=resized)
    return resized.astype(np.uint8)


@dataclass(frozen=True)
class BlacklistHit:
    entry: str
    kind: str  # "host" | "domain"


class BlacklistStore:
    """Known-phishing hosts: exact ``host`` entries and ``domain:`` suffixes.

    File format: one entry per line, ``host`` for exact matches or
    ``domain:<suffix>`` for a domain and all its subdomains; ``#`` comments.
    """

    def __init__(self, hosts: Iterable[str] = (), domains: Iterable[str] = ()):
        self._hosts = {h.lower().rstrip(".") for h in hosts}
        self._domains = {d.lower().rstrip(".") for d in domains}

    def __len__(self) -> int:
        return len(self._hosts) + len(self._domains)

    def match(self, host: str) -> BlacklistHit | None:
        host = host.lower().rstrip(".")
        if host in self._hosts:
            return BlacklistHit(host, "host")
        for domain in self._domains:
            if host == domain or host.endswith("." + domain):
                return BlacklistHit(domain, "domain")
        return None

    @classmethod
    def from_lines(cls, lines) -> "BlacklistStore":
        hosts, domains = [], []
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("domain:"):
                domains.append(line[len("domain:") :].strip())
            else:
                hosts.append(line)
        return cls(hosts, domains)


def load_blacklist(path) -> BlacklistStore:
    with open(path, "r", encoding="utf-8") as fh:
        return BlacklistStore.from_lines(fh)


def save_blacklist(store: BlacklistStore, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for host in sorted(store._hosts):
            fh.write(host + "\n")
        for domain in sorted(store._domains):
            fh.write(f"domain:{domain}\n")


def normalized_host(url: str) -> str:
    """Lowercased hostname with any trailing dot stripped.

    Raises MalformedUrlError when the URL has no parseable host.
    """
    try:
        parsed = urlparse(url)
    except ValueError as exc:
        raise MalformedUrlError(f"cannot parse url {url!r}: {exc}") from None
    host = parsed.hostname
    if not host:
        raise MalformedUrlError(f"url {url!r} has no host")
    return host.lower().rstrip(".")


def prefilter_url(url: str, blacklist: BlacklistStore) -> BlacklistHit | None:
    """Match the URL's host against the blacklist before any visual work."""
    return blacklist.match(normalized_host(url))


DECISIONS = ("phishing", "benign", "inconclusive")
MATCHED_RULES = (
    "blacklist-hit",
    "no-logo",
    "unknown-brand",
    "non-crp",
    "domain-legitimate",
    "impersonation",
    "missing-url",
)


@dataclass
class VerdictEvidence:
    logo_box: DetectionBox | None = None
    brand: BrandPrediction | None = None
    crp_score: float | None = None
    blacklist_entry: str | None = None


@dataclass
class Verdict:
    decision: str
    matched_rule: str
    evidence: VerdictEvidence
    latency: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.decision not in DECISIONS:
            raise ValueError(f"unknown decision {self.decision!r}")
        if self.matched_rule not in MATCHED_RULES:
            raise ValueError(f"unknown rule {self.matched_rule!r}")

    def to_json_dict(self, include_latency: bool = True) -> dict:
        ev: dict = {}
        if self.evidence.logo_box is not None:
            b = self.evidence.logo_box
            ev["logo_box"] = {
                "rect": list(b.rect.as_tuple()),
                "class": b.class_id.label,
                "score": b.score,
            }
        if self.evidence.brand is not None:
            ev["brand"] = {
                "name": self.evidence.brand.brand,
                "confidence": self.evidence.brand.confidence,
            }
        if self.evidence.crp_score is not None:
            ev["crp_score"] = self.evidence.crp_score
        if self.evidence.blacklist_entry is not None:
            ev["blacklist_entry"] = self.evidence.blacklist_entry
        out = {
            "decision": self.decision,
            "matched_rule": self.matched_rule,
            "evidence": ev,
        }
        if include_latency:
            out["latency_s"] = dict(self.latency)
        return out


@dataclass(frozen=True)
class ModelBundle:
    """Everything `analyze` needs besides the frame itself."""

    detector: DetectorBackend
    crp_model: CrpModel
    brand_model: BrandModel
    nms: NmsConfig = NmsConfig()
    canvas: CanvasSize = DEFAULT_CANVAS


@dataclass
class AnalysisTrace:
    """Intermediate stage outputs, kept for evaluation and debugging."""

    boxes: list[DetectionBox] = field(default_factory=list)
    logo_box: DetectionBox | None = None
    brand: BrandPrediction | None = None
    crp: object = None  # CrpPrediction once the crp stage ran
    blacklist_hit: BlacklistHit | None = None


def analyze_trace(
    frame: Frame,
    roi: RegionOfInterest,
    models: ModelBundle,
    reference: ReferenceList,
    blacklist: BlacklistStore | None = None,
) -> tuple[Verdict, AnalysisTrace]:
    """Run the verdict rules in order, returning the stage trace alongside."""
    latency: dict[str, float] = {}
    trace = AnalysisTrace()
    evidence = VerdictEvidence()

    def stage(name: str, start: float) -> None:
        latency[name] = time.perf_counter() - start

    t0 = time.perf_counter()
    if blacklist is not None and frame.page_url:
        hit = prefilter_url(frame.page_url, blacklist)
        if hit is not None:
            trace.blacklist_hit = hit
            evidence.blacklist_entry = hit.entry
            stage("prefilter", t0)
            return Verdict("phishing", "blacklist-hit", evidence, latency), trace
    stage("prefilter", t0)

    t0 = time.perf_counter()
    image = crop_roi(frame, roi, models.canvas)
    stage("crop", t0)

    t0 = time.perf_counter()
    features = models.detector.extract_features(image)
    raw = models.detector.detect_objects(features)
    boxes = decode_detections(raw, models.nms)[0]
    trace.boxes = boxes
    logo = select_logo(boxes)
    trace.logo_box = logo
    evidence.logo_box = logo
    stage("detect", t0)
    if logo is None:
        return Verdict("benign", "no-logo", evidence, latency), trace

    t0 = time.perf_counter()
    brand = classify_brand(models.brand_model, image, logo)
    trace.brand = brand
    evidence.brand = brand
    stage("brand", t0)
    if brand.brand not in reference:
        return Verdict("benign", "unknown-brand", evidence, latency), trace

    t0 = time.perf_counter()
    crp = classify_crp(models.crp_model, features)[0]
    trace.crp = crp
    evidence.crp_score = crp.score
    stage("crp", t0)
    if not crp.is_crp:
        return Verdict("benign", "non-crp", evidence, latency), trace

    if not frame.page_url:
        return Verdict("inconclusive", "missing-url", evidence, latency), trace
    host = normalized_host(frame.page_url)
    if reference.is_legitimate(brand.brand, host):
        return Verdict("benign", "domain-legitimate", evidence, latency), trace
    return Verdict("phishing", "impersonation", evidence, latency), trace


def analyze(
    frame: Frame,
    roi: RegionOfInterest,
    models: ModelBundle,
    reference: ReferenceList,
    blacklist: BlacklistStore | None = None,
) -> Verdict:
    verdict, _ = analyze_trace(frame, roi, models, reference, blacklist)
    return verdict


@dataclass(frozen=True)
class GovernorConfig:
    """One processed frame per interval; overruns are reported, not fatal."""

    frame_interval: float = 1.0
    processing_budget: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.processing_budget <= self.frame_interval:
            raise ValueError(
                f"need 0 < processing_budget <= frame_interval, got "
                f"{self.processing_budget} / {self.frame_interval}"
            )


@dataclass
class GovernedVerdict:
    timestamp: float
    verdict: Verdict
    processing_s: float
    budget_exceeded: bool


@dataclass
class GovernorStats:
    processed: int = 0
    dropped: int = 0
    total_processing_s: float = 0.0
    budget_exceeded: int = 0

    @property
    def mean_processing_s(self) -> float:
        return self.total_processing_s / self.processed if self.processed else 0.0

    def idle_fraction(self, cfg: GovernorConfig) -> float:
        """Fraction of each interval the CPU would sit idle at this pace."""
        if not self.processed:
            return 1.0
        return max(0.0, 1.0 - self.mean_processing_s / cfg.frame_interval)


def run_governed(
    stream: Iterable[tuple[Frame, RegionOfInterest]],
    cfg: GovernorConfig,
    analyze_fn: Callable[[Frame, RegionOfInterest], Verdict],
) -> tuple[list[GovernedVerdict], GovernorStats]:
    """Replay a frame stream under the compute governor.

    Frame timestamps drive the schedule: a frame is processed only when at
    least ``frame_interval`` has elapsed since the last processed one;
    everything in between is dropped (newest-frame-wins, no queueing).
    Processing time is measured wall-clock per processed frame.
    """
    stats = GovernorStats()
    results: list[GovernedVerdict] = []
    next_eligible: float | None = None
    for frame, roi in stream:
        if next_eligible is not None and frame.timestamp < next_eligible:
            stats.dropped += 1
            continue
        start = time.perf_counter()
        verdict = analyze_fn(frame, roi)
        elapsed = time.perf_counter() - start
        over = elapsed > cfg.processing_budget
        stats.processed += 1
        stats.total_processing_s += elapsed
        if over:
            stats.budget_exceeded += 1
        results.append(GovernedVerdict(frame.timestamp, verdict, elapsed, over))
        next_eligible = frame.timestamp + cfg.frame_interval
    return results, stats


@dataclass
class ReplayItem:
    """One sidecar line of a recorded frame stream, frame lazily loadable."""

    file: str
    timestamp: float
    roi: RegionOfInterest
    url: str | None
    scene: dict | None
    seed: int
    noise_scale: float
    rect_jitter: float
    score_jitter: float
    root: Path

    def load_frame(self) -> Frame:
        from PIL import Image

        with Image.open(self.root / self.file) as im:
            pixels = np.asarray(im.convert("RGB"))
        return Frame.from_array(pixels, timestamp=self.timestamp, page_url=self.url)


def read_replay_stream(directory) -> Iterator[ReplayItem]:
    """Parse ``frames.jsonl`` in a replay directory.

    Raises ManifestError naming the offending line on malformed sidecar
    entries; file paths are resolved relative to the directory.
    """
    from .errors import ManifestError

    root = Path(directory)
    sidecar = root / "frames.jsonl"
    if not sidecar.exists():
        raise ManifestError(f"no frames.jsonl sidecar in {root}")
    with open(sidecar, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rect = obj["roi"]["rect"]
                roi = RegionOfInterest(
                    PixelRect(int(rect[0]), int(rect[1]), int(rect[2]), int(rect[3])),
                    tuple(int(v) for v in obj["roi"].get("scroll_offset", (0, 0))),
                )
                yield ReplayItem(
                    file=obj["file"],
                    timestamp=float(obj["timestamp"]),
                    roi=roi,
                    url=obj.get("url"),
                    scene=obj.get("scene"),
                    seed=int(obj.get("seed", 0)),
                    noise_scale=float(obj.get("noise_scale", 0.02)),
                    rect_jitter=float(obj.get("rect_jitter", 0.0)),
                    score_jitter=float(obj.get("score_jitter", 0.0)),
                    root=root,
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ManifestError(f"{sidecar}:{lineno}: {exc}") from exc
