"""Seeded synthetic corpus generation.

Produces a self-contained dataset directory:

    manifest.jsonl   ground-truth records (one JSON object per line)
    frames/*.png     rendered fullscreen frames
    scenes/*.json    per-page scene fixtures
    frames.jsonl     replay sidecar for the governed watch loop
    brands.tsv       brand vocabulary + legitimate domains
    blacklist.txt    known-phishing hosts collected while generating
    features.pgwt    optional flattened feature corpus for head training
    corpus_meta.json generation settings echo

Pages are drawn from five recipes: impersonation phishing, logo-free benign,
brand pages without credential forms, legitimate brand login pages, and
credential pages of brands outside the reference list. Everything is a pure
function of the seed.
"""

from __future__ import annotations

import colorsys
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .classification import ReferenceList, save_reference_list
from .detection import SceneElement, SceneSpec, save_scene, synthetic_backend
from .evaluation import BENIGN, PHISHING, DatasetManifest, ManifestRecord, save_manifest
from .geometry import ElementClass, Rect
from .pipeline import BlacklistStore, Frame, PixelRect, RegionOfInterest, crop_roi, save_blacklist
from .tensors import Tensor, WeightStore, save_weights

BRAND_TABLE: dict[str, tuple[str, ...]] = {
    "dhl": ("dhl.com", "dhl.de", "dhlsameday.com"),
    "apple": ("apple.com", "icloud.com"),
    "amazon": ("amazon.com", "amazon.de"),
    "netflix": ("netflix.com",),
    "paypal": ("paypal.com", "paypal.me"),
    "google": ("google.com", "accounts.google.com"),
    "microsoft": ("microsoft.com", "live.com", "office.com"),
    "meta": ("facebook.com", "meta.com", "instagram.com"),
    "dropbox": ("dropbox.com",),
    "github": ("github.com",),
}

# Logos the detector may find whose brands the reference list does not know.
OFF_BRANDS = ("zorblax", "quintel", "movastream", "pixleaf")

_WORDS = (
    "river", "quiet", "maple", "cobalt", "lark", "ember", "willow", "breeze",
    "garden", "summit", "harbor", "cedar", "violet", "prairie", "combe",
)
_FOREIGN_TLDS = ("xyz", "top", "info", "click")

PAGE_KINDS = ("phish", "benign_nologo", "brand_noncrp", "brand_legit", "unknown_crp")
_KIND_P = (0.50, 0.20, 0.15, 0.10, 0.05)

FULLSCREEN_W, FULLSCREEN_H = 800, 1000

_CLASS_COLORS = {
    ElementClass.BUTTON: (66, 120, 184),
    ElementClass.INPUT: (236, 240, 248),
    ElementClass.LABEL: (96, 96, 96),
    ElementClass.BLOCK: (208, 208, 212),
}


def brand_color(brand: str) -> tuple[int, int, int]:
    names = list(BRAND_TABLE) + list(OFF_BRANDS)
    idx = names.index(brand) if brand in names else len(names)
    r, g, b = colorsys.hsv_to_rgb((idx * 0.618034) % 1.0, 0.75, 0.85)
    return int(r * 255), int(g * 255), int(b * 255)


@dataclass(frozen=True)
class FixtureConfig:
    out_dir: Path
    pages: int = 1000
    seed: int = 7
    variant: str = "separable"  # or "adversarial"
    fps: float = 30.0
    features: bool = False

    def __post_init__(self):
        if self.variant not in ("separable", "adversarial"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.pages < 1:
            raise ValueError("pages must be >= 1")

    @property
    def noise_scale(self) -> float:
        return 0.02 if self.variant == "separable" else 0.35

    @property
    def rect_jitter(self) -> float:
        return 0.0 if self.variant == "separable" else 0.02

    @property
    def score_jitter(self) -> float:
        return 0.0 if self.variant == "separable" else 0.15


def _stacked_layout(rng: np.random.Generator, with_logo: bool, crp: bool) -> list[SceneElement]:
    """Vertically stacked elements; bands never overlap, so suppression-free."""
    elements: list[SceneElement] = []

    def add(cls: ElementClass, y0: float, h: float) -> float:
        x0 = float(rng.uniform(0.04, 0.45))
        w = float(rng.uniform(0.15, min(0.5, 0.94 - x0)))
        score = float(rng.uniform(0.65, 0.98))
        elements.append(SceneElement(cls, Rect(x0, y0, x0 + w, y0 + h), score))
        return y0 + h + float(rng.uniform(0.015, 0.04))

    y = float(rng.uniform(0.02, 0.05))
    if with_logo:
        y = add(ElementClass.LOGO, y, float(rng.uniform(0.05, 0.1)))
    for _ in range(int(rng.integers(1, 4))):
        cls = ElementClass.BLOCK if rng.random() < 0.5 else ElementClass.LABEL
        y = add(cls, y, float(rng.uniform(0.04, 0.09)))
    if crp:
        for _ in range(int(rng.integers(1, 3))):
            y = add(ElementClass.INPUT, y, float(rng.uniform(0.04, 0.06)))
        y = add(ElementClass.BUTTON, y, float(rng.uniform(0.04, 0.06)))
    elif rng.random() < 0.5:
        y = add(ElementClass.BUTTON, y, float(rng.uniform(0.04, 0.06)))
    return elements


def _foreign_host(rng: np.random.Generator, brand: str) -> str:
    word = _WORDS[int(rng.integers(0, len(_WORDS)))]
    tld = _FOREIGN_TLDS[int(rng.integers(0, len(_FOREIGN_TLDS)))]
    return f"{brand}-{word}{int(rng.integers(10, 99))}.{tld}"


def _benign_host(rng: np.random.Generator) -> str:
    a = _WORDS[int(rng.integers(0, len(_WORDS)))]
    b = _WORDS[int(rng.integers(0, len(_WORDS)))]
    return f"{a}{b}{int(rng.integers(1, 999))}.net"


def _legit_host(rng: np.random.Generator, brand: str) -> str:
    domain = BRAND_TABLE[brand][int(rng.integers(0, len(BRAND_TABLE[brand])))]
    prefix = ("", "www.", "login.")[int(rng.integers(0, 3))]
    return prefix + domain


def _render_frame(
    rng: np.random.Generator,
    scene: SceneSpec,
    roi: RegionOfInterest,
) -> np.ndarray:
    img = Image.new("RGB", (FULLSCREEN_W, FULLSCREEN_H), (246, 246, 246))
    draw = ImageDraw.Draw(img)
    draw.rectangle([0, 0, FULLSCREEN_W, 78], fill=(222, 224, 228))  # browser chrome
    ex = roi.rect.x + roi.scroll_offset[0]
    ey = roi.rect.y + roi.scroll_offset[1]
    draw.rectangle([ex, ey, ex + roi.rect.width, ey + roi.rect.height], fill=(255, 255, 255))
    for el in scene.elements:
        color = (
            brand_color(scene.brand or "")
            if el.class_id is ElementClass.LOGO
            else _CLASS_COLORS[el.class_id]
        )
        x0 = ex + el.rect.x_min * roi.rect.width
        y0 = ey + el.rect.y_min * roi.rect.height
        x1 = ex + el.rect.x_max * roi.rect.width
        y1 = ey + el.rect.y_max * roi.rect.height
        draw.rectangle([x0, y0, x1, y1], fill=color, outline=(60, 60, 60))
    return np.asarray(img)


def _synthesize_page(rng: np.random.Generator, kind: str):
    """Returns (scene, url, verdict_label, blacklist_host_or_None)."""
    brands = list(BRAND_TABLE)
    blacklist_host = None
    if kind == "phish":
        brand = brands[int(rng.integers(0, len(brands)))]
        scene = SceneSpec(tuple(_stacked_layout(rng, True, True)), crp=True, brand=brand)
        host = _foreign_host(rng, brand)
        if rng.random() < 0.04:
            blacklist_host = host
        return scene, f"https://{host}/login", PHISHING, blacklist_host
    if kind == "benign_nologo":
        crp = bool(rng.random() < 0.3)
        scene = SceneSpec(tuple(_stacked_layout(rng, False, crp)), crp=crp, brand=None)
        return scene, f"https://{_benign_host(rng)}/", BENIGN, None
    if kind == "brand_noncrp":
        brand = brands[int(rng.integers(0, len(brands)))]
        scene = SceneSpec(tuple(_stacked_layout(rng, True, False)), crp=False, brand=brand)
        host = _legit_host(rng, brand) if rng.random() < 0.5 else _foreign_host(rng, brand)
        return scene, f"https://{host}/news", BENIGN, None
    if kind == "brand_legit":
        brand = brands[int(rng.integers(0, len(brands)))]
        scene = SceneSpec(tuple(_stacked_layout(rng, True, True)), crp=True, brand=brand)
        return scene, f"https://{_legit_host(rng, brand)}/signin", BENIGN, None
    # unknown_crp: a credential page of a brand outside the reference list
    brand = OFF_BRANDS[int(rng.integers(0, len(OFF_BRANDS)))]
    scene = SceneSpec(tuple(_stacked_layout(rng, True, True)), crp=True, brand=brand)
    return scene, f"https://{_foreign_host(rng, brand)}/login", BENIGN, None


@dataclass
class CorpusPaths:
    root: Path
    manifest: Path
    replay: Path
    brands: Path
    blacklist: Path
    features: Path | None
    meta: Path


def generate_corpus(cfg: FixtureConfig) -> CorpusPaths:
    root = Path(cfg.out_dir)
    (root / "frames").mkdir(parents=True, exist_ok=True)
    (root / "scenes").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(cfg.seed)

    records: list[ManifestRecord] = []
    sidecar_lines: list[dict] = []
    blacklist_hosts: list[str] = []
    feature_rows: list[np.ndarray] = []
    kind_counts = {k: 0 for k in PAGE_KINDS}

    for i in range(cfg.pages):
        kind = PAGE_KINDS[int(rng.choice(len(PAGE_KINDS), p=_KIND_P))]
        kind_counts[kind] += 1
        scene, url, label, bl_host = _synthesize_page(rng, kind)
        if bl_host:
            blacklist_hosts.append(bl_host)
        roi = RegionOfInterest(
            PixelRect(
                int(rng.integers(30, 110)),
                int(rng.integers(90, 130)),
                int(rng.integers(480, 620)),
                int(rng.integers(700, 820)),
            ),
            (int(rng.integers(0, 25)), int(rng.integers(0, 25))),
        )
        page_seed = int(rng.integers(0, 2**31 - 1))
        pixels = _render_frame(rng, scene, roi)
        name = f"{i:06d}"
        Image.fromarray(pixels).save(root / "frames" / f"{name}.png")
        save_scene(scene, root / "scenes" / f"{name}.json")
        record = ManifestRecord(
            image=f"frames/{name}.png",
            roi=roi,
            elements=scene.elements,
            brand=scene.brand,
            crp=scene.crp,
            verdict_label=label,
            url=url,
            seed=page_seed,
            noise_scale=cfg.noise_scale,
            rect_jitter=cfg.rect_jitter,
            score_jitter=cfg.score_jitter,
        )
        records.append(record)
        sidecar_lines.append(
            {
                "file": f"frames/{name}.png",
                "timestamp": round(i / cfg.fps, 6),
                "roi": record.to_json_dict()["roi"],
                "url": url,
                "scene": scene.to_json_dict(),
                "seed": page_seed,
                "noise_scale": cfg.noise_scale,
                "rect_jitter": cfg.rect_jitter,
                "score_jitter": cfg.score_jitter,
            }
        )
        if cfg.features:
            backend = synthetic_backend(
                page_seed,
                scene,
                noise_scale=cfg.noise_scale,
                rect_jitter=cfg.rect_jitter,
                score_jitter=cfg.score_jitter,
            )
            frame = Frame.from_array(pixels)
            canvas = crop_roi(frame, roi)
            feature_rows.append(backend.extract_features(canvas).flattened()[0])

    manifest = DatasetManifest(records, root)
    manifest_path = root / "manifest.jsonl"
    save_manifest(manifest, manifest_path)

    replay_path = root / "frames.jsonl"
    with open(replay_path, "w", encoding="utf-8") as fh:
        for line in sidecar_lines:
            fh.write(json.dumps(line, sort_keys=True) + "\n")

    brands_path = root / "brands.tsv"
    save_reference_list(ReferenceList(dict(BRAND_TABLE)), brands_path)

    blacklist_path = root / "blacklist.txt"
    save_blacklist(BlacklistStore(hosts=blacklist_hosts), blacklist_path)

    features_path = None
    if cfg.features:
        features_path = root / "features.pgwt"
        feats = np.stack(feature_rows).astype(np.float32)
        labels = np.array([1.0 if r.crp else 0.0 for r in records], dtype=np.float32)
        store = WeightStore([("features", Tensor(feats)), ("labels", Tensor(labels))])
        features_path.write_bytes(save_weights(store))

    meta_path = root / "corpus_meta.json"
    with open(meta_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "pages": cfg.pages,
                "seed": cfg.seed,
                "variant": cfg.variant,
                "fps": cfg.fps,
                "noise_scale": cfg.noise_scale,
                "rect_jitter": cfg.rect_jitter,
                "kind_counts": kind_counts,
                "blacklist_entries": len(blacklist_hosts),
            },
            fh,
            indent=1,
            sort_keys=True,
        )
        fh.write("\n")
    return CorpusPaths(
        root=root,
        manifest=manifest_path,
        replay=replay_path,
        brands=brands_path,
        blacklist=blacklist_path,
        features=features_path,
        meta=meta_path,
    )
