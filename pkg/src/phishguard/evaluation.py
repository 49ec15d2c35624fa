"""Metric suite and dataset harness: IoU-swept average precision, verdict
precision/recall/FPR, ROC curves, quantization impact, and throughput.

Per-image work is independent and may run on several workers; aggregation is
an ordered reduction over record index, so reports are identical regardless
of worker count.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from .classification import OTHER_BRAND, CrpModel, ReferenceList, SceneBrandModel
from .detection import SceneElement, SceneSpec, decode_detections, synthetic_backend
from .errors import (
    DegenerateLabelsError,
    EmptyDatasetError,
    LengthMismatchError,
    ManifestError,
)
from .geometry import DetectionBox, ElementClass, NmsConfig, Rect, iou
from .pipeline import (
    AnalysisTrace,
    BlacklistStore,
    Frame,
    ModelBundle,
    PixelRect,
    RegionOfInterest,
    Verdict,
    analyze_trace,
    crop_roi,
    normalized_host,
)

PHISHING, BENIGN = "phishing", "benign"


@dataclass(frozen=True)
class ManifestRecord:
    """One ground-truth page: rendered frame, ROI, planted layout, labels."""

    image: str
    roi: RegionOfInterest
    elements: tuple[SceneElement, ...]
    brand: str | None
    crp: bool
    verdict_label: str
    url: str
    seed: int
    noise_scale: float = 0.02
    rect_jitter: float = 0.0
    score_jitter: float = 0.0

    @property
    def scene(self) -> SceneSpec:
        return SceneSpec(self.elements, crp=self.crp, brand=self.brand)

    def ground_truth(self) -> list[tuple[Rect, ElementClass]]:
        return [(el.rect, el.class_id) for el in self.elements]

    def to_json_dict(self) -> dict:
        return {
            "image": self.image,
            "roi": {
                "rect": [self.roi.rect.x, self.roi.rect.y, self.roi.rect.width, self.roi.rect.height],
                "scroll_offset": list(self.roi.scroll_offset),
            },
            "elements": [
                {"class": el.class_id.label, "rect": list(el.rect.as_tuple()), "score": el.score}
                for el in self.elements
            ],
            "brand": self.brand,
            "crp": self.crp,
            "verdict": self.verdict_label,
            "url": self.url,
            "seed": self.seed,
            "noise_scale": self.noise_scale,
            "rect_jitter": self.rect_jitter,
            "score_jitter": self.score_jitter,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ManifestRecord":
        roi = obj["roi"]
        rect = roi["rect"]
        return cls(
            image=obj["image"],
            roi=RegionOfInterest(
                PixelRect(int(rect[0]), int(rect[1]), int(rect[2]), int(rect[3])),
                tuple(int(v) for v in roi.get("scroll_offset", (0, 0))),
            ),
            elements=tuple(
                SceneElement(
                    ElementClass.from_label(e["class"]), Rect(*e["rect"]), float(e["score"])
                )
                for e in obj.get("elements", [])
            ),
            brand=obj.get("brand"),
            crp=bool(obj["crp"]),
            verdict_label=obj["verdict"],
            url=obj["url"],
            seed=int(obj["seed"]),
            noise_scale=float(obj.get("noise_scale", 0.02)),
            rect_jitter=float(obj.get("rect_jitter", 0.0)),
            score_jitter=float(obj.get("score_jitter", 0.0)),
        )


@dataclass
class DatasetManifest:
    records: list[ManifestRecord]
    root: Path

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def validate_manifest(manifest: DatasetManifest) -> None:
    """Labels must be internally consistent in synthetic fixtures."""
    for i, rec in enumerate(manifest):
        if rec.verdict_label not in (PHISHING, BENIGN):
            raise ManifestError(f"record {i}: unknown verdict label {rec.verdict_label!r}")
        if rec.verdict_label == PHISHING and (rec.brand is None or not rec.crp):
            raise ManifestError(
                f"record {i}: phishing label requires a brand and crp=true, "
                f"got brand={rec.brand!r} crp={rec.crp}"
            )


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(ManifestRecord.from_json_dict(json.loads(line)))
            except (KeyError, ValueError, TypeError) as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from exc
    manifest = DatasetManifest(records, path.parent)
    validate_manifest(manifest)
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in manifest:
            fh.write(json.dumps(rec.to_json_dict(), sort_keys=True) + "\n")


_DEFAULT_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class MetricsConfig:
    """Sweep settings; thresholds follow the [.5:.95] convention."""

    iou_thresholds: tuple[float, ...] = _DEFAULT_THRESHOLDS
    roc_resolution: int | None = None  # None sweeps every distinct score
    classes: tuple[str, ...] | None = None  # e.g. ("logo",) for logo-only tables

    def __post_init__(self):
        th = tuple(self.iou_thresholds)
        if not th or any(not 0.0 < t < 1.0 for t in th):
            raise ValueError(f"iou thresholds must lie in (0, 1), got {th}")
        if any(b <= a for a, b in zip(th, th[1:])):
            raise ValueError("iou thresholds must be strictly increasing")
        object.__setattr__(self, "iou_thresholds", th)


def _match_predictions(
    predictions: Sequence[Sequence[DetectionBox]],
    ground_truth: Sequence[Sequence[tuple[Rect, ElementClass]]],
    iou_threshold: float,
    class_id: ElementClass | None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Pool predictions over images, sort by score, greedy-match to GT.

    Returns (scores, tp flags) aligned and sorted score-descending, plus the
    number of ground-truth boxes in scope. Each GT box matches at most once;
    a prediction matches the unmatched same-class GT of highest IoU >= t.
    """
    pooled: list[tuple[float, int, int]] = []  # (-score, image, index)
    for img_i, boxes in enumerate(predictions):
        for box_i, box in enumerate(boxes):
            if class_id is not None and box.class_id is not class_id:
                continue
            pooled.append((-box.score, img_i, box_i))
    pooled.sort()

    gt_in_scope = 0
    matched: list[list[bool]] = []
    for gts in ground_truth:
        matched.append([False] * len(gts))
        for rect, cls in gts:
            if class_id is None or cls is class_id:
                gt_in_scope += 1

    scores = np.empty(len(pooled))
    tp = np.zeros(len(pooled), dtype=bool)
    for k, (neg_score, img_i, box_i) in enumerate(pooled):
        scores[k] = -neg_score
        box = predictions[img_i][box_i]
        best_iou, best_j = 0.0, -1
        for j, (rect, cls) in enumerate(ground_truth[img_i]):
            if cls is not box.class_id or matched[img_i][j]:
                continue
            if class_id is not None and cls is not class_id:
                continue
            v = iou(box.rect, rect)
            if v >= iou_threshold and v > best_iou:
                best_iou, best_j = v, j
        if best_j >= 0:
            matched[img_i][best_j] = True
            tp[k] = True
    return scores, tp, gt_in_scope


def average_precision(
    predictions: Sequence[Sequence[DetectionBox]],
    ground_truth: Sequence[Sequence[tuple[Rect, ElementClass]]],
    iou_threshold: float,
    class_id: ElementClass | None = None,
) -> float | None:
    """101-point interpolated AP at one IoU threshold.

    ``class_id=None`` pools every class (matching still requires class
    equality). Returns None when no ground-truth box is in scope.
    """
    if len(predictions) != len(ground_truth):
        raise LengthMismatchError(
            f"{len(predictions)} prediction lists vs {len(ground_truth)} ground-truth lists"
        )
    _, tp, n_gt = _match_predictions(predictions, ground_truth, iou_threshold, class_id)
    if n_gt == 0:
        return None
    if len(tp) == 0:
        return 0.0
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(~tp)
    recall = tp_cum / n_gt
    precision = tp_cum / (tp_cum + fp_cum)
    ap = 0.0
    for r in np.linspace(0.0, 1.0, 101):
        mask = recall >= r - 1e-12
        ap += float(precision[mask].max()) if mask.any() else 0.0
    return ap / 101.0


@dataclass
class MapReport:
    per_threshold: dict[float, dict[str, float]]  # threshold -> class label -> AP
    mean_per_threshold: dict[float, float]
    map: float


def map_sweep(
    predictions: Sequence[Sequence[DetectionBox]],
    ground_truth: Sequence[Sequence[tuple[Rect, ElementClass]]],
    cfg: MetricsConfig | None = None,
) -> MapReport:
    """Mean AP over IoU thresholds and classes present in the ground truth."""
    cfg = cfg or MetricsConfig()
    if not ground_truth or all(len(g) == 0 for g in ground_truth):
        raise EmptyDatasetError("ground truth holds no boxes")
    if cfg.classes is not None:
        classes = [ElementClass.from_label(c) for c in cfg.classes]
    else:
        present = {cls for gts in ground_truth for _, cls in gts}
        classes = sorted(present)
    per_threshold: dict[float, dict[str, float]] = {}
    mean_per_threshold: dict[float, float] = {}
    for t in cfg.iou_thresholds:
        aps: dict[str, float] = {}
        for cls in classes:
            ap = average_precision(predictions, ground_truth, t, cls)
            if ap is not None:
                aps[cls.label] = ap
        if not aps:
            raise EmptyDatasetError(f"no ground-truth boxes for classes {classes}")
        per_threshold[t] = aps
        mean_per_threshold[t] = sum(aps.values()) / len(aps)
    mean_ap = sum(mean_per_threshold.values()) / len(mean_per_threshold)
    return MapReport(per_threshold, mean_per_threshold, mean_ap)


@dataclass
class VerdictMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float | None  # None when no positives were predicted
    recall: float | None
    fpr: float | None


def verdict_metrics(decisions: Sequence[str], labels: Sequence[str]) -> VerdictMetrics:
    """Phishing is the positive class; undefined ratios stay None, never 0.

    Inconclusive decisions count as not-flagged (the pipeline did not raise
    an alert), i.e. negatives.
    """
    if len(decisions) != len(labels):
        raise LengthMismatchError(f"{len(decisions)} decisions vs {len(labels)} labels")
    tp = fp = fn = tn = 0
    for d, y in zip(decisions, labels):
        flagged = d == PHISHING
        positive = y == PHISHING
        if flagged and positive:
            tp += 1
        elif flagged:
            fp += 1
        elif positive:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    fpr = fp / (fp + tn) if fp + tn else None
    return VerdictMetrics(tp, fp, fn, tn, precision, recall, fpr)


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float
    threshold: float


def roc_curve(
    scores: Sequence[float], labels: Sequence[str], cfg: MetricsConfig | None = None
) -> list[RocPoint]:
    """(fpr, tpr) swept over score thresholds, threshold-descending.

    Predicts phishing where score >= threshold. The sweep starts above the
    maximum score, pinning (0, 0), and ends at the minimum, pinning (1, 1).
    """
    if len(scores) != len(labels):
        raise LengthMismatchError(f"{len(scores)} scores vs {len(labels)} labels")
    y = np.array([1 if l == PHISHING else 0 for l in labels])
    s = np.asarray(scores, dtype=np.float64)
    pos = int(y.sum())
    neg = len(y) - pos
    if pos == 0 or neg == 0:
        raise DegenerateLabelsError("roc needs both phishing and benign labels")
    if cfg is not None and cfg.roc_resolution is not None:
        grid = np.linspace(s.max(), s.min(), cfg.roc_resolution)
        thresholds = [float(s.max()) + 1.0] + [float(t) for t in grid]
    else:
        uniq = np.unique(s)[::-1]
        thresholds = [float(uniq[0]) + 1.0] + [float(t) for t in uniq]
    points = []
    for t in thresholds:
        flag = s >= t
        tp = int(np.sum(flag & (y == 1)))
        fp = int(np.sum(flag & (y == 0)))
        points.append(RocPoint(fp / neg, tp / pos, t))
    if points[-1].fpr != 1.0 or points[-1].tpr != 1.0:
        points.append(RocPoint(1.0, 1.0, float(s.min())))
    return points


def roc_auc(points: Sequence[RocPoint]) -> float:
    """Trapezoidal area under the curve; points must be fpr-ascending."""
    xs = np.array([p.fpr for p in points])
    ys = np.array([p.tpr for p in points])
    return float(np.trapezoid(ys, xs))


@dataclass
class RecordResult:
    verdict: Verdict
    trace: AnalysisTrace
    phishing_score: float
    latency_s: float


def phishing_score(verdict: Verdict, trace: AnalysisTrace) -> float:
    """Score used for the ROC sweep: the credential-page probability gated by
    a brand match; pages that never become candidates score 0. Blacklist hits
    are certain by construction and score 1."""
    if verdict.matched_rule == "blacklist-hit":
        return 1.0
    if trace.brand is None or trace.brand.brand == OTHER_BRAND:
        return 0.0
    if trace.crp is None:
        return 0.0
    return float(trace.crp.score)


def run_record(
    record: ManifestRecord,
    root: Path,
    crp_model: CrpModel,
    reference: ReferenceList,
    blacklist: BlacklistStore | None,
    nms: NmsConfig,
) -> RecordResult:
    """Analyze one manifest record with a scene-keyed synthetic backend."""
    with Image.open(root / record.image) as im:
        pixels = np.asarray(im.convert("RGB"))
    frame = Frame.from_array(pixels, timestamp=0.0, page_url=record.url)
    backend = synthetic_backend(
        record.seed,
        record.scene,
        noise_scale=record.noise_scale,
        rect_jitter=record.rect_jitter,
        score_jitter=record.score_jitter,
    )
    bundle = ModelBundle(
        detector=backend,
        crp_model=crp_model,
        brand_model=SceneBrandModel(reference.vocabulary, record.brand),
        nms=nms,
    )
    start = time.perf_counter()
    verdict, trace = analyze_trace(frame, record.roi, bundle, reference, blacklist)
    elapsed = time.perf_counter() - start
    if verdict.matched_rule == "blacklist-hit":
        # The prefilter short-circuits before detection; rerun the visual
        # stages so detection metrics cover every page.
        image = crop_roi(frame, record.roi, bundle.canvas)
        raw = backend.detect_objects(backend.extract_features(image))
        trace.boxes = decode_detections(raw, nms)[0]
    return RecordResult(verdict, trace, phishing_score(verdict, trace), elapsed)


@dataclass
class EvaluationReport:
    n_records: int
    verdict: VerdictMetrics
    map_report: MapReport | None
    roc_points: list[RocPoint] | None
    auc: float | None
    decisions: list[str]
    labels: list[str]
    scores: list[float]
    latencies_s: list[float]
    verdicts: list[Verdict]


def evaluate_manifest(
    manifest: DatasetManifest,
    crp_model: CrpModel,
    reference: ReferenceList,
    blacklist: BlacklistStore | None = None,
    nms: NmsConfig | None = None,
    cfg: MetricsConfig | None = None,
    jobs: int = 1,
) -> EvaluationReport:
    """Run the pipeline over a manifest and aggregate the full metric suite."""
    if len(manifest) == 0:
        raise EmptyDatasetError("manifest holds no records")
    nms = nms or NmsConfig()
    cfg = cfg or MetricsConfig()
    results = _run_records(manifest, crp_model, reference, blacklist, nms, jobs)

    decisions = [r.verdict.decision for r in results]
    labels = [rec.verdict_label for rec in manifest]
    scores = [r.phishing_score for r in results]
    vm = verdict_metrics(decisions, labels)

    predictions = [r.trace.boxes for r in results]
    ground_truth = [rec.ground_truth() for rec in manifest]
    try:
        map_report = map_sweep(predictions, ground_truth, cfg)
    except EmptyDatasetError:
        map_report = None
    try:
        points = roc_curve(scores, labels, cfg)
        auc = roc_auc(points)
    except DegenerateLabelsError:
        points, auc = None, None
    return EvaluationReport(
        n_records=len(manifest),
        verdict=vm,
        map_report=map_report,
        roc_points=points,
        auc=auc,
        decisions=decisions,
        labels=labels,
        scores=scores,
        latencies_s=[r.latency_s for r in results],
        verdicts=[r.verdict for r in results],
    )


def _run_records(manifest, crp_model, reference, blacklist, nms, jobs) -> list[RecordResult]:
    def work(record: ManifestRecord) -> RecordResult:
        return run_record(record, manifest.root, crp_model, reference, blacklist, nms)

    if jobs <= 1:
        return [work(rec) for rec in manifest]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(work, manifest.records))


def verify_soundness(
    results: Iterable[tuple[ManifestRecord, Verdict]], reference: ReferenceList
) -> list[str]:
    """Every phishing verdict must carry blacklist evidence or the full
    (known brand, credential page, foreign domain) chain. Returns violations."""
    violations = []
    for i, (record, verdict) in enumerate(results):
        if verdict.decision != PHISHING:
            continue
        ev = verdict.evidence
        if verdict.matched_rule == "blacklist-hit":
            if not ev.blacklist_entry:
                violations.append(f"record {i}: blacklist-hit verdict without an entry")
            continue
        if ev.brand is None or ev.brand.brand == OTHER_BRAND or ev.brand.brand not in reference:
            violations.append(f"record {i}: phishing verdict without a known brand")
        elif ev.crp_score is None or ev.crp_score <= 0.5:
            violations.append(f"record {i}: phishing verdict without crp evidence")
        elif reference.is_legitimate(ev.brand.brand, normalized_host(record.url)):
            violations.append(f"record {i}: phishing verdict on a legitimate domain")
    return violations


@dataclass
class QuantizationComparison:
    report_a: EvaluationReport
    report_b: EvaluationReport
    agreement: float
    deltas: dict[str, float | None]  # precision / recall / fpr deltas (b - a)


def compare_quantization(
    manifest: DatasetManifest,
    crp_f32: CrpModel,
    crp_f16: CrpModel,
    reference: ReferenceList,
    blacklist: BlacklistStore | None = None,
    nms: NmsConfig | None = None,
    cfg: MetricsConfig | None = None,
    jobs: int = 1,
) -> QuantizationComparison:
    """Run the pipeline under both precisions and report deltas + agreement."""
    rep_a = evaluate_manifest(manifest, crp_f32, reference, blacklist, nms, cfg, jobs)
    rep_b = evaluate_manifest(manifest, crp_f16, reference, blacklist, nms, cfg, jobs)
    agree = sum(a == b for a, b in zip(rep_a.decisions, rep_b.decisions)) / len(rep_a.decisions)

    def delta(a: float | None, b: float | None) -> float | None:
        return None if a is None or b is None else b - a

    deltas = {
        "precision": delta(rep_a.verdict.precision, rep_b.verdict.precision),
        "recall": delta(rep_a.verdict.recall, rep_b.verdict.recall),
        "fpr": delta(rep_a.verdict.fpr, rep_b.verdict.fpr),
    }
    return QuantizationComparison(rep_a, rep_b, agree, deltas)


@dataclass
class BenchReport:
    samples_per_s: float
    p50_s: float
    p95_s: float
    stage_means_s: dict[str, float]
    iterations: int
    n_records: int
    peak_rss_bytes: int | None


def bench_throughput(
    manifest: DatasetManifest,
    crp_model: CrpModel,
    reference: ReferenceList,
    blacklist: BlacklistStore | None = None,
    nms: NmsConfig | None = None,
    warmup: int = 1,
    iterations: int = 1,
) -> BenchReport:
    """Wall-clock samples/s over the analyze path, with stage breakdown."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if len(manifest) == 0:
        raise EmptyDatasetError("manifest holds no records")
    nms = nms or NmsConfig()
    records = manifest.records
    for _ in range(warmup):
        run_record(records[0], manifest.root, crp_model, reference, blacklist, nms)
    latencies: list[float] = []
    stage_totals: dict[str, float] = {}
    stage_counts: dict[str, int] = {}
    for _ in range(iterations):
        for rec in records:
            res = run_record(rec, manifest.root, crp_model, reference, blacklist, nms)
            latencies.append(res.latency_s)
            for name, sec in res.verdict.latency.items():
                stage_totals[name] = stage_totals.get(name, 0.0) + sec
                stage_counts[name] = stage_counts.get(name, 0) + 1
    lat = np.array(latencies)
    try:
        import psutil

        rss = int(psutil.Process().memory_info().rss)
    except Exception:
        rss = None
    return BenchReport(
        samples_per_s=len(lat) / float(lat.sum()),
        p50_s=float(np.percentile(lat, 50)),
        p95_s=float(np.percentile(lat, 95)),
        stage_means_s={k: stage_totals[k] / stage_counts[k] for k in sorted(stage_totals)},
        iterations=iterations,
        n_records=len(records),
        peak_rss_bytes=rss,
    )


# ---------------------------------------------------------------------------
# report writers


def _fmt(v) -> str:
    if v is None:
        return "absent"
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def write_metrics_csv(report: EvaluationReport, path) -> None:
    """One row per metric; deterministic for a fixed manifest and seed."""
    rows = [
        ("n_records", report.n_records),
        ("tp", report.verdict.tp),
        ("fp", report.verdict.fp),
        ("fn", report.verdict.fn),
        ("tn", report.verdict.tn),
        ("precision", report.verdict.precision),
        ("recall", report.verdict.recall),
        ("fpr", report.verdict.fpr),
        ("auc", report.auc),
        ("map", report.map_report.map if report.map_report else None),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("metric,value\n")
        for name, value in rows:
            fh.write(f"{name},{_fmt(value)}\n")


def write_ap_csv(report: MapReport, path) -> None:
    classes = sorted({c for aps in report.per_threshold.values() for c in aps})
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iou_threshold," + ",".join(classes) + ",mean\n")
        for t in sorted(report.per_threshold):
            aps = report.per_threshold[t]
            cells = [f"{aps[c]:.6f}" if c in aps else "absent" for c in classes]
            fh.write(f"{t:.2f}," + ",".join(cells) + f",{report.mean_per_threshold[t]:.6f}\n")


def write_roc_csv(points: Sequence[RocPoint], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("threshold,fpr,tpr\n")
        for p in points:
            fh.write(f"{p.threshold:.6f},{p.fpr:.6f},{p.tpr:.6f}\n")


def write_roc_svg(points: Sequence[RocPoint], path, title: str = "ROC") -> None:
    """Small hand-rolled SVG so output bytes stay deterministic."""
    w, h, margin = 480, 480, 48

    def sx(v: float) -> float:
        return margin + v * (w - 2 * margin)

    def sy(v: float) -> float:
        return h - margin - v * (h - 2 * margin)

    poly = " ".join(f"{sx(p.fpr):.2f},{sy(p.tpr):.2f}" for p in points)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(0)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(0)}" y2="{sy(1)}" stroke="black"/>',
        f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" '
        f'stroke="#bbbbbb" stroke-dasharray="4 4"/>',
        f'<polyline points="{poly}" fill="none" stroke="#1f6fb2" stroke-width="2"/>',
        f'<text x="{w / 2:.0f}" y="{h - 12}" text-anchor="middle" '
        f'font-family="monospace" font-size="12">false positive rate</text>',
        f'<text x="14" y="{h / 2:.0f}" text-anchor="middle" font-family="monospace" '
        f'font-size="12" transform="rotate(-90 14 {h / 2:.0f})">true positive rate</text>',
        f'<text x="{w / 2:.0f}" y="24" text-anchor="middle" font-family="monospace" '
        f'font-size="13">{title}</text>',
        "</svg>",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
