"""Operator entry point.

Subcommands: analyze, watch, evaluate, quantize, bench, gen-fixtures.
Exit codes: 0 success/benign, 1 operational error, 2 phishing detected.
Machine output (JSON/JSON-lines) goes to stdout, human summaries to stderr;
wall-clock measurements land in sidecar files so primary outputs stay
byte-identical for a fixed seed. PHISHGUARD_LOG selects error/info/debug.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import evaluation, fixtures
from .classification import CrpModel, SceneBrandModel, load_reference_list
from .detection import load_scene, synthetic_backend
from .errors import PhishguardError
from .geometry import NmsConfig
from .pipeline import (
    Frame,
    GovernorConfig,
    ModelBundle,
    PixelRect,
    RegionOfInterest,
    analyze,
    load_blacklist,
    read_replay_stream,
    run_governed,
)
from .tensors import load_weights, quantize, save_weights

log = logging.getLogger("phishguard")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PHISHING = 2


def _setup_logging() -> None:
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("PHISHGUARD_LOG", "error").lower(), logging.ERROR
    )
    logging.basicConfig(stream=sys.stderr, level=level, format="%(name)s: %(message)s")


def _parse_roi(spec: str | None, scroll: str | None) -> RegionOfInterest | None:
    if spec is None:
        return None
    parts = [int(p) for p in spec.split(",")]
    if len(parts) != 4:
        raise ValueError("--roi wants x,y,width,height")
    offset = (0, 0)
    if scroll:
        dx, dy = (int(p) for p in scroll.split(","))
        offset = (dx, dy)
    return RegionOfInterest(PixelRect(*parts), offset)


def _load_crp(path: str) -> CrpModel:
    return CrpModel.from_store(load_weights(Path(path).read_bytes()))


def _require(path: str | None, what: str) -> Path:
    if path is None:
        raise PhishguardError(f"missing required --{what}")
    p = Path(path)
    if not p.exists():
        raise PhishguardError(f"{what} path does not exist: {p}")
    return p


def cmd_analyze(args) -> int:
    image_path = _require(args.image, "image")
    scene = load_scene(_require(args.scene, "scene"))
    crp_model = _load_crp(str(_require(args.weights, "weights")))
    reference = load_reference_list(_require(args.brands, "brands"))
    blacklist = load_blacklist(_require(args.blacklist, "blacklist")) if args.blacklist else None

    with Image.open(image_path) as im:
        pixels = np.asarray(im.convert("RGB"))
    frame = Frame.from_array(pixels, timestamp=0.0, page_url=args.url)
    roi = _parse_roi(args.roi, args.scroll)
    if roi is None:
        roi = RegionOfInterest(PixelRect(0, 0, frame.width, frame.height))
    backend = synthetic_backend(
        args.seed, scene, noise_scale=args.noise_scale, rect_jitter=args.rect_jitter
    )
    bundle = ModelBundle(
        detector=backend,
        crp_model=crp_model,
        brand_model=SceneBrandModel(reference.vocabulary, scene.brand),
        nms=NmsConfig(),
    )
    verdict = analyze(frame, roi, bundle, reference, blacklist)
    print(json.dumps(verdict.to_json_dict(), sort_keys=True))
    print(f"{verdict.decision} ({verdict.matched_rule})", file=sys.stderr)
    return EXIT_PHISHING if verdict.decision == "phishing" else EXIT_OK


def cmd_watch(args) -> int:
    stream_dir = _require(args.stream, "stream")
    crp_model = _load_crp(str(_require(args.weights, "weights")))
    reference = load_reference_list(_require(args.brands, "brands"))
    blacklist = load_blacklist(_require(args.blacklist, "blacklist")) if args.blacklist else None
    cfg = GovernorConfig(frame_interval=args.interval, processing_budget=args.budget)

    from . import _kernels

    # JIT/caching warmup happens before the stream so frame-budget stats
    # reflect steady-state processing, not one-off compile cost
    _kernels.resize_bilinear(np.zeros((4, 4, 3)), 2, 2)

    items = list(read_replay_stream(stream_dir))
    by_timestamp = {}

    def frames():
        for item in items:
            frame = item.load_frame()
            by_timestamp[frame.timestamp] = item
            yield frame, item.roi

    def analyze_fn(frame, roi):
        item = by_timestamp[frame.timestamp]
        if item.scene is None:
            raise PhishguardError(f"replay line for {item.file} carries no scene")
        from .detection import SceneSpec

        scene = SceneSpec.from_json_dict(item.scene)
        backend = synthetic_backend(
            item.seed,
            scene,
            noise_scale=item.noise_scale,
            rect_jitter=item.rect_jitter,
            score_jitter=item.score_jitter,
        )
        bundle = ModelBundle(
            detector=backend,
            crp_model=crp_model,
            brand_model=SceneBrandModel(reference.vocabulary, scene.brand),
        )
        return analyze(frame, roi, bundle, reference, blacklist)

    results, stats = run_governed(frames(), cfg, analyze_fn)
    for res in results:
        line = res.verdict.to_json_dict()
        line["timestamp"] = res.timestamp
        line["processing_s"] = res.processing_s
        line["budget_exceeded"] = res.budget_exceeded
        print(json.dumps(line, sort_keys=True))
    summary = {
        "processed": stats.processed,
        "dropped": stats.dropped,
        "idle_fraction": stats.idle_fraction(cfg),
        "budget_exceeded": stats.budget_exceeded,
        "mean_processing_s": stats.mean_processing_s,
    }
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def _eval_parts(args):
    manifest = evaluation.load_manifest(_require(args.manifest, "manifest"))
    root = manifest.root
    brands = args.brands or (root / "brands.tsv")
    blacklist_path = args.blacklist or (root / "blacklist.txt")
    reference = load_reference_list(_require(str(brands), "brands"))
    blacklist = load_blacklist(blacklist_path) if Path(blacklist_path).exists() else None
    return manifest, reference, blacklist


def cmd_evaluate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest, reference, blacklist = _eval_parts(args)
    crp_model = _load_crp(str(_require(args.weights, "weights")))
    report = evaluation.evaluate_manifest(
        manifest, crp_model, reference, blacklist, jobs=args.jobs
    )
    evaluation.write_metrics_csv(report, out / "metrics.csv")
    if report.map_report is not None:
        evaluation.write_ap_csv(report.map_report, out / "ap_sweep.csv")
    if report.roc_points is not None:
        evaluation.write_roc_csv(report.roc_points, out / "roc_points.csv")
        evaluation.write_roc_svg(report.roc_points, out / "roc.svg")
    with open(out / "timing.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "mean_latency_s": float(np.mean(report.latencies_s)),
                "p95_latency_s": float(np.percentile(report.latencies_s, 95)),
            },
            fh,
            indent=1,
        )
        fh.write("\n")
    vm = report.verdict
    print(
        f"records={report.n_records} precision={vm.precision} recall={vm.recall} "
        f"fpr={vm.fpr} map={report.map_report.map if report.map_report else None}",
        file=sys.stderr,
    )
    if args.thresholds:
        violations = _check_thresholds(Path(args.thresholds), report)
        for v in violations:
            print(f"threshold violated: {v}", file=sys.stderr)
        if violations:
            return EXIT_ERROR
    return EXIT_OK


def _check_thresholds(path: Path, report: evaluation.EvaluationReport) -> list[str]:
    bounds = json.loads(path.read_text())
    vm = report.verdict
    actual = {
        "precision": vm.precision,
        "recall": vm.recall,
        "fpr": vm.fpr,
        "auc": report.auc,
        "map": report.map_report.map if report.map_report else None,
    }
    violations = []
    for key, bound in bounds.items():
        metric, _, kind = key.rpartition("_")
        if kind not in ("min", "max") or metric not in actual:
            raise PhishguardError(f"unknown threshold key {key!r}")
        value = actual[metric]
        if value is None:
            violations.append(f"{key}: metric {metric} is absent")
        elif kind == "min" and value < bound:
            violations.append(f"{key}: {value:.6f} < {bound}")
        elif kind == "max" and value > bound:
            violations.append(f"{key}: {value:.6f} > {bound}")
    return violations


def cmd_quantize(args) -> int:
    store = load_weights(_require(args.weights, "weights").read_bytes())
    converted = quantize(store, args.target)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(save_weights(converted))
    print(
        f"{args.weights} ({store.payload_bytes()} payload bytes) -> "
        f"{out} ({converted.payload_bytes()} payload bytes)",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    manifest, reference, blacklist = _eval_parts(args)
    crp_model = _load_crp(str(_require(args.weights, "weights")))
    report = evaluation.bench_throughput(
        manifest,
        crp_model,
        reference,
        blacklist,
        warmup=args.warmup,
        iterations=args.iterations,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bench.json", "w", encoding="utf-8") as fh:
        json.dump(dataclasses.asdict(report), fh, indent=1)
        fh.write("\n")
    print(
        f"samples/s={report.samples_per_s:.2f} p50={report.p50_s * 1e3:.1f}ms "
        f"p95={report.p95_s * 1e3:.1f}ms",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_gen_fixtures(args) -> int:
    cfg = fixtures.FixtureConfig(
        out_dir=Path(args.out),
        pages=args.pages,
        seed=args.seed,
        variant=args.variant,
        fps=args.fps,
        features=args.features,
    )
    paths = fixtures.generate_corpus(cfg)
    print(f"wrote {args.pages} pages under {paths.root}", file=sys.stderr)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which this CLI reserves for
    # phishing verdicts; route usage errors to the operational exit code.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phishguard", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="analyze a single screenshot")
    p.add_argument("--image", required=True)
    p.add_argument("--scene", required=True, help="SceneSpec JSON fixture")
    p.add_argument("--roi", help="x,y,width,height in frame pixels")
    p.add_argument("--scroll", help="dx,dy scroll offset")
    p.add_argument("--url")
    p.add_argument("--weights", required=True, help="crp head PGWT file")
    p.add_argument("--brands", required=True)
    p.add_argument("--blacklist")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-scale", type=float, default=0.02)
    p.add_argument("--rect-jitter", type=float, default=0.0)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("watch", help="replay a frame stream under the governor")
    p.add_argument("--stream", required=True, help="replay directory with frames.jsonl")
    p.add_argument("--weights", required=True)
    p.add_argument("--brands", required=True)
    p.add_argument("--blacklist")
    p.add_argument("--interval", type=float, default=1.0)
    p.add_argument("--budget", type=float, default=0.25)
    p.set_defaults(fn=cmd_watch)

    p = sub.add_parser("evaluate", help="run the metric suite over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--brands")
    p.add_argument("--blacklist")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--thresholds", help="JSON file of metric bounds, e.g. precision_min")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("quantize", help="convert a weight file between f32 and f16")
    p.add_argument("--weights", required=True)
    p.add_argument("--target", choices=("f16", "f32"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_quantize)

    p = sub.add_parser("bench", help="throughput and latency of the analyze path")
    p.add_argument("--manifest", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--brands")
    p.add_argument("--blacklist")
    p.add_argument("--out", required=True)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--iterations", type=int, default=1)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("gen-fixtures", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--pages", type=int, default=1000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--variant", choices=("separable", "adversarial"), default="separable")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--features", action="store_true", help="also dump features.pgwt")
    p.set_defaults(fn=cmd_gen_fixtures)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse --help or usage error
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except PhishguardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
