"""Shared test helpers: independent oracles and fixture builders.

The oracles deliberately re-derive everything with plain Python loops and
float arithmetic so they stay independent of the library paths they check.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from phishguard.geometry import DetectionBox, ElementClass, NmsConfig, Rect

FIXTURE_DIR = Path(__file__).parent / "fixtures"


# -- brute-force suppression oracle -----------------------------------------


def oracle_iou(a, b) -> float:
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union > 0 else 0.0


def oracle_nms(boxes: list[DetectionBox], cfg: NmsConfig) -> list[DetectionBox]:
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i].score, i))
    kept: list[int] = []
    for i in order:
        if not boxes[i].score > cfg.score_threshold:
            continue
        suppressed = False
        for j in kept:
            if cfg.class_aware and boxes[i].class_id != boxes[j].class_id:
                continue
            if oracle_iou(boxes[i].rect.as_tuple(), boxes[j].rect.as_tuple()) > cfg.iou_threshold:
                suppressed = True
                break
        if not suppressed:
            kept.append(i)
    return [boxes[i] for i in kept]


def random_boxes(rng: np.random.Generator, n: int, classes: int = 5) -> list[DetectionBox]:
    boxes = []
    for _ in range(n):
        x0, y0 = rng.uniform(0, 0.8, 2)
        w, h = rng.uniform(0.02, 0.35, 2)
        boxes.append(
            DetectionBox(
                Rect(x0, y0, min(x0 + w, 1.0), min(y0 + h, 1.0)),
                ElementClass(int(rng.integers(0, classes))),
                float(rng.uniform(0, 1)),
            )
        )
    return boxes


# -- naive matrix-multiply oracle --------------------------------------------


def oracle_mlp(dims: list[int], weights: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
    """Triple-loop float64 forward pass; relu on all but the last layer."""
    act = [[float(v) for v in row] for row in x]
    for li in range(len(dims) - 1):
        w = weights[f"layer{li}.w"]
        b = weights[f"layer{li}.b"]
        nxt = []
        for row in act:
            out_row = []
            for j in range(dims[li + 1]):
                s = float(b[j])
                for k in range(dims[li]):
                    s += row[k] * float(w[k][j])
                if li < len(dims) - 2 and s < 0.0:
                    s = 0.0
                out_row.append(s)
            nxt.append(out_row)
        act = nxt
    return np.array(act)


# -- naive per-pixel bilinear oracle ------------------------------------------


def oracle_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    h, w, c = img.shape
    out = np.zeros((out_h, out_w, c))
    for oy in range(out_h):
        ys = (oy + 0.5) * h / out_h - 0.5
        y0 = math.floor(ys)
        ty = ys - y0
        y0c = min(max(y0, 0), h - 1)
        y1c = min(max(y0 + 1, 0), h - 1)
        for ox in range(out_w):
            xs = (ox + 0.5) * w / out_w - 0.5
            x0 = math.floor(xs)
            tx = xs - x0
            x0c = min(max(x0, 0), w - 1)
            x1c = min(max(x0 + 1, 0), w - 1)
            for ch in range(c):
                top = (1 - tx) * float(img[y0c, x0c, ch]) + tx * float(img[y0c, x1c, ch])
                bot = (1 - tx) * float(img[y1c, x0c, ch]) + tx * float(img[y1c, x1c, ch])
                out[oy, ox, ch] = (1 - ty) * top + ty * bot
    return out


# -- exhaustive PR-curve oracle -----------------------------------------------


def oracle_average_precision(predictions, ground_truth, iou_threshold, class_id=None):
    """Greedy max-IoU matching plus a literal 101-point precision sweep."""
    pool = []
    for img_i, boxes in enumerate(predictions):
        for box in boxes:
            if class_id is not None and box.class_id is not class_id:
                continue
            pool.append((box.score, img_i, box))
    pool.sort(key=lambda t: -t[0])
    n_gt = sum(
        1
        for gts in ground_truth
        for _, cls in gts
        if class_id is None or cls is class_id
    )
    if n_gt == 0:
        return None
    used = [[False] * len(gts) for gts in ground_truth]
    flags = []
    for score, img_i, box in pool:
        best, best_j = 0.0, -1
        for j, (rect, cls) in enumerate(ground_truth[img_i]):
            if used[img_i][j] or cls is not box.class_id:
                continue
            if class_id is not None and cls is not class_id:
                continue
            v = oracle_iou(box.rect.as_tuple(), rect.as_tuple())
            if v >= iou_threshold and v > best:
                best, best_j = v, j
        if best_j >= 0:
            used[img_i][best_j] = True
            flags.append(True)
        else:
            flags.append(False)
    precisions, recalls = [], []
    tp = fp = 0
    for flag in flags:
        if flag:
            tp += 1
        else:
            fp += 1
        precisions.append(tp / (tp + fp))
        recalls.append(tp / n_gt)
    total = 0.0
    for i in range(101):
        r = i / 100.0
        best = 0.0
        for p, rec in zip(precisions, recalls):
            if rec >= r - 1e-12 and p > best:
                best = p
        total += best
    return total / 101.0


# -- model builders ------------------------------------------------------------


def handcrafted_crp_store(gain: float = 0.2, bias: float = 10.0):
    """A linear head that reads the credential channel; separable by design."""
    from phishguard.tensors import Tensor, WeightStore

    n, h = 100, 256
    w = np.zeros((n * h, 2), dtype=np.float32)
    w[11::h, 1] = gain
    w[11::h, 0] = -gain
    b = np.array([bias, -bias], dtype=np.float32)
    return WeightStore([("layer0.w", Tensor(w)), ("layer0.b", Tensor(b))])


@pytest.fixture(scope="session")
def crp_store():
    return handcrafted_crp_store()


@pytest.fixture(scope="session")
def crp_model(crp_store):
    from phishguard.classification import CrpModel

    return CrpModel.from_store(crp_store)


# acceptance-criterion lines accumulate here; shown in the run summary so the
# canonical `pytest -v` log always carries one line per criterion
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)
