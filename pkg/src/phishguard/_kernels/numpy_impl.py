"""Pure-numpy implementations of the hot kernels.

These are the fallback path; the numba twin in ``numba_impl`` performs the
same arithmetic in the same order so both backends produce identical bits.
"""

import numpy as np


def pair_iou(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1):
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two (N, 4) / (M, 4) corner-format box arrays."""
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    inter[(iw <= 0.0) | (ih <= 0.0)] = 0.0
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def nms_keep(
    rects: np.ndarray,
    scores: np.ndarray,
    classes: np.ndarray,
    iou_threshold: float,
    score_threshold: float,
    class_aware: bool,
) -> np.ndarray:
    """Greedy suppression; kept input indices in score order, ties by index."""
    n = rects.shape[0]
    order = np.argsort(-scores, kind="stable")
    kept = np.empty(n, dtype=np.int64)
    n_kept = 0
    for oi in range(n):
        i = order[oi]
        if not scores[i] > score_threshold:
            continue
        ok = True
        for ki in range(n_kept):
            j = kept[ki]
            if class_aware and classes[i] != classes[j]:
                continue
            v = pair_iou(
                rects[i, 0], rects[i, 1], rects[i, 2], rects[i, 3],
                rects[j, 0], rects[j, 1], rects[j, 2], rects[j, 3],
            )
            if v > iou_threshold:
                ok = False
                break
        if ok:
            kept[n_kept] = i
            n_kept += 1
    return kept[:n_kept].copy()


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample of an (H, W, C) float64 image, half-pixel centers."""
    h, w = img.shape[0], img.shape[1]
    sy = h / out_h
    sx = w / out_w
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * sy - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * sx - 0.5
    y0f = np.floor(ys)
    x0f = np.floor(xs)
    ty = ys - y0f
    tx = xs - x0f
    y0 = np.clip(y0f.astype(np.int64), 0, h - 1)
    y1 = np.clip(y0f.astype(np.int64) + 1, 0, h - 1)
    x0 = np.clip(x0f.astype(np.int64), 0, w - 1)
    x1 = np.clip(x0f.astype(np.int64) + 1, 0, w - 1)

    a00 = img[y0[:, None], x0[None, :], :]
    a01 = img[y0[:, None], x1[None, :], :]
    a10 = img[y1[:, None], x0[None, :], :]
    a11 = img[y1[:, None], x1[None, :], :]
    txc = tx[None, :, None]
    tyc = ty[:, None, None]
    top = a00 + txc * (a01 - a00)
    bot = a10 + txc * (a11 - a10)
    return top + tyc * (bot - top)
