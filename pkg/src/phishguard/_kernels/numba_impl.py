"""Numba-jitted twins of the numpy kernels.

Loops mirror ``numpy_impl`` expression-for-expression so the two backends
stay bit-identical; only the execution strategy differs.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _pair_iou(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1):
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@njit(cache=True)
def iou_matrix(a, b):
    n = a.shape[0]
    m = b.shape[0]
    out = np.zeros((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            out[i, j] = _pair_iou(
                a[i, 0], a[i, 1], a[i, 2], a[i, 3],
                b[j, 0], b[j, 1], b[j, 2], b[j, 3],
            )
    return out


@njit(cache=True)
def nms_keep(rects, scores, classes, iou_threshold, score_threshold, class_aware):
    n = rects.shape[0]
    order = np.argsort(-scores, kind="mergesort")
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
            v = _pair_iou(
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


@njit(cache=True)
def resize_bilinear(img, out_h, out_w):
    h = img.shape[0]
    w = img.shape[1]
    c = img.shape[2]
    sy = h / out_h
    sx = w / out_w
    out = np.empty((out_h, out_w, c), dtype=np.float64)
    for oy in range(out_h):
        ys = (oy + 0.5) * sy - 0.5
        y0f = np.floor(ys)
        ty = ys - y0f
        y0 = min(max(int(y0f), 0), h - 1)
        y1 = min(max(int(y0f) + 1, 0), h - 1)
        for ox in range(out_w):
            xs = (ox + 0.5) * sx - 0.5
            x0f = np.floor(xs)
            tx = xs - x0f
            x0 = min(max(int(x0f), 0), w - 1)
            x1 = min(max(int(x0f) + 1, 0), w - 1)
            for ch in range(c):
                a00 = img[y0, x0, ch]
                a01 = img[y0, x1, ch]
                a10 = img[y1, x0, ch]
                a11 = img[y1, x1, ch]
                top = a00 + tx * (a01 - a00)
                bot = a10 + tx * (a11 - a10)
                out[oy, ox, ch] = top + ty * (bot - top)
    return out
