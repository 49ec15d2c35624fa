"""The numba fast path and the numpy fallback must agree bit-for-bit."""

import numpy as np
import pytest

from phishguard._kernels import numba_impl, numpy_impl
from phishguard import _kernels


def _random_workload(seed, n=60):
    rng = np.random.default_rng(seed)
    x0y0 = rng.uniform(0, 0.8, (n, 2))
    wh = rng.uniform(0.01, 0.4, (n, 2))
    rects = np.concatenate([x0y0, np.minimum(x0y0 + wh, 1.0)], axis=1)
    scores = rng.uniform(0, 1, n)
    classes = rng.integers(0, 5, n)
    return rects, scores, classes


@pytest.mark.parametrize("seed", range(8))
def test_iou_matrix_backends_identical(seed):
    rects, _, _ = _random_workload(seed)
    a, b = rects[:30], rects[30:]
    assert np.array_equal(numpy_impl.iou_matrix(a, b), numba_impl.iou_matrix(a, b))


@pytest.mark.parametrize("seed", range(8))
def test_nms_backends_identical(seed):
    rects, scores, classes = _random_workload(seed)
    for class_aware in (True, False):
        keep_np = numpy_impl.nms_keep(rects, scores, classes, 0.5, 0.3, class_aware)
        keep_nb = numba_impl.nms_keep(rects, scores, classes, 0.5, 0.3, class_aware)
        assert np.array_equal(keep_np, keep_nb)


@pytest.mark.parametrize("shape,out", [((64, 48), (32, 24)), ((30, 41), (77, 53))])
def test_resize_backends_identical(shape, out):
    rng = np.random.default_rng(11)
    img = rng.uniform(0, 255, (*shape, 3))
    a = numpy_impl.resize_bilinear(img, *out)
    b = numba_impl.resize_bilinear(img, *out)
    assert np.array_equal(a, b)


def test_backend_switching():
    before = _kernels.active()
    try:
        assert _kernels.use("numpy") == "numpy"
        assert _kernels.active() == "numpy"
        assert _kernels.use("numba") == "numba"
        assert _kernels.use("auto") in ("numba", "numpy")
        with pytest.raises(ValueError):
            _kernels.use("cuda")
    finally:
        _kernels.use(before)
