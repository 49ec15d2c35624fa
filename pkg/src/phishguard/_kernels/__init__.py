"""Hot-loop kernels with a numba fast path and a pure-numpy fallback.

Backend selection:
  * env ``PHISHGUARD_KERNELS=numba``  -- require the jitted path,
  * env ``PHISHGUARD_KERNELS=numpy``  -- force the fallback,
  * unset / ``auto``                  -- numba when importable, numpy otherwise.

``benchmarks/kernel_bench.py`` times the two paths against each other.
"""

import logging
import os

from . import numpy_impl

log = logging.getLogger(__name__)

ENV_VAR = "PHISHGUARD_KERNELS"

_impl = numpy_impl
_active = "numpy"


def use(name: str) -> str:
    """Switch the kernel backend at runtime; returns the active backend name."""
    global _impl, _active
    if name in ("auto", ""):
        try:
            from . import numba_impl
        except ImportError:
            _impl, _active = numpy_impl, "numpy"
        else:
            _impl, _active = numba_impl, "numba"
    elif name == "numba":
        from . import numba_impl

        _impl, _active = numba_impl, "numba"
    elif name == "numpy":
        _impl, _active = numpy_impl, "numpy"
    else:
        raise ValueError(f"unknown kernel backend {name!r}; use numba, numpy or auto")
    log.debug("kernel backend: %s", _active)
    return _active


def active() -> str:
    return _active


def iou_matrix(a, b):
    return _impl.iou_matrix(a, b)


def nms_keep(rects, scores, classes, iou_threshold, score_threshold, class_aware):
    return _impl.nms_keep(rects, scores, classes, iou_threshold, score_threshold, class_aware)


def resize_bilinear(img, out_h, out_w):
    return _impl.resize_bilinear(img, out_h, out_w)


use(os.environ.get(ENV_VAR, "auto"))
